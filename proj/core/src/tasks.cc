#include "facegest/tasks.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "facegest/errors.h"

namespace facegest::tasks {

namespace {

struct HoldUpdate {
  HoldState state;
  std::optional<TrialOutcome> outcome;
};

HoldUpdate step_hold(const HoldState& state, bool within, std::int64_t t_ms, std::int64_t hold_ms,
                     std::size_t trial_count) {
  HoldUpdate out{state, std::nullopt};
  if (state.finished) return out;
  if (!within) {
    out.state.hold_start.reset();
    return out;
  }
  if (!out.state.hold_start) out.state.hold_start = t_ms;
  if (t_ms - *out.state.hold_start >= hold_ms) {
    out.outcome = TrialOutcome{state.trial, true, t_ms, *out.state.hold_start};
    out.state.hold_start.reset();
    ++out.state.trial;
    out.state.finished = out.state.trial >= trial_count;
  }
  return out;
}

}  // namespace

void CircleTaskConfig::validate() const {
  if (!(gain > 0.0)) throw DataError("circle gain must be > 0");
  if (!(tolerance > 0.0)) throw DataError("circle tolerance must be > 0");
  if (hold_ms < 0) throw DataError("hold_ms must be >= 0");
  if (target_radii.empty()) throw DataError("circle task needs at least one target radius");
}

void EllipseTaskConfig::validate() const {
  if (!(gain_w > 0.0) || !(gain_h > 0.0)) throw DataError("ellipse gains must be > 0");
  if (!(tolerance > 0.0)) throw DataError("ellipse tolerance must be > 0");
  if (hold_ms < 0) throw DataError("hold_ms must be >= 0");
  if (targets.empty()) throw DataError("ellipse task needs at least one target");
}

void to_json(nlohmann::json& j, const CircleTaskConfig& c) {
  j = {{"gain", c.gain},
       {"target_radii", c.target_radii},
       {"tolerance", c.tolerance},
       {"hold_ms", c.hold_ms},
       {"radius_from_sqrt_area", c.radius_from_sqrt_area}};
}

void from_json(const nlohmann::json& j, CircleTaskConfig& c) {
  CircleTaskConfig d;
  c.gain = j.value("gain", d.gain);
  if (j.contains("target_radii")) {
    c.target_radii = j["target_radii"].get<std::vector<double>>();
  } else if (j.contains("target_radius")) {
    c.target_radii = {j["target_radius"].get<double>()};
  }
  c.tolerance = j.value("tolerance", d.tolerance);
  c.hold_ms = j.value("hold_ms", d.hold_ms);
  c.radius_from_sqrt_area = j.value("radius_from_sqrt_area", d.radius_from_sqrt_area);
  c.validate();
}

void to_json(nlohmann::json& j, const EllipseTaskConfig& c) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& [w, h] : c.targets) targets.push_back({w, h});
  j = {{"gain_w", c.gain_w}, {"gain_h", c.gain_h}, {"targets", targets}, {"tolerance", c.tolerance}, {"hold_ms", c.hold_ms}};
}

void from_json(const nlohmann::json& j, EllipseTaskConfig& c) {
  EllipseTaskConfig d;
  c.gain_w = j.value("gain_w", d.gain_w);
  c.gain_h = j.value("gain_h", d.gain_h);
  if (j.contains("targets")) {
    c.targets.clear();
    for (const auto& t : j["targets"]) c.targets.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
  }
  c.tolerance = j.value("tolerance", d.tolerance);
  c.hold_ms = j.value("hold_ms", d.hold_ms);
  c.validate();
}

void to_json(nlohmann::json& j, const TrialOutcome& o) {
  j = {{"trial", o.trial}, {"success", o.success}, {"t_ms", o.t_ms}, {"hold_start_ms", o.hold_start_ms}};
}

double circle_radius(const CircleTaskConfig& config, const mouthseg::MouthShape& sample) {
  const double area = static_cast<double>(sample.area);
  return config.gain * (config.radius_from_sqrt_area ? std::sqrt(area) : area);
}

CircleStep circle_step(const CircleTaskConfig& config, const mouthseg::MouthShape& sample, std::int64_t t_ms,
                       const HoldState& state) {
  CircleStep out;
  out.radius = circle_radius(config, sample);
  const bool within = !state.finished &&
                      std::abs(out.radius - config.target_radii[std::min(state.trial, config.target_radii.size() - 1)]) <=
                          config.tolerance;
  auto u = step_hold(state, within, t_ms, config.hold_ms, config.target_radii.size());
  out.state = u.state;
  out.outcome = u.outcome;
  return out;
}

EllipseStep ellipse_step(const EllipseTaskConfig& config, const mouthseg::MouthShape& sample, std::int64_t t_ms,
                         const HoldState& state) {
  EllipseStep out;
  out.width = config.gain_w * sample.bbox_w;
  out.height = config.gain_h * sample.bbox_h;
  const auto& target = config.targets[std::min(state.trial, config.targets.size() - 1)];
  const bool within = !state.finished && std::abs(out.width - target.first) <= config.tolerance &&
                      std::abs(out.height - target.second) <= config.tolerance;
  auto u = step_hold(state, within, t_ms, config.hold_ms, config.targets.size());
  out.state = u.state;
  out.outcome = u.outcome;
  return out;
}

void TappingTaskConfig::validate() const {
  if (n_targets < 3 || n_targets % 2 == 0) throw DataError("tapping task needs an odd target count >= 3");
  if (!(distance > width && width > 0.0)) throw DataError("tapping task needs D > W > 0");
  if (timeout_ms <= 0) throw DataError("tapping timeout must be > 0");
}

void to_json(nlohmann::json& j, const TappingTaskConfig& c) {
  j = {{"n_targets", c.n_targets}, {"D", c.distance}, {"W", c.width}, {"timeout_ms", c.timeout_ms}, {"center", c.center}};
}

void from_json(const nlohmann::json& j, TappingTaskConfig& c) {
  TappingTaskConfig d;
  c.n_targets = j.value("n_targets", d.n_targets);
  c.distance = j.value("D", d.distance);
  c.width = j.value("W", d.width);
  c.timeout_ms = j.value("timeout_ms", d.timeout_ms);
  c.center = j.contains("center") ? j["center"].get<Point2>() : d.center;
  c.validate();
}

std::vector<int> tapping_sequence(int n) {
  if (n < 3 || n % 2 == 0) throw DomainError("tapping_sequence needs an odd n >= 3, got " + std::to_string(n));
  std::vector<int> order;
  order.reserve(n);
  int i = 0;
  for (int k = 0; k < n; ++k) {
    order.push_back(i);
    i = (i + (n + 1) / 2) % n;
  }
  return order;
}

Point2 target_position(const TappingTaskConfig& config, int index) {
  const double angle = 2.0 * kPi * index / config.n_targets;
  const double r = config.distance / 2.0;
  return {config.center.x + r * std::cos(angle), config.center.y + r * std::sin(angle)};
}

void to_json(nlohmann::json& j, const FittsRecord& r) {
  j = {{"D", r.distance}, {"W", r.width}, {"MT", r.movement_time}, {"hit", r.hit}};
}

void from_json(const nlohmann::json& j, FittsRecord& r) {
  r.distance = j.at("D").get<double>();
  r.width = j.at("W").get<double>();
  r.movement_time = j.at("MT").get<double>();
  r.hit = j.value("hit", true);
  if (!(r.movement_time > 0.0)) throw DataError("Fitts record MT must be > 0");
}

TappingStep tapping_step(const TappingTaskConfig& config, Point2 cursor, bool selected, std::int64_t t_ms,
                         const TappingState& state) {
  const auto order = tapping_sequence(config.n_targets);
  TappingStep out;
  out.state = state;
  out.current_target = order[std::min<std::size_t>(state.step, order.size() - 1)];
  if (state.finished) return out;

  if (!state.step_start_ms) {
    // The start target only arms the clock.
    if (selected) {
      out.state.step_start_ms = t_ms;
      out.state.step = 1;
    }
  } else {
    const std::int64_t elapsed = t_ms - *state.step_start_ms;
    const bool timed_out = elapsed >= config.timeout_ms;
    if (selected || timed_out) {
      const Point2 target = target_position(config, out.current_target);
      FittsRecord rec;
      rec.distance = config.distance;
      rec.width = config.width;
      rec.movement_time = std::max<std::int64_t>(elapsed, 1) / 1000.0;
      rec.hit = selected && !timed_out && distance(cursor, target) <= config.width / 2.0;
      out.record = rec;
      out.state.step_start_ms = t_ms;
      ++out.state.step;
      // One full lap plus the return to the start target.
      if (out.state.step > order.size()) out.state.finished = true;
    }
  }
  out.current_target = order[out.state.step % order.size()];
  return out;
}

double fitts_id(double d, double w) {
  if (!(d > 0.0) || !(w > 0.0)) throw DomainError("Fitts ID needs D > 0 and W > 0");
  return std::log2(d / w + 1.0);
}

void to_json(nlohmann::json& j, const ThroughputReport& r) {
  nlohmann::json conditions = nlohmann::json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back({{"D", c.distance},
                          {"W", c.width},
                          {"ID", c.id},
                          {"mean_MT", c.mean_mt},
                          {"throughput", c.throughput},
                          {"hits", c.hits},
                          {"misses", c.misses}});
  }
  j = {{"ids", r.ids},
       {"mean_MT", r.mean_mt},
       {"throughput", r.throughput},
       {"completion", r.completion},
       {"conditions", conditions}};
}

ThroughputReport throughput(const std::vector<FittsRecord>& records) {
  ThroughputReport report;
  std::map<std::pair<double, double>, ConditionThroughput> groups;
  double mt_sum = 0.0;
  int hits = 0;
  for (const auto& r : records) {
    const double id = fitts_id(r.distance, r.width);
    report.ids.push_back(id);
    report.completion.push_back(r.hit);
    auto& g = groups[{r.distance, r.width}];
    g.distance = r.distance;
    g.width = r.width;
    g.id = id;
    if (r.hit) {
      ++g.hits;
      g.mean_mt += r.movement_time;  // sum for now
      mt_sum += r.movement_time;
      ++hits;
    } else {
      ++g.misses;
    }
  }
  if (hits == 0) throw DomainError("throughput needs at least one hit");
  report.mean_mt = mt_sum / hits;

  double tp_sum = 0.0;
  int counted = 0;
  for (auto& [key, g] : groups) {
    if (g.hits > 0) {
      g.mean_mt /= g.hits;
      g.throughput = g.id / g.mean_mt;
      tp_sum += g.throughput;
      ++counted;
    }
    report.conditions.push_back(g);
  }
  report.throughput = tp_sum / counted;
  return report;
}

void to_json(nlohmann::json& j, const HoldAnalysis& h) {
  j = {{"accuracy", h.accuracy}, {"precision", h.precision}, {"snr_db", h.snr_db}};
}

HoldAnalysis analyze_hold(const std::vector<double>& series, double target) {
  if (!(target > 0.0)) throw DomainError("hold analysis needs a positive target");
  if (series.size() < 2) throw DomainError("hold analysis needs at least two samples");
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double var = 0.0;
  double sq_err = 0.0;
  for (double x : series) {
    var += (x - mean) * (x - mean);
    sq_err += (x - target) * (x - target);
  }
  HoldAnalysis h;
  h.accuracy = std::abs(mean - target);
  h.precision = std::sqrt(var / (n - 1.0));
  const double rms = std::sqrt(sq_err / n);
  h.snr_db = rms < target * 1e-6 ? kSnrCapDb : std::min(kSnrCapDb, 20.0 * std::log10(target / rms));
  return h;
}

void to_json(nlohmann::json& j, const GainSweepRow& r) {
  j = {{"gain", r.gain},
       {"trial", r.trial},
       {"target", r.target},
       {"success", r.success},
       {"success_t_ms", r.success_t_ms ? nlohmann::json(*r.success_t_ms) : nlohmann::json(nullptr)},
       {"accuracy", r.hold.accuracy},
       {"precision", r.hold.precision},
       {"snr_db", r.hold.snr_db}};
}

std::vector<GainSweepRow> gain_sweep(const CircleTaskConfig& config, const std::vector<std::vector<TimedShape>>& streams,
                                     const std::vector<double>& gains) {
  std::vector<GainSweepRow> rows;
  if (gains.empty() || streams.empty()) return rows;
  for (double gain : gains) {
    for (std::size_t trial = 0; trial < config.target_radii.size(); ++trial) {
      const auto& stream = streams.size() == 1 ? streams.front() : streams.at(trial);
      CircleTaskConfig single = config;
      single.gain = gain;
      single.target_radii = {config.target_radii[trial]};

      GainSweepRow row;
      row.gain = gain;
      row.trial = trial;
      row.target = config.target_radii[trial];
      HoldState state;
      std::vector<double> window;
      const std::int64_t end_t = stream.empty() ? 0 : stream.back().t_ms;
      for (const auto& s : stream) {
        auto step = circle_step(single, s.shape, s.t_ms, state);
        state = step.state;
        if (step.outcome && !row.success) {
          row.success = true;
          row.success_t_ms = step.outcome->t_ms;
        }
        if (end_t - s.t_ms <= config.hold_ms) window.push_back(step.radius);
      }
      if (window.size() >= 2) row.hold = analyze_hold(window, row.target);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace facegest::tasks

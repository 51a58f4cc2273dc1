#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/geometry.h"
#include "facegest/mouthseg.h"

namespace facegest::tasks {

// ---------------------------------------------------------------------------
// Circle and ellipse control: a mouth feature drives a figure on screen and the
// trial succeeds once the figure stays within tolerance of the target for hold_ms.

struct CircleTaskConfig {
  double gain = 1.0;
  std::vector<double> target_radii = {50.0};
  double tolerance = 2.0;
  std::int64_t hold_ms = 1000;
  // radius = gain * sqrt(area) by default; radius = gain * area when false.
  bool radius_from_sqrt_area = true;

  void validate() const;
};

struct EllipseTaskConfig {
  double gain_w = 1.0;
  double gain_h = 1.0;
  std::vector<std::pair<double, double>> targets = {{40.0, 20.0}};
  double tolerance = 2.0;
  std::int64_t hold_ms = 3000;

  void validate() const;
};

void to_json(nlohmann::json& j, const CircleTaskConfig& c);
void from_json(const nlohmann::json& j, CircleTaskConfig& c);
void to_json(nlohmann::json& j, const EllipseTaskConfig& c);
void from_json(const nlohmann::json& j, EllipseTaskConfig& c);

struct TrialOutcome {
  std::size_t trial = 0;
  bool success = true;
  std::int64_t t_ms = 0;
  std::int64_t hold_start_ms = 0;
};

void to_json(nlohmann::json& j, const TrialOutcome& o);

// Shared hold automaton: tracks the start of the current in-tolerance run and
// advances to the next trial on success.
struct HoldState {
  std::size_t trial = 0;
  std::optional<std::int64_t> hold_start;
  bool finished = false;

  friend bool operator==(const HoldState&, const HoldState&) = default;
};

struct CircleStep {
  double radius = 0.0;
  HoldState state;
  std::optional<TrialOutcome> outcome;
};

struct EllipseStep {
  double width = 0.0;
  double height = 0.0;
  HoldState state;
  std::optional<TrialOutcome> outcome;
};

double circle_radius(const CircleTaskConfig& config, const mouthseg::MouthShape& sample);

CircleStep circle_step(const CircleTaskConfig& config, const mouthseg::MouthShape& sample, std::int64_t t_ms,
                       const HoldState& state);
EllipseStep ellipse_step(const EllipseTaskConfig& config, const mouthseg::MouthShape& sample, std::int64_t t_ms,
                         const HoldState& state);

// ---------------------------------------------------------------------------
// ISO multidirectional tapping.

struct TappingTaskConfig {
  int n_targets = 9;
  double distance = 512.0;  // D: circle diameter, px
  double width = 32.0;      // W: target diameter, px
  std::int64_t timeout_ms = 5000;
  Point2 center{511.5, 383.5};

  void validate() const;
};

void to_json(nlohmann::json& j, const TappingTaskConfig& c);
void from_json(const nlohmann::json& j, TappingTaskConfig& c);

// Cross-circle visiting order: i_{k+1} = (i_k + (n+1)/2) mod n from 0.
// Throws DomainError for even n or n < 3.
std::vector<int> tapping_sequence(int n_targets);

Point2 target_position(const TappingTaskConfig& config, int index);

struct FittsRecord {
  double distance = 0.0;  // D, px
  double width = 0.0;     // W, px
  double movement_time = 0.0;  // MT, seconds
  bool hit = false;
};

void to_json(nlohmann::json& j, const FittsRecord& r);
void from_json(const nlohmann::json& j, FittsRecord& r);

struct TappingState {
  std::size_t step = 0;  // index into the visiting order; step 0 is the start target
  std::optional<std::int64_t> step_start_ms;
  bool finished = false;
};

struct TappingStep {
  TappingState state;
  std::optional<FittsRecord> record;
  int current_target = 0;
};

// Advances on a selection (click) or on timeout. The first selection only
// starts the clock; every later selection or timeout yields one FittsRecord.
TappingStep tapping_step(const TappingTaskConfig& config, Point2 cursor, bool selected, std::int64_t t_ms,
                         const TappingState& state);

// Shannon index of difficulty log2(D/W + 1). Throws DomainError unless D, W > 0.
double fitts_id(double distance, double width);

struct ConditionThroughput {
  double distance = 0.0;
  double width = 0.0;
  double id = 0.0;
  double mean_mt = 0.0;
  double throughput = 0.0;
  int hits = 0;
  int misses = 0;
};

struct ThroughputReport {
  std::vector<double> ids;  // one per record
  double mean_mt = 0.0;     // over hits
  double throughput = 0.0;  // mean of per-condition ID / mean MT
  std::vector<bool> completion;
  std::vector<ConditionThroughput> conditions;
};

void to_json(nlohmann::json& j, const ThroughputReport& r);

// Throws DomainError when no record is a hit.
ThroughputReport throughput(const std::vector<FittsRecord>& records);

// ---------------------------------------------------------------------------
// Hold analysis.

inline constexpr double kSnrCapDb = 120.0;

struct HoldAnalysis {
  double accuracy = 0.0;   // |mean - target|
  double precision = 0.0;  // sample standard deviation
  double snr_db = 0.0;     // 20 log10(target / rms error), capped
};

void to_json(nlohmann::json& j, const HoldAnalysis& h);

// Throws DomainError for target <= 0 or fewer than two samples.
HoldAnalysis analyze_hold(const std::vector<double>& series, double target);

struct TimedShape {
  std::int64_t t_ms = 0;
  mouthseg::MouthShape shape;
};

struct GainSweepRow {
  double gain = 0.0;
  std::size_t trial = 0;
  double target = 0.0;
  bool success = false;
  std::optional<std::int64_t> success_t_ms;
  HoldAnalysis hold;
};

void to_json(nlohmann::json& j, const GainSweepRow& r);

// Replays the circle task at each gain. |streams| holds one stream per trial, or
// a single stream reused for every trial. The hold window analysed is the final
// hold_ms of the stream, so every gain sees exactly the same samples.
std::vector<GainSweepRow> gain_sweep(const CircleTaskConfig& config, const std::vector<std::vector<TimedShape>>& streams,
                                     const std::vector<double>& gains);

}  // namespace facegest::tasks

#include "facegest/gateway/session.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "facegest/errors.h"
#include "facegest/gateway/base64.h"
#include "facegest/gateway/logging.h"

namespace facegest::gateway {

using nlohmann::json;

std::string to_string(TrackerKind k) {
  switch (k) {
    case TrackerKind::NF: return "nf";
    case TrackerKind::NP: return "np";
    case TrackerKind::FixedRoi: return "fixed_roi";
  }
  return "?";
}

TrackerKind tracker_kind_from_string(const std::string& s) {
  if (s == "nf") return TrackerKind::NF;
  if (s == "np") return TrackerKind::NP;
  if (s == "fixed_roi" || s == "fixed") return TrackerKind::FixedRoi;
  throw DataError("unknown tracker \"" + s + "\" (expected nf, np or fixed_roi)");
}

std::string to_string(Application a) {
  switch (a) {
    case Application::None: return "none";
    case Application::Circle: return "circle";
    case Application::Ellipse: return "ellipse";
    case Application::Tapping: return "tapping";
    case Application::TextJp: return "text_jp";
    case Application::TextRoman: return "text_roman";
  }
  return "?";
}

Application application_from_string(const std::string& s) {
  for (auto a : {Application::None, Application::Circle, Application::Ellipse, Application::Tapping,
                 Application::TextJp, Application::TextRoman}) {
    if (to_string(a) == s) return a;
  }
  throw DataError("unknown application \"" + s + "\"");
}

void SessionConfig::validate() const {
  tracker_config.validate();
  segmentation.validate();
  for (const auto& m : mappings) m.validate();
  if (tracker == TrackerKind::NP && !eyes) throw DataError("np tracker needs initial eye positions (\"eyes\")");
  if (application == Application::Tapping && tracker == TrackerKind::FixedRoi)
    throw DataError("tapping needs a cursor: use the nf or np tracker");
  if (application != Application::None && calibration.kind == CalibrationSource::Kind::None)
    throw DataError("application \"" + to_string(application) + "\" needs a calibration source");
  if (!(click.t_close > 0.0 && click.t_close < click.t_open && click.t_open <= 1.0) || click.min_open_frames < 1)
    throw DataError("click needs 0 < t_close < t_open <= 1 and min_open_frames >= 1");
  if (calibration.kind == CalibrationSource::Kind::LiveWindow && calibration.window_frames < 1)
    throw DataError("live-window calibration needs frames >= 1");
  if (!(cursor_gain > 0.0)) throw DataError("cursor_gain must be > 0");
}

SessionConfig parse_session_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("session config must be a JSON object");
  SessionConfig c;
  try {
    c.tracker = tracker_kind_from_string(j.value("tracker", std::string("fixed_roi")));
    if (j.contains("tracker_config")) c.tracker_config = j["tracker_config"].get<trackers::TrackerConfig>();
    if (j.contains("roi") && !j["roi"].is_null()) c.roi = j["roi"].get<frameio::OrientedRoi>();
    if (j.contains("eyes")) c.eyes = std::make_pair(j["eyes"].at(0).get<Point2>(), j["eyes"].at(1).get<Point2>());
    c.cursor_gain = j.value("cursor_gain", c.cursor_gain);
    if (j.contains("screen")) c.screen = {j["screen"].at(0).get<int>(), j["screen"].at(1).get<int>()};
    if (j.contains("segmentation")) c.segmentation = j["segmentation"].get<mouthseg::SegmentationParams>();
    if (j.contains("mappings")) c.mappings = j["mappings"].get<std::vector<mapping::MappingSpec>>();
    c.application = application_from_string(j.value("application", std::string("none")));
    const json app = j.value("app_config", json::object());
    switch (c.application) {
      case Application::Circle: c.circle = app.get<tasks::CircleTaskConfig>(); break;
      case Application::Ellipse: c.ellipse = app.get<tasks::EllipseTaskConfig>(); break;
      case Application::Tapping: c.tapping = app.get<tasks::TappingTaskConfig>(); break;
      case Application::TextJp: c.layout.n_on_closed_zero = app.value("n_on_closed_zero", true); break;
      default: break;
    }
    if (j.contains("calibration") && !j["calibration"].is_null()) {
      const json& cal = j["calibration"];
      const std::string source = cal.value("source", std::string("inline"));
      if (source == "inline") {
        c.calibration.kind = CalibrationSource::Kind::Inline;
        c.calibration.calibration = cal.get<mapping::Calibration>();
      } else if (source == "file") {
        c.calibration.kind = CalibrationSource::Kind::File;
        c.calibration.path = cal.at("path").get<std::string>();
        std::filesystem::path p = c.calibration.path;
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw DataError("cannot open calibration file " + p.string());
        c.calibration.calibration = json::parse(in).get<mapping::Calibration>();
      } else if (source == "live-window") {
        c.calibration.kind = CalibrationSource::Kind::LiveWindow;
        c.calibration.window_frames = cal.value("frames", c.calibration.window_frames);
      } else {
        throw DataError("unknown calibration source \"" + source + "\"");
      }
    }
    if (j.contains("click")) {
      const json& k = j["click"];
      c.click = {k.value("t_open", c.click.t_open), k.value("t_close", c.click.t_close),
                 k.value("min_open_frames", c.click.min_open_frames)};
    }
    if (j.contains("mouth_thresholds")) {
      const json& t = j["mouth_thresholds"];
      auto& m = c.mouth_thresholds;
      m = {t.value("t_closed", m.t_closed), t.value("t_open", m.t_open), t.value("t_pucker_aspect", m.t_pucker_aspect),
           t.value("hysteresis", m.hysteresis)};
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad session config: ") + e.what());
  }
  c.validate();
  return c;
}

SessionConfig load_session_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config ") + file.string() + ": " + e.what(), e.byte);
  }
  return parse_session_config(j, file.parent_path());
}

json to_json(const SessionConfig& c) {
  json j;
  j["tracker"] = to_string(c.tracker);
  j["tracker_config"] = c.tracker_config;
  if (c.roi) j["roi"] = *c.roi;
  if (c.eyes) j["eyes"] = {c.eyes->first, c.eyes->second};
  j["cursor_gain"] = c.cursor_gain;
  j["screen"] = {c.screen.width, c.screen.height};
  j["segmentation"] = c.segmentation;
  j["mappings"] = c.mappings;
  j["application"] = to_string(c.application);
  switch (c.application) {
    case Application::Circle: j["app_config"] = c.circle; break;
    case Application::Ellipse: j["app_config"] = c.ellipse; break;
    case Application::Tapping: j["app_config"] = c.tapping; break;
    case Application::TextJp: j["app_config"] = {{"n_on_closed_zero", c.layout.n_on_closed_zero}}; break;
    default: break;
  }
  switch (c.calibration.kind) {
    case CalibrationSource::Kind::None: break;
    case CalibrationSource::Kind::Inline:
      j["calibration"] = *c.calibration.calibration;
      j["calibration"]["source"] = "inline";
      break;
    case CalibrationSource::Kind::File:
      j["calibration"] = {{"source", "file"}, {"path", c.calibration.path}};
      break;
    case CalibrationSource::Kind::LiveWindow:
      j["calibration"] = {{"source", "live-window"}, {"frames", c.calibration.window_frames}};
      break;
  }
  j["click"] = {{"t_open", c.click.t_open}, {"t_close", c.click.t_close}, {"min_open_frames", c.click.min_open_frames}};
  const auto& m = c.mouth_thresholds;
  j["mouth_thresholds"] = {{"t_closed", m.t_closed}, {"t_open", m.t_open}, {"t_pucker_aspect", m.t_pucker_aspect},
                           {"hysteresis", m.hysteresis}};
  return j;
}

namespace {

Point2 pointing_cursor(Point2 p, Point2 reference, double gain, const trackers::Screen& screen) {
  const Point2 center{(screen.width - 1) / 2.0, (screen.height - 1) / 2.0};
  const Point2 c = center + gain * (p - reference);
  return {std::clamp(c.x, 0.0, screen.width - 1.0), std::clamp(c.y, 0.0, screen.height - 1.0)};
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Session::Session(std::optional<SessionConfig> config, std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {
  if (config) reset(std::move(*config));
}

void Session::reset(SessionConfig config) {
  const auto keep_base = base_dir_;
  *this = Session();
  base_dir_ = keep_base;
  click_ = trackers::ClickDetector(config.click.t_open, config.click.t_close, config.click.min_open_frames);
  if (config.calibration.calibration) calib_ = config.calibration.calibration;
  mapper_states_.assign(config.mappings.size(), {});
  config_ = std::move(config);
}

json Session::error(const std::string& message) const { return {{"type", "error"}, {"message", message}}; }

std::vector<json> Session::handle_line(std::string_view line) {
  json message;
  try {
    message = json::parse(line);
  } catch (const json::parse_error& e) {
    log_debug(std::string("malformed message: ") + e.what());
    return {error(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what())};
  }
  return handle(message);
}

std::vector<json> Session::handle(const json& message) {
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string())
    return {error("message must be an object with a string \"type\"")};
  const std::string type = message["type"].get<std::string>();

  if (type == "hello") {
    if (message.contains("config") && !message["config"].is_null()) {
      try {
        reset(parse_session_config(message["config"], base_dir_));
      } catch (const std::exception& e) {
        return {error(std::string("hello: ") + e.what())};
      }
    } else if (config_) {
      reset(*config_);
    } else {
      return {error("hello: no config given and the server has no default config")};
    }
    log_info("session started: tracker " + to_string(config_->tracker) + ", application " +
             to_string(config_->application));
    return {};
  }
  if (type == "end") {
    ended_ = true;
    log_info("session ended");
    return {};
  }
  if (type == "frame") {
    if (!message.contains("seq") || !message["seq"].is_number_integer())
      return {error("frame message needs an integer \"seq\"")};
    const std::int64_t seq = message["seq"].get<std::int64_t>();
    const std::string encoding = message.value("encoding", std::string("pnm-base64"));
    if (encoding != "pnm-base64") return {error("frame " + std::to_string(seq) + ": unsupported encoding " + encoding)};
    if (!message.contains("data") || !message["data"].is_string())
      return {error("frame " + std::to_string(seq) + ": missing \"data\"")};
    frameio::Frame frame;
    try {
      const auto bytes = base64_decode(message["data"].get_ref<const std::string&>());
      frame = frameio::read_pnm(bytes);
    } catch (const std::exception& e) {
      return {error("frame " + std::to_string(seq) + ": decode failed: " + e.what())};
    }
    const std::int64_t t_ms = message.contains("t_ms") && message["t_ms"].is_number() ? message["t_ms"].get<std::int64_t>()
                                                                                       : 0;
    return process_frame(frame, seq, t_ms);
  }
  if (type == "event") {
    if (message.value("kind", std::string()) != "key") return {error("unsupported event kind")};
    return key_event(message);
  }
  return {error("unknown message type \"" + type + "\"")};
}

std::vector<json> Session::process_frame(const frameio::Frame& frame, std::int64_t seq, std::int64_t t_ms) {
  if (!config_) return {error("frame " + std::to_string(seq) + ": no session config (send hello first)")};
  if (last_seq_ && seq <= *last_seq_)
    return {error("frame " + std::to_string(seq) + ": seq must increase (last was " + std::to_string(*last_seq_) + ")")};
  last_seq_ = seq;
  last_t_ms_ = t_ms;
  const SessionConfig& cfg = *config_;
  std::vector<json> out;
  json rec = {{"type", "features"}, {"seq", seq}, {"t_ms", t_ms}, {"tracker", to_string(cfg.tracker)}};

  // 1. Landmarks, MSROI and cursor.
  std::optional<frameio::OrientedRoi> roi;
  std::optional<Point2> cursor;
  bool lost = false;
  switch (cfg.tracker) {
    case TrackerKind::FixedRoi: {
      roi = cfg.roi ? *cfg.roi : frameio::OrientedRoi::full_frame(frame);
      break;
    }
    case TrackerKind::NF: {
      nf_ = nf_.lost ? trackers::nf_init(frame, cfg.tracker_config)
                     : trackers::nf_update(nf_, frame, cfg.tracker_config);
      nf_.frame_index = seq;
      lost = nf_.lost;
      rec["nostrils"] = nf_;
      if (!lost) {
        roi = trackers::nf_msroi(nf_, cfg.tracker_config);
        const Point2 mid = 0.5 * (nf_.left + nf_.right);
        if (!reference_) reference_ = mid;
        cursor_ = pointing_cursor(mid, *reference_, cfg.cursor_gain, cfg.screen);
        have_cursor_ = true;
      }
      if (have_cursor_) cursor = cursor_;
      break;
    }
    case TrackerKind::NP: {
      if (!np_ready_) {
        np_ = trackers::np_init(frame, cfg.eyes->first, cfg.eyes->second, cfg.tracker_config);
        np_ready_ = true;
        reference_ = np_.smoothed_nose;
        cursor_ = pointing_cursor(np_.smoothed_nose, *reference_, cfg.cursor_gain, cfg.screen);
      } else {
        np_ = trackers::np_track(np_, frame, cfg.tracker_config);
        cursor_ = trackers::np_cursor(np_, cfg.cursor_gain, *reference_, cfg.screen, cursor_);
      }
      have_cursor_ = true;
      lost = np_.lost;
      rec["nose"] = np_;
      cursor = cursor_;
      roi = cfg.roi;
      break;
    }
  }
  rec["lost"] = lost;
  rec["roi"] = optional_json(roi);
  rec["cursor"] = optional_json(cursor);

  // 2. Mouth shape inside the MSROI.
  mouthseg::MouthShape shape;
  if (roi) shape = mouthseg::segment(frameio::crop_oriented(frame, *roi), cfg.segmentation);
  rec.update(json(shape));

  // 3. Calibration.
  if (!calib_ && cfg.calibration.kind == CalibrationSource::Kind::LiveWindow) {
    calib_window_.push_back(shape);
    if (static_cast<int>(calib_window_.size()) >= cfg.calibration.window_frames) {
      try {
        calib_ = mapping::calibrate(calib_window_);
        log_info("live calibration done: max_area " + std::to_string(calib_->max_area));
      } catch (const DataError& e) {
        out.push_back(error(std::string("calibration window: ") + e.what()));
      }
      calib_window_.clear();
    }
  }
  rec["calibrated"] = calib_.has_value();

  // 4. Mouth state, vowel and click.
  std::optional<double> norm_area;
  bool clicked = false;
  if (calib_) {
    norm_area = std::clamp(static_cast<double>(shape.area) / calib_->max_area, 0.0, 1.0);
    mouth_state_ = mapping::quantize_mouth_state(shape, *calib_, cfg.mouth_thresholds, mouth_state_);
    vowel_ = *mouth_state_ == mapping::MouthState::Closed ? std::nullopt : mapping::classify_vowel(shape, *calib_);
    clicked = click_.step(*norm_area).has_value();
  }
  rec["norm_area"] = optional_json(norm_area);
  rec["mouth_state"] = mouth_state_ ? json(mapping::to_string(*mouth_state_)) : json(nullptr);
  rec["vowel"] = vowel_ ? json(mapping::to_string(*vowel_)) : json(nullptr);

  // 5. Parameter streams.
  json values = json::object();
  for (std::size_t i = 0; i < cfg.mappings.size(); ++i) {
    const auto& spec = cfg.mappings[i];
    if (spec.feature == mapping::Feature::NormArea && !calib_) {
      values[spec.name] = nullptr;
      continue;
    }
    const double raw = mapping::extract_feature(spec.feature, shape, calib_ ? &*calib_ : nullptr, cursor);
    auto mapped = mapping::apply(spec, raw, mapper_states_[i], calib_ ? &*calib_ : nullptr);
    if (mapped) {
      mapper_states_[i] = mapped->state;
      values[spec.name] = mapped->value;
    } else {
      values[spec.name] = nullptr;
    }
  }
  rec["values"] = values;

  // 6. Applications.
  std::vector<json> app_events;
  if (clicked) app_events.push_back({{"type", "app_event"}, {"kind", "click"}, {"seq", seq}, {"t_ms", t_ms}});
  if (calib_) {
    switch (cfg.application) {
      case Application::Circle: {
        auto step = tasks::circle_step(cfg.circle, shape, t_ms, hold_);
        hold_ = step.state;
        rec["app"] = {{"radius", step.radius}, {"trial", hold_.trial}, {"holding", hold_.hold_start.has_value()},
                      {"finished", hold_.finished}};
        if (step.outcome) {
          json ev = {{"type", "app_event"}, {"kind", "trial_outcome"}, {"task", "circle"}, {"seq", seq}};
          ev.update(json(*step.outcome));
          ev["target"] = cfg.circle.target_radii[step.outcome->trial];
          app_events.push_back(ev);
        }
        break;
      }
      case Application::Ellipse: {
        auto step = tasks::ellipse_step(cfg.ellipse, shape, t_ms, hold_);
        hold_ = step.state;
        rec["app"] = {{"width", step.width}, {"height", step.height}, {"trial", hold_.trial},
                      {"holding", hold_.hold_start.has_value()}, {"finished", hold_.finished}};
        if (step.outcome) {
          json ev = {{"type", "app_event"}, {"kind", "trial_outcome"}, {"task", "ellipse"}, {"seq", seq}};
          ev.update(json(*step.outcome));
          const auto& target = cfg.ellipse.targets[step.outcome->trial];
          ev["target"] = {target.first, target.second};
          app_events.push_back(ev);
        }
        break;
      }
      case Application::Tapping: {
        if (cursor) {
          auto step = tasks::tapping_step(cfg.tapping, *cursor, clicked, t_ms, tapping_);
          tapping_ = step.state;
          rec["app"] = {{"target", step.current_target},
                        {"target_position", tasks::target_position(cfg.tapping, step.current_target)},
                        {"finished", tapping_.finished}};
          if (step.record) {
            json ev = {{"type", "app_event"}, {"kind", "trial_outcome"}, {"task", "tapping"}, {"seq", seq},
                       {"t_ms", t_ms}};
            ev.update(json(*step.record));
            app_events.push_back(ev);
          }
        }
        break;
      }
      default: break;
    }
  }

  out.insert(out.begin(), rec);
  out.insert(out.end(), app_events.begin(), app_events.end());
  return out;
}

std::vector<json> Session::key_event(const json& event) {
  if (!config_) return {error("key event: no session config (send hello first)")};
  const auto& cfg = *config_;
  if (cfg.application != Application::TextJp && cfg.application != Application::TextRoman)
    return {error("key event: application \"" + to_string(cfg.application) + "\" takes no key input")};
  if (!event.contains("key") || !event["key"].is_string() || event["key"].get_ref<const std::string&>().size() != 1)
    return {error("key event needs a one-character \"key\"")};
  const char key = event["key"].get_ref<const std::string&>()[0];
  if (!textentry::is_keypad_key(key)) return {error(std::string("key event: '") + key + "' is not a keypad key")};
  const std::int64_t t_ms = event.contains("t_ms") && event["t_ms"].is_number() ? event["t_ms"].get<std::int64_t>()
                                                                                 : last_t_ms_;

  // An explicit mouth/vowel on the event overrides the tracked one.
  std::optional<mapping::MouthState> mouth = mouth_state_;
  std::optional<mapping::Vowel> vowel = vowel_;
  try {
    if (event.contains("mouth") && event["mouth"].is_string())
      mouth = mapping::mouth_state_from_string(event["mouth"].get<std::string>());
    if (event.contains("vowel")) {
      vowel = event["vowel"].is_string() ? std::optional(mapping::vowel_from_string(event["vowel"].get<std::string>()))
                                         : std::nullopt;
    } else if (event.contains("mouth") && mouth == mapping::MouthState::Closed) {
      vowel.reset();
    }
  } catch (const std::exception& e) {
    return {error(std::string("key event: ") + e.what())};
  }

  json ev = {{"type", "app_event"}, {"t_ms", t_ms}, {"key", std::string(1, key)}};
  if (cfg.application == Application::TextRoman) {
    if (!mouth) return {error("key event: no mouth state yet")};
    if (key < '2' || key > '9') return {error(std::string("rejected input: key ") + key + " carries no letters")};
    const auto letter = textentry::roman_select({key, t_ms}, *mouth);
    if (!letter) {
      return {error(std::string("rejected input: ") + mapping::to_string(*mouth) + " on key " + key)};
    }
    ev["kind"] = "letter";
    ev["letter"] = std::string(1, *letter);
    ev["mouth"] = mapping::to_string(*mouth);
    return {ev};
  }

  ev["kind"] = "kana";
  if (key == cfg.layout.dakuten_key) {
    auto r = textentry::apply_dakuten(composer_);
    if (r.warning) return {error("rejected input: nothing to voice yet")};
    composer_ = r.state;
    ev["text"] = r.replacement;
    ev["replace"] = true;
  } else if (key == cfg.layout.small_key) {
    composer_ = textentry::toggle_small(composer_);
    ev["text"] = "";
    ev["pending_small"] = composer_.pending_small;
  } else {
    if (!mouth && !vowel) return {error("key event: no mouth state yet")};
    auto r = textentry::kana_compose({key, t_ms}, vowel, composer_, cfg.layout);
    composer_ = r.state;
    ev["text"] = r.text;
    ev["yoon"] = r.yoon;
    ev["vowel"] = vowel ? json(mapping::to_string(*vowel)) : json(nullptr);
  }
  return {ev};
}

}  // namespace facegest::gateway

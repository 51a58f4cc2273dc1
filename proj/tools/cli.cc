#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "facegest/errors.h"
#include "facegest/frameio.h"
#include "facegest/gateway/logging.h"
#include "facegest/gateway/replay.h"
#include "facegest/gateway/server.h"
#include "facegest/gateway/session.h"
#include "facegest/mouthseg.h"
#include "facegest/synthetic.h"
#include "facegest/tasks.h"
#include "facegest/textentry.h"

namespace facegest::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

bool is_features(const json& line) {
  return line.is_object() && (line.value("type", std::string("features")) == "features") && line.contains("area");
}

std::vector<tasks::TimedShape> shapes_from_log(const std::vector<json>& lines) {
  std::vector<tasks::TimedShape> out;
  for (const auto& l : lines) {
    if (!is_features(l)) continue;
    out.push_back({l.value("t_ms", std::int64_t{0}), l.get<mouthseg::MouthShape>()});
  }
  return out;
}

// A task config file is either the bare task config or a session config carrying app_config.
json task_section(const json& config) { return config.contains("app_config") ? config["app_config"] : config; }

json hold_entry(std::size_t trial, double target, const std::vector<double>& window) {
  json h = {{"trial", trial}, {"target", target}, {"samples", window.size()}};
  if (window.size() >= 2) {
    h.update(json(tasks::analyze_hold(window, target)));
  } else {
    h["accuracy"] = h["precision"] = h["snr_db"] = nullptr;
  }
  return h;
}

json circle_report(const json& config_file, const std::vector<tasks::TimedShape>& stream) {
  const auto config = task_section(config_file).get<tasks::CircleTaskConfig>();
  json outcomes = json::array(), holds = json::array(), series = json::array();
  tasks::HoldState state;
  std::vector<std::pair<std::int64_t, double>> window;
  for (const auto& s : stream) {
    const auto trial = state.trial;
    auto step = tasks::circle_step(config, s.shape, s.t_ms, state);
    series.push_back({{"t_ms", s.t_ms}, {"radius", step.radius}, {"trial", trial}});
    if (step.state.hold_start || step.outcome) {
      window.emplace_back(s.t_ms, step.radius);
    } else {
      window.clear();
    }
    if (step.outcome) {
      outcomes.push_back(*step.outcome);
      std::vector<double> values;
      for (const auto& [t, r] : window) values.push_back(r);
      holds.push_back(hold_entry(trial, config.target_radii[trial], values));
      window.clear();
    }
    state = step.state;
  }
  json report = {{"task", "circle"},
                 {"trials", config.target_radii.size()},
                 {"successes", outcomes.size()},
                 {"outcomes", outcomes},
                 {"holds", holds},
                 {"series", series}};
  if (config_file.contains("gains")) {
    const auto gains = config_file["gains"].get<std::vector<double>>();
    report["sweep"] = tasks::gain_sweep(config, {stream}, gains);
  }
  return report;
}

json ellipse_report(const json& config_file, const std::vector<tasks::TimedShape>& stream) {
  const auto config = task_section(config_file).get<tasks::EllipseTaskConfig>();
  json outcomes = json::array(), holds = json::array(), series = json::array();
  tasks::HoldState state;
  std::vector<double> ws, hs;
  for (const auto& s : stream) {
    const auto trial = state.trial;
    auto step = tasks::ellipse_step(config, s.shape, s.t_ms, state);
    series.push_back({{"t_ms", s.t_ms}, {"width", step.width}, {"height", step.height}, {"trial", trial}});
    if (step.state.hold_start || step.outcome) {
      ws.push_back(step.width);
      hs.push_back(step.height);
    } else {
      ws.clear();
      hs.clear();
    }
    if (step.outcome) {
      outcomes.push_back(*step.outcome);
      const auto [tw, th] = config.targets[trial];
      holds.push_back({{"trial", trial}, {"width", hold_entry(trial, tw, ws)}, {"height", hold_entry(trial, th, hs)}});
      ws.clear();
      hs.clear();
    }
    state = step.state;
  }
  return {{"task", "ellipse"},
          {"trials", config.targets.size()},
          {"successes", outcomes.size()},
          {"outcomes", outcomes},
          {"holds", holds},
          {"series", series}};
}

json tapping_report(const json& config_file, const std::vector<json>& lines) {
  const auto config = task_section(config_file).get<tasks::TappingTaskConfig>();
  std::map<std::int64_t, bool> clicked;
  for (const auto& l : lines) {
    if (l.value("type", std::string()) == "app_event" && l.value("kind", std::string()) == "click")
      clicked[l.value("seq", std::int64_t{-1})] = true;
  }
  std::vector<tasks::FittsRecord> records;
  tasks::TappingState state;
  for (const auto& l : lines) {
    if (!is_features(l) || !l.contains("cursor") || l["cursor"].is_null()) continue;
    const auto seq = l.value("seq", std::int64_t{-1});
    auto step = tasks::tapping_step(config, l["cursor"].get<Point2>(), clicked.count(seq) > 0,
                                    l.value("t_ms", std::int64_t{0}), state);
    state = step.state;
    if (step.record) records.push_back(*step.record);
  }
  json report = tasks::throughput(records);
  report["task"] = "tapping";
  report["records"] = records;
  return report;
}

std::vector<textentry::EntryEvent> read_entry_events(const fs::path& file) {
  std::vector<textentry::EntryEvent> events;
  for (const auto& l : gateway::read_jsonl(file)) events.push_back(l.get<textentry::EntryEvent>());
  return events;
}

// The last subcommand CLI11 parsed, for usage messages.
const CLI::App* deepest(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return deepest(*sub);
  return &app;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"facegest: mouth-shape and head-motion interaction toolkit"};
  app.require_subcommand(1);

  // segment
  auto* segment = app.add_subcommand("segment", "Segment a PNM frame and print its MouthShape JSON");
  std::string seg_frame, seg_params;
  segment->add_option("frame", seg_frame, "P5/P6 image")->required();
  segment->add_option("--params", seg_params, "SegmentationParams JSON file");

  // track
  auto* track = app.add_subcommand("track", "Replay a frame sequence through a tracker and log features");
  std::string track_dir, track_tracker, track_config, track_out, track_events;
  track->add_option("seqdir", track_dir, "Directory holding manifest.json")->required();
  track->add_option("--tracker", track_tracker, "nf, np or fixed_roi (alias: fixed)")->check(CLI::IsMember({"nf", "np", "fixed", "fixed_roi"}));
  track->add_option("--config", track_config, "Session config JSON");
  track->add_option("--out", track_out, "Output JSONL log")->required();
  track->add_option("--events", track_events, "Extra key events (JSONL)");

  // task
  auto* task = app.add_subcommand("task", "Score a circle, ellipse or tapping task from a feature log");
  std::string task_kind, task_replay, task_config, task_report;
  task->add_option("kind", task_kind, "circle, ellipse or tapping")
      ->required()
      ->check(CLI::IsMember({"circle", "ellipse", "tapping"}));
  task->add_option("--replay", task_replay, "Feature log (JSONL)")->required();
  task->add_option("--config", task_config, "Task config JSON")->required();
  task->add_option("--report", task_report, "Report JSON");

  // fitts
  auto* fitts = app.add_subcommand("fitts", "Fitts throughput from trial records");
  std::string fitts_log, fitts_report;
  fitts->add_option("--log", fitts_log, "JSONL records with D, W, MT, hit")->required();
  fitts->add_option("--report", fitts_report, "Report JSON");

  // text simulate
  auto* text = app.add_subcommand("text", "Text-entry tools");
  text->require_subcommand(1);
  auto* simulate = text->add_subcommand("simulate", "Replay a text-entry event log");
  std::string text_layout = "jp", text_method = "mouthtype", text_events, text_out, text_metrics, text_target;
  std::int64_t text_timeout = 1000;
  simulate->add_option("--layout", text_layout, "jp or roman")->check(CLI::IsMember({"jp", "roman"}));
  simulate->add_option("--method", text_method, "mouthtype or multitap")->check(CLI::IsMember({"mouthtype", "multitap"}));
  simulate->add_option("--events", text_events, "EntryEvent JSONL")->required();
  simulate->add_option("--out", text_out, "Transcript file (UTF-8)");
  simulate->add_option("--metrics", text_metrics, "Metrics JSON");
  simulate->add_option("--target", text_target, "Reference text");
  simulate->add_option("--timeout", text_timeout, "Multi-tap commit timeout, ms");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the streaming session server");
  std::string serve_listen = "127.0.0.1:7878", serve_config;
  serve->add_option("--listen", serve_listen, "host:port");
  serve->add_option("--config", serve_config, "Default session config JSON");

  // synth
  auto* synth = app.add_subcommand("synth", "Write synthetic fixtures");
  std::string synth_kind, synth_path;
  double synth_tp = 2.0;
  std::int64_t synth_interval = 500;
  synth->add_option("kind", synth_kind, "nf-session, square, gojuon-events, roman-events or fitts-log")
      ->required()
      ->check(CLI::IsMember({"nf-session", "square", "gojuon-events", "roman-events", "fitts-log"}));
  synth->add_option("path", synth_path, "Output file or directory")->required();
  synth->add_option("--throughput", synth_tp, "fitts-log: bits/s the records encode");
  synth->add_option("--interval", synth_interval, "Event spacing for event fixtures, ms");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << deepest(app)->help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << deepest(app)->help();
    return kUsage;
  }

  try {
    if (segment->parsed()) {
      mouthseg::SegmentationParams params;
      if (!seg_params.empty()) params = read_json_file(seg_params).get<mouthseg::SegmentationParams>();
      const auto frame = frameio::read_pnm_file(seg_frame);
      out << json(mouthseg::segment(frame, params)).dump() << "\n";
    } else if (track->parsed()) {
      json cfg = track_config.empty() ? json::object() : read_json_file(track_config);
      if (!track_tracker.empty()) cfg["tracker"] = track_tracker == "fixed" ? "fixed_roi" : track_tracker;
      if (cfg.value("tracker", std::string()) == "np" && !cfg.contains("eyes")) {
        const auto seq = frameio::load_sequence(track_dir);
        if (seq.extra.contains("eyes")) cfg["eyes"] = seq.extra["eyes"];
      }
      const fs::path base = track_config.empty() ? fs::path(track_dir) : fs::path(track_config).parent_path();
      const auto config = gateway::parse_session_config(cfg, base);
      std::vector<json> events;
      if (!track_events.empty()) events = gateway::read_jsonl(track_events);
      const auto log = gateway::run_replay(track_dir, config, track_out, events);
      gateway::log_info("wrote " + std::to_string(log.lines.size()) + " records to " + track_out);
    } else if (task->parsed()) {
      const json cfg = read_json_file(task_config);
      const auto lines = gateway::read_jsonl(task_replay);
      json report;
      if (task_kind == "circle") report = circle_report(cfg, shapes_from_log(lines));
      else if (task_kind == "ellipse") report = ellipse_report(cfg, shapes_from_log(lines));
      else report = tapping_report(cfg, lines);
      if (!task_report.empty()) write_json(task_report, report);
      else out << report.dump(2) << "\n";
    } else if (fitts->parsed()) {
      std::vector<tasks::FittsRecord> records;
      for (const auto& l : gateway::read_jsonl(fitts_log)) {
        if (l.is_object() && l.contains("D") && l.contains("W") && l.contains("MT"))
          records.push_back(l.get<tasks::FittsRecord>());
      }
      if (records.empty()) throw DataError("no Fitts records (lines with D, W, MT) in " + fitts_log);
      const json report = tasks::throughput(records);
      if (!fitts_report.empty()) write_json(fitts_report, report);
      out << report.dump() << "\n";
    } else if (simulate->parsed()) {
      auto events = read_entry_events(text_events);
      textentry::EntryLog log;
      if (text_layout == "jp") {
        log = text_method == "mouthtype" ? textentry::replay_kana(events)
                                         : textentry::replay_multitap_kana(events, text_timeout);
      } else {
        log = text_method == "mouthtype" ? textentry::replay_roman(events)
                                         : textentry::replay_multitap_roman(events, text_timeout);
      }
      log.target = text_target;
      const auto keystrokes = std::count_if(log.events.begin(), log.events.end(), [](const auto& e) { return e.key.has_value(); });
      json metrics = {{"layout", text_layout},
                      {"method", text_method},
                      {"characters", textentry::utf8_length(log.transcript)},
                      {"keystrokes", keystrokes},
                      {"transcript", log.transcript}};
      metrics["kspc"] = log.transcript.empty() ? json(nullptr) : json(textentry::kspc(log));
      try {
        metrics["wpm"] = textentry::entry_speed(log);
      } catch (const DomainError&) {
        metrics["wpm"] = nullptr;
      }
      if (!text_target.empty()) metrics["matches_target"] = log.transcript == text_target;
      if (!text_out.empty()) write_text(text_out, log.transcript);
      if (!text_metrics.empty()) write_json(text_metrics, metrics);
      out << metrics.dump() << "\n";
    } else if (serve->parsed()) {
      std::optional<gateway::SessionConfig> config;
      fs::path base = fs::current_path();
      if (!serve_config.empty()) {
        config = gateway::load_session_config(serve_config);
        base = fs::path(serve_config).parent_path();
      }
      const auto [host, port] = gateway::parse_listen_address(serve_listen);
      gateway::Server server(config, base);
      const auto bound = server.listen(host, port);
      out << "listening on " << host << ":" << bound << std::endl;
      std::signal(SIGINT, [](int) { g_interrupted = true; });
      std::signal(SIGTERM, [](int) { g_interrupted = true; });
      server.start();
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (synth->parsed()) {
      if (synth_kind == "nf-session") {
        synthetic::write_nf_session(synth_path);
      } else if (synth_kind == "square") {
        frameio::write_pnm_file(synth_path, synthetic::square_frame());
      } else if (synth_kind == "gojuon-events" || synth_kind == "roman-events") {
        std::vector<json> lines;
        if (synth_kind == "gojuon-events") {
          std::string text;
          for (const auto& k : textentry::base_gojuon()) text += k;
          for (const auto& e : textentry::mouthtype_kana_events(text, synth_interval)) lines.push_back(e);
        } else {
          for (const auto& e : textentry::mouthtype_roman_events("abcdefghijklmnopqrstuvwxyz", synth_interval))
            lines.push_back(e);
        }
        gateway::write_jsonl(synth_path, lines);
      } else {
        if (!(synth_tp > 0.0)) throw DataError("--throughput must be > 0");
        std::vector<json> lines;
        for (double d : {256.0, 512.0}) {
          for (double w : {16.0, 32.0, 64.0}) {
            for (int k = 0; k < 9; ++k) {
              lines.push_back(tasks::FittsRecord{d, w, tasks::fitts_id(d, w) / synth_tp, true});
            }
          }
        }
        gateway::write_jsonl(synth_path, lines);
      }
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace facegest::cli

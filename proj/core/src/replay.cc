#include "facegest/gateway/replay.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "facegest/errors.h"
#include "facegest/gateway/logging.h"

namespace facegest::gateway {

using nlohmann::json;

std::string ReplayLog::text() const {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

ReplayLog run_replay(const std::filesystem::path& dir, const SessionConfig& config,
                     const std::vector<json>& extra_events) {
  const auto seq = frameio::load_sequence(dir);
  std::vector<json> events;
  if (seq.extra.contains("events")) {
    for (const auto& e : seq.extra["events"]) events.push_back(e);
  }
  events.insert(events.end(), extra_events.begin(), extra_events.end());
  for (auto& e : events) {
    if (!e.is_object() || !e.contains("t_ms") || !e["t_ms"].is_number())
      throw DataError("replay events need an object with a numeric t_ms");
    if (!e.contains("type")) e["type"] = "event";
    if (!e.contains("kind")) e["kind"] = "key";
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const json& a, const json& b) { return a["t_ms"].get<double>() < b["t_ms"].get<double>(); });

  Session session(config, dir);
  ReplayLog log;
  auto emit = [&](const std::vector<json>& messages) {
    for (const auto& m : messages) log.lines.push_back(m.dump());
  };
  std::size_t next_event = 0;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto t = seq.frames[i].t_ms;
    while (next_event < events.size() && events[next_event]["t_ms"].get<double>() < static_cast<double>(t))
      emit(session.handle(events[next_event++]));
    emit(session.process_frame(seq.load(i), static_cast<std::int64_t>(i), t));
  }
  while (next_event < events.size()) emit(session.handle(events[next_event++]));
  log_debug("replayed " + std::to_string(seq.frames.size()) + " frames from " + dir.string());
  return log;
}

ReplayLog run_replay(const std::filesystem::path& dir, const SessionConfig& config, const std::filesystem::path& out,
                     const std::vector<json>& extra_events) {
  auto log = run_replay(dir, config, extra_events);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DataError("cannot write " + out.string());
  f << log.text();
  return log;
}

std::vector<json> read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::vector<json> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(file.string() + ": bad JSON line", start + (e.byte > 0 ? e.byte - 1 : 0));
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& file, const std::vector<json>& records) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace facegest::gateway

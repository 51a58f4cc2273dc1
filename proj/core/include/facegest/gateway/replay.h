#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/gateway/session.h"

namespace facegest::gateway {

// Server messages of a replay, one JSONL line each.
struct ReplayLog {
  std::vector<std::string> lines;

  std::string text() const;
};

// Drives a Session from <dir>/manifest.json. Key events come from the
// manifest's "events" array and |extra_events|; they are merged with the frames
// by t_ms, an event stamped with a frame's time running after that frame.
// Frame seq is the manifest index. Throws DataError naming a missing frame file.
ReplayLog run_replay(const std::filesystem::path& dir, const SessionConfig& config,
                     const std::vector<nlohmann::json>& extra_events = {});

// Same, and writes the log to |out| (byte-identical for identical inputs).
ReplayLog run_replay(const std::filesystem::path& dir, const SessionConfig& config, const std::filesystem::path& out,
                     const std::vector<nlohmann::json>& extra_events = {});

// Reads a JSONL file; blank lines are skipped. Throws ParseError with the line's byte offset.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& file);
void write_jsonl(const std::filesystem::path& file, const std::vector<nlohmann::json>& records);

}  // namespace facegest::gateway

#include "facegest/gateway/logging.h"

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace facegest::gateway {

namespace {

spdlog::logger& logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> log;
  std::call_once(once, [] {
    log = spdlog::stderr_color_mt("facegest");
    auto level = spdlog::level::info;
    if (const char* env = std::getenv("FACEGEST_LOG_LEVEL")) {
      const std::string v = env;
      if (v == "error") level = spdlog::level::err;
      else if (v == "debug") level = spdlog::level::debug;
    }
    log->set_level(level);
  });
  return *log;
}

}  // namespace

void log_error(std::string_view message) { logger().error("{}", message); }
void log_info(std::string_view message) { logger().info("{}", message); }
void log_debug(std::string_view message) { logger().debug("{}", message); }

}  // namespace facegest::gateway

#pragma once

#include <string_view>

namespace facegest::gateway {

// stderr logging. The level comes from FACEGEST_LOG_LEVEL
// (error, info or debug; default info).
void log_error(std::string_view message);
void log_info(std::string_view message);
void log_debug(std::string_view message);

}  // namespace facegest::gateway

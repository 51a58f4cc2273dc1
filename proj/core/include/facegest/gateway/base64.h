#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facegest::gateway {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Standard alphabet with '=' padding. Throws ParseError on bad length or characters.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace facegest::gateway

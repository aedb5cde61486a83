#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace promptbench {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string to_hex(const Sha256Digest& digest);
inline std::string sha256_hex(std::string_view bytes) { return to_hex(sha256(bytes)); }

/// Appends `<decimal length>:<bytes>` so concatenated fields cannot alias.
inline void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

}  // namespace promptbench

#pragma once

#include <cstdint>
#include <string>

#include "vfsmodel/types.hpp"

namespace vfsmodel {

// Canonical text rendering of the state: dirs and files interleaved in
// ascending ino order, entries sorted by name, pages by number with hex
// bytes. Bit-exact across platforms; used by golden tests and the CLI dump.
std::string dump_state(const AfsState& state, std::uint64_t page_size);

std::string to_hex(const std::uint8_t* data, std::size_t len);

}  // namespace vfsmodel

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vfsmodel/types.hpp"
#include "vfsmodel/vfs.hpp"

namespace vfsmodel {

// One detected consistency violation. Printable in a stable one-line format.
struct Violation {
  std::string invariant;  // "1".."5" or "HANDLE"
  Ino ino = 0;
  std::uint64_t fd = 0;
  std::string detail;

  std::string to_line() const;
};

// Validates the proved state invariants plus the handle invariant:
//   (1) 0 never allocated, root present, dirs/files disjoint
//   (2) closure under lookup
//   (3) directories have at most one parent; the root has none
//   (4) no pages at or beyond the file size
//   (5) zero tail in the last allocated page
//   (HANDLE) every open handle targets an allocated file
// Pure; returns an empty vector iff all invariants hold.
std::vector<Violation> check_all(const AfsState& state, const HandleTable& handles,
                                 std::uint64_t page_size);

// Flat byte view of a file: length = size, absent pages read as zeros.
// Assumes invariants (4) and (5) hold.
std::vector<std::uint8_t> flat_content(const File& file, std::uint64_t page_size);

}  // namespace vfsmodel

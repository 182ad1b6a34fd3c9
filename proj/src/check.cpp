#include "vfsmodel/check.hpp"

#include <sstream>

namespace vfsmodel {

std::string Violation::to_line() const {
  std::ostringstream out;
  out << "violation inv=" << invariant;
  if (ino != 0) out << " ino=" << ino;
  if (invariant == "HANDLE") out << " fd=" << fd;
  out << " detail=" << detail;
  return out.str();
}

std::vector<Violation> check_all(const AfsState& state, const HandleTable& handles,
                                 std::uint64_t page_size) {
  std::vector<Violation> out;
  auto report = [&](std::string inv, Ino ino, std::string detail) {
    out.push_back(Violation{std::move(inv), ino, 0, std::move(detail)});
  };

  // (1) 0 never allocated, root present, stores disjoint.
  if (state.dirs.contains(0)) report("1", 0, "inode 0 allocated as directory");
  if (state.files.contains(0)) report("1", 0, "inode 0 allocated as file");
  if (!state.dirs.contains(kRootIno)) report("1", kRootIno, "root directory missing");
  for (const auto& [ino, dir] : state.dirs) {
    if (state.files.contains(ino)) {
      report("1", ino, "inode allocated as both directory and file");
    }
  }

  // (2) closure under lookup.
  for (const auto& [ino, dir] : state.dirs) {
    for (const auto& [name, target] : dir.entries) {
      if (!state.dirs.contains(target) && !state.files.contains(target)) {
        report("2", ino, "entry \"" + name + "\" targets unallocated inode " +
                             std::to_string(target));
      }
    }
  }

  // (3) directories have at most one parent; the root has none.
  for (const auto& [ino, dir] : state.dirs) {
    std::uint64_t parents = 0;
    for (const auto& [pino, pdir] : state.dirs) {
      for (const auto& [name, target] : pdir.entries) {
        if (target == ino) ++parents;
      }
    }
    if (ino == kRootIno && parents != 0) {
      report("3", ino, "root directory has a parent entry");
    } else if (parents > 1) {
      report("3", ino, "directory has " + std::to_string(parents) + " parents");
    }
  }

  // (4) no pages at or beyond the file size.
  for (const auto& [ino, file] : state.files) {
    for (const auto& [pageno, page] : file.pages) {
      if (pageno * page_size >= file.size) {
        report("4", ino, "page " + std::to_string(pageno) + " beyond size " +
                             std::to_string(file.size));
      }
      if (page.size() != page_size) {
        report("4", ino, "page " + std::to_string(pageno) + " has wrong length " +
                             std::to_string(page.size()));
      }
    }
  }

  // (5) zero tail in the last allocated page.
  for (const auto& [ino, file] : state.files) {
    if (file.size % page_size == 0) continue;
    auto it = file.pages.find(file.size / page_size);
    if (it == file.pages.end() || it->second.size() != page_size) continue;
    for (std::uint64_t i = file.size % page_size; i < page_size; ++i) {
      if (it->second[i] != 0) {
        report("5", ino, "nonzero byte at page offset " + std::to_string(i) +
                             " beyond size " + std::to_string(file.size));
        break;
      }
    }
  }

  // Handle invariant: every open descriptor targets an allocated file.
  for (const auto& [fd, handle] : handles) {
    if (!state.files.contains(handle.ino)) {
      out.push_back(Violation{"HANDLE", handle.ino, fd,
                              "handle targets unallocated file inode"});
    }
  }
  return out;
}

std::vector<std::uint8_t> flat_content(const File& file, std::uint64_t page_size) {
  std::vector<std::uint8_t> out(file.size, 0);
  for (std::uint64_t i = 0; i < file.size; ++i) {
    auto it = file.pages.find(i / page_size);
    if (it != file.pages.end()) out[i] = it->second[i % page_size];
  }
  return out;
}

}  // namespace vfsmodel

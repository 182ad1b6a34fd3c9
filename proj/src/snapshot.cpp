#include "vfsmodel/snapshot.hpp"

#include <sstream>

namespace vfsmodel {

std::string to_hex(const std::uint8_t* data, std::size_t len) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xf];
  }
  return out;
}

namespace {

std::string quoted(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void print_meta(std::ostringstream& out, const Meta& meta) {
  char perms[8];
  std::snprintf(perms, sizeof perms, "0%03o", meta.perms & 0777);
  out << "perms=" << perms << " owner=" << meta.owner << " group=" << meta.group;
}

}  // namespace

std::string dump_state(const AfsState& state, std::uint64_t page_size) {
  std::ostringstream out;
  out << "state page_size=" << page_size << "\n";
  auto d = state.dirs.begin();
  auto f = state.files.begin();
  while (d != state.dirs.end() || f != state.files.end()) {
    bool take_dir = f == state.files.end() ||
                    (d != state.dirs.end() && d->first < f->first);
    if (take_dir) {
      out << "dir ino=" << d->first << " ";
      print_meta(out, d->second.meta);
      out << "\n";
      for (const auto& [name, target] : d->second.entries) {
        out << "  entry " << quoted(name) << " -> " << target << "\n";
      }
      ++d;
    } else {
      out << "file ino=" << f->first << " ";
      print_meta(out, f->second.meta);
      out << " size=" << f->second.size << "\n";
      for (const auto& [pageno, page] : f->second.pages) {
        out << "  page " << pageno << " " << to_hex(page.data(), page.size()) << "\n";
      }
      ++f;
    }
  }
  return out.str();
}

}  // namespace vfsmodel

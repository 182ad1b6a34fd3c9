#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vfsmodel {

// Inode numbers. 0 is never allocated; the root directory is always ino 1.
using Ino = std::uint64_t;
inline constexpr Ino kRootIno = 1;

inline constexpr std::uint64_t kDefaultPageSize = 4096;

// Result of every operation. ESUCCESS means no error; to_string() yields the
// POSIX-style spelling used in transcripts and fault scripts.
enum class ErrorCode : std::uint8_t {
  Success,
  NoEntry,          // ENOENT
  Exists,           // EEXIST
  IsDirectory,      // EISDIR
  NotDirectory,     // ENOTDIR
  NotEmpty,         // ENOTEMPTY
  AccessDenied,     // EACCES
  BadDescriptor,    // EBADF
  InvalidArgument,  // EINVAL
  IoError,          // EIO
  NoSpace,          // ENOSPC
  NoMemory,         // ENOMEM
};

const char* to_string(ErrorCode err);
std::optional<ErrorCode> error_from_string(std::string_view name);

// Permission bits follow the POSIX 0777 layout: rwx for owner, group, other.
struct Meta {
  std::uint32_t owner = 0;
  std::uint32_t group = 0;
  std::uint16_t perms = 0;

  friend bool operator==(const Meta&, const Meta&) = default;
};

struct UserContext {
  std::uint32_t uid = 0;
  std::vector<std::uint32_t> gids = {0};

  bool in_group(std::uint32_t gid) const;
};

bool may_read(const UserContext& ctx, const Meta& meta);
bool may_write(const UserContext& ctx, const Meta& meta);
bool may_exec(const UserContext& ctx, const Meta& meta);

// A fixed-size block of file content; length is always the configured page
// size. Absent pages represent zero-filled regions of sparse files.
using Page = std::vector<std::uint8_t>;

struct Dir {
  Meta meta;
  std::map<std::string, Ino> entries;

  friend bool operator==(const Dir&, const Dir&) = default;
};

struct File {
  Meta meta;
  std::uint64_t size = 0;
  std::map<std::uint64_t, Page> pages;

  friend bool operator==(const File&, const File&) = default;
};

// The authoritative store: two disjoint partial maps over inode numbers.
struct AfsState {
  std::map<Ino, Dir> dirs;
  std::map<Ino, File> files;

  friend bool operator==(const AfsState&, const AfsState&) = default;
};

// Directory entry. A positive dentry names an existing child; a negative
// dentry asserts the absence of a name (e.g. as a lookup result).
struct Dentry {
  std::string name;
  std::optional<Ino> target;

  static Dentry negative(std::string name) { return {std::move(name), std::nullopt}; }
  static Dentry positive(std::string name, Ino target) { return {std::move(name), target}; }

  bool is_positive() const { return target.has_value(); }

  friend bool operator==(const Dentry&, const Dentry&) = default;
};

// Communication record describing one node; a snapshot, never stored.
// For directories, size is the number of entries.
struct Inode {
  Ino ino = 0;
  Meta meta;
  bool isdir = false;
  std::uint64_t nlink = 0;
  std::uint64_t size = 0;

  friend bool operator==(const Inode&, const Inode&) = default;
};

// Entry names are non-empty and contain no path separator.
bool valid_entry_name(std::string_view name);

}  // namespace vfsmodel

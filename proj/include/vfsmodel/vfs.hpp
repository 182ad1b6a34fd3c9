#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vfsmodel/afs.hpp"
#include "vfsmodel/faults.hpp"
#include "vfsmodel/types.hpp"

namespace vfsmodel {

// A path is a sequence of names; the separator is implicit. The empty path
// denotes the root directory.
using Path = std::vector<std::string>;

Path parse_path(std::string_view text, bool* ok);
std::string path_to_string(const Path& path);

enum class Mode : std::uint8_t { ReadOnly, WriteOnly, ReadWrite };
enum class SeekWhence : std::uint8_t { Set, Cur, End };

struct Handle {
  Ino ino = 0;
  std::uint64_t pos = 0;
  Mode mode = Mode::ReadOnly;

  friend bool operator==(const Handle&, const Handle&) = default;
};

using HandleTable = std::map<std::uint64_t, Handle>;

// POSIX-facing layer. Implements every operation purely via AFS calls plus
// the open-handle registry; performs all error checking, path walking,
// permission checks and the buffer/page mapping, and never invokes an AFS
// operation outside its precondition.
//
// Every operation is total: any input yields either success with the
// documented effect, or an error without state change. Read and write are
// the documented exception: they may transfer a prefix and report a short
// count when an injected fault interrupts the page loop.
class Vfs {
 public:
  explicit Vfs(std::uint64_t page_size = kDefaultPageSize, FaultPlan faults = FaultPlan(),
               UserContext user = UserContext{});

  // Resolves a path from the root, checking traverse permission at every
  // directory passed along the way.
  std::pair<Ino, ErrorCode> walk(const Path& path);

  ErrorCode create(const Path& path, const Meta& md);
  ErrorCode mkdir(const Path& path, const Meta& md);
  ErrorCode rmdir(const Path& path);
  ErrorCode link(const Path& oldpath, const Path& newpath);
  ErrorCode unlink(const Path& path);
  ErrorCode rename(const Path& oldpath, const Path& newpath);
  ErrorCode truncate(const Path& path, std::uint64_t newsize);

  std::pair<Inode, ErrorCode> getattr(const Path& path);
  ErrorCode setattr(const Path& path, const Meta& md);
  std::pair<std::vector<std::string>, ErrorCode> readdir(const Path& path);

  std::pair<std::uint64_t, ErrorCode> open(const Path& path, Mode mode);
  ErrorCode close(std::uint64_t fd);
  std::pair<std::uint64_t, ErrorCode> seek(std::uint64_t fd, std::int64_t n, SeekWhence whence);

  // Reads up to len bytes at the current position; the returned buffer holds
  // exactly the transferred bytes. A fault after a non-empty prefix yields a
  // short read with Success; an error is returned only when nothing was
  // transferred.
  std::pair<std::vector<std::uint8_t>, ErrorCode> read(std::uint64_t fd, std::uint64_t len);

  // Writes buf at the current position, extending the file first when the
  // write reaches beyond the current end. Returns the transferred count;
  // same short-count convention as read().
  std::pair<std::uint64_t, ErrorCode> write(std::uint64_t fd, std::span<const std::uint8_t> buf);

  // Attribute snapshot through an open descriptor (valid for orphans too).
  std::pair<Inode, ErrorCode> fgetattr(std::uint64_t fd);

  const HandleTable& handles() const { return handles_; }
  Afs& afs() { return afs_; }
  const Afs& afs() const { return afs_; }

  const UserContext& user() const { return user_; }
  void set_user(UserContext user) { user_ = std::move(user); }

 private:
  std::pair<Ino, ErrorCode> walk_parent(const Path& path);
  bool is_open(Ino ino) const;
  void put_inode(Ino ino);
  std::uint64_t alloc_fd() const;
  const Meta& meta_of(Ino ino) const;

  Afs afs_;
  HandleTable handles_;
  UserContext user_;
};

const char* to_string(Mode mode);

}  // namespace vfsmodel

#include "vfsmodel/vfs.hpp"

#include <algorithm>

namespace vfsmodel {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::ReadOnly: return "ro";
    case Mode::WriteOnly: return "wo";
    case Mode::ReadWrite: return "rw";
  }
  return "?";
}

Path parse_path(std::string_view text, bool* ok) {
  *ok = false;
  Path path;
  if (text.empty() || text[0] != '/') return path;
  if (text == "/") {
    *ok = true;
    return path;
  }
  std::size_t pos = 1;
  while (pos <= text.size()) {
    std::size_t next = text.find('/', pos);
    if (next == std::string_view::npos) next = text.size();
    if (next == pos) return path;  // empty segment
    path.emplace_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  if (text.back() == '/') return Path{};  // trailing separator
  *ok = true;
  return path;
}

std::string path_to_string(const Path& path) {
  if (path.empty()) return "/";
  std::string out;
  for (const auto& seg : path) {
    out += '/';
    out += seg;
  }
  return out;
}

Vfs::Vfs(std::uint64_t page_size, FaultPlan faults, UserContext user)
    : afs_(page_size, std::move(faults)), user_(std::move(user)) {}

const Meta& Vfs::meta_of(Ino ino) const {
  if (auto it = afs_.state().dirs.find(ino); it != afs_.state().dirs.end()) {
    return it->second.meta;
  }
  return afs_.state().files.at(ino).meta;
}

bool Vfs::is_open(Ino ino) const {
  return std::any_of(handles_.begin(), handles_.end(),
                     [&](const auto& kv) { return kv.second.ino == ino; });
}

void Vfs::put_inode(Ino ino) {
  // Called after an entry or handle referring to a file went away. Eviction
  // must not fail here, so the link count is taken from the state directly
  // instead of going through the faultable readinode.
  if (afs_.is_file(ino) && afs_.link_count(ino) == 0 && !is_open(ino)) {
    afs_.evict(ino);
  }
}

std::uint64_t Vfs::alloc_fd() const {
  std::uint64_t fd = 0;
  for (const auto& [used, handle] : handles_) {
    if (used != fd) break;
    ++fd;
  }
  return fd;
}

std::pair<Ino, ErrorCode> Vfs::walk(const Path& path) {
  Ino cur = kRootIno;
  for (const auto& seg : path) {
    if (!valid_entry_name(seg)) return {0, ErrorCode::InvalidArgument};
    if (!afs_.is_dir(cur)) return {0, ErrorCode::NotDirectory};
    if (!may_exec(user_, meta_of(cur))) return {0, ErrorCode::AccessDenied};
    auto [dent, err] = afs_.lookup(cur, Dentry::negative(seg));
    if (err != ErrorCode::Success) return {0, err};
    cur = *dent.target;
  }
  return {cur, ErrorCode::Success};
}

std::pair<Ino, ErrorCode> Vfs::walk_parent(const Path& path) {
  Path prefix(path.begin(), path.end() - 1);
  auto [ino, err] = walk(prefix);
  if (err != ErrorCode::Success) return {0, err};
  if (!afs_.is_dir(ino)) return {0, ErrorCode::NotDirectory};
  return {ino, ErrorCode::Success};
}

ErrorCode Vfs::create(const Path& path, const Meta& md) {
  if (path.empty()) return ErrorCode::InvalidArgument;
  const std::string& name = path.back();
  if (!valid_entry_name(name)) return ErrorCode::InvalidArgument;
  auto [pino, werr] = walk_parent(path);
  if (werr != ErrorCode::Success) return werr;
  // vfs_maycreate: write permission on the parent and absence of the name.
  if (!may_write(user_, meta_of(pino))) return ErrorCode::AccessDenied;
  auto [dent, lerr] = afs_.lookup(pino, Dentry::negative(name));
  if (lerr == ErrorCode::Success) return ErrorCode::Exists;
  if (lerr != ErrorCode::NoEntry) return lerr;
  auto [cdent, cerr] = afs_.create(pino, md, Dentry::negative(name));
  return cerr;
}

ErrorCode Vfs::mkdir(const Path& path, const Meta& md) {
  if (path.empty()) return ErrorCode::InvalidArgument;
  const std::string& name = path.back();
  if (!valid_entry_name(name)) return ErrorCode::InvalidArgument;
  auto [pino, werr] = walk_parent(path);
  if (werr != ErrorCode::Success) return werr;
  if (!may_write(user_, meta_of(pino))) return ErrorCode::AccessDenied;
  auto [dent, lerr] = afs_.lookup(pino, Dentry::negative(name));
  if (lerr == ErrorCode::Success) return ErrorCode::Exists;
  if (lerr != ErrorCode::NoEntry) return lerr;
  auto [mdent, merr] = afs_.mkdir(pino, md, Dentry::negative(name));
  return merr;
}

ErrorCode Vfs::rmdir(const Path& path) {
  // The non-empty requirement protects the root directory.
  if (path.empty()) return ErrorCode::InvalidArgument;
  const std::string& name = path.back();
  if (!valid_entry_name(name)) return ErrorCode::InvalidArgument;
  auto [pino, werr] = walk_parent(path);
  if (werr != ErrorCode::Success) return werr;
  auto [dent, lerr] = afs_.lookup(pino, Dentry::negative(name));
  if (lerr != ErrorCode::Success) return lerr;
  Ino target = *dent.target;
  if (!afs_.is_dir(target)) return ErrorCode::NotDirectory;
  if (!may_write(user_, meta_of(pino))) return ErrorCode::AccessDenied;
  if (!afs_.state().dirs.at(target).entries.empty()) return ErrorCode::NotEmpty;
  return afs_.rmdir(pino, dent);
}

ErrorCode Vfs::link(const Path& oldpath, const Path& newpath) {
  if (oldpath.empty() || newpath.empty()) return ErrorCode::InvalidArgument;
  const std::string& newname = newpath.back();
  if (!valid_entry_name(newname)) return ErrorCode::InvalidArgument;
  auto [target, werr] = walk(oldpath);
  if (werr != ErrorCode::Success) return werr;
  if (afs_.is_dir(target)) return ErrorCode::IsDirectory;
  auto [pino, perr] = walk_parent(newpath);
  if (perr != ErrorCode::Success) return perr;
  if (!may_write(user_, meta_of(pino))) return ErrorCode::AccessDenied;
  auto [dent, lerr] = afs_.lookup(pino, Dentry::negative(newname));
  if (lerr == ErrorCode::Success) return ErrorCode::Exists;
  if (lerr != ErrorCode::NoEntry) return lerr;
  auto [ndent, nerr] =
      afs_.link(pino, Dentry::positive(oldpath.back(), target), Dentry::negative(newname));
  return nerr;
}

ErrorCode Vfs::unlink(const Path& path) {
  if (path.empty()) return ErrorCode::InvalidArgument;
  const std::string& name = path.back();
  if (!valid_entry_name(name)) return ErrorCode::InvalidArgument;
  auto [pino, werr] = walk_parent(path);
  if (werr != ErrorCode::Success) return werr;
  auto [dent, lerr] = afs_.lookup(pino, Dentry::negative(name));
  if (lerr != ErrorCode::Success) return lerr;
  Ino target = *dent.target;
  if (afs_.is_dir(target)) return ErrorCode::IsDirectory;
  if (!may_write(user_, meta_of(pino))) return ErrorCode::AccessDenied;
  ErrorCode err = afs_.unlink(pino, dent);
  if (err != ErrorCode::Success) return err;
  put_inode(target);
  return ErrorCode::Success;
}

ErrorCode Vfs::rename(const Path& oldpath, const Path& newpath) {
  if (oldpath.empty() || newpath.empty()) return ErrorCode::InvalidArgument;
  const std::string& oldname = oldpath.back();
  const std::string& newname = newpath.back();
  if (!valid_entry_name(oldname) || !valid_entry_name(newname)) {
    return ErrorCode::InvalidArgument;
  }
  auto [opino, oerr] = walk_parent(oldpath);
  if (oerr != ErrorCode::Success) return oerr;
  auto [odent, olerr] = afs_.lookup(opino, Dentry::negative(oldname));
  if (olerr != ErrorCode::Success) return olerr;
  Ino src = *odent.target;

  auto [npino, nerr] = walk_parent(newpath);
  if (nerr != ErrorCode::Success) return nerr;
  auto [ndent, nlerr] = afs_.lookup(npino, Dentry::negative(newname));
  if (nlerr != ErrorCode::Success && nlerr != ErrorCode::NoEntry) return nlerr;
  std::optional<Ino> dst;
  if (nlerr == ErrorCode::Success) dst = *ndent.target;

  // Source and destination denote the same entry or the same object: no-op.
  if (opino == npino && oldname == newname) return ErrorCode::Success;
  if (dst && *dst == src) return ErrorCode::Success;

  bool src_is_dir = afs_.is_dir(src);
  if (dst) {
    bool dst_is_dir = afs_.is_dir(*dst);
    if (src_is_dir && !dst_is_dir) return ErrorCode::NotDirectory;
    if (!src_is_dir && dst_is_dir) return ErrorCode::IsDirectory;
    if (dst_is_dir && !afs_.state().dirs.at(*dst).entries.empty()) {
      return ErrorCode::NotEmpty;
    }
  }
  if (src_is_dir) {
    // A directory must not be moved below itself.
    Ino cur = npino;
    if (cur == src) return ErrorCode::InvalidArgument;
    std::vector<Ino> stack{src};
    while (!stack.empty()) {
      Ino d = stack.back();
      stack.pop_back();
      auto it = afs_.state().dirs.find(d);
      if (it == afs_.state().dirs.end()) continue;
      for (const auto& [n, t] : it->second.entries) {
        if (t == npino) return ErrorCode::InvalidArgument;
        if (afs_.is_dir(t)) stack.push_back(t);
      }
    }
  }
  if (!may_write(user_, meta_of(opino)) || !may_write(user_, meta_of(npino))) {
    return ErrorCode::AccessDenied;
  }
  Dentry newdent = dst ? Dentry::positive(newname, *dst) : Dentry::negative(newname);
  ErrorCode err = afs_.rename(opino, Dentry::positive(oldname, src), npino, newdent);
  if (err != ErrorCode::Success) return err;
  if (dst && afs_.is_file(*dst)) put_inode(*dst);
  return ErrorCode::Success;
}

ErrorCode Vfs::truncate(const Path& path, std::uint64_t newsize) {
  auto [ino, werr] = walk(path);
  if (werr != ErrorCode::Success) return werr;
  if (afs_.is_dir(ino)) return ErrorCode::IsDirectory;
  if (!may_write(user_, meta_of(ino))) return ErrorCode::AccessDenied;
  return afs_.truncate(ino, newsize);
}

std::pair<Inode, ErrorCode> Vfs::getattr(const Path& path) {
  auto [ino, werr] = walk(path);
  if (werr != ErrorCode::Success) return {Inode{}, werr};
  return afs_.readinode(ino);
}

ErrorCode Vfs::setattr(const Path& path, const Meta& md) {
  auto [ino, werr] = walk(path);
  if (werr != ErrorCode::Success) return werr;
  // Only the owner may change attributes.
  if (user_.uid != meta_of(ino).owner) return ErrorCode::AccessDenied;
  Inode inode{ino, md, afs_.is_dir(ino), 0, 0};
  return afs_.writeinode(inode);
}

std::pair<std::vector<std::string>, ErrorCode> Vfs::readdir(const Path& path) {
  auto [ino, werr] = walk(path);
  if (werr != ErrorCode::Success) return {{}, werr};
  if (!afs_.is_dir(ino)) return {{}, ErrorCode::NotDirectory};
  if (!may_read(user_, meta_of(ino))) return {{}, ErrorCode::AccessDenied};
  return afs_.readdir(ino);
}

std::pair<std::uint64_t, ErrorCode> Vfs::open(const Path& path, Mode mode) {
  auto [ino, werr] = walk(path);
  if (werr != ErrorCode::Success) return {0, werr};
  if (afs_.is_dir(ino)) return {0, ErrorCode::IsDirectory};
  const Meta& md = meta_of(ino);
  if ((mode == Mode::ReadOnly || mode == Mode::ReadWrite) && !may_read(user_, md)) {
    return {0, ErrorCode::AccessDenied};
  }
  if ((mode == Mode::WriteOnly || mode == Mode::ReadWrite) && !may_write(user_, md)) {
    return {0, ErrorCode::AccessDenied};
  }
  std::uint64_t fd = alloc_fd();
  handles_[fd] = Handle{ino, 0, mode};
  return {fd, ErrorCode::Success};
}

ErrorCode Vfs::close(std::uint64_t fd) {
  auto it = handles_.find(fd);
  if (it == handles_.end()) return ErrorCode::BadDescriptor;
  Ino ino = it->second.ino;
  handles_.erase(it);
  put_inode(ino);
  return ErrorCode::Success;
}

std::pair<std::uint64_t, ErrorCode> Vfs::seek(std::uint64_t fd, std::int64_t n,
                                              SeekWhence whence) {
  auto it = handles_.find(fd);
  if (it == handles_.end()) return {0, ErrorCode::BadDescriptor};
  std::int64_t base = 0;
  switch (whence) {
    case SeekWhence::Set: base = 0; break;
    case SeekWhence::Cur: base = static_cast<std::int64_t>(it->second.pos); break;
    case SeekWhence::End:
      base = static_cast<std::int64_t>(afs_.state().files.at(it->second.ino).size);
      break;
  }
  std::int64_t newpos = base + n;
  if (newpos < 0) return {0, ErrorCode::InvalidArgument};
  it->second.pos = static_cast<std::uint64_t>(newpos);
  return {it->second.pos, ErrorCode::Success};
}

std::pair<std::vector<std::uint8_t>, ErrorCode> Vfs::read(std::uint64_t fd, std::uint64_t len) {
  auto it = handles_.find(fd);
  if (it == handles_.end()) return {{}, ErrorCode::BadDescriptor};
  Handle& h = it->second;
  if (h.mode == Mode::WriteOnly) return {{}, ErrorCode::AccessDenied};
  const std::uint64_t page_size = afs_.page_size();
  const std::uint64_t size = afs_.state().files.at(h.ino).size;
  const std::uint64_t start = h.pos;
  // Reads never go past the end of the file.
  const std::uint64_t end = std::min(start + len, size);
  std::vector<std::uint8_t> buf;
  if (end > start) buf.reserve(end - start);
  std::uint64_t total = 0;
  ErrorCode err = ErrorCode::Success;
  while (start + total < end) {
    std::uint64_t abspos = start + total;
    std::uint64_t pageno = abspos / page_size;
    std::uint64_t offset = abspos % page_size;
    // Bounds: bytes still requested and the end of the current page; the
    // end-of-file bound is already folded into `end`. Each page is loaded
    // at most once.
    std::uint64_t n = std::min(end - abspos, page_size - offset);
    auto [page, perr] = afs_.readpage(h.ino, pageno);
    if (perr != ErrorCode::Success) {
      err = perr;
      break;
    }
    buf.insert(buf.end(), page.begin() + static_cast<std::ptrdiff_t>(offset),
               page.begin() + static_cast<std::ptrdiff_t>(offset + n));
    total += n;
  }
  if (total == 0 && err != ErrorCode::Success) return {{}, err};
  // A partial transfer interrupted by a fault still counts as success.
  h.pos += total;
  return {std::move(buf), ErrorCode::Success};
}

std::pair<std::uint64_t, ErrorCode> Vfs::write(std::uint64_t fd,
                                               std::span<const std::uint8_t> buf) {
  auto it = handles_.find(fd);
  if (it == handles_.end()) return {0, ErrorCode::BadDescriptor};
  Handle& h = it->second;
  if (h.mode == Mode::ReadOnly) return {0, ErrorCode::AccessDenied};
  if (buf.empty()) return {0, ErrorCode::Success};
  const std::uint64_t page_size = afs_.page_size();
  const std::uint64_t start = h.pos;
  const std::uint64_t newend = start + buf.size();

  // Extend the file up front so that no page write ever allocates a page
  // beyond the size; a gap below the write position stays an unallocated
  // zero region. A fault on the extension leaves the state untouched.
  bool extended = false;
  if (newend > afs_.state().files.at(h.ino).size) {
    ErrorCode terr = afs_.truncate(h.ino, newend);
    if (terr != ErrorCode::Success) return {0, terr};
    extended = true;
  }

  std::uint64_t total = 0;
  ErrorCode err = ErrorCode::Success;
  while (total < buf.size()) {
    std::uint64_t abspos = start + total;
    std::uint64_t pageno = abspos / page_size;
    std::uint64_t offset = abspos % page_size;
    std::uint64_t n = std::min<std::uint64_t>(buf.size() - total, page_size - offset);
    Page page;
    if (n == page_size) {
      // Full-page chunk: the load can be skipped.
      page.assign(buf.begin() + static_cast<std::ptrdiff_t>(total),
                  buf.begin() + static_cast<std::ptrdiff_t>(total + n));
    } else {
      auto [loaded, rerr] = afs_.readpage(h.ino, pageno);
      if (rerr != ErrorCode::Success) {
        err = rerr;
        break;
      }
      page = std::move(loaded);
      std::copy(buf.begin() + static_cast<std::ptrdiff_t>(total),
                buf.begin() + static_cast<std::ptrdiff_t>(total + n),
                page.begin() + static_cast<std::ptrdiff_t>(offset));
    }
    ErrorCode werr = afs_.writepage(h.ino, pageno, page);
    if (werr != ErrorCode::Success) {
      err = werr;
      break;
    }
    total += n;
  }
  if (total == 0 && err != ErrorCode::Success) {
    // If the extension already took effect, report a zero-byte partial
    // write rather than an error, keeping "error implies unchanged state"
    // intact.
    return {0, extended ? ErrorCode::Success : err};
  }
  h.pos += total;
  return {total, ErrorCode::Success};
}

std::pair<Inode, ErrorCode> Vfs::fgetattr(std::uint64_t fd) {
  auto it = handles_.find(fd);
  if (it == handles_.end()) return {Inode{}, ErrorCode::BadDescriptor};
  return afs_.readinode(it->second.ino);
}

}  // namespace vfsmodel

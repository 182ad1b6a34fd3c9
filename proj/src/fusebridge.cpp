#include "vfsmodel/fusebridge.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <sys/mount.h>
#include <sys/stat.h>
#include <sys/uio.h>
#include <unistd.h>

#include <linux/fuse.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <vector>

namespace vfsmodel {

int to_errno(ErrorCode err) {
  switch (err) {
    case ErrorCode::Success: return 0;
    case ErrorCode::NoEntry: return ENOENT;
    case ErrorCode::Exists: return EEXIST;
    case ErrorCode::IsDirectory: return EISDIR;
    case ErrorCode::NotDirectory: return ENOTDIR;
    case ErrorCode::NotEmpty: return ENOTEMPTY;
    case ErrorCode::AccessDenied: return EACCES;
    case ErrorCode::BadDescriptor: return EBADF;
    case ErrorCode::InvalidArgument: return EINVAL;
    case ErrorCode::IoError: return EIO;
    case ErrorCode::NoSpace: return ENOSPC;
    case ErrorCode::NoMemory: return ENOMEM;
  }
  return EIO;
}

ErrorCode from_errno(int err) {
  switch (err) {
    case 0: return ErrorCode::Success;
    case ENOENT: return ErrorCode::NoEntry;
    case EEXIST: return ErrorCode::Exists;
    case EISDIR: return ErrorCode::IsDirectory;
    case ENOTDIR: return ErrorCode::NotDirectory;
    case ENOTEMPTY: return ErrorCode::NotEmpty;
    case EACCES: return ErrorCode::AccessDenied;
    case EBADF: return ErrorCode::BadDescriptor;
    case EINVAL: return ErrorCode::InvalidArgument;
    case EIO: return ErrorCode::IoError;
    case ENOSPC: return ErrorCode::NoSpace;
    case ENOMEM: return ErrorCode::NoMemory;
  }
  return ErrorCode::IoError;
}

namespace {

constexpr std::uint32_t kMaxWrite = 128 * 1024;

void fill_attr(const Inode& inode, std::uint64_t page_size, fuse_attr* attr) {
  std::memset(attr, 0, sizeof(*attr));
  attr->ino = inode.ino;
  attr->size = inode.size;
  attr->blocks = (inode.size + 511) / 512;
  attr->mode = (inode.isdir ? S_IFDIR : S_IFREG) | (inode.meta.perms & 0777);
  attr->nlink = static_cast<std::uint32_t>(inode.nlink);
  attr->uid = inode.meta.owner;
  attr->gid = inode.meta.group;
  attr->blksize = static_cast<std::uint32_t>(page_size);
}

Mode mode_from_flags(std::uint32_t flags) {
  switch (flags & O_ACCMODE) {
    case O_WRONLY: return Mode::WriteOnly;
    case O_RDWR: return Mode::ReadWrite;
    default: return Mode::ReadOnly;
  }
}

}  // namespace

FuseBridge::FuseBridge(MountConfig config)
    : config_(std::move(config)), vfs_(config_.page_size, config_.faults) {}

FuseBridge::~FuseBridge() {
  stop();
  if (devfd_ >= 0) ::close(devfd_);
}

bool FuseBridge::mount(std::string* error) {
  devfd_ = ::open("/dev/fuse", O_RDWR | O_CLOEXEC);
  if (devfd_ < 0) {
    if (error) *error = std::string("open /dev/fuse: ") + std::strerror(errno);
    return false;
  }
  char opts[128];
  std::snprintf(opts, sizeof opts, "fd=%d,rootmode=40755,user_id=%u,group_id=%u",
                devfd_, getuid(), getgid());
  if (::mount("fsmodel", config_.mountpoint.c_str(), "fuse", MS_NOSUID | MS_NODEV, opts) != 0) {
    if (error) *error = std::string("mount: ") + std::strerror(errno);
    ::close(devfd_);
    devfd_ = -1;
    return false;
  }
  mounted_ = true;
  return true;
}

void FuseBridge::stop() {
  if (mounted_) {
    mounted_ = false;
    ::umount2(config_.mountpoint.c_str(), MNT_DETACH);
  }
}

void FuseBridge::serve() {
  std::vector<char> buf(kMaxWrite + 8192);
  running_ = true;
  while (running_) {
    ssize_t n = ::read(devfd_, buf.data(), buf.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // ENODEV: unmounted
    }
    if (static_cast<std::size_t>(n) < sizeof(fuse_in_header)) continue;
    const auto* header = reinterpret_cast<const fuse_in_header*>(buf.data());
    dispatch(header, buf.data() + sizeof(fuse_in_header), n - sizeof(fuse_in_header));
  }
  running_ = false;
}

Path FuseBridge::node_path(std::uint64_t nodeid) const {
  Path path;
  while (nodeid != FUSE_ROOT_ID) {
    auto it = nodes_.find(nodeid);
    if (it == nodes_.end()) return Path{};  // stale node; resolves to root
    path.push_back(it->second.name);
    nodeid = it->second.parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::uint64_t FuseBridge::remember_node(std::uint64_t parent, const std::string& name) {
  auto key = std::make_pair(parent, name);
  auto it = by_name_.find(key);
  if (it != by_name_.end()) {
    nodes_.at(it->second).lookups++;
    return it->second;
  }
  std::uint64_t nodeid = next_nodeid_++;
  nodes_[nodeid] = NodeEntry{parent, name, 1};
  by_name_[key] = nodeid;
  return nodeid;
}

void FuseBridge::forget_node(std::uint64_t nodeid, std::uint64_t count) {
  auto it = nodes_.find(nodeid);
  if (it == nodes_.end()) return;
  if (it->second.lookups > count) {
    it->second.lookups -= count;
    return;
  }
  auto key = std::make_pair(it->second.parent, it->second.name);
  auto by = by_name_.find(key);
  if (by != by_name_.end() && by->second == nodeid) by_name_.erase(by);
  nodes_.erase(it);
}

void FuseBridge::unindex(std::uint64_t parent, const std::string& name) {
  by_name_.erase(std::make_pair(parent, name));
}

void FuseBridge::reply(std::uint64_t unique, const void* data, std::size_t len) {
  fuse_out_header out{};
  out.len = static_cast<std::uint32_t>(sizeof(out) + len);
  out.error = 0;
  out.unique = unique;
  iovec iov[2] = {{&out, sizeof(out)}, {const_cast<void*>(data), len}};
  ssize_t n = ::writev(devfd_, iov, len > 0 ? 2 : 1);
  static_cast<void>(n);  // the kernel connection may already be gone
}

void FuseBridge::reply_err(std::uint64_t unique, int err) {
  fuse_out_header out{};
  out.len = sizeof(out);
  out.error = -err;
  out.unique = unique;
  ssize_t n = ::write(devfd_, &out, sizeof(out));
  static_cast<void>(n);
}

void FuseBridge::dispatch(const void* header_ptr, const void* payload, std::size_t payload_len) {
  const auto* hdr = static_cast<const fuse_in_header*>(header_ptr);
  const char* data = static_cast<const char*>(payload);
  const std::uint64_t unique = hdr->unique;

  // The requesting process becomes the subject of all permission checks.
  vfs_.set_user(UserContext{hdr->uid, {hdr->gid}});

  auto reply_entry = [&](const Path& path, std::uint64_t parent, const std::string& name) {
    auto [inode, err] = vfs_.getattr(path);
    if (err != ErrorCode::Success) {
      reply_err(unique, to_errno(err));
      return;
    }
    fuse_entry_out out{};
    out.nodeid = remember_node(parent, name);
    out.attr_valid = 1;
    fill_attr(inode, vfs_.afs().page_size(), &out.attr);
    reply(unique, &out, sizeof(out));
  };

  switch (hdr->opcode) {
    case FUSE_INIT: {
      const auto* in = reinterpret_cast<const fuse_init_in*>(data);
      fuse_init_out out{};
      out.major = FUSE_KERNEL_VERSION;
      out.minor = FUSE_KERNEL_MINOR_VERSION;
      if (in->major < 7) {
        reply_err(unique, EPROTO);
        return;
      }
      if (in->major > 7) {
        // Kernel is newer; reply with our major and wait for the re-sent INIT.
        reply(unique, &out, sizeof(out));
        return;
      }
      out.max_readahead = in->max_readahead;
      out.flags = 0;
      out.max_write = kMaxWrite;
      out.time_gran = 1;
      std::size_t out_len = sizeof(out);
      if (in->minor < 5) {
        out_len = FUSE_COMPAT_INIT_OUT_SIZE;
      } else if (in->minor < 23) {
        out_len = FUSE_COMPAT_22_INIT_OUT_SIZE;
      }
      reply(unique, &out, out_len);
      return;
    }
    case FUSE_DESTROY:
      reply(unique, nullptr, 0);
      running_ = false;
      return;
    case FUSE_FORGET: {
      const auto* in = reinterpret_cast<const fuse_forget_in*>(data);
      forget_node(hdr->nodeid, in->nlookup);
      return;  // no reply
    }
    case FUSE_BATCH_FORGET: {
      const auto* in = reinterpret_cast<const fuse_batch_forget_in*>(data);
      const auto* one = reinterpret_cast<const fuse_forget_one*>(data + sizeof(*in));
      for (std::uint32_t i = 0; i < in->count; ++i) {
        forget_node(one[i].nodeid, one[i].nlookup);
      }
      return;  // no reply
    }
    case FUSE_LOOKUP: {
      std::string name(data);
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      reply_entry(path, hdr->nodeid, name);
      return;
    }
    case FUSE_GETATTR: {
      const auto* in = reinterpret_cast<const fuse_getattr_in*>(data);
      std::pair<Inode, ErrorCode> res;
      if (in->getattr_flags & FUSE_GETATTR_FH) {
        res = vfs_.fgetattr(in->fh);
      } else {
        res = vfs_.getattr(node_path(hdr->nodeid));
      }
      if (res.second != ErrorCode::Success) {
        reply_err(unique, to_errno(res.second));
        return;
      }
      fuse_attr_out out{};
      out.attr_valid = 1;
      fill_attr(res.first, vfs_.afs().page_size(), &out.attr);
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_SETATTR: {
      const auto* in = reinterpret_cast<const fuse_setattr_in*>(data);
      Path path = node_path(hdr->nodeid);
      if (in->valid & (FATTR_MODE | FATTR_UID | FATTR_GID)) {
        auto [inode, gerr] = vfs_.getattr(path);
        if (gerr != ErrorCode::Success) {
          reply_err(unique, to_errno(gerr));
          return;
        }
        Meta md = inode.meta;
        if (in->valid & FATTR_MODE) md.perms = static_cast<std::uint16_t>(in->mode & 0777);
        if (in->valid & FATTR_UID) md.owner = in->uid;
        if (in->valid & FATTR_GID) md.group = in->gid;
        ErrorCode serr = vfs_.setattr(path, md);
        if (serr != ErrorCode::Success) {
          reply_err(unique, to_errno(serr));
          return;
        }
      }
      if (in->valid & FATTR_SIZE) {
        ErrorCode terr = vfs_.truncate(path, in->size);
        if (terr != ErrorCode::Success) {
          reply_err(unique, to_errno(terr));
          return;
        }
      }
      auto [inode, err] = vfs_.getattr(path);
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      fuse_attr_out out{};
      out.attr_valid = 1;
      fill_attr(inode, vfs_.afs().page_size(), &out.attr);
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_MKNOD: {
      const auto* in = reinterpret_cast<const fuse_mknod_in*>(data);
      if (!S_ISREG(in->mode)) {
        reply_err(unique, EPERM);
        return;
      }
      std::string name(data + sizeof(*in));
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      Meta md{hdr->uid, hdr->gid, static_cast<std::uint16_t>(in->mode & 0777)};
      ErrorCode err = vfs_.create(path, md);
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      reply_entry(path, hdr->nodeid, name);
      return;
    }
    case FUSE_MKDIR: {
      const auto* in = reinterpret_cast<const fuse_mkdir_in*>(data);
      std::string name(data + sizeof(*in));
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      Meta md{hdr->uid, hdr->gid, static_cast<std::uint16_t>(in->mode & 0777)};
      ErrorCode err = vfs_.mkdir(path, md);
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      reply_entry(path, hdr->nodeid, name);
      return;
    }
    case FUSE_CREATE: {
      const auto* in = reinterpret_cast<const fuse_create_in*>(data);
      std::string name(data + sizeof(*in));
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      Meta md{hdr->uid, hdr->gid, static_cast<std::uint16_t>(in->mode & 0777)};
      ErrorCode cerr = vfs_.create(path, md);
      if (cerr == ErrorCode::Exists && (in->flags & O_EXCL)) {
        reply_err(unique, EEXIST);
        return;
      }
      if (cerr != ErrorCode::Success && cerr != ErrorCode::Exists) {
        reply_err(unique, to_errno(cerr));
        return;
      }
      auto [inode, gerr] = vfs_.getattr(path);
      if (gerr != ErrorCode::Success) {
        reply_err(unique, to_errno(gerr));
        return;
      }
      auto [fd, oerr] = vfs_.open(path, mode_from_flags(in->flags));
      if (oerr != ErrorCode::Success) {
        reply_err(unique, to_errno(oerr));
        return;
      }
      struct {
        fuse_entry_out entry;
        fuse_open_out open;
      } out{};
      out.entry.nodeid = remember_node(hdr->nodeid, name);
      out.entry.attr_valid = 1;
      fill_attr(inode, vfs_.afs().page_size(), &out.entry.attr);
      out.open.fh = fd;
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_OPEN: {
      const auto* in = reinterpret_cast<const fuse_open_in*>(data);
      auto [fd, err] = vfs_.open(node_path(hdr->nodeid), mode_from_flags(in->flags));
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      fuse_open_out out{};
      out.fh = fd;
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_RELEASE: {
      const auto* in = reinterpret_cast<const fuse_release_in*>(data);
      vfs_.close(in->fh);
      reply(unique, nullptr, 0);
      return;
    }
    case FUSE_READ: {
      const auto* in = reinterpret_cast<const fuse_read_in*>(data);
      // The protocol carries explicit offsets; seek keeps the model's
      // sequential-position semantics intact.
      auto [pos, serr] = vfs_.seek(in->fh, static_cast<std::int64_t>(in->offset),
                                   SeekWhence::Set);
      if (serr != ErrorCode::Success) {
        reply_err(unique, to_errno(serr));
        return;
      }
      std::vector<std::uint8_t> result;
      std::uint64_t remaining = in->size;
      while (remaining > 0) {
        auto [chunk, rerr] = vfs_.read(in->fh, remaining);
        if (rerr != ErrorCode::Success) {
          if (result.empty()) {
            reply_err(unique, to_errno(rerr));
            return;
          }
          break;
        }
        if (chunk.empty()) break;  // EOF
        remaining -= chunk.size();
        result.insert(result.end(), chunk.begin(), chunk.end());
      }
      reply(unique, result.data(), result.size());
      return;
    }
    case FUSE_WRITE: {
      const auto* in = reinterpret_cast<const fuse_write_in*>(data);
      const auto* bytes = reinterpret_cast<const std::uint8_t*>(data + sizeof(*in));
      auto [pos, serr] = vfs_.seek(in->fh, static_cast<std::int64_t>(in->offset),
                                   SeekWhence::Set);
      if (serr != ErrorCode::Success) {
        reply_err(unique, to_errno(serr));
        return;
      }
      std::uint64_t total = 0;
      while (total < in->size) {
        auto [len, werr] =
            vfs_.write(in->fh, std::span<const std::uint8_t>(bytes + total, in->size - total));
        if (werr != ErrorCode::Success) {
          if (total == 0) {
            reply_err(unique, to_errno(werr));
            return;
          }
          break;
        }
        if (len == 0) break;
        total += len;
      }
      fuse_write_out out{};
      out.size = static_cast<std::uint32_t>(total);
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_FLUSH:
    case FUSE_FSYNC:
    case FUSE_FSYNCDIR:
      reply(unique, nullptr, 0);
      return;
    case FUSE_UNLINK: {
      std::string name(data);
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      ErrorCode err = vfs_.unlink(path);
      if (err == ErrorCode::Success) unindex(hdr->nodeid, name);
      reply_err(unique, to_errno(err));
      return;
    }
    case FUSE_RMDIR: {
      std::string name(data);
      Path path = node_path(hdr->nodeid);
      path.push_back(name);
      ErrorCode err = vfs_.rmdir(path);
      if (err == ErrorCode::Success) unindex(hdr->nodeid, name);
      reply_err(unique, to_errno(err));
      return;
    }
    case FUSE_RENAME:
    case FUSE_RENAME2: {
      std::uint64_t newdir;
      const char* names;
      if (hdr->opcode == FUSE_RENAME2) {
        const auto* in = reinterpret_cast<const fuse_rename2_in*>(data);
        if (in->flags != 0) {
          reply_err(unique, EINVAL);
          return;
        }
        newdir = in->newdir;
        names = data + sizeof(*in);
      } else {
        const auto* in = reinterpret_cast<const fuse_rename_in*>(data);
        newdir = in->newdir;
        names = data + sizeof(*in);
      }
      std::string oldname(names);
      std::string newname(names + oldname.size() + 1);
      Path oldpath = node_path(hdr->nodeid);
      oldpath.push_back(oldname);
      Path newpath = node_path(newdir);
      newpath.push_back(newname);
      ErrorCode err = vfs_.rename(oldpath, newpath);
      if (err == ErrorCode::Success) {
        auto key = std::make_pair(hdr->nodeid, oldname);
        auto it = by_name_.find(key);
        unindex(newdir, newname);
        if (it != by_name_.end()) {
          std::uint64_t nodeid = it->second;
          by_name_.erase(it);
          nodes_.at(nodeid).parent = newdir;
          nodes_.at(nodeid).name = newname;
          by_name_[std::make_pair(newdir, newname)] = nodeid;
        }
      }
      reply_err(unique, to_errno(err));
      return;
    }
    case FUSE_LINK: {
      const auto* in = reinterpret_cast<const fuse_link_in*>(data);
      std::string newname(data + sizeof(*in));
      Path oldpath = node_path(in->oldnodeid);
      Path newpath = node_path(hdr->nodeid);
      newpath.push_back(newname);
      ErrorCode err = vfs_.link(oldpath, newpath);
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      reply_entry(newpath, hdr->nodeid, newname);
      return;
    }
    case FUSE_OPENDIR: {
      auto [inode, err] = vfs_.getattr(node_path(hdr->nodeid));
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      if (!inode.isdir) {
        reply_err(unique, ENOTDIR);
        return;
      }
      fuse_open_out out{};
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_RELEASEDIR:
      reply(unique, nullptr, 0);
      return;
    case FUSE_READDIR: {
      const auto* in = reinterpret_cast<const fuse_read_in*>(data);
      Path path = node_path(hdr->nodeid);
      auto [names, err] = vfs_.readdir(path);
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      std::vector<std::string> all = {".", ".."};
      all.insert(all.end(), names.begin(), names.end());
      std::vector<char> out;
      for (std::uint64_t idx = in->offset; idx < all.size(); ++idx) {
        const std::string& name = all[idx];
        std::size_t entry_len = FUSE_NAME_OFFSET + name.size();
        std::size_t padded = FUSE_DIRENT_ALIGN(entry_len);
        if (out.size() + padded > in->size) break;
        fuse_dirent dent{};
        dent.ino = idx < 2 ? FUSE_ROOT_ID : 0;
        if (idx >= 2) {
          Path child = path;
          child.push_back(name);
          auto [cinode, cerr] = vfs_.getattr(child);
          if (cerr == ErrorCode::Success) {
            dent.ino = cinode.ino;
            dent.type = cinode.isdir ? DT_DIR : DT_REG;
          }
        } else {
          dent.type = DT_DIR;
        }
        dent.off = idx + 1;
        dent.namelen = static_cast<std::uint32_t>(name.size());
        std::size_t at = out.size();
        out.resize(out.size() + padded, 0);
        std::memcpy(out.data() + at, &dent, FUSE_NAME_OFFSET);
        std::memcpy(out.data() + at + FUSE_NAME_OFFSET, name.data(), name.size());
      }
      reply(unique, out.data(), out.size());
      return;
    }
    case FUSE_ACCESS: {
      const auto* in = reinterpret_cast<const fuse_access_in*>(data);
      auto [inode, err] = vfs_.getattr(node_path(hdr->nodeid));
      if (err != ErrorCode::Success) {
        reply_err(unique, to_errno(err));
        return;
      }
      UserContext ctx{hdr->uid, {hdr->gid}};
      bool ok = true;
      if (in->mask & R_OK) ok = ok && may_read(ctx, inode.meta);
      if (in->mask & W_OK) ok = ok && may_write(ctx, inode.meta);
      if (in->mask & X_OK) ok = ok && may_exec(ctx, inode.meta);
      reply_err(unique, ok ? 0 : EACCES);
      return;
    }
    case FUSE_STATFS: {
      fuse_statfs_out out{};
      out.st.blocks = 1 << 20;
      out.st.bfree = 1 << 19;
      out.st.bavail = 1 << 19;
      out.st.files = 1 << 16;
      out.st.ffree = 1 << 15;
      out.st.bsize = static_cast<std::uint32_t>(vfs_.afs().page_size());
      out.st.namelen = 255;
      out.st.frsize = static_cast<std::uint32_t>(vfs_.afs().page_size());
      reply(unique, &out, sizeof(out));
      return;
    }
    case FUSE_GETXATTR:
    case FUSE_SETXATTR:
    case FUSE_LISTXATTR:
    case FUSE_REMOVEXATTR:
      reply_err(unique, ENOSYS);
      return;
    case FUSE_INTERRUPT:
      return;  // requests complete synchronously; nothing to interrupt
    default:
      reply_err(unique, ENOSYS);
      return;
  }
  (void)payload_len;
}

}  // namespace vfsmodel

#include "vfsmodel/afs.hpp"

#include <algorithm>
#include <string>

namespace vfsmodel {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw PreconditionViolation(std::string("afs precondition violated: ") + what);
}

}  // namespace

Afs::Afs(std::uint64_t page_size, FaultPlan faults)
    : page_size_(page_size), faults_(std::move(faults)) {
  if (page_size_ == 0) throw std::invalid_argument("page size must be positive");
  state_.dirs[kRootIno] = Dir{Meta{0, 0, 0755}, {}};
}

Ino Afs::alloc_ino() const {
  // Smallest unallocated number >= 1; keeps allocation reproducible.
  Ino candidate = 1;
  auto d = state_.dirs.begin();
  auto f = state_.files.begin();
  for (;;) {
    while (d != state_.dirs.end() && d->first < candidate) ++d;
    while (f != state_.files.end() && f->first < candidate) ++f;
    if (d != state_.dirs.end() && d->first == candidate) {
      ++candidate;
      continue;
    }
    if (f != state_.files.end() && f->first == candidate) {
      ++candidate;
      continue;
    }
    return candidate;
  }
}

std::uint64_t Afs::link_count(Ino ino) const {
  std::uint64_t count = 0;
  for (const auto& [dino, dir] : state_.dirs) {
    for (const auto& [name, target] : dir.entries) {
      if (target == ino) ++count;
    }
  }
  return count;
}

Inode Afs::make_inode(Ino ino) const {
  if (auto it = state_.dirs.find(ino); it != state_.dirs.end()) {
    // Directory nlink is a reporting convention: one for the node itself
    // plus one if it has a parent. The single-parent invariant is the real
    // constraint.
    return Inode{ino, it->second.meta, true, 1 + link_count(ino),
                 it->second.entries.size()};
  }
  const File& f = state_.files.at(ino);
  return Inode{ino, f.meta, false, link_count(ino), f.size};
}

bool Afs::would_create_cycle(Ino moved_dir, Ino new_parent) const {
  if (moved_dir == new_parent) return true;
  auto it = state_.dirs.find(moved_dir);
  if (it == state_.dirs.end()) return false;
  for (const auto& [name, target] : it->second.entries) {
    if (would_create_cycle(target, new_parent)) return true;
  }
  return false;
}

std::pair<Dentry, ErrorCode> Afs::lookup(Ino pino, const Dentry& dent) {
  require(is_dir(pino), "lookup: parent is a directory");
  if (auto f = faults_.next(AfsOp::Lookup)) return {Dentry::negative(dent.name), *f};
  const Dir& dir = state_.dirs.at(pino);
  auto it = dir.entries.find(dent.name);
  if (it == dir.entries.end()) {
    return {Dentry::negative(dent.name), ErrorCode::NoEntry};
  }
  return {Dentry::positive(dent.name, it->second), ErrorCode::Success};
}

std::pair<Dentry, ErrorCode> Afs::create(Ino pino, const Meta& md, const Dentry& dent) {
  require(is_dir(pino), "create: parent is a directory");
  require(valid_entry_name(dent.name), "create: valid entry name");
  require(!state_.dirs.at(pino).entries.contains(dent.name), "create: name absent");
  if (auto f = faults_.next(AfsOp::Create)) return {Dentry::negative(dent.name), *f};
  Ino ino = alloc_ino();
  state_.files[ino] = File{md, 0, {}};
  state_.dirs.at(pino).entries[dent.name] = ino;
  return {Dentry::positive(dent.name, ino), ErrorCode::Success};
}

std::pair<Dentry, ErrorCode> Afs::mkdir(Ino pino, const Meta& md, const Dentry& dent) {
  require(is_dir(pino), "mkdir: parent is a directory");
  require(valid_entry_name(dent.name), "mkdir: valid entry name");
  require(!state_.dirs.at(pino).entries.contains(dent.name), "mkdir: name absent");
  if (auto f = faults_.next(AfsOp::Mkdir)) return {Dentry::negative(dent.name), *f};
  Ino ino = alloc_ino();
  state_.dirs[ino] = Dir{md, {}};
  state_.dirs.at(pino).entries[dent.name] = ino;
  return {Dentry::positive(dent.name, ino), ErrorCode::Success};
}

ErrorCode Afs::rmdir(Ino pino, const Dentry& dent) {
  require(is_dir(pino), "rmdir: parent is a directory");
  require(dent.is_positive(), "rmdir: dentry is positive");
  const Dir& parent = state_.dirs.at(pino);
  auto it = parent.entries.find(dent.name);
  require(it != parent.entries.end() && it->second == *dent.target,
          "rmdir: dentry consistent with parent");
  require(*dent.target != kRootIno, "rmdir: target is not the root");
  require(is_dir(*dent.target), "rmdir: target is a directory");
  require(state_.dirs.at(*dent.target).entries.empty(), "rmdir: target is empty");
  if (auto f = faults_.next(AfsOp::Rmdir)) return *f;
  state_.dirs.at(pino).entries.erase(dent.name);
  state_.dirs.erase(*dent.target);
  return ErrorCode::Success;
}

std::pair<Dentry, ErrorCode> Afs::link(Ino pino, const Dentry& olddent, const Dentry& newdent) {
  require(is_dir(pino), "link: parent is a directory");
  require(olddent.is_positive(), "link: old dentry is positive");
  require(is_file(*olddent.target), "link: target is a file");
  require(valid_entry_name(newdent.name), "link: valid entry name");
  require(!state_.dirs.at(pino).entries.contains(newdent.name), "link: new name absent");
  if (auto f = faults_.next(AfsOp::Link)) return {Dentry::negative(newdent.name), *f};
  state_.dirs.at(pino).entries[newdent.name] = *olddent.target;
  return {Dentry::positive(newdent.name, *olddent.target), ErrorCode::Success};
}

ErrorCode Afs::unlink(Ino pino, const Dentry& dent) {
  require(is_dir(pino), "unlink: parent is a directory");
  require(dent.is_positive(), "unlink: dentry is positive");
  const Dir& parent = state_.dirs.at(pino);
  auto it = parent.entries.find(dent.name);
  require(it != parent.entries.end() && it->second == *dent.target,
          "unlink: dentry consistent with parent");
  require(is_file(*dent.target), "unlink: target is a file");
  if (auto f = faults_.next(AfsOp::Unlink)) return *f;
  state_.dirs.at(pino).entries.erase(dent.name);
  return ErrorCode::Success;
}

ErrorCode Afs::rename(Ino oldino, const Dentry& olddent, Ino newino, const Dentry& newdent) {
  require(is_dir(oldino), "rename: old parent is a directory");
  require(is_dir(newino), "rename: new parent is a directory");
  require(olddent.is_positive(), "rename: old dentry is positive");
  {
    const Dir& oldparent = state_.dirs.at(oldino);
    auto it = oldparent.entries.find(olddent.name);
    require(it != oldparent.entries.end() && it->second == *olddent.target,
            "rename: old dentry consistent with parent");
  }
  require(valid_entry_name(newdent.name), "rename: valid entry name");
  Ino src = *olddent.target;
  if (newdent.is_positive()) {
    Ino dst = *newdent.target;
    const Dir& newparent = state_.dirs.at(newino);
    auto it = newparent.entries.find(newdent.name);
    require(it != newparent.entries.end() && it->second == dst,
            "rename: new dentry consistent with parent");
    require(src != dst, "rename: source and destination are distinct");
    require(is_dir(src) == is_dir(dst), "rename: overwrite target has same kind");
    if (is_dir(dst)) {
      require(state_.dirs.at(dst).entries.empty(), "rename: overwritten directory is empty");
    }
  } else {
    require(!state_.dirs.at(newino).entries.contains(newdent.name),
            "rename: new name absent");
  }
  if (is_dir(src) && oldino != newino) {
    require(!would_create_cycle(src, newino), "rename: move does not create a cycle");
  }
  if (auto f = faults_.next(AfsOp::Rename)) return *f;

  // The two modifications are sequential; the order matters when both
  // affect the same parent directory.
  std::optional<Ino> displaced;
  if (newdent.is_positive()) displaced = *newdent.target;
  state_.dirs.at(oldino).entries.erase(olddent.name);
  state_.dirs.at(newino).entries[newdent.name] = src;
  if (displaced && is_dir(*displaced)) {
    // An overwritten (empty) directory is deallocated here; an overwritten
    // file becomes an orphan pending evict.
    state_.dirs.erase(*displaced);
  }
  return ErrorCode::Success;
}

std::pair<Inode, ErrorCode> Afs::readinode(Ino ino) {
  require(allocated(ino), "readinode: ino allocated");
  if (auto f = faults_.next(AfsOp::Readinode)) return {Inode{}, *f};
  return {make_inode(ino), ErrorCode::Success};
}

ErrorCode Afs::writeinode(const Inode& inode) {
  require(allocated(inode.ino), "writeinode: ino allocated");
  require(inode.isdir == is_dir(inode.ino), "writeinode: kind matches store");
  if (auto f = faults_.next(AfsOp::Writeinode)) return *f;
  if (inode.isdir) {
    state_.dirs.at(inode.ino).meta = inode.meta;
  } else {
    state_.files.at(inode.ino).meta = inode.meta;
  }
  return ErrorCode::Success;
}

std::pair<Page, ErrorCode> Afs::readpage(Ino ino, std::uint64_t pageno) {
  require(is_file(ino), "readpage: ino is a file");
  if (auto f = faults_.next(AfsOp::Readpage)) return {Page{}, *f};
  const File& file = state_.files.at(ino);
  auto it = file.pages.find(pageno);
  if (it == file.pages.end()) {
    return {Page(page_size_, 0), ErrorCode::Success};
  }
  return {it->second, ErrorCode::Success};
}

ErrorCode Afs::writepage(Ino ino, std::uint64_t pageno, const Page& pg) {
  require(is_file(ino), "writepage: ino is a file");
  require(pg.size() == page_size_, "writepage: page has PAGE_SIZE bytes");
  if (auto f = faults_.next(AfsOp::Writepage)) return *f;
  state_.files.at(ino).pages[pageno] = pg;
  return ErrorCode::Success;
}

ErrorCode Afs::truncate(Ino ino, std::uint64_t newsize) {
  require(is_file(ino), "truncate: ino is a file");
  if (auto f = faults_.next(AfsOp::Truncate)) return *f;
  File& file = state_.files.at(ino);
  file.size = newsize;
  // Drop pages entirely beyond the new size.
  std::erase_if(file.pages, [&](const auto& kv) { return kv.first * page_size_ >= newsize; });
  // Zero the tail of the last page beyond the new size.
  if (newsize % page_size_ != 0) {
    auto it = file.pages.find(newsize / page_size_);
    if (it != file.pages.end()) {
      std::fill(it->second.begin() + static_cast<std::ptrdiff_t>(newsize % page_size_),
                it->second.end(), std::uint8_t{0});
    }
  }
  return ErrorCode::Success;
}

std::pair<std::vector<std::string>, ErrorCode> Afs::readdir(Ino ino) {
  require(is_dir(ino), "readdir: ino is a directory");
  if (auto f = faults_.next(AfsOp::Readdir)) return {{}, *f};
  std::vector<std::string> names;
  const Dir& dir = state_.dirs.at(ino);
  names.reserve(dir.entries.size());
  for (const auto& [name, target] : dir.entries) names.push_back(name);
  return {std::move(names), ErrorCode::Success};
}

void Afs::evict(Ino ino) {
  require(is_file(ino), "evict: ino is a file");
  require(link_count(ino) == 0, "evict: ino is an orphan");
  state_.files.erase(ino);
  ++evictions_;
}

}  // namespace vfsmodel

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vfsmodel/faults.hpp"
#include "vfsmodel/types.hpp"

namespace vfsmodel {

// In-memory reference implementation of the abstract file-system interface.
//
// Every operation is guarded by a precondition; callers (the VFS layer) are
// responsible for establishing it. A violated precondition is a contract
// violation and throws PreconditionViolation, never an error code.
//
// All operations except evict() consult the fault plan on entry and may
// return an injected low-level error with the state unchanged.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Afs {
 public:
  explicit Afs(std::uint64_t page_size = kDefaultPageSize, FaultPlan faults = FaultPlan());

  // pre: pino is a directory.
  std::pair<Dentry, ErrorCode> lookup(Ino pino, const Dentry& dent);

  // pre: pino is a directory; dent.name absent from it.
  // Allocates a fresh file inode (size 0, no pages) under dent.name.
  std::pair<Dentry, ErrorCode> create(Ino pino, const Meta& md, const Dentry& dent);

  // pre: pino is a directory; dent.name absent from it.
  std::pair<Dentry, ErrorCode> mkdir(Ino pino, const Meta& md, const Dentry& dent);

  // pre: dent is a consistent positive entry of pino targeting an empty
  // directory other than the root.
  ErrorCode rmdir(Ino pino, const Dentry& dent);

  // pre: pino is a directory; olddent targets a file (directories would
  // break the single-parent invariant); newdent.name absent from pino.
  std::pair<Dentry, ErrorCode> link(Ino pino, const Dentry& olddent, const Dentry& newdent);

  // pre: dent is a consistent positive entry of pino targeting a file.
  // Removes the entry only; the file object is reclaimed by evict().
  ErrorCode unlink(Ino pino, const Dentry& dent);

  // pre: both parents are directories; olddent is a consistent positive
  // entry of oldino; if newdent is positive it is a consistent entry of
  // newino of the same kind as the source (an overwritten directory must be
  // empty) and distinct from the source; moving a directory must not create
  // a cycle.
  ErrorCode rename(Ino oldino, const Dentry& olddent, Ino newino, const Dentry& newdent);

  // pre: ino allocated.
  std::pair<Inode, ErrorCode> readinode(Ino ino);

  // pre: inode.ino allocated and inode.isdir matches the owning store.
  // Updates metadata only; sizes change exclusively through truncate().
  ErrorCode writeinode(const Inode& inode);

  // pre: ino is a file. Absent pages read as all zeros.
  std::pair<Page, ErrorCode> readpage(Ino ino, std::uint64_t pageno);

  // pre: ino is a file; pg.size() == page_size(). Does not change the size.
  ErrorCode writepage(Ino ino, std::uint64_t pageno, const Page& pg);

  // pre: ino is a file. Drops pages beyond newsize and zeroes the tail of
  // the new last page; growing allocates nothing.
  ErrorCode truncate(Ino ino, std::uint64_t newsize);

  // pre: ino is a directory. Names in lexicographic byte order.
  std::pair<std::vector<std::string>, ErrorCode> readdir(Ino ino);

  // pre: ino is a file with no inbound directory entry (an orphan).
  // Never consults the fault plan and cannot fail.
  void evict(Ino ino);

  const AfsState& state() const { return state_; }
  std::uint64_t page_size() const { return page_size_; }
  FaultPlan& faults() { return faults_; }
  void set_faults(FaultPlan plan) { faults_ = std::move(plan); }

  // Number of directory entries targeting ino, across all directories.
  std::uint64_t link_count(Ino ino) const;

  bool is_dir(Ino ino) const { return state_.dirs.contains(ino); }
  bool is_file(Ino ino) const { return state_.files.contains(ino); }
  bool allocated(Ino ino) const { return is_dir(ino) || is_file(ino); }

  std::uint64_t evict_count() const { return evictions_; }

 private:
  Ino alloc_ino() const;
  Inode make_inode(Ino ino) const;
  bool would_create_cycle(Ino moved_dir, Ino new_parent) const;

  std::uint64_t page_size_;
  FaultPlan faults_;
  AfsState state_;
  std::uint64_t evictions_ = 0;
};

}  // namespace vfsmodel

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "vfsmodel/faults.hpp"
#include "vfsmodel/vfs.hpp"

namespace vfsmodel {

struct MountConfig {
  std::string mountpoint;
  std::uint64_t page_size = kDefaultPageSize;
  FaultPlan faults;
};

// Maps model error codes onto host errno values (a bijection on the set).
int to_errno(ErrorCode err);
ErrorCode from_errno(int err);

// Mounts the in-memory model into the host directory tree by speaking the
// kernel FUSE protocol over /dev/fuse directly. Requests are handled one at
// a time on the serve() thread, matching the single-threaded contract of
// the core. The backing store is purely in memory; unmounting discards it.
class FuseBridge {
 public:
  explicit FuseBridge(MountConfig config);
  ~FuseBridge();

  FuseBridge(const FuseBridge&) = delete;
  FuseBridge& operator=(const FuseBridge&) = delete;

  // Opens /dev/fuse and mounts. Returns false with a message on failure.
  bool mount(std::string* error);

  // Request loop; returns when the filesystem is unmounted.
  void serve();

  // Detach-unmounts, causing serve() to return. Safe from a signal handler.
  void stop();

  Vfs& vfs() { return vfs_; }

 private:
  struct NodeEntry {
    std::uint64_t parent = 0;
    std::string name;
    std::uint64_t lookups = 0;
  };

  Path node_path(std::uint64_t nodeid) const;
  std::uint64_t remember_node(std::uint64_t parent, const std::string& name);
  void forget_node(std::uint64_t nodeid, std::uint64_t count);
  void unindex(std::uint64_t parent, const std::string& name);

  void dispatch(const void* header, const void* payload, std::size_t payload_len);
  void reply(std::uint64_t unique, const void* data, std::size_t len);
  void reply_err(std::uint64_t unique, int err);

  MountConfig config_;
  Vfs vfs_;
  int devfd_ = -1;
  bool mounted_ = false;
  bool running_ = false;

  std::map<std::uint64_t, NodeEntry> nodes_;
  std::map<std::pair<std::uint64_t, std::string>, std::uint64_t> by_name_;
  std::uint64_t next_nodeid_ = 2;
};

}  // namespace vfsmodel

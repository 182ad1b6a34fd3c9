#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfsmodel/types.hpp"

namespace vfsmodel {

// Identifies the operation owning a fault point. Evict never faults.
enum class AfsOp : std::uint8_t {
  Lookup,
  Create,
  Mkdir,
  Rmdir,
  Link,
  Unlink,
  Rename,
  Readinode,
  Writeinode,
  Readpage,
  Writepage,
  Truncate,
  Readdir,
  Evict,
};

const char* to_string(AfsOp op);

struct ScriptedFault {
  std::uint64_t step;  // 1-based fault-point index
  ErrorCode error;
};

// Deterministic schedule of injected low-level errors. One fault point per
// AFS operation entry; same plan + same operation trace = same decisions.
class FaultPlan {
 public:
  FaultPlan() : kind_(Kind::None) {}

  static FaultPlan none() { return FaultPlan(); }
  static FaultPlan seeded(std::uint64_t seed, double probability,
                          std::vector<ErrorCode> errors = default_errors());
  // Scripted steps must be strictly increasing; throws std::invalid_argument.
  static FaultPlan scripted(std::vector<ScriptedFault> steps);

  // Parses "none" | "seed:<s>,p:<prob>" | "script:<file>".
  static std::optional<FaultPlan> parse(std::string_view spec, std::string* error);
  // Script file: one directive per line, "step=<n> err=<CODE>".
  static std::optional<FaultPlan> load_script(std::istream& in, std::string* error);

  static std::vector<ErrorCode> default_errors() {
    return {ErrorCode::IoError, ErrorCode::NoSpace, ErrorCode::NoMemory};
  }

  // Returns the error to inject at this fault point, if any, and advances
  // the fault-point counter. Evict is exempt and does not consume a step.
  std::optional<ErrorCode> next(AfsOp op);

  // Number of fault points consumed so far.
  std::uint64_t steps() const { return counter_; }

 private:
  enum class Kind : std::uint8_t { None, Seeded, Scripted };

  Kind kind_;
  std::uint64_t counter_ = 0;
  // seeded
  std::uint64_t rng_state_ = 0;
  double probability_ = 0.0;
  std::vector<ErrorCode> errors_;
  // scripted
  std::vector<ScriptedFault> script_;
  std::size_t script_pos_ = 0;
};

}  // namespace vfsmodel

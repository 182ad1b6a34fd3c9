#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "vfsmodel/faults.hpp"

namespace vfsmodel {

// Trace replay exit codes.
inline constexpr int kTraceOk = 0;
inline constexpr int kTraceParseError = 2;
inline constexpr int kTraceInvariantViolation = 3;
inline constexpr int kTraceExpectationFailed = 4;

struct TraceResult {
  int exit_code = kTraceOk;
  std::string transcript;
  std::string error;  // parse/violation diagnostics
};

// Executes a trace script line by line against a fresh model, running the
// invariant checker after every step. `expect <errcode>` asserts the result
// of the previous command. The transcript always ends with a dump of the
// final state; identical (script, plan, page size) inputs produce a
// byte-identical transcript.
//
// Commands:
//   create <path> <mode>       mkdir <path> <mode>     rmdir <path>
//   link <old> <new>           unlink <path>           rename <old> <new>
//   open <path> <ro|wo|rw>     close <fd>              seek <fd> <n> <set|cur|end>
//   read <fd> <len>            write <fd> <hex-bytes>  truncate <path> <n>
//   getattr <path>             setattr <path> <mode>   readdir <path>
//   expect <errcode>           dump
TraceResult run_trace(std::istream& script, FaultPlan faults, std::uint64_t page_size);

}  // namespace vfsmodel

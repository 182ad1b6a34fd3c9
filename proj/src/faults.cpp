#include "vfsmodel/faults.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vfsmodel {

const char* to_string(AfsOp op) {
  switch (op) {
    case AfsOp::Lookup: return "lookup";
    case AfsOp::Create: return "create";
    case AfsOp::Mkdir: return "mkdir";
    case AfsOp::Rmdir: return "rmdir";
    case AfsOp::Link: return "link";
    case AfsOp::Unlink: return "unlink";
    case AfsOp::Rename: return "rename";
    case AfsOp::Readinode: return "readinode";
    case AfsOp::Writeinode: return "writeinode";
    case AfsOp::Readpage: return "readpage";
    case AfsOp::Writepage: return "writepage";
    case AfsOp::Truncate: return "truncate";
    case AfsOp::Readdir: return "readdir";
    case AfsOp::Evict: return "evict";
  }
  return "?";
}

namespace {

// SplitMix64 (Steele, Lea, Flood 2014). Fixed here so that seeded fault
// traces are portable across platforms and standard library versions.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double to_unit_interval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

FaultPlan FaultPlan::seeded(std::uint64_t seed, double probability,
                            std::vector<ErrorCode> errors) {
  if (probability < 0.0 || probability > 1.0) {
    throw std::invalid_argument("fault probability must be in [0,1]");
  }
  if (errors.empty()) {
    throw std::invalid_argument("seeded fault plan needs a non-empty error set");
  }
  FaultPlan plan;
  plan.kind_ = Kind::Seeded;
  plan.rng_state_ = seed;
  plan.probability_ = probability;
  plan.errors_ = std::move(errors);
  return plan;
}

FaultPlan FaultPlan::scripted(std::vector<ScriptedFault> steps) {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].step <= steps[i - 1].step) {
      throw std::invalid_argument("scripted fault steps must be strictly increasing");
    }
  }
  FaultPlan plan;
  plan.kind_ = Kind::Scripted;
  plan.script_ = std::move(steps);
  return plan;
}

std::optional<ErrorCode> FaultPlan::next(AfsOp op) {
  if (op == AfsOp::Evict) return std::nullopt;
  switch (kind_) {
    case Kind::None:
      ++counter_;
      return std::nullopt;
    case Kind::Seeded: {
      ++counter_;
      std::uint64_t draw = splitmix64(rng_state_);
      std::uint64_t pick = splitmix64(rng_state_);
      if (to_unit_interval(draw) < probability_) {
        return errors_[pick % errors_.size()];
      }
      return std::nullopt;
    }
    case Kind::Scripted: {
      ++counter_;
      if (script_pos_ < script_.size() && script_[script_pos_].step == counter_) {
        return script_[script_pos_++].error;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<FaultPlan> FaultPlan::parse(std::string_view spec, std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<FaultPlan> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  if (spec == "none") return FaultPlan::none();
  if (spec.starts_with("seed:")) {
    auto rest = spec.substr(5);
    auto comma = rest.find(",p:");
    if (comma == std::string_view::npos) return fail("expected seed:<s>,p:<prob>");
    std::uint64_t seed = 0;
    auto seed_str = rest.substr(0, comma);
    auto [p, ec] = std::from_chars(seed_str.data(), seed_str.data() + seed_str.size(), seed);
    if (ec != std::errc() || p != seed_str.data() + seed_str.size()) {
      return fail("bad seed value");
    }
    std::string prob_str(rest.substr(comma + 3));
    char* end = nullptr;
    double prob = std::strtod(prob_str.c_str(), &end);
    if (end != prob_str.c_str() + prob_str.size() || prob < 0.0 || prob > 1.0) {
      return fail("bad probability value");
    }
    return FaultPlan::seeded(seed, prob);
  }
  if (spec.starts_with("script:")) {
    std::ifstream in{std::string(spec.substr(7))};
    if (!in) return fail("cannot open fault script file");
    return load_script(in, error);
  }
  return fail("unknown fault plan (expected none | seed:<s>,p:<p> | script:<file>)");
}

std::optional<FaultPlan> FaultPlan::load_script(std::istream& in, std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<FaultPlan> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  std::vector<ScriptedFault> steps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::uint64_t step = 0;
    char code[32] = {0};
    if (std::sscanf(line.c_str(), "step=%llu err=%31s",
                    reinterpret_cast<unsigned long long*>(&step), code) != 2) {
      return fail("fault script line " + std::to_string(lineno) + ": expected step=<n> err=<CODE>");
    }
    auto err = error_from_string(code);
    if (!err || *err == ErrorCode::Success) {
      return fail("fault script line " + std::to_string(lineno) + ": unknown error code");
    }
    steps.push_back({step, *err});
  }
  try {
    return FaultPlan::scripted(std::move(steps));
  } catch (const std::invalid_argument& e) {
    return fail(e.what());
  }
}

}  // namespace vfsmodel

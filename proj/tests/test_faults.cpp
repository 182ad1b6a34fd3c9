#include <doctest.h>

#include <sstream>

#include "vfsmodel/faults.hpp"

using namespace vfsmodel;

TEST_CASE("plan NONE never faults") {
  FaultPlan plan = FaultPlan::none();
  for (int i = 0; i < 1000; ++i) {
    CHECK(!plan.next(AfsOp::Lookup).has_value());
  }
  CHECK(plan.steps() == 1000);
}

TEST_CASE("scripted plan fires at exact fault-point indices") {
  FaultPlan plan = FaultPlan::scripted({{3, ErrorCode::NoSpace}, {5, ErrorCode::IoError}});
  CHECK(!plan.next(AfsOp::Create).has_value());
  CHECK(!plan.next(AfsOp::Create).has_value());
  CHECK(plan.next(AfsOp::Create) == ErrorCode::NoSpace);
  CHECK(!plan.next(AfsOp::Create).has_value());
  CHECK(plan.next(AfsOp::Create) == ErrorCode::IoError);
  CHECK(!plan.next(AfsOp::Create).has_value());
}

TEST_CASE("scripted steps must be strictly increasing") {
  CHECK_THROWS_AS(FaultPlan::scripted({{3, ErrorCode::IoError}, {3, ErrorCode::NoSpace}}),
                  std::invalid_argument);
}

TEST_CASE("seeded with probability zero behaves like NONE") {
  FaultPlan plan = FaultPlan::seeded(42, 0.0);
  for (int i = 0; i < 10000; ++i) {
    CHECK(!plan.next(AfsOp::Writepage).has_value());
  }
}

TEST_CASE("seeded with probability one always faults") {
  FaultPlan plan = FaultPlan::seeded(7, 1.0);
  for (int i = 0; i < 100; ++i) {
    auto f = plan.next(AfsOp::Writepage);
    REQUIRE(f.has_value());
    CHECK((*f == ErrorCode::IoError || *f == ErrorCode::NoSpace || *f == ErrorCode::NoMemory));
  }
}

TEST_CASE("same seed reproduces the same fault decisions") {
  FaultPlan a = FaultPlan::seeded(123, 0.3);
  FaultPlan b = FaultPlan::seeded(123, 0.3);
  for (int i = 0; i < 5000; ++i) {
    CHECK(a.next(AfsOp::Readpage) == b.next(AfsOp::Readpage));
  }
}

TEST_CASE("evict fault points never fire and consume no step") {
  FaultPlan plan = FaultPlan::seeded(9, 1.0);
  CHECK(!plan.next(AfsOp::Evict).has_value());
  CHECK(plan.steps() == 0);
  FaultPlan scripted = FaultPlan::scripted({{1, ErrorCode::IoError}});
  CHECK(!scripted.next(AfsOp::Evict).has_value());
  CHECK(scripted.next(AfsOp::Unlink) == ErrorCode::IoError);
}

TEST_CASE("fault spec parsing") {
  std::string err;
  CHECK(FaultPlan::parse("none", &err).has_value());
  CHECK(FaultPlan::parse("seed:42,p:0.05", &err).has_value());
  CHECK(!FaultPlan::parse("seed:42", &err).has_value());
  CHECK(!FaultPlan::parse("seed:42,p:1.5", &err).has_value());
  CHECK(!FaultPlan::parse("bogus", &err).has_value());
}

TEST_CASE("script file loading") {
  std::istringstream in("# comment\nstep=2 err=ENOSPC\nstep=7 err=EIO\n");
  std::string err;
  auto plan = FaultPlan::load_script(in, &err);
  REQUIRE(plan.has_value());
  for (int i = 1; i <= 8; ++i) {
    auto f = plan->next(AfsOp::Mkdir);
    if (i == 2) {
      CHECK(f == ErrorCode::NoSpace);
    } else if (i == 7) {
      CHECK(f == ErrorCode::IoError);
    } else {
      CHECK(!f.has_value());
    }
  }

  std::istringstream bad("step=1 err=NOPE\n");
  CHECK(!FaultPlan::load_script(bad, &err).has_value());
  std::istringstream success_code("step=1 err=ESUCCESS\n");
  CHECK(!FaultPlan::load_script(success_code, &err).has_value());
  std::istringstream decreasing("step=5 err=EIO\nstep=2 err=EIO\n");
  CHECK(!FaultPlan::load_script(decreasing, &err).has_value());
}

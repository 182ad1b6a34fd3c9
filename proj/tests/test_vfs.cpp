#include <doctest.h>

#include <string>
#include <vector>

#include "shadow.hpp"
#include "vfsmodel/check.hpp"
#include "vfsmodel/vfs.hpp"

using namespace vfsmodel;

namespace {

const Meta kDirMeta{0, 0, 0755};
const Meta kFileMeta{0, 0, 0644};

Path p(std::string_view text) {
  bool ok = false;
  Path path = parse_path(text, &ok);
  REQUIRE(ok);
  return path;
}

std::vector<std::uint8_t> bytes(std::string_view s) {
  return {s.begin(), s.end()};
}

// Asserts that all invariants hold for the VFS right now.
void check_clean(Vfs& vfs) {
  auto violations = check_all(vfs.afs().state(), vfs.handles(), vfs.afs().page_size());
  CHECK(violations.empty());
}

}  // namespace

TEST_CASE("path parsing") {
  bool ok = false;
  CHECK(parse_path("/", &ok) == Path{});
  CHECK(ok);
  CHECK(parse_path("/a/b", &ok) == Path{"a", "b"});
  CHECK(ok);
  parse_path("", &ok);
  CHECK(!ok);
  parse_path("a/b", &ok);
  CHECK(!ok);
  parse_path("/a/", &ok);
  CHECK(!ok);
  parse_path("/a//b", &ok);
  CHECK(!ok);
  CHECK(path_to_string(Path{}) == "/");
  CHECK(path_to_string(Path{"a", "b"}) == "/a/b");
}

TEST_CASE("walk resolves paths and reports precise errors") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/tmp"), kDirMeta) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/tmp/f"), kFileMeta) == ErrorCode::Success);

  CHECK(vfs.walk(p("/")).first == kRootIno);
  CHECK(vfs.walk(p("/tmp")).second == ErrorCode::Success);
  CHECK(vfs.walk(p("/tmp/f")).second == ErrorCode::Success);
  CHECK(vfs.walk(p("/nope")).second == ErrorCode::NoEntry);
  CHECK(vfs.walk(p("/tmp/f/x")).second == ErrorCode::NotDirectory);
  CHECK(vfs.walk(p("/tmp/nope/x")).second == ErrorCode::NoEntry);
}

TEST_CASE("walk requires traverse permission on every directory") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/closed"), Meta{0, 0, 0700}) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/closed/f"), Meta{0, 0, 0666}) == ErrorCode::Success);
  vfs.set_user(UserContext{1000, {1000}});
  CHECK(vfs.walk(p("/closed/f")).second == ErrorCode::AccessDenied);
  CHECK(vfs.getattr(p("/closed/f")).second == ErrorCode::AccessDenied);
}

TEST_CASE("create and mkdir") {
  Vfs vfs(4);
  SUBCASE("creating the root or an existing name fails") {
    CHECK(vfs.create(p("/"), kFileMeta) == ErrorCode::InvalidArgument);
    REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
    CHECK(vfs.create(p("/f"), kFileMeta) == ErrorCode::Exists);
    CHECK(vfs.mkdir(p("/f"), kDirMeta) == ErrorCode::Exists);
  }
  SUBCASE("parent must be a writable directory") {
    REQUIRE(vfs.mkdir(p("/ro"), Meta{0, 0, 0555}) == ErrorCode::Success);
    vfs.set_user(UserContext{1000, {1000}});
    CHECK(vfs.create(p("/ro/f"), kFileMeta) == ErrorCode::AccessDenied);
    CHECK(vfs.mkdir(p("/ro/d"), kDirMeta) == ErrorCode::AccessDenied);
  }
  SUBCASE("missing intermediate directory") {
    CHECK(vfs.create(p("/no/f"), kFileMeta) == ErrorCode::NoEntry);
  }
  check_clean(vfs);
}

TEST_CASE("rmdir distinguishes kind, permission and emptiness") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/d"), kDirMeta) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  REQUIRE(vfs.mkdir(p("/d/sub"), kDirMeta) == ErrorCode::Success);

  CHECK(vfs.rmdir(p("/f")) == ErrorCode::NotDirectory);
  CHECK(vfs.rmdir(p("/")) == ErrorCode::InvalidArgument);
  CHECK(vfs.rmdir(p("/d")) == ErrorCode::NotEmpty);
  CHECK(vfs.rmdir(p("/d/sub")) == ErrorCode::Success);
  CHECK(vfs.rmdir(p("/d")) == ErrorCode::Success);
  CHECK(vfs.rmdir(p("/d")) == ErrorCode::NoEntry);
  check_clean(vfs);
}

TEST_CASE("link and unlink") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/a"), kFileMeta) == ErrorCode::Success);
  REQUIRE(vfs.mkdir(p("/d"), kDirMeta) == ErrorCode::Success);

  SUBCASE("hard link raises nlink and shares content") {
    REQUIRE(vfs.link(p("/a"), p("/d/b")) == ErrorCode::Success);
    auto [inode, err] = vfs.getattr(p("/a"));
    CHECK(inode.nlink == 2);
    CHECK(vfs.getattr(p("/d/b")).first.ino == inode.ino);
  }
  SUBCASE("directories cannot be linked") {
    CHECK(vfs.link(p("/d"), p("/d2")) == ErrorCode::IsDirectory);
  }
  SUBCASE("unlink rejects directories") {
    CHECK(vfs.unlink(p("/d")) == ErrorCode::IsDirectory);
    CHECK(vfs.unlink(p("/")) == ErrorCode::InvalidArgument);
  }
  SUBCASE("unlink of the last link deallocates a closed file") {
    Ino ino = vfs.getattr(p("/a")).first.ino;
    REQUIRE(vfs.unlink(p("/a")) == ErrorCode::Success);
    CHECK(!vfs.afs().is_file(ino));
    CHECK(vfs.afs().evict_count() == 1);
  }
  check_clean(vfs);
}

TEST_CASE("rename matrix") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/d1"), kDirMeta) == ErrorCode::Success);
  REQUIRE(vfs.mkdir(p("/d2"), kDirMeta) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/d1/f"), kFileMeta) == ErrorCode::Success);

  SUBCASE("same-parent fresh name") {
    CHECK(vfs.rename(p("/d1/f"), p("/d1/g")) == ErrorCode::Success);
    CHECK(vfs.getattr(p("/d1/g")).second == ErrorCode::Success);
    CHECK(vfs.getattr(p("/d1/f")).second == ErrorCode::NoEntry);
  }
  SUBCASE("cross-parent move") {
    CHECK(vfs.rename(p("/d1/f"), p("/d2/f")) == ErrorCode::Success);
    CHECK(vfs.getattr(p("/d2/f")).second == ErrorCode::Success);
  }
  SUBCASE("overwriting an existing file drops the old one") {
    REQUIRE(vfs.create(p("/d2/f"), kFileMeta) == ErrorCode::Success);
    Ino old = vfs.getattr(p("/d2/f")).first.ino;
    CHECK(vfs.rename(p("/d1/f"), p("/d2/f")) == ErrorCode::Success);
    CHECK(!vfs.afs().is_file(old));
  }
  SUBCASE("overwriting an empty directory with a directory") {
    REQUIRE(vfs.mkdir(p("/d1/sub"), kDirMeta) == ErrorCode::Success);
    REQUIRE(vfs.mkdir(p("/d2/sub"), kDirMeta) == ErrorCode::Success);
    CHECK(vfs.rename(p("/d1/sub"), p("/d2/sub")) == ErrorCode::Success);
  }
  SUBCASE("overwriting a non-empty directory fails") {
    REQUIRE(vfs.mkdir(p("/d1/sub"), kDirMeta) == ErrorCode::Success);
    REQUIRE(vfs.mkdir(p("/d2/sub"), kDirMeta) == ErrorCode::Success);
    REQUIRE(vfs.create(p("/d2/sub/x"), kFileMeta) == ErrorCode::Success);
    CHECK(vfs.rename(p("/d1/sub"), p("/d2/sub")) == ErrorCode::NotEmpty);
  }
  SUBCASE("kind mismatches") {
    REQUIRE(vfs.mkdir(p("/d1/sub"), kDirMeta) == ErrorCode::Success);
    REQUIRE(vfs.create(p("/d2/g"), kFileMeta) == ErrorCode::Success);
    CHECK(vfs.rename(p("/d1/sub"), p("/d2/g")) == ErrorCode::NotDirectory);
    CHECK(vfs.rename(p("/d1/f"), p("/d2")) == ErrorCode::IsDirectory);
  }
  SUBCASE("moving a directory under itself fails") {
    REQUIRE(vfs.mkdir(p("/d1/sub"), kDirMeta) == ErrorCode::Success);
    CHECK(vfs.rename(p("/d1"), p("/d1/sub/loop")) == ErrorCode::InvalidArgument);
  }
  SUBCASE("renaming onto itself is a no-op success") {
    CHECK(vfs.rename(p("/d1/f"), p("/d1/f")) == ErrorCode::Success);
    CHECK(vfs.getattr(p("/d1/f")).second == ErrorCode::Success);
  }
  SUBCASE("the root cannot be moved or replaced") {
    CHECK(vfs.rename(p("/"), p("/d1/r")) == ErrorCode::InvalidArgument);
    CHECK(vfs.rename(p("/d1"), p("/")) == ErrorCode::InvalidArgument);
  }
  check_clean(vfs);
}

TEST_CASE("open, close and descriptor allocation") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  REQUIRE(vfs.mkdir(p("/d"), kDirMeta) == ErrorCode::Success);

  auto [fd0, e0] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(e0 == ErrorCode::Success);
  CHECK(fd0 == 0);
  auto [fd1, e1] = vfs.open(p("/f"), Mode::ReadOnly);
  CHECK(fd1 == 1);
  REQUIRE(vfs.close(fd0) == ErrorCode::Success);
  auto [fd2, e2] = vfs.open(p("/f"), Mode::ReadOnly);
  CHECK(fd2 == 0);  // smallest free number again

  CHECK(vfs.open(p("/d"), Mode::ReadOnly).second == ErrorCode::IsDirectory);
  CHECK(vfs.open(p("/nope"), Mode::ReadOnly).second == ErrorCode::NoEntry);
  CHECK(vfs.close(99) == ErrorCode::BadDescriptor);

  SUBCASE("open checks permission for the requested mode") {
    REQUIRE(vfs.setattr(p("/f"), Meta{0, 0, 0400}) == ErrorCode::Success);
    vfs.set_user(UserContext{1000, {1000}});
    CHECK(vfs.open(p("/f"), Mode::ReadOnly).second == ErrorCode::AccessDenied);
    CHECK(vfs.open(p("/f"), Mode::WriteOnly).second == ErrorCode::AccessDenied);
  }
  SUBCASE("mode gates read and write on the descriptor") {
    CHECK(vfs.read(fd2, 1).second == ErrorCode::Success);  // ReadOnly fd, empty file
    auto data = bytes("x");
    CHECK(vfs.write(fd2, data).second == ErrorCode::AccessDenied);
    auto [wfd, we] = vfs.open(p("/f"), Mode::WriteOnly);
    REQUIRE(we == ErrorCode::Success);
    CHECK(vfs.read(wfd, 1).second == ErrorCode::AccessDenied);
  }
  check_clean(vfs);
}

TEST_CASE("seek") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  REQUIRE(vfs.truncate(p("/f"), 10) == ErrorCode::Success);
  auto [fd, err] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(err == ErrorCode::Success);

  CHECK(vfs.seek(fd, 4, SeekWhence::Set) == std::pair<std::uint64_t, ErrorCode>{4, ErrorCode::Success});
  CHECK(vfs.seek(fd, 3, SeekWhence::Cur).first == 7);
  CHECK(vfs.seek(fd, -2, SeekWhence::Cur).first == 5);
  CHECK(vfs.seek(fd, 0, SeekWhence::End).first == 10);
  CHECK(vfs.seek(fd, 5, SeekWhence::End).first == 15);  // beyond EOF is fine
  CHECK(vfs.seek(fd, -1, SeekWhence::Set).second == ErrorCode::InvalidArgument);
  CHECK(vfs.seek(fd, -100, SeekWhence::Cur).second == ErrorCode::InvalidArgument);
  CHECK(vfs.seek(99, 0, SeekWhence::Set).second == ErrorCode::BadDescriptor);
}

TEST_CASE("read chunks by the three-bound minimum") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  auto [fd, err] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(err == ErrorCode::Success);
  auto content = bytes("0123456789");  // size 10, pages 0..2 with PAGE_SIZE 4
  REQUIRE(vfs.write(fd, content).first == 10);

  SUBCASE("first chunk = min(remaining=7, page room=2, to EOF=8) = 2") {
    // pos 2 in a 10-byte file, ask for 7: chunks 2 ("23"), 4 ("4567"), 1 ("8").
    REQUIRE(vfs.seek(fd, 2, SeekWhence::Set).second == ErrorCode::Success);
    auto [data, rerr] = vfs.read(fd, 7);
    CHECK(rerr == ErrorCode::Success);
    CHECK(data == bytes("2345678"));
  }
  SUBCASE("read at EOF returns empty success") {
    REQUIRE(vfs.seek(fd, 10, SeekWhence::Set).second == ErrorCode::Success);
    auto [data, rerr] = vfs.read(fd, 5);
    CHECK(rerr == ErrorCode::Success);
    CHECK(data.empty());
  }
  SUBCASE("read past EOF is clipped") {
    REQUIRE(vfs.seek(fd, 8, SeekWhence::Set).second == ErrorCode::Success);
    auto [data, rerr] = vfs.read(fd, 100);
    CHECK(rerr == ErrorCode::Success);
    CHECK(data == bytes("89"));
  }
  SUBCASE("zero-length read") {
    auto [data, rerr] = vfs.read(fd, 0);
    CHECK(rerr == ErrorCode::Success);
    CHECK(data.empty());
  }
  SUBCASE("position advances by the transferred count") {
    REQUIRE(vfs.seek(fd, 0, SeekWhence::Set).second == ErrorCode::Success);
    vfs.read(fd, 3);
    CHECK(vfs.handles().at(fd).pos == 3);
  }
}

TEST_CASE("write maps the buffer onto pages") {
  Vfs vfs(4);
  testing::ShadowFs shadow;
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  Ino ino = vfs.getattr(p("/f")).first.ino;
  shadow.on_create(ino);
  auto [fd, err] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(err == ErrorCode::Success);

  auto do_write = [&](std::uint64_t pos, std::string_view s) {
    REQUIRE(vfs.seek(fd, static_cast<std::int64_t>(pos), SeekWhence::Set).second ==
            ErrorCode::Success);
    auto data = bytes(s);
    auto [n, werr] = vfs.write(fd, data);
    REQUIRE(werr == ErrorCode::Success);
    shadow.on_write(ino, pos, data.size(), data.data(), n);
  };
  auto expect_content = [&] {
    CHECK(flat_content(vfs.afs().state().files.at(ino), 4) == shadow.content(ino));
    check_clean(vfs);
  };

  SUBCASE("extending write past EOF zero-fills the gap") {
    do_write(6, "XY");
    CHECK(vfs.getattr(p("/f")).first.size == 8);
    expect_content();
    // The hole page 0 stays unallocated.
    CHECK(!vfs.afs().state().files.at(ino).pages.contains(0));
  }
  SUBCASE("overwrite inside one page") {
    do_write(0, "abcdefgh");
    do_write(2, "ZZ");
    expect_content();
  }
  SUBCASE("unaligned write spanning three pages") {
    do_write(0, "aaaabbbbcccc");
    do_write(3, "123456");
    expect_content();
  }
  SUBCASE("zero-length write succeeds without effect") {
    auto [n, werr] = vfs.write(fd, std::span<const std::uint8_t>{});
    CHECK(werr == ErrorCode::Success);
    CHECK(n == 0);
    CHECK(vfs.getattr(p("/f")).first.size == 0);
  }
}

TEST_CASE("faulted read and write report short counts or clean errors") {
  // Page loop fault points: write "0123456789" then operate under scripts.
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  auto [fd, err] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(err == ErrorCode::Success);
  auto content = bytes("0123456789");
  REQUIRE(vfs.write(fd, content).first == 10);
  REQUIRE(vfs.seek(fd, 0, SeekWhence::Set).second == ErrorCode::Success);

  SUBCASE("fault before the first page read yields the error") {
    vfs.afs().set_faults(FaultPlan::scripted({{1, ErrorCode::IoError}}));
    auto [data, rerr] = vfs.read(fd, 10);
    CHECK(rerr == ErrorCode::IoError);
    CHECK(data.empty());
    CHECK(vfs.handles().at(fd).pos == 0);
  }
  SUBCASE("fault mid-loop yields a short read with success") {
    vfs.afs().set_faults(FaultPlan::scripted({{2, ErrorCode::IoError}}));
    auto [data, rerr] = vfs.read(fd, 10);
    CHECK(rerr == ErrorCode::Success);
    CHECK(data == bytes("0123"));  // page 0 only
    CHECK(vfs.handles().at(fd).pos == 4);
  }
  SUBCASE("fault mid-loop yields a short write with success") {
    // Unaligned overwrite at pos 1: each chunk is a partial page, so the
    // fault points are readpage/writepage pairs; step 3 is the second load.
    REQUIRE(vfs.seek(fd, 1, SeekWhence::Set).second == ErrorCode::Success);
    vfs.afs().set_faults(FaultPlan::scripted({{3, ErrorCode::NoSpace}}));
    auto buf = bytes("ABCDEF");
    auto [n, werr] = vfs.write(fd, buf);
    CHECK(werr == ErrorCode::Success);
    CHECK(n == 3);
    CHECK(flat_content(vfs.afs().state().files.at(vfs.handles().at(fd).ino), 4) ==
          bytes("0ABC456789"));
    check_clean(vfs);
  }
  SUBCASE("extension that transfers nothing is a zero-byte success") {
    REQUIRE(vfs.seek(fd, 0, SeekWhence::End).second == ErrorCode::Success);
    // Step 1 extends to 11; step 2 is the partial-page load, which faults.
    vfs.afs().set_faults(FaultPlan::scripted({{2, ErrorCode::IoError}}));
    auto buf = bytes("Z");
    auto [n, werr] = vfs.write(fd, buf);
    CHECK(werr == ErrorCode::Success);
    CHECK(n == 0);
    Ino ino = vfs.handles().at(fd).ino;
    CHECK(vfs.afs().state().files.at(ino).size == 11);
    CHECK(flat_content(vfs.afs().state().files.at(ino), 4) ==
          bytes(std::string("0123456789") + '\0'));
    check_clean(vfs);
  }
  SUBCASE("fault on the extension truncate fails the write cleanly") {
    AfsState before = vfs.afs().state();
    REQUIRE(vfs.seek(fd, 0, SeekWhence::End).second == ErrorCode::Success);
    vfs.afs().set_faults(FaultPlan::scripted({{1, ErrorCode::NoSpace}}));
    auto buf = bytes("Z");
    auto [n, werr] = vfs.write(fd, buf);
    CHECK(werr == ErrorCode::NoSpace);
    CHECK(n == 0);
    CHECK(vfs.afs().state() == before);
    check_clean(vfs);
  }
}

TEST_CASE("orphan files stay usable through open descriptors") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  Ino ino = vfs.getattr(p("/f")).first.ino;
  auto [fd, err] = vfs.open(p("/f"), Mode::ReadWrite);
  REQUIRE(err == ErrorCode::Success);

  REQUIRE(vfs.unlink(p("/f")) == ErrorCode::Success);
  CHECK(vfs.afs().is_file(ino));  // kept alive by the descriptor
  CHECK(vfs.afs().evict_count() == 0);
  CHECK(vfs.getattr(p("/f")).second == ErrorCode::NoEntry);

  auto data = bytes("orphan");
  CHECK(vfs.write(fd, data).first == 6);
  REQUIRE(vfs.seek(fd, 0, SeekWhence::Set).second == ErrorCode::Success);
  CHECK(vfs.read(fd, 6).first == bytes("orphan"));
  CHECK(vfs.fgetattr(fd).first.nlink == 0);
  check_clean(vfs);

  REQUIRE(vfs.close(fd) == ErrorCode::Success);
  CHECK(!vfs.afs().is_file(ino));
  CHECK(vfs.afs().evict_count() == 1);
  check_clean(vfs);
}

TEST_CASE("an orphan shared by two descriptors is evicted on the last close") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  Ino ino = vfs.getattr(p("/f")).first.ino;
  auto fd0 = vfs.open(p("/f"), Mode::ReadOnly).first;
  auto fd1 = vfs.open(p("/f"), Mode::ReadOnly).first;
  REQUIRE(vfs.unlink(p("/f")) == ErrorCode::Success);
  REQUIRE(vfs.close(fd0) == ErrorCode::Success);
  CHECK(vfs.afs().is_file(ino));
  REQUIRE(vfs.close(fd1) == ErrorCode::Success);
  CHECK(!vfs.afs().is_file(ino));
  CHECK(vfs.afs().evict_count() == 1);
}

TEST_CASE("truncate by path") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), kFileMeta) == ErrorCode::Success);
  auto [fd, err] = vfs.open(p("/f"), Mode::WriteOnly);
  auto data = bytes("Hello, World!");
  REQUIRE(vfs.write(fd, data).first == 13);

  CHECK(vfs.truncate(p("/f"), 5) == ErrorCode::Success);
  CHECK(vfs.getattr(p("/f")).first.size == 5);
  CHECK(flat_content(vfs.afs().state().files.at(vfs.handles().at(fd).ino), 4) ==
        bytes("Hello"));
  CHECK(vfs.truncate(p("/"), 0) == ErrorCode::IsDirectory);
  CHECK(vfs.truncate(p("/nope"), 0) == ErrorCode::NoEntry);

  vfs.set_user(UserContext{1000, {1000}});
  CHECK(vfs.truncate(p("/f"), 0) == ErrorCode::AccessDenied);
  check_clean(vfs);
}

TEST_CASE("getattr and setattr") {
  Vfs vfs(4);
  REQUIRE(vfs.create(p("/f"), Meta{5, 6, 0640}) == ErrorCode::Success);

  auto [inode, err] = vfs.getattr(p("/f"));
  REQUIRE(err == ErrorCode::Success);
  CHECK(inode.meta == Meta{5, 6, 0640});
  CHECK(!inode.isdir);
  CHECK(inode.nlink == 1);
  CHECK(inode.size == 0);

  SUBCASE("only the owner may change attributes") {
    vfs.set_user(UserContext{5, {6}});
    CHECK(vfs.setattr(p("/f"), Meta{5, 6, 0600}) == ErrorCode::Success);
    CHECK(vfs.getattr(p("/f")).first.meta.perms == 0600);
    vfs.set_user(UserContext{7, {6}});
    CHECK(vfs.setattr(p("/f"), Meta{7, 6, 0666}) == ErrorCode::AccessDenied);
  }
}

TEST_CASE("readdir lists names and honours read permission") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/d"), Meta{0, 0, 0711}) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/d/b"), kFileMeta) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/d/a"), kFileMeta) == ErrorCode::Success);

  auto [names, err] = vfs.readdir(p("/d"));
  REQUIRE(err == ErrorCode::Success);
  CHECK(names == std::vector<std::string>{"a", "b"});
  CHECK(vfs.readdir(p("/d/a")).second == ErrorCode::NotDirectory);

  vfs.set_user(UserContext{1000, {1000}});
  CHECK(vfs.readdir(p("/d")).second == ErrorCode::AccessDenied);  // 0711: x only
}

TEST_CASE("failed operations change nothing (snapshot compare)") {
  Vfs vfs(4);
  REQUIRE(vfs.mkdir(p("/d"), kDirMeta) == ErrorCode::Success);
  REQUIRE(vfs.create(p("/d/f"), kFileMeta) == ErrorCode::Success);
  AfsState before = vfs.afs().state();
  HandleTable handles_before = vfs.handles();

  vfs.afs().set_faults(FaultPlan::seeded(99, 1.0));
  CHECK(vfs.create(p("/d/g"), kFileMeta) != ErrorCode::Success);
  CHECK(vfs.mkdir(p("/d/sub"), kDirMeta) != ErrorCode::Success);
  CHECK(vfs.unlink(p("/d/f")) != ErrorCode::Success);
  CHECK(vfs.rename(p("/d/f"), p("/d/g")) != ErrorCode::Success);
  CHECK(vfs.truncate(p("/d/f"), 3) != ErrorCode::Success);
  CHECK(vfs.open(p("/d/f"), Mode::ReadOnly).second != ErrorCode::Success);

  CHECK(vfs.afs().state() == before);
  CHECK(vfs.handles() == handles_before);
  check_clean(vfs);
}

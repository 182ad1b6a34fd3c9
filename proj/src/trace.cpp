#include "vfsmodel/trace.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <sstream>
#include <vector>

#include "vfsmodel/check.hpp"
#include "vfsmodel/snapshot.hpp"
#include "vfsmodel/vfs.hpp"

namespace vfsmodel {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_i64(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint16_t> parse_mode(const std::string& s) {
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 8);
  if (ec != std::errc() || p != s.data() + s.size() || v > 0777) return std::nullopt;
  return static_cast<std::uint16_t>(v);
}

std::optional<std::vector<std::uint8_t>> parse_hex(const std::string& s) {
  if (s == "-") return std::vector<std::uint8_t>{};  // explicit empty payload
  if (s.size() % 2 != 0) return std::nullopt;
  std::vector<std::uint8_t> out;
  out.reserve(s.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < s.size(); i += 2) {
    int hi = nibble(s[i]);
    int lo = nibble(s[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::optional<Mode> parse_open_mode(const std::string& s) {
  if (s == "ro") return Mode::ReadOnly;
  if (s == "wo") return Mode::WriteOnly;
  if (s == "rw") return Mode::ReadWrite;
  return std::nullopt;
}

std::optional<SeekWhence> parse_whence(const std::string& s) {
  if (s == "set") return SeekWhence::Set;
  if (s == "cur") return SeekWhence::Cur;
  if (s == "end") return SeekWhence::End;
  return std::nullopt;
}

}  // namespace

TraceResult run_trace(std::istream& script, FaultPlan faults, std::uint64_t page_size) {
  TraceResult result;
  Vfs vfs(page_size, std::move(faults));
  std::ostringstream out;
  ErrorCode last = ErrorCode::Success;
  std::string line;
  std::size_t lineno = 0;

  auto parse_fail = [&](const std::string& msg) {
    result.exit_code = kTraceParseError;
    result.error = "line " + std::to_string(lineno) + ": " + msg;
    result.transcript = out.str();
    return result;
  };
  auto path_arg = [&](const std::string& tok, bool* ok) { return parse_path(tok, ok); };

  while (std::getline(script, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    const std::string& cmd = tok[0];
    bool ok = true;

    if (cmd == "create" || cmd == "mkdir") {
      if (tok.size() != 3) return parse_fail(cmd + " expects <path> <mode>");
      Path path = path_arg(tok[1], &ok);
      auto mode = parse_mode(tok[2]);
      if (!ok || !mode) return parse_fail("bad path or mode");
      Meta md{vfs.user().uid, vfs.user().gids.front(), *mode};
      last = cmd == "create" ? vfs.create(path, md) : vfs.mkdir(path, md);
      out << cmd << " " << tok[1] << " " << tok[2] << " -> " << to_string(last) << "\n";
    } else if (cmd == "rmdir" || cmd == "unlink") {
      if (tok.size() != 2) return parse_fail(cmd + " expects <path>");
      Path path = path_arg(tok[1], &ok);
      if (!ok) return parse_fail("bad path");
      last = cmd == "rmdir" ? vfs.rmdir(path) : vfs.unlink(path);
      out << cmd << " " << tok[1] << " -> " << to_string(last) << "\n";
    } else if (cmd == "link" || cmd == "rename") {
      if (tok.size() != 3) return parse_fail(cmd + " expects <old> <new>");
      bool ok2 = true;
      Path oldp = path_arg(tok[1], &ok);
      Path newp = path_arg(tok[2], &ok2);
      if (!ok || !ok2) return parse_fail("bad path");
      last = cmd == "link" ? vfs.link(oldp, newp) : vfs.rename(oldp, newp);
      out << cmd << " " << tok[1] << " " << tok[2] << " -> " << to_string(last) << "\n";
    } else if (cmd == "open") {
      if (tok.size() != 3) return parse_fail("open expects <path> <ro|wo|rw>");
      Path path = path_arg(tok[1], &ok);
      auto mode = parse_open_mode(tok[2]);
      if (!ok || !mode) return parse_fail("bad path or open mode");
      auto [fd, err] = vfs.open(path, *mode);
      last = err;
      out << "open " << tok[1] << " " << tok[2] << " -> " << to_string(err);
      if (err == ErrorCode::Success) out << " fd=" << fd;
      out << "\n";
    } else if (cmd == "close") {
      if (tok.size() != 2) return parse_fail("close expects <fd>");
      auto fd = parse_u64(tok[1]);
      if (!fd) return parse_fail("bad fd");
      last = vfs.close(*fd);
      out << "close " << tok[1] << " -> " << to_string(last) << "\n";
    } else if (cmd == "seek") {
      if (tok.size() != 4) return parse_fail("seek expects <fd> <n> <set|cur|end>");
      auto fd = parse_u64(tok[1]);
      auto n = parse_i64(tok[2]);
      auto whence = parse_whence(tok[3]);
      if (!fd || !n || !whence) return parse_fail("bad seek arguments");
      auto [pos, err] = vfs.seek(*fd, *n, *whence);
      last = err;
      out << "seek " << tok[1] << " " << tok[2] << " " << tok[3] << " -> " << to_string(err);
      if (err == ErrorCode::Success) out << " pos=" << pos;
      out << "\n";
    } else if (cmd == "read") {
      if (tok.size() != 3) return parse_fail("read expects <fd> <len>");
      auto fd = parse_u64(tok[1]);
      auto len = parse_u64(tok[2]);
      if (!fd || !len.has_value()) return parse_fail("bad read arguments");
      auto [buf, err] = vfs.read(*fd, *len);
      last = err;
      out << "read " << tok[1] << " " << tok[2] << " -> " << to_string(err);
      if (err == ErrorCode::Success) {
        out << " len=" << buf.size() << " data=" << to_hex(buf.data(), buf.size());
      }
      out << "\n";
    } else if (cmd == "write") {
      if (tok.size() != 3) return parse_fail("write expects <fd> <hex-bytes>");
      auto fd = parse_u64(tok[1]);
      auto bytes = parse_hex(tok[2]);
      if (!fd || !bytes) return parse_fail("bad write arguments");
      auto [len, err] = vfs.write(*fd, *bytes);
      last = err;
      out << "write " << tok[1] << " " << tok[2] << " -> " << to_string(err);
      if (err == ErrorCode::Success) out << " len=" << len;
      out << "\n";
    } else if (cmd == "truncate") {
      if (tok.size() != 3) return parse_fail("truncate expects <path> <n>");
      Path path = path_arg(tok[1], &ok);
      auto n = parse_u64(tok[2]);
      if (!ok || !n.has_value()) return parse_fail("bad truncate arguments");
      last = vfs.truncate(path, *n);
      out << "truncate " << tok[1] << " " << tok[2] << " -> " << to_string(last) << "\n";
    } else if (cmd == "getattr") {
      if (tok.size() != 2) return parse_fail("getattr expects <path>");
      Path path = path_arg(tok[1], &ok);
      if (!ok) return parse_fail("bad path");
      auto [inode, err] = vfs.getattr(path);
      last = err;
      out << "getattr " << tok[1] << " -> " << to_string(err);
      if (err == ErrorCode::Success) {
        char perms[8];
        std::snprintf(perms, sizeof perms, "0%03o", inode.meta.perms & 0777);
        out << " ino=" << inode.ino << " kind=" << (inode.isdir ? "dir" : "file")
            << " perms=" << perms << " owner=" << inode.meta.owner
            << " group=" << inode.meta.group << " nlink=" << inode.nlink
            << " size=" << inode.size;
      }
      out << "\n";
    } else if (cmd == "setattr") {
      if (tok.size() != 3) return parse_fail("setattr expects <path> <mode>");
      Path path = path_arg(tok[1], &ok);
      auto mode = parse_mode(tok[2]);
      if (!ok || !mode) return parse_fail("bad path or mode");
      // Keep the current owner and group; the trace command changes bits only.
      auto [ino, werr] = vfs.walk(path);
      Meta md{0, 0, *mode};
      if (werr == ErrorCode::Success) {
        const auto& st = vfs.afs().state();
        if (auto it = st.dirs.find(ino); it != st.dirs.end()) {
          md.owner = it->second.meta.owner;
          md.group = it->second.meta.group;
        } else if (auto fit = st.files.find(ino); fit != st.files.end()) {
          md.owner = fit->second.meta.owner;
          md.group = fit->second.meta.group;
        }
      }
      last = vfs.setattr(path, md);
      out << "setattr " << tok[1] << " " << tok[2] << " -> " << to_string(last) << "\n";
    } else if (cmd == "readdir") {
      if (tok.size() != 2) return parse_fail("readdir expects <path>");
      Path path = path_arg(tok[1], &ok);
      if (!ok) return parse_fail("bad path");
      auto [names, err] = vfs.readdir(path);
      last = err;
      out << "readdir " << tok[1] << " -> " << to_string(err);
      if (err == ErrorCode::Success) {
        out << " entries=[";
        for (std::size_t i = 0; i < names.size(); ++i) {
          if (i) out << ",";
          out << names[i];
        }
        out << "]";
      }
      out << "\n";
    } else if (cmd == "expect") {
      if (tok.size() != 2) return parse_fail("expect expects <errcode>");
      auto want = error_from_string(tok[1]);
      if (!want) return parse_fail("unknown error code " + tok[1]);
      if (last != *want) {
        out << "expect " << tok[1] << " -> FAIL got=" << to_string(last) << "\n";
        result.exit_code = kTraceExpectationFailed;
        result.error = "line " + std::to_string(lineno) + ": expected " + tok[1] +
                       ", got " + to_string(last);
        result.transcript = out.str();
        return result;
      }
      out << "expect " << tok[1] << " -> ok\n";
    } else if (cmd == "dump") {
      if (tok.size() != 1) return parse_fail("dump takes no arguments");
      out << "dump:\n" << dump_state(vfs.afs().state(), vfs.afs().page_size()) << "end\n";
    } else {
      return parse_fail("unknown command " + cmd);
    }

    auto violations = check_all(vfs.afs().state(), vfs.handles(), vfs.afs().page_size());
    if (!violations.empty()) {
      for (const auto& v : violations) out << v.to_line() << "\n";
      result.exit_code = kTraceInvariantViolation;
      result.error = "line " + std::to_string(lineno) + ": invariant violation after step";
      result.transcript = out.str();
      return result;
    }
  }

  out << "final state:\n" << dump_state(vfs.afs().state(), vfs.afs().page_size());
  result.transcript = out.str();
  return result;
}

}  // namespace vfsmodel

#include "vfsmodel/types.hpp"

#include <algorithm>
#include <array>

namespace vfsmodel {

namespace {

struct ErrorName {
  ErrorCode code;
  const char* name;
};

constexpr std::array<ErrorName, 12> kErrorNames = {{
    {ErrorCode::Success, "ESUCCESS"},
    {ErrorCode::NoEntry, "ENOENT"},
    {ErrorCode::Exists, "EEXIST"},
    {ErrorCode::IsDirectory, "EISDIR"},
    {ErrorCode::NotDirectory, "ENOTDIR"},
    {ErrorCode::NotEmpty, "ENOTEMPTY"},
    {ErrorCode::AccessDenied, "EACCES"},
    {ErrorCode::BadDescriptor, "EBADF"},
    {ErrorCode::InvalidArgument, "EINVAL"},
    {ErrorCode::IoError, "EIO"},
    {ErrorCode::NoSpace, "ENOSPC"},
    {ErrorCode::NoMemory, "ENOMEM"},
}};

}  // namespace

const char* to_string(ErrorCode err) {
  for (const auto& e : kErrorNames) {
    if (e.code == err) return e.name;
  }
  return "E?";
}

std::optional<ErrorCode> error_from_string(std::string_view name) {
  for (const auto& e : kErrorNames) {
    if (name == e.name) return e.code;
  }
  return std::nullopt;
}

bool UserContext::in_group(std::uint32_t gid) const {
  return std::find(gids.begin(), gids.end(), gid) != gids.end();
}

namespace {

bool has_perm(const UserContext& ctx, const Meta& meta, unsigned bit) {
  // bit is the "other" bit (1 = x, 2 = w, 4 = r); shift for group/owner.
  if (ctx.uid == meta.owner) return (meta.perms & (bit << 6)) != 0;
  if (ctx.in_group(meta.group)) return (meta.perms & (bit << 3)) != 0;
  return (meta.perms & bit) != 0;
}

}  // namespace

bool may_read(const UserContext& ctx, const Meta& meta) { return has_perm(ctx, meta, 4); }
bool may_write(const UserContext& ctx, const Meta& meta) { return has_perm(ctx, meta, 2); }
bool may_exec(const UserContext& ctx, const Meta& meta) { return has_perm(ctx, meta, 1); }

bool valid_entry_name(std::string_view name) {
  return !name.empty() && name.find('/') == std::string_view::npos;
}

}  // namespace vfsmodel

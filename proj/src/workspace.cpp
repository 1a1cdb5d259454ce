#include "weir/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "weir/errors.hpp"

namespace weir {

namespace fs = std::filesystem;

namespace {

bool is_within(const fs::path& root, const fs::path& candidate) {
  auto r = root.begin();
  auto c = candidate.begin();
  for (; r != root.end(); ++r, ++c) {
    if (c == candidate.end() || *r != *c) return false;
  }
  return true;
}

}  // namespace

Workspace::Workspace(fs::path root) {
  std::error_code ec;
  root_ = fs::canonical(root, ec);
  if (ec || !fs::is_directory(root_)) {
    throw Error("workspace root is not a directory: " + root.string());
  }
}

Workspace Workspace::create_from_seed(const fs::path& seed, const fs::path& dest) {
  std::error_code ec;
  fs::create_directories(dest, ec);
  if (ec) throw Error("cannot create workspace at " + dest.string() + ": " + ec.message());
  fs::copy(seed, dest,
           fs::copy_options::recursive | fs::copy_options::copy_symlinks |
               fs::copy_options::overwrite_existing,
           ec);
  if (ec) throw Error("cannot copy seed workspace: " + ec.message());
  return Workspace(dest);
}

void Workspace::set_audit_hook(std::function<void(const fs::path&)> hook) {
  audit_hook_ = std::move(hook);
}

void Workspace::audit(const fs::path& p) const {
  if (audit_hook_) audit_hook_(p);
}

fs::path Workspace::resolve(std::string_view relative) const {
  const fs::path raw{std::string(relative)};
  fs::path combined = (root_ / raw).lexically_normal();
  if (!is_within(root_, combined)) {
    throw EnvError(EnvError::Kind::PathEscapesSandbox,
                   "path escapes the workspace: '" + std::string(relative) + "'");
  }
  // Symlinks inside the workspace must not lead outside of it.
  std::error_code ec;
  fs::path resolved = fs::weakly_canonical(combined, ec);
  if (ec) resolved = combined;
  if (!is_within(root_, resolved)) {
    throw EnvError(EnvError::Kind::PathEscapesSandbox,
                   "path resolves outside the workspace: '" + std::string(relative) + "'");
  }
  audit(resolved);
  return resolved;
}

bool Workspace::exists(std::string_view relative) const {
  return fs::exists(resolve(relative));
}

std::string Workspace::list_dir(std::string_view relative) const {
  const fs::path dir = resolve(relative);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw EnvError(EnvError::Kind::NotADirectory,
                   "not a directory: '" + std::string(relative) + "'");
  }
  std::vector<std::string> entries;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    std::string name = entry.path().filename().string();
    if (entry.is_directory()) name += '/';
    entries.push_back(std::move(name));
  }
  std::sort(entries.begin(), entries.end());
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i != 0) out += '\n';
    out += entries[i];
  }
  return out;
}

std::string Workspace::read_resolved(const fs::path& target) const {
  std::ifstream in(target, std::ios::binary);
  if (!in.is_open()) {
    throw EnvError(EnvError::Kind::FileNotFound, "cannot read '" + target.filename().string() + "'");
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

std::string Workspace::read(std::string_view relative) const {
  const fs::path target = resolve(relative);
  if (!fs::is_regular_file(target)) {
    throw EnvError(EnvError::Kind::FileNotFound,
                   "no such file: '" + std::string(relative) + "'");
  }
  return read_resolved(target);
}

void Workspace::write_resolved(const fs::path& target, std::string_view content) {
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  const fs::path temp = target.parent_path() /
                        (".weir-tmp-" + std::to_string(::getpid()) + "-" +
                         std::to_string(++temp_counter_));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) throw Error("cannot open temp file for '" + target.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.good()) {
      fs::remove(temp, ec);
      throw Error("write failed for '" + target.string() + "'");
    }
  }
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp);
    throw Error("rename failed for '" + target.string() + "': " + ec.message());
  }
}

void Workspace::write(std::string_view relative, std::string_view content) {
  write_resolved(resolve(relative), content);
}

void Workspace::append(std::string_view relative, std::string_view content) {
  const fs::path target = resolve(relative);
  std::string merged;
  if (fs::exists(target)) merged = read_resolved(target);
  merged += content;
  write_resolved(target, merged);
}

void Workspace::copy(std::string_view source, std::string_view destination, bool overwrite) {
  const fs::path src = resolve(source);
  const fs::path dst = resolve(destination);
  if (!fs::is_regular_file(src)) {
    throw EnvError(EnvError::Kind::FileNotFound, "no such file: '" + std::string(source) + "'");
  }
  if (fs::exists(dst) && !overwrite) {
    throw EnvError(EnvError::Kind::OverwriteRefused,
                   "'" + std::string(destination) + "' exists; pass overwrite to replace it");
  }
  write_resolved(dst, read_resolved(src));
}

std::string Workspace::backup_key(const fs::path& resolved) const {
  return fs::relative(resolved, root_).generic_string();
}

void Workspace::push_backup(std::string_view relative) {
  const fs::path target = resolve(relative);
  auto& stack = backups_[backup_key(target)];
  if (fs::is_regular_file(target)) {
    stack.push_back(read_resolved(target));
  } else {
    stack.push_back(std::nullopt);  // undo of a created file deletes it
  }
}

void Workspace::undo(std::string_view relative) {
  const fs::path target = resolve(relative);
  auto it = backups_.find(backup_key(target));
  if (it == backups_.end() || it->second.empty()) {
    throw EnvError(EnvError::Kind::NothingToUndo,
                   "there is no AI edit to undo for '" + std::string(relative) + "'");
  }
  std::optional<std::string> snapshot = std::move(it->second.back());
  it->second.pop_back();
  if (snapshot.has_value()) {
    write_resolved(target, *snapshot);
  } else {
    std::error_code ec;
    fs::remove(target, ec);
  }
}

std::size_t Workspace::backup_depth(std::string_view relative) const {
  const fs::path target = resolve(relative);
  auto it = backups_.find(backup_key(target));
  return it == backups_.end() ? 0 : it->second.size();
}

}  // namespace weir

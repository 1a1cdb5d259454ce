#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace weir {

// Sandboxed task workspace. Every path is resolved relative to the root and
// rejected if it escapes, including through symlinks. Writes are atomic
// (temp file then rename). Backup stacks track AI edits for undo.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  // Recursively copies the seed directory to dest and opens it.
  static Workspace create_from_seed(const std::filesystem::path& seed,
                                    const std::filesystem::path& dest);

  const std::filesystem::path& root() const { return root_; }

  // Called with every resolved absolute path before any filesystem access;
  // lets tests audit sandbox soundness.
  void set_audit_hook(std::function<void(const std::filesystem::path&)> hook);

  // Resolves a workspace-relative path; throws EnvError(PathEscapesSandbox).
  std::filesystem::path resolve(std::string_view relative) const;

  bool exists(std::string_view relative) const;
  std::string list_dir(std::string_view relative) const;
  std::string read(std::string_view relative) const;
  void write(std::string_view relative, std::string_view content);
  void append(std::string_view relative, std::string_view content);
  void copy(std::string_view source, std::string_view destination, bool overwrite);

  // AI-edit backups. push_backup snapshots the file's current content (or its
  // absence); undo restores the top snapshot, deleting the file if the
  // snapshot says it did not exist.
  void push_backup(std::string_view relative);
  void undo(std::string_view relative);
  std::size_t backup_depth(std::string_view relative) const;

 private:
  std::string backup_key(const std::filesystem::path& resolved) const;
  void write_resolved(const std::filesystem::path& target, std::string_view content);
  std::string read_resolved(const std::filesystem::path& target) const;
  void audit(const std::filesystem::path& p) const;

  std::filesystem::path root_;
  std::map<std::string, std::vector<std::optional<std::string>>> backups_;
  std::function<void(const std::filesystem::path&)> audit_hook_;
  mutable unsigned long temp_counter_ = 0;
};

}  // namespace weir

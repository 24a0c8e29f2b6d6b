#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace inp::files {

/// Whole file as bytes. IoError if missing or unreadable.
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

void append_text(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Exclusive `.lock` file inside a directory, removed on destruction.
/// Throws IoError if another holder exists.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace inp::files

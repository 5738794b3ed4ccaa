#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fairaudit::testing {

/// Directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fairaudit-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return FAIRAUDIT_DATA_DIR; }

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// `n` distinct values drawn uniformly from [0, 1).
std::vector<double> distinct_uniform(std::mt19937_64& rng, std::size_t n);

}  // namespace fairaudit::testing

#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

namespace testing {

// Per-process scratch directory, removed on destruction.
struct ScratchDir {
  std::filesystem::path path;

  explicit ScratchDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("amlgnn_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "arbitrage/core.hpp"
#include "arbitrage/teachers.hpp"

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("arbitrage_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// A simulated teacher with the given per-language qualities and no noise.
inline arbitrage::TeacherSpec sim_teacher(
    std::string id, std::map<std::string, double> quality, double verbosity = 20.0,
    double noise_sigma = 0.0) {
  arbitrage::TeacherSpec t;
  t.id = std::move(id);
  t.kind = arbitrage::TeacherKind::kSimulated;
  t.profile.quality = std::move(quality);
  t.profile.verbosity = verbosity;
  t.profile.noise_sigma = noise_sigma;
  return t;
}

inline arbitrage::Prompt make_prompt(std::string id, std::string language,
                                     std::string text) {
  return {std::move(id), std::move(language), std::move(text)};
}

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "potwell/drift_model.hpp"
#include "potwell/series.hpp"

namespace testing {

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("potwell-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
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

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Euler path with equidistant steps, drawn without the library simulator.
inline potwell::Series euler_path(const potwell::DriftModel& m, double s0, double dt, std::size_t n,
                                  unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps;
  std::vector<double> t(n), s(n);
  s[0] = s0;
  for (std::size_t i = 1; i < n; ++i) {
    t[i] = t[i - 1] + dt;
    s[i] = s[i - 1] + m.drift(s[i - 1]) * dt + m.sigma() * s[i - 1] * std::sqrt(dt) * eps(rng);
  }
  return potwell::Series(std::move(t), std::move(s));
}

}  // namespace testing

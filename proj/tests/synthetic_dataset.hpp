#pragma once

// Writes a small dataset in the on-disk layout of the UCI HAR release, with class-dependent
// signals so models and KNN have something to learn.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "har/data.hpp"
#include "har/rng.hpp"

namespace har::testing {

namespace fs = std::filesystem;

struct SyntheticOptions {
  std::size_t train_windows = 96;
  std::size_t test_windows = 48;
  std::size_t features = 12;
  std::uint64_t seed = 42;
  double noise = 0.3;
};

// Formats like the dataset files: " 2.8858451e-001" (three-digit exponent).
inline std::string dataset_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.7e", v);
  std::string s = buf;
  const auto e = s.find('e');
  std::string exp = s.substr(e + 2);
  while (exp.size() < 3) exp = "0" + exp;
  return s.substr(0, e + 2) + exp;
}

inline double synthetic_sample(int cls, std::size_t channel, std::size_t t, double phase) {
  const double freq = 0.5 + 0.35 * cls + 0.05 * static_cast<double>(channel);
  const double amp = (cls < 3 ? 1.0 : 0.15) * (1.0 + 0.1 * static_cast<double>(channel % 3));
  const double offset = (channel < 3 ? 0.3 * cls : 0.05 * cls) - 0.5;
  return offset + amp * std::sin(2.0 * M_PI * freq * static_cast<double>(t) / 50.0 + phase);
}

inline void write_split(const fs::path& root, data::Split split, std::size_t n,
                        const SyntheticOptions& o, Rng& rng) {
  const std::string name = data::split_name(split);
  fs::create_directories(root / name / "Inertial Signals");
  std::vector<int> classes(n);
  std::vector<double> phases(n);
  for (std::size_t i = 0; i < n; ++i) {
    classes[i] = static_cast<int>(i % data::kNumClasses);
    phases[i] = uniform(rng, 0.0, 2.0 * M_PI);
  }
  for (std::size_t c = 0; c < data::kChannels; ++c) {
    std::ofstream f(data::signal_path(root, split, data::kSignalNames[c]));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < data::kWindowLen; ++t) {
        const double v = synthetic_sample(classes[i], c, t, phases[i]) +
                         o.noise * uniform(rng, -1.0, 1.0);
        f << (t % 7 == 0 ? "   " : " ") << dataset_float(v);
      }
      f << "\n";
    }
  }
  {
    std::ofstream f(data::labels_path(root, split));
    for (int c : classes) f << (c + 1) << "\n";
  }
  {
    std::ofstream f(data::features_path(root, split));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < o.features; ++j) {
        const double centre = std::cos(0.7 * classes[i] + 1.3 * static_cast<double>(j)) * 0.6;
        f << " " << dataset_float(centre + 0.25 * uniform(rng, -1.0, 1.0));
      }
      f << "\n";
    }
  }
}

inline void write_synthetic_dataset(const fs::path& root, const SyntheticOptions& o = {}) {
  fs::create_directories(root);
  Rng rng(o.seed);
  {
    std::ofstream f(root / "features.txt");
    for (std::size_t j = 0; j < o.features; ++j) f << (j + 1) << " feature-" << j << "()\n";
  }
  {
    std::ofstream f(root / "activity_labels.txt");
    const auto& names = data::canonical_class_names();
    for (std::size_t c = 0; c < names.size(); ++c) f << (c + 1) << " " << names[c] << "\n";
  }
  write_split(root, data::Split::train, o.train_windows, o, rng);
  write_split(root, data::Split::test, o.test_windows, o, rng);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("har_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace har::testing

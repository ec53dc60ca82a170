#pragma once

// Readers for the UCI HAR smartphone dataset as distributed:
//
//   <root>/features.txt, <root>/activity_labels.txt
//   <root>/<split>/y_<split>.txt, <root>/<split>/X_<split>.txt
//   <root>/<split>/Inertial Signals/<signal>_<split>.txt   (128 floats per line)
//
// Windows are assembled as (N, 128, 9) float tensors with channels ordered
// total_acc xyz, body_acc xyz, body_gyro xyz.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "har/errors.hpp"
#include "har/io.hpp"
#include "har/ops.hpp"
#include "har/tensor.hpp"

namespace har::data {

namespace fs = std::filesystem;

inline constexpr std::size_t kWindowLen = 128;
inline constexpr std::size_t kChannels = 9;
inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::size_t kStreamWidth = 3;
inline constexpr double kStdEpsilon = 1e-8;

inline constexpr std::array<std::string_view, kChannels> kSignalNames = {
    "total_acc_x", "total_acc_y", "total_acc_z", "body_acc_x", "body_acc_y",
    "body_acc_z",  "body_gyro_x", "body_gyro_y", "body_gyro_z"};

inline const std::vector<std::string>& canonical_class_names() {
  static const std::vector<std::string> names = {"WALKING", "WALKING_UPSTAIRS",
                                                 "WALKING_DOWNSTAIRS", "SITTING",
                                                 "STANDING", "LAYING"};
  return names;
}

enum class Split { train, test };

inline std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

inline fs::path signal_path(const fs::path& root, Split s, std::string_view signal) {
  return root / split_name(s) / "Inertial Signals" /
         (std::string(signal) + "_" + split_name(s) + ".txt");
}
inline fs::path labels_path(const fs::path& root, Split s) {
  return root / split_name(s) / ("y_" + split_name(s) + ".txt");
}
inline fs::path features_path(const fs::path& root, Split s) {
  return root / split_name(s) / ("X_" + split_name(s) + ".txt");
}

struct LabelSet {
  Tensorf onehot;                // (N, 6)
  std::vector<int> classes;      // (N) zero-based class indices
  std::vector<std::string> class_names;

  std::size_t size() const { return classes.size(); }
};

struct FeatureTable {
  Tensorf features;  // (N, F)
  std::vector<std::string> names;

  std::size_t rows() const { return features.empty() ? 0 : features.dim(0); }
  std::size_t width() const { return names.size(); }
};

struct StandardizationStats {
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> std{};
  std::vector<std::string> warnings;  // one entry per clamped channel
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  std::string to_csv() const {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i)
      out += io::fixed(edges[i]) + "," + io::fixed(edges[i + 1]) + "," +
             std::to_string(counts[i]) + "\n";
    return out;
  }
};

struct WindowedDataset {
  Tensorf signals;  // (N, 128, 9)
  LabelSet labels;
  FeatureTable features;  // empty unless requested

  std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::string read_required(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("missing file: " + p.string());
  try {
    return io::read_file(p);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t row = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(row++, line);
    pos = end + 1;
  }
}

// Parses whitespace-separated floats from one line into `out`; returns the count.
inline std::size_t parse_floats(std::string_view line, std::vector<float>& out,
                                const fs::path& file, std::size_t row) {
  std::size_t n = 0;
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    if (*p == '+') ++p;
    float v;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t'))
      throw DataError(file.string() + ": unparsable value on row " + std::to_string(row + 1));
    if (!std::isfinite(v))
      throw DataError(file.string() + ": non-finite value on row " + std::to_string(row + 1));
    out.push_back(v);
    ++n;
    p = next;
  }
  return n;
}

// Reads a matrix file where every row must have exactly `cols` values.
inline std::vector<float> read_matrix(const fs::path& file, std::size_t cols, std::size_t& rows) {
  const std::string text = read_required(file);
  std::vector<float> values;
  rows = 0;
  for_each_line(text, [&](std::size_t row, std::string_view line) {
    const std::size_t got = parse_floats(line, values, file, row);
    if (got != cols)
      throw DataError(file.string() + ": row " + std::to_string(row + 1) + " has " +
                      std::to_string(got) + " values, expected " + std::to_string(cols));
    rows = row + 1;
  });
  return values;
}

inline std::vector<std::string> read_lines(const fs::path& file) {
  const std::string text = read_required(file);
  std::vector<std::string> lines;
  for_each_line(text, [&](std::size_t, std::string_view line) { lines.emplace_back(line); });
  return lines;
}

}  // namespace detail

inline Tensorf load_inertial_signals(const fs::path& root, Split split) {
  std::array<std::vector<float>, kChannels> channels;
  std::size_t n = 0;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const fs::path file = signal_path(root, split, kSignalNames[c]);
    std::size_t rows = 0;
    channels[c] = detail::read_matrix(file, kWindowLen, rows);
    if (c == 0) {
      n = rows;
    } else if (rows != n) {
      throw DataError(file.string() + ": has " + std::to_string(rows) + " rows, " +
                      signal_path(root, split, kSignalNames[0]).string() + " has " +
                      std::to_string(n));
    }
  }
  Tensorf x({n, kWindowLen, kChannels});
  for (std::size_t c = 0; c < kChannels; ++c)
    for (std::size_t i = 0; i < n * kWindowLen; ++i) x[i * kChannels + c] = channels[c][i];
  return x;
}

// Reads "<index> <name>" lines; falls back to the canonical names if the file is absent.
inline std::vector<std::string> load_class_names(const fs::path& root) {
  const fs::path file = root / "activity_labels.txt";
  if (!fs::exists(file)) return canonical_class_names();
  std::vector<std::string> names;
  for (const auto& line : detail::read_lines(file)) {
    const auto sp = line.find_first_of(" \t");
    std::string name = sp == std::string::npos ? line : line.substr(line.find_first_not_of(" \t", sp));
    names.push_back(std::move(name));
  }
  if (names.size() != kNumClasses)
    throw DataError(file.string() + ": expected " + std::to_string(kNumClasses) +
                    " activity labels, found " + std::to_string(names.size()));
  return names;
}

inline LabelSet encode_labels(const std::vector<int>& raw, std::vector<std::string> names) {
  LabelSet ls;
  ls.class_names = std::move(names);
  ls.onehot = Tensorf({raw.size(), kNumClasses});
  ls.classes.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 1 || raw[i] > static_cast<int>(kNumClasses))
      throw DataError("label " + std::to_string(raw[i]) + " on row " + std::to_string(i + 1) +
                      " is outside 1.." + std::to_string(kNumClasses));
    ls.classes.push_back(raw[i] - 1);
    ls.onehot(i, static_cast<std::size_t>(raw[i] - 1)) = 1.0f;
  }
  return ls;
}

inline LabelSet load_labels(const fs::path& root, Split split) {
  const fs::path file = labels_path(root, split);
  std::vector<int> raw;
  for (const auto& line : detail::read_lines(file)) {
    const auto b = line.find_first_not_of(" \t");
    const auto e = line.find_last_not_of(" \t");
    int v = 0;
    auto [p, ec] = std::from_chars(line.data() + b, line.data() + e + 1, v);
    if (ec != std::errc() || p != line.data() + e + 1)
      throw DataError(file.string() + ": unparsable label on row " + std::to_string(raw.size() + 1));
    raw.push_back(v);
  }
  try {
    return encode_labels(raw, load_class_names(root));
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

inline FeatureTable load_feature_table(const fs::path& root, Split split) {
  FeatureTable t;
  t.names = detail::read_lines(root / "features.txt");
  std::size_t rows = 0;
  auto values = detail::read_matrix(features_path(root, split), t.names.size(), rows);
  t.features = Tensorf({rows, t.names.size()}, std::move(values));
  return t;
}

inline WindowedDataset load_split(const fs::path& root, Split split, bool with_features = false) {
  WindowedDataset ds;
  ds.signals = load_inertial_signals(root, split);
  ds.labels = load_labels(root, split);
  if (ds.labels.size() != ds.signals.dim(0))
    throw DataError(labels_path(root, split).string() + ": " + std::to_string(ds.labels.size()) +
                    " labels for " + std::to_string(ds.signals.dim(0)) + " windows");
  if (with_features) {
    ds.features = load_feature_table(root, split);
    if (ds.features.rows() != ds.labels.size())
      throw DataError(features_path(root, split).string() + ": " +
                      std::to_string(ds.features.rows()) + " rows for " +
                      std::to_string(ds.labels.size()) + " labels");
  }
  return ds;
}

// Per-channel population mean/std over every window and timestep, accumulated in double.
inline StandardizationStats fit_standardizer(const Tensorf& x) {
  require(x.rank() == 3 && x.dim(2) == kChannels, "fit_standardizer: expected (N, L, 9)");
  require(x.dim(0) >= 2, "fit_standardizer: need at least two windows");
  StandardizationStats s;
  const std::size_t count = x.size() / kChannels;
  std::array<double, kChannels> sum{};
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < kChannels; ++c) sum[c] += x[i * kChannels + c];
  for (std::size_t c = 0; c < kChannels; ++c) s.mean[c] = sum[c] / static_cast<double>(count);
  std::array<double, kChannels> sq{};
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double d = x[i * kChannels + c] - s.mean[c];
      sq[c] += d * d;
    }
  for (std::size_t c = 0; c < kChannels; ++c) {
    s.std[c] = std::sqrt(sq[c] / static_cast<double>(count));
    if (!(s.std[c] >= kStdEpsilon)) {
      s.warnings.push_back("channel " + std::string(kSignalNames[c]) +
                           " is degenerate; std clamped to 1e-8");
      s.std[c] = kStdEpsilon;
    }
  }
  return s;
}

inline Tensorf apply_standardizer(const Tensorf& x, const StandardizationStats& s) {
  require(x.rank() == 3 && x.dim(2) == kChannels, "apply_standardizer: expected (N, L, 9)");
  Tensorf out(x.shape());
  const std::size_t count = x.size() / kChannels;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < kChannels; ++c)
      out[i * kChannels + c] =
          static_cast<float>((x[i * kChannels + c] - s.mean[c]) / s.std[c]);
  return out;
}

struct Streams {
  Tensorf total_acc, body_acc, body_gyro;  // (N, L, 3) each
};

inline Streams split_streams(const Tensorf& x) {
  require(x.rank() == 3 && x.dim(2) == kChannels,
          "split_streams: expected 9 channels, got " + shape_str(x.shape()));
  const std::array<std::size_t, 3> widths{kStreamWidth, kStreamWidth, kStreamWidth};
  auto parts = split_channels(x, std::span<const std::size_t>(widths));
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

inline Tensorf concat_streams(const Streams& s) {
  const std::array<Tensorf, 3> parts{s.total_acc, s.body_acc, s.body_gyro};
  return concat_channels(std::span<const Tensorf>(parts));
}

// Equal-width bins over [min, max] of one channel. A constant channel puts every value
// into the first bin.
inline Histogram channel_histogram(const Tensorf& x, std::size_t channel, std::size_t bins) {
  require(x.rank() == 3 && x.dim(2) == kChannels, "channel_histogram: expected (N, L, 9)");
  require(channel < kChannels, "channel_histogram: channel out of range");
  require(bins >= 2, "channel_histogram: need at least 2 bins");
  require(!x.empty(), "channel_histogram: empty tensor");
  const std::size_t count = x.size() / kChannels;
  double lo = x[channel], hi = x[channel];
  for (std::size_t i = 0; i < count; ++i) {
    const double v = x[i * kChannels + channel];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * b);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t b = 0;
    if (width > 0) {
      b = static_cast<std::size_t>((x[i * kChannels + channel] - lo) / width);
      if (b >= bins) b = bins - 1;
    }
    ++h.counts[b];
  }
  return h;
}

struct Moments {
  double mean = 0, std = 0, skewness = 0;
};

inline Moments channel_moments(const Tensorf& x, std::size_t channel) {
  require(x.rank() == 3 && x.dim(2) == kChannels && channel < kChannels,
          "channel_moments: expected (N, L, 9)");
  const std::size_t count = x.size() / kChannels;
  Moments m;
  for (std::size_t i = 0; i < count; ++i) m.mean += x[i * kChannels + channel];
  m.mean /= static_cast<double>(count);
  double m2 = 0, m3 = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = x[i * kChannels + channel] - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(count);
  m3 /= static_cast<double>(count);
  m.std = std::sqrt(m2);
  m.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return m;
}

}  // namespace har::data

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "har/data.hpp"
#include "synthetic_dataset.hpp"
#include "test_util.hpp"

using namespace har;
using namespace har::data;
using har::testing::bitwise_equal;
using har::testing::TempDir;
using har::testing::write_synthetic_dataset;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

void rewrite(const fs::path& file, const std::function<std::string(std::string)>& edit) {
  std::string text = io::read_file(file);
  std::ofstream(file, std::ios::trunc) << edit(text);
}

std::string drop_last_line(std::string s) {
  s.pop_back();
  return s.substr(0, s.rfind('\n') + 1);
}

// Independent reference: parse the raw text with iostreams and run Welford per channel.
std::array<std::pair<double, double>, kChannels> welford_over_files(const fs::path& root) {
  std::array<std::pair<double, double>, kChannels> out;
  for (std::size_t c = 0; c < kChannels; ++c) {
    std::ifstream f(signal_path(root, Split::train, kSignalNames[c]));
    double mean = 0, m2 = 0, v = 0;
    std::size_t n = 0;
    while (f >> v) {
      const double x = static_cast<float>(v);
      ++n;
      const double d = x - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (x - mean);
    }
    out[c] = {mean, std::sqrt(m2 / static_cast<double>(n))};
  }
  return out;
}

Tensorf windows_from_channel_values(const std::vector<float>& values_per_window) {
  Tensorf x({values_per_window.size(), kWindowLen, kChannels});
  for (std::size_t n = 0; n < values_per_window.size(); ++n)
    for (std::size_t t = 0; t < kWindowLen; ++t)
      for (std::size_t c = 0; c < kChannels; ++c) x(n, t, c) = values_per_window[n];
  return x;
}

}  // namespace

class SyntheticData : public ::testing::Test {
 protected:
  void SetUp() override { write_synthetic_dataset(dir.path()); }
  TempDir dir{"data"};
};

TEST_F(SyntheticData, LoadsSplitsWithExpectedShapes) {
  const auto tr = load_split(dir.path(), Split::train, true);
  const auto te = load_split(dir.path(), Split::test, true);
  EXPECT_EQ(tr.signals.shape(), (Shape{96, 128, 9}));
  EXPECT_EQ(te.signals.shape(), (Shape{48, 128, 9}));
  EXPECT_EQ(tr.labels.onehot.shape(), (Shape{96, 6}));
  EXPECT_EQ(tr.features.features.shape(), (Shape{96, 12}));
  EXPECT_EQ(tr.features.names.front(), "1 feature-0()");
  EXPECT_EQ(tr.labels.class_names, canonical_class_names());
}

TEST_F(SyntheticData, ChannelsFollowCanonicalOrder) {
  const auto x = load_inertial_signals(dir.path(), Split::train);
  for (std::size_t c = 0; c < kChannels; ++c) {
    std::ifstream f(signal_path(dir.path(), Split::train, kSignalNames[c]));
    double first = 0, second = 0;
    f >> first >> second;
    EXPECT_EQ(x(0, 0, c), static_cast<float>(first)) << kSignalNames[c];
    EXPECT_EQ(x(0, 1, c), static_cast<float>(second)) << kSignalNames[c];
  }
}

TEST_F(SyntheticData, LabelsAreOneHotAndZeroBased) {
  const auto ls = load_labels(dir.path(), Split::train);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    EXPECT_EQ(ls.classes[i], static_cast<int>(i % 6));
    float row = 0;
    for (std::size_t k = 0; k < 6; ++k) row += ls.onehot(i, k);
    EXPECT_EQ(row, 1.0f);
    EXPECT_EQ(ls.onehot(i, static_cast<std::size_t>(ls.classes[i])), 1.0f);
  }
}

TEST_F(SyntheticData, LoadingIsDeterministic) {
  const auto a = load_split(dir.path(), Split::test, true);
  const auto b = load_split(dir.path(), Split::test, true);
  EXPECT_TRUE(bitwise_equal(a.signals, b.signals));
  EXPECT_TRUE(bitwise_equal(a.features.features, b.features.features));
  EXPECT_EQ(a.labels.classes, b.labels.classes);
}

TEST_F(SyntheticData, MissingSignalFileIsNamed) {
  const auto file = signal_path(dir.path(), Split::train, "body_gyro_z");
  fs::remove(file);
  const auto msg = error_of([&] { load_split(dir.path(), Split::train); });
  EXPECT_NE(msg.find("body_gyro_z_train.txt"), std::string::npos) << msg;
}

TEST_F(SyntheticData, RowCountMismatchBetweenChannels) {
  rewrite(signal_path(dir.path(), Split::train, "body_acc_y"), drop_last_line);
  const auto msg = error_of([&] { load_inertial_signals(dir.path(), Split::train); });
  EXPECT_NE(msg.find("body_acc_y_train.txt"), std::string::npos) << msg;
  EXPECT_NE(msg.find("95 rows"), std::string::npos) << msg;
}

TEST_F(SyntheticData, LabelCountMismatch) {
  rewrite(labels_path(dir.path(), Split::test), drop_last_line);
  const auto msg = error_of([&] { load_split(dir.path(), Split::test); });
  EXPECT_NE(msg.find("47 labels for 48 windows"), std::string::npos) << msg;
}

TEST_F(SyntheticData, TruncatedFeatureRowIsReported) {
  rewrite(features_path(dir.path(), Split::train), [](std::string s) {
    std::size_t pos = 0;
    for (int i = 0; i < 2; ++i) pos = s.find('\n', pos) + 1;
    const std::size_t eol = s.find('\n', pos);
    const std::size_t last = s.rfind(' ', eol);
    return s.erase(last, eol - last);
  });
  const auto msg = error_of([&] { load_feature_table(dir.path(), Split::train); });
  EXPECT_NE(msg.find("row 3 has 11 values, expected 12"), std::string::npos) << msg;
}

TEST_F(SyntheticData, UnparsableValueIsReported) {
  rewrite(signal_path(dir.path(), Split::test, "total_acc_x"), [](std::string s) {
    const auto p = s.find('\n') + 3;
    s[p] = 'x';
    return s;
  });
  const auto msg = error_of([&] { load_inertial_signals(dir.path(), Split::test); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
}

TEST_F(SyntheticData, OutOfRangeLabelIsRejected) {
  rewrite(labels_path(dir.path(), Split::train), [](std::string s) { return "7\n" + s.substr(2); });
  const auto msg = error_of([&] { load_labels(dir.path(), Split::train); });
  EXPECT_NE(msg.find("label 7 on row 1"), std::string::npos) << msg;
}

TEST_F(SyntheticData, StandardizerMatchesStreamingOracle) {
  const auto x = load_inertial_signals(dir.path(), Split::train);
  const auto s = fit_standardizer(x);
  const auto ref = welford_over_files(dir.path());
  for (std::size_t c = 0; c < kChannels; ++c) {
    EXPECT_NEAR(s.mean[c], ref[c].first, 1e-12);
    EXPECT_NEAR(s.std[c], ref[c].second, 1e-12);
  }
  EXPECT_TRUE(s.warnings.empty());
}

TEST_F(SyntheticData, StandardizedTrainChannelsHaveUnitMoments) {
  const auto x = load_inertial_signals(dir.path(), Split::train);
  const auto z = apply_standardizer(x, fit_standardizer(x));
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto m = channel_moments(z, c);
    EXPECT_LT(std::abs(m.mean), 1e-6) << c;
    EXPECT_LT(std::abs(m.std - 1.0), 1e-6) << c;
  }
}

TEST(Standardizer, TwoValuesGiveZeroMeanUnitStd) {
  const auto s = fit_standardizer(windows_from_channel_values({-1.0f, 1.0f}));
  for (std::size_t c = 0; c < kChannels; ++c) {
    EXPECT_EQ(s.mean[c], 0.0);
    EXPECT_EQ(s.std[c], 1.0);
  }
}

TEST(Standardizer, ConstantChannelIsClampedWithWarning) {
  auto x = windows_from_channel_values({2.0f, 4.0f, 6.0f});
  for (std::size_t i = 0; i < x.size() / kChannels; ++i) x[i * kChannels + 4] = 3.5f;
  const auto s = fit_standardizer(x);
  EXPECT_EQ(s.std[4], kStdEpsilon);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("body_acc_y"), std::string::npos);
  const auto z = apply_standardizer(x, s);
  EXPECT_TRUE(z.all_finite());
  for (std::size_t i = 0; i < z.size() / kChannels; ++i) EXPECT_EQ(z[i * kChannels + 4], 0.0f);
}

TEST(Standardizer, TrainStatisticsApplyToOtherData) {
  const auto s = fit_standardizer(windows_from_channel_values({1.0f, 3.0f}));
  const auto z = apply_standardizer(windows_from_channel_values({5.0f}), s);
  EXPECT_EQ(z[0], 3.0f);
}

TEST(Standardizer, NeedsTwoWindows) {
  EXPECT_THROW(fit_standardizer(Tensorf({1, kWindowLen, kChannels})), ShapeError);
}

TEST(Streams, ConstantChannelsLandInTheirStream) {
  Tensorf x({2, kWindowLen, kChannels});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(i % kChannels);
  const auto s = split_streams(x);
  const std::array<const Tensorf*, 3> parts{&s.total_acc, &s.body_acc, &s.body_gyro};
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(parts[k]->shape(), (Shape{2, kWindowLen, 3}));
    for (std::size_t i = 0; i < parts[k]->size(); ++i)
      EXPECT_EQ((*parts[k])[i], static_cast<float>(3 * k + i % 3));
  }
}

TEST(Streams, RoundTripIsBitwise) {
  const auto x = har::testing::random_tensor<float>({5, kWindowLen, kChannels}, 3);
  EXPECT_TRUE(bitwise_equal(concat_streams(split_streams(x)), x));
}

TEST(Streams, RejectsWrongChannelCount) {
  EXPECT_THROW(split_streams(Tensorf({1, kWindowLen, 6})), ShapeError);
}

TEST(Histogram, CountsEveryValue) {
  const auto x = har::testing::random_tensor<float>({7, kWindowLen, kChannels}, 4);
  for (std::size_t bins : {2u, 10u, 50u}) {
    const auto h = channel_histogram(x, 2, bins);
    EXPECT_EQ(h.counts.size(), bins);
    EXPECT_EQ(h.edges.size(), bins + 1);
    EXPECT_EQ(h.total(), 7 * kWindowLen);
    for (std::size_t b = 0; b < bins; ++b) EXPECT_LT(h.edges[b], h.edges[b + 1]);
  }
}

TEST(Histogram, ConstantChannelFillsOneBin) {
  const auto x = windows_from_channel_values({0.25f, 0.25f});
  const auto h = channel_histogram(x, 0, 10);
  EXPECT_EQ(h.counts[0], 2 * kWindowLen);
  EXPECT_EQ(h.total(), 2 * kWindowLen);
}

TEST(Histogram, RejectsFewerThanTwoBins) {
  EXPECT_THROW(channel_histogram(Tensorf({1, kWindowLen, kChannels}), 0, 1), ShapeError);
}

TEST(Histogram, CsvFormat) {
  const auto h = channel_histogram(windows_from_channel_values({0.0f, 1.0f}), 0, 2);
  EXPECT_EQ(h.to_csv(), "bin_lo,bin_hi,count\n0.000000,0.500000,128\n0.500000,1.000000,128\n");
}

TEST(Moments, SkewnessSign) {
  Tensorf x({2, kWindowLen, kChannels});
  x(0, 0, 0) = 10.0f;
  EXPECT_GT(channel_moments(x, 0).skewness, 0.0);
  x(0, 0, 0) = -10.0f;
  EXPECT_LT(channel_moments(x, 0).skewness, 0.0);
}

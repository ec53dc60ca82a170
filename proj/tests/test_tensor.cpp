#include <array>
#include <cstring>

#include <gtest/gtest.h>

#include "har/io.hpp"
#include "har/ops.hpp"
#include "har/rng.hpp"
#include "har/tensor.hpp"
#include "test_util.hpp"

using namespace har;
using har::testing::bitwise_equal;
using har::testing::make;
using har::testing::random_tensor;

TEST(Tensor, ShapeAndIndexing) {
  Tensorf t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  t(1, 2, 3) = 5.0f;
  EXPECT_EQ(t[23], 5.0f);
  EXPECT_EQ(shape_str(t.shape()), "(2, 3, 4)");
}

TEST(Tensor, DataSizeMustMatchShape) {
  EXPECT_THROW(Tensorf(Shape{2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
}

TEST(Tensor, ReshapeKeepsData) {
  auto t = make<float>({2, 3}, {1, 2, 3, 4, 5, 6});
  auto r = t.reshaped({3, 2});
  EXPECT_EQ(r(2, 1), 6.0f);
  EXPECT_THROW((void)t.reshaped({4, 2}), ShapeError);
}

TEST(Tensor, SliceRows) {
  auto t = make<float>({3, 2}, {1, 2, 3, 4, 5, 6});
  auto s = t.slice_rows(1, 3);
  EXPECT_EQ(s.shape(), (Shape{2, 2}));
  EXPECT_EQ(s[0], 3.0f);
}

TEST(Ops, SplitConcatRoundTripIsBitwise) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + uniform_index(rng, 4), l = 1 + uniform_index(rng, 16);
    std::vector<std::size_t> widths;
    std::size_t c = 0;
    for (std::size_t k = 0, parts = 1 + uniform_index(rng, 4); k < parts; ++k) {
      widths.push_back(1 + uniform_index(rng, 5));
      c += widths.back();
    }
    const auto x = random_tensor<float>({n, l, c}, seed + 100);
    const auto parts = split_channels(x, std::span<const std::size_t>(widths));
    ASSERT_EQ(parts.size(), widths.size());
    const auto back = concat_channels(std::span<const Tensorf>(parts));
    EXPECT_TRUE(bitwise_equal(x, back)) << "seed " << seed;
  }
}

TEST(Ops, SplitTakesConsecutiveChannels) {
  auto x = make<float>({1, 2, 4}, {0, 1, 2, 3, 10, 11, 12, 13});
  const std::array<std::size_t, 2> w{1, 3};
  const auto p = split_channels(x, std::span<const std::size_t>(w));
  EXPECT_EQ(p[0].storage(), (std::vector<float>{0, 10}));
  EXPECT_EQ(p[1].storage(), (std::vector<float>{1, 2, 3, 11, 12, 13}));
}

TEST(Ops, SplitRejectsBadWidths) {
  Tensorf x({1, 2, 4});
  const std::array<std::size_t, 2> w{1, 2};
  EXPECT_THROW(split_channels(x, std::span<const std::size_t>(w)), ShapeError);
}

TEST(Ops, ConcatRejectsMismatchedLeadingShape) {
  const std::array<Tensorf, 2> parts{Tensorf({1, 2, 3}), Tensorf({1, 3, 3})};
  EXPECT_THROW(concat_channels(std::span<const Tensorf>(parts)), ShapeError);
}

TEST(Ops, GatherRows) {
  auto x = make<float>({3, 2}, {1, 2, 3, 4, 5, 6});
  const std::array<std::size_t, 3> idx{2, 0, 2};
  const auto g = gather_rows(x, std::span<const std::size_t>(idx));
  EXPECT_EQ(g.storage(), (std::vector<float>{5, 6, 1, 2, 5, 6}));
  const std::array<std::size_t, 1> bad{3};
  EXPECT_THROW(gather_rows(x, std::span<const std::size_t>(bad)), ShapeError);
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(uniform_index(rng, 7), 7u);
}

TEST(Rng, FisherYatesIsAPermutation) {
  Rng rng(11);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
  fisher_yates(std::span<int>(v), rng);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  EXPECT_NE(v, sorted);
}

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

TEST(Io, WriteAtomicLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "har_io_test";
  std::filesystem::remove_all(dir);
  const auto file = dir / "sub" / "out.csv";
  io::write_atomic(file, "a,b\n");
  EXPECT_EQ(io::read_file(file), "a,b\n");
  io::write_atomic(file, "c\n");
  EXPECT_EQ(io::read_file(file), "c\n");
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    EXPECT_NE(e.path().extension(), ".tmp");
  std::filesystem::remove_all(dir);
}

TEST(Io, FixedFormatting) {
  EXPECT_EQ(io::fixed(0.5), "0.500000");
  EXPECT_EQ(io::fixed(1.0 / 3.0, 3), "0.333");
}

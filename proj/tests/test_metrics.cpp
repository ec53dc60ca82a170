#include <cmath>

#include <gtest/gtest.h>

#include "har/metrics.hpp"
#include "har/rng.hpp"

using namespace har;
using namespace har::metrics;

namespace {

std::vector<std::string> names(std::size_t k) {
  std::vector<std::string> n;
  for (std::size_t i = 0; i < k; ++i) n.push_back("c" + std::to_string(i));
  return n;
}

ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
  ConfusionMatrix cm(names(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t p = 0; p < rows.size(); ++p) cm.at(t, p) = rows[t][p];
  return cm;
}

}  // namespace

TEST(Confusion, TalliesTruthByPrediction) {
  const std::vector<int> preds{1, 1}, truths{0, 1};
  const auto cm = confusion(preds, truths, names(2));
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.at(1, 1), 1u);
  EXPECT_EQ(cm.at(0, 0), 0u);
  EXPECT_EQ(cm.total(), 2u);
}

TEST(Confusion, RejectsBadInput) {
  const std::vector<int> a{0, 1}, b{0}, c{0, 6};
  EXPECT_THROW(confusion(a, b, names(6)), std::invalid_argument);
  EXPECT_THROW(confusion(a, c, names(6)), std::invalid_argument);
}

TEST(Report, PerfectPredictions) {
  const std::vector<int> y{0, 1, 2, 3, 4, 5, 0, 1};
  const auto r = classification_report(confusion(y, y, names(6)));
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.weighted.f1, 1.0);
  EXPECT_EQ(r.macro.precision, 1.0);
}

TEST(Report, TwoClassExample) {
  const auto r = classification_report(from_rows({{1, 1}, {0, 2}}));
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[0].f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.8);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.per_class[0].support, 2u);
  EXPECT_DOUBLE_EQ(r.weighted.f1, (2 * (2.0 / 3.0) + 2 * 0.8) / 4);
}

TEST(Report, UnpredictedClassIsFlagged) {
  const auto r = classification_report(from_rows({{2, 0}, {1, 0}}));
  EXPECT_TRUE(r.per_class[1].precision_undefined);
  EXPECT_EQ(r.per_class[1].precision, 0.0);
  EXPECT_EQ(r.per_class[1].f1, 0.0);
  EXPECT_FALSE(r.per_class[0].precision_undefined);
  const auto absent = classification_report(from_rows({{2, 0}, {0, 0}}));
  EXPECT_TRUE(absent.per_class[1].recall_undefined);
}

TEST(Report, EmptyMatrixIsRejected) {
  EXPECT_THROW(classification_report(ConfusionMatrix(names(3))), std::invalid_argument);
}

TEST(Report, MatchesBruteForceOracleOnRandomMatrices) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 5);
    ConfusionMatrix cm(names(k));
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t p = 0; p < k; ++p) cm.at(t, p) = uniform_index(rng, 20);
    if (cm.total() == 0) cm.at(0, 0) = 1;
    const auto r = classification_report(cm);

    // Straight from the definitions: tp, fp and fn per class.
    double n = 0, correct = 0, wp = 0, wr = 0, wf = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t t = 0; t < k; ++t)
        for (std::size_t p = 0; p < k; ++p) {
          const double v = static_cast<double>(cm.at(t, p));
          if (t == c && p == c) tp += v;
          else if (p == c) fp += v;
          else if (t == c) fn += v;
        }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      EXPECT_NEAR(r.per_class[c].precision, prec, 1e-12);
      EXPECT_NEAR(r.per_class[c].recall, rec, 1e-12);
      EXPECT_NEAR(r.per_class[c].f1, f1, 1e-12);
      const double support = tp + fn;
      n += support;
      correct += tp;
      wp += support * prec;
      wr += support * rec;
      wf += support * f1;
    }
    EXPECT_NEAR(r.weighted.precision, wp / n, 1e-12);
    EXPECT_NEAR(r.weighted.recall, wr / n, 1e-12);
    EXPECT_NEAR(r.weighted.f1, wf / n, 1e-12);
    EXPECT_NEAR(r.accuracy, correct / n, 1e-12);
    EXPECT_EQ(r.accuracy, r.weighted.recall);
    for (const auto& c : r.per_class) {
      EXPECT_GE(c.f1, 0.0);
      EXPECT_LE(c.f1, 1.0);
      EXPECT_LE(c.f1, std::max(c.precision, c.recall) + 1e-15);
      EXPECT_GE(c.f1 + 1e-15, std::min(c.precision, c.recall));
    }
  }
}

TEST(Report, ClassPermutationPermutesScores) {
  const auto cm = from_rows({{5, 1, 0}, {2, 7, 1}, {0, 3, 4}});
  const std::size_t perm[3] = {2, 0, 1};
  ConfusionMatrix pm(names(3));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p) pm.at(perm[t], perm[p]) = cm.at(t, p);
  const auto a = classification_report(cm), b = classification_report(pm);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_DOUBLE_EQ(a.per_class[c].precision, b.per_class[perm[c]].precision);
    EXPECT_DOUBLE_EQ(a.per_class[c].recall, b.per_class[perm[c]].recall);
  }
  EXPECT_DOUBLE_EQ(a.accuracy, b.accuracy);
  EXPECT_NEAR(a.weighted.f1, b.weighted.f1, 1e-15);
}

TEST(Report, CsvAndJsonLayout) {
  ConfusionMatrix cm({"WALKING", "SITTING"});
  cm.at(0, 0) = 3;
  cm.at(1, 0) = 1;
  EXPECT_EQ(cm.to_csv(), "true\\pred,WALKING,SITTING\nWALKING,3,0\nSITTING,1,0\n");
  const auto j = classification_report(cm).to_json();
  EXPECT_EQ(j["per_class"].size(), 2u);
  EXPECT_EQ(j["per_class"][0]["class"], "WALKING");
  EXPECT_EQ(j["weighted"]["support"], 4);
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), 0.75);
  EXPECT_TRUE(j["per_class"][1]["precision_undefined"].get<bool>());
}

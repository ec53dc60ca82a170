#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "har/tensor.hpp"

namespace har::metrics {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> class_names)
      : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {}

  std::size_t classes() const { return names_.size(); }
  const std::vector<std::string>& class_names() const { return names_; }

  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * classes() + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * classes() + pred];
  }

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
  }
  std::uint64_t row_sum(std::size_t t) const {
    std::uint64_t n = 0;
    for (std::size_t p = 0; p < classes(); ++p) n += at(t, p);
    return n;
  }
  std::uint64_t col_sum(std::size_t p) const {
    std::uint64_t n = 0;
    for (std::size_t t = 0; t < classes(); ++t) n += at(t, p);
    return n;
  }
  std::uint64_t trace() const {
    std::uint64_t n = 0;
    for (std::size_t c = 0; c < classes(); ++c) n += at(c, c);
    return n;
  }

  // Header of predicted-class names, then one row per true class prefixed by its name.
  std::string to_csv() const {
    std::string out = "true\\pred";
    for (const auto& n : names_) out += "," + n;
    out += "\n";
    for (std::size_t t = 0; t < classes(); ++t) {
      out += names_[t];
      for (std::size_t p = 0; p < classes(); ++p) out += "," + std::to_string(at(t, p));
      out += "\n";
    }
    return out;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truths,
                                 std::vector<std::string> class_names) {
  if (preds.size() != truths.size())
    throw std::invalid_argument("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                                std::to_string(truths.size()) + " labels");
  ConfusionMatrix cm(std::move(class_names));
  const int k = static_cast<int>(cm.classes());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= k || truths[i] < 0 || truths[i] >= k)
      throw std::invalid_argument("confusion: class index out of range at position " +
                                  std::to_string(i));
    ++cm.at(static_cast<std::size_t>(truths[i]), static_cast<std::size_t>(preds[i]));
  }
  return cm;
}

struct ClassScores {
  std::string name;
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t support = 0;
  bool precision_undefined = false;  // no predictions for the class
  bool recall_undefined = false;     // no true instances of the class
};

struct Aggregate {
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t support = 0;
};

struct ClassificationReport {
  std::vector<ClassScores> per_class;
  Aggregate weighted;
  Aggregate macro;
  double accuracy = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    auto agg = [](const Aggregate& a) {
      return nlohmann::json{{"precision", a.precision},
                            {"recall", a.recall},
                            {"f1", a.f1},
                            {"support", a.support}};
    };
    j["per_class"] = nlohmann::json::array();
    for (const auto& c : per_class)
      j["per_class"].push_back({{"class", c.name},
                                {"precision", c.precision},
                                {"recall", c.recall},
                                {"f1", c.f1},
                                {"support", c.support},
                                {"precision_undefined", c.precision_undefined},
                                {"recall_undefined", c.recall_undefined}});
    j["weighted"] = agg(weighted);
    j["macro"] = agg(macro);
    j["accuracy"] = accuracy;
    return j;
  }
};

// Undefined ratios (zero denominators) are reported as 0 and flagged.
inline ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw std::invalid_argument("classification_report: empty confusion matrix");
  ClassificationReport r;
  const std::size_t k = cm.classes();
  for (std::size_t c = 0; c < k; ++c) {
    ClassScores s;
    s.name = cm.class_names()[c];
    const auto tp = static_cast<double>(cm.at(c, c));
    const std::uint64_t predicted = cm.col_sum(c);
    s.support = cm.row_sum(c);
    s.precision_undefined = predicted == 0;
    s.recall_undefined = s.support == 0;
    s.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    s.recall = s.support ? tp / static_cast<double>(s.support) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    r.per_class.push_back(s);
  }
  double tp_sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& s = r.per_class[c];
    const double w = static_cast<double>(s.support);
    r.weighted.precision += w * s.precision;
    r.weighted.f1 += w * s.f1;
    // support * recall == tp; summing counts keeps weighted recall identical to accuracy.
    tp_sum += static_cast<double>(cm.at(c, c));
    r.macro.precision += s.precision;
    r.macro.recall += s.recall;
    r.macro.f1 += s.f1;
  }
  const auto n = static_cast<double>(total);
  r.weighted.precision /= n;
  r.weighted.recall = tp_sum / n;
  r.weighted.f1 /= n;
  r.macro.precision /= static_cast<double>(k);
  r.macro.recall /= static_cast<double>(k);
  r.macro.f1 /= static_cast<double>(k);
  r.weighted.support = r.macro.support = total;
  r.accuracy = static_cast<double>(cm.trace()) / n;
  return r;
}

}  // namespace har::metrics

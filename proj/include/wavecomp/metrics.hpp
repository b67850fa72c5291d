#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wavecomp {

// Entry (i, j) counts samples of true class i predicted as class j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes, std::vector<std::string> names = {});
  ConfusionMatrix(std::vector<std::vector<std::uint64_t>> counts, std::vector<std::string> names = {});

  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);

  std::size_t size() const noexcept { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return cells_[truth * n_ + predicted]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t predicted) const;
  std::uint64_t trace() const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::string name(std::size_t i) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> cells_;
  std::vector<std::string> names_;
};

// One-vs-rest counts for class i.
struct OneVsRest {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

OneVsRest one_vs_rest(const ConfusionMatrix& cm, std::size_t i);

// Mean over classes of (TP + TN) / (TP + TN + FP + FN). Throws EmptyMatrix
// when the matrix has no samples.
double accuracy_mc(const ConfusionMatrix& cm);

// trace / total.
double plain_accuracy(const ConfusionMatrix& cm);

struct ClassMetrics {
  double accuracy = 0.0;  // one-vs-rest
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  bool no_predictions = false;  // TP + FP = 0; precision reported as 0
  bool no_samples = false;      // TP + FN = 0; recall reported as 0
};

std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& cm);

// class,accuracy_ovr,precision,recall,f1,support,flags
std::string metrics_csv(const ConfusionMatrix& cm);
// Header row of predicted names, then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace wavecomp

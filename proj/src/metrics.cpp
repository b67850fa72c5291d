#include "wavecomp/metrics.hpp"

#include <numeric>
#include <sstream>

#include "wavecomp/error.hpp"

namespace wavecomp {

namespace {

void require_samples(const ConfusionMatrix& cm) {
  if (cm.size() == 0 || cm.total() == 0) throw MetricsError(MetricsErrc::EmptyMatrix, "confusion matrix has no samples");
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::string> names)
    : n_(classes), cells_(classes * classes, 0), names_(std::move(names)) {
  if (!names_.empty() && names_.size() != n_)
    throw MetricsError(MetricsErrc::ShapeMismatch, "class name count differs from matrix size");
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::vector<std::uint64_t>> counts, std::vector<std::string> names)
    : ConfusionMatrix(counts.size(), std::move(names)) {
  for (std::size_t i = 0; i < n_; ++i) {
    if (counts[i].size() != n_) throw MetricsError(MetricsErrc::ShapeMismatch, "confusion matrix must be square");
    for (std::size_t j = 0; j < n_; ++j) cells_[i * n_ + j] = counts[i][j];
  }
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= n_ || predicted >= n_)
    throw MetricsError(MetricsErrc::ShapeMismatch, "class index out of range");
  cells_[truth * n_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
  return s;
}

std::string ConfusionMatrix::name(std::size_t i) const {
  return i < names_.size() ? names_[i] : "class" + std::to_string(i);
}

OneVsRest one_vs_rest(const ConfusionMatrix& cm, std::size_t i) {
  OneVsRest r;
  r.tp = cm.at(i, i);
  r.fn = cm.row_sum(i) - r.tp;
  r.fp = cm.column_sum(i) - r.tp;
  r.tn = cm.total() - r.tp - r.fp - r.fn;
  return r;
}

double accuracy_mc(const ConfusionMatrix& cm) {
  require_samples(cm);
  double sum = 0.0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const OneVsRest c = one_vs_rest(cm, i);
    sum += ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  }
  return sum / static_cast<double>(cm.size());
}

double plain_accuracy(const ConfusionMatrix& cm) {
  require_samples(cm);
  return ratio(cm.trace(), cm.total());
}

std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& cm) {
  require_samples(cm);
  std::vector<ClassMetrics> out(cm.size());
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const OneVsRest c = one_vs_rest(cm, i);
    ClassMetrics& m = out[i];
    m.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
    m.no_predictions = c.tp + c.fp == 0;
    m.no_samples = c.tp + c.fn == 0;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.support = c.tp + c.fn;
  }
  return out;
}

std::string metrics_csv(const ConfusionMatrix& cm) {
  const auto rows = precision_recall_f1(cm);
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "class,accuracy_ovr,precision,recall,f1,support,flags\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = rows[i];
    std::string flags;
    if (m.no_predictions) flags += "no_predictions";
    if (m.no_samples) flags += flags.empty() ? "no_samples" : ";no_samples";
    out << cm.name(i) << ',' << m.accuracy << ',' << m.precision << ',' << m.recall << ',' << m.f1 << ','
        << m.support << ',' << flags << '\n';
  }
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\predicted";
  for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.name(j);
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << cm.name(i);
    for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace wavecomp

#pragma once

// Per-class counts recomputed by walking every individual (truth, predicted)
// sample the matrix describes, independent of the row/column sum shortcuts.

#include <cmath>
#include <vector>

#include "wavecomp/metrics.hpp"
#include "wavecomp/rng.hpp"

namespace oracle {

struct Sample {
  std::size_t truth, predicted;
};

inline std::vector<Sample> expand(const wavecomp::ConfusionMatrix& cm) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < cm.size(); ++i)
    for (std::size_t j = 0; j < cm.size(); ++j)
      for (std::uint64_t k = 0; k < cm.at(i, j); ++k) out.push_back({i, j});
  return out;
}

struct Counts {
  double tp = 0, tn = 0, fp = 0, fn = 0;
};

inline Counts count(const std::vector<Sample>& samples, std::size_t c) {
  Counts k;
  for (const auto& s : samples) {
    const bool t = s.truth == c, p = s.predicted == c;
    if (t && p) ++k.tp;
    else if (!t && !p) ++k.tn;
    else if (p) ++k.fp;
    else ++k.fn;
  }
  return k;
}

inline double accuracy_mc(const std::vector<Sample>& samples, std::size_t classes) {
  double s = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto k = count(samples, c);
    s += (k.tp + k.tn) / (k.tp + k.tn + k.fp + k.fn);
  }
  return s / static_cast<double>(classes);
}

inline wavecomp::ConfusionMatrix random_matrix(wavecomp::Rng& rng, std::size_t n, std::uint64_t max_cell) {
  wavecomp::ConfusionMatrix cm(n);
  do {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        // Roughly a third of cells stay empty so zero rows and columns occur.
        if (wavecomp::uniform_index(rng, 3) == 0) continue;
        cm.add(i, j, wavecomp::uniform_index(rng, max_cell + 1));
      }
  } while (cm.total() == 0);
  return cm;
}

// Largest deviation of the library metrics from the per-sample recount.
inline double max_deviation(const wavecomp::ConfusionMatrix& cm) {
  const auto samples = expand(cm);
  double worst = std::abs(wavecomp::accuracy_mc(cm) - accuracy_mc(samples, cm.size()));
  const auto prf = wavecomp::precision_recall_f1(cm);
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const auto k = count(samples, c);
    const double p = k.tp + k.fp > 0 ? k.tp / (k.tp + k.fp) : 0.0;
    const double r = k.tp + k.fn > 0 ? k.tp / (k.tp + k.fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    worst = std::max({worst, std::abs(prf[c].precision - p), std::abs(prf[c].recall - r), std::abs(prf[c].f1 - f),
                      std::abs(prf[c].accuracy - (k.tp + k.tn) / static_cast<double>(samples.size()))});
    if (prf[c].no_predictions != (k.tp + k.fp == 0) || prf[c].no_samples != (k.tp + k.fn == 0)) worst = INFINITY;
    if (prf[c].support != static_cast<std::uint64_t>(k.tp + k.fn)) worst = INFINITY;
  }
  return worst;
}

}  // namespace oracle

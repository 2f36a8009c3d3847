#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include "cmrqa/errors.hpp"
#include "cmrqa/types.hpp"

namespace cmrqa {

// counts[truth][prediction], both ordered mild, intermediate, severe.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 3> counts{};

  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (const auto& row : counts)
      for (auto v : row) n += v;
    return n;
  }
  std::size_t trace() const noexcept { return counts[0][0] + counts[1][1] + counts[2][2]; }
  std::size_t row_sum(std::size_t r) const noexcept { return counts[r][0] + counts[r][1] + counts[r][2]; }
  std::size_t col_sum(std::size_t c) const noexcept { return counts[0][c] + counts[1][c] + counts[2][c]; }

  ConfusionMatrix transposed() const noexcept {
    ConfusionMatrix t;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) t.counts[c][r] = counts[r][c];
    return t;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

using LabelPair = std::pair<ArtefactLevel, ArtefactLevel>;  // (truth, prediction)

inline ConfusionMatrix confusion_matrix(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw ValidationError("confusion_matrix needs at least one pair");
  ConfusionMatrix cm;
  for (const auto& [t, p] : pairs) ++cm.counts[level_index(t)][level_index(p)];
  return cm;
}

struct Accuracy {
  double overall = 0;
  std::array<std::optional<double>, 3> per_class;  // recall; absent when the class has no truth rows
};

inline Accuracy accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw ValidationError("accuracy of an empty confusion matrix");
  Accuracy a;
  a.overall = static_cast<double>(cm.trace()) / static_cast<double>(n);
  for (std::size_t c = 0; c < 3; ++c)
    if (const auto rs = cm.row_sum(c); rs > 0)
      a.per_class[c] = static_cast<double>(cm.counts[c][c]) / static_cast<double>(rs);
  return a;
}

// Unweighted Cohen's kappa. When chance agreement is total (p_e = 1) the
// result is 1 for perfect observed agreement and 0 otherwise.
inline double cohen_kappa(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw ValidationError("cohen_kappa of an empty confusion matrix");
  const double total = static_cast<double>(n);
  const double po = static_cast<double>(cm.trace()) / total;
  double pe = 0;
  for (std::size_t c = 0; c < 3; ++c)
    pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  pe /= total * total;
  if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace cmrqa

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cmrqa/errors.hpp"
#include "cmrqa/image.hpp"

namespace cmrqa {

// Prewitt operators as printed: h_x responds to left-minus-right, h_y to
// top-minus-bottom.
using Kernel3 = std::array<std::array<int, 3>, 3>;

inline constexpr Kernel3 kPrewittX = {{{+1, 0, -1}, {+1, 0, -1}, {+1, 0, -1}}};
inline constexpr Kernel3 kPrewittY = {{{+1, +1, +1}, {0, 0, 0}, {-1, -1, -1}}};

struct NormConfig {
  double lower_percentile = 0.01;
  double upper_percentile = 0.99;

  void validate() const {
    if (!(lower_percentile >= 0.0 && lower_percentile < 1.0) ||
        !(upper_percentile > 0.0 && upper_percentile <= 1.0) || !(lower_percentile < upper_percentile))
      throw ValidationError("percentiles must satisfy 0 <= lower < upper <= 1");
  }
};

// Percentile with linear interpolation between order statistics
// (position q*(n-1) in the sorted sample).
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + frac * (b - a);
}

// Clip to the configured percentiles and map affinely onto [0,1]. A slice
// whose percentiles coincide maps to all zeros.
inline SliceImage normalize_slice(const SliceImage& s, const NormConfig& cfg = {}) {
  cfg.validate();
  const auto& v = s.storage();
  const double lo = percentile(v, cfg.lower_percentile);
  const double hi = percentile(v, cfg.upper_percentile);
  SliceImage out(s.rows(), s.cols(), 0.0);
  if (!(hi > lo)) return out;
  const double span = hi - lo;
  auto dst = out.values();
  for (std::size_t n = 0; n < v.size(); ++n) dst[n] = (std::clamp(v[n], lo, hi) - lo) / span;
  return out;
}

namespace detail {

// (a + c) + b is unchanged when the triple is reversed, which keeps the
// magnitude map exactly equivariant under 90 degree rotations.
inline double triple_sum(double a, double b, double c) { return (a + c) + b; }

}  // namespace detail

// Prewitt gradient magnitude sqrt((h_x*I)^2 + (h_y*I)^2), kernels applied as
// cross-correlation with edge-replicated borders. Same dims as the input.
inline SliceImage gradient_magnitude(const SliceImage& s) {
  const std::size_t R = s.rows(), C = s.cols();
  SliceImage out(R, C, 0.0);
  if (R == 0 || C == 0) return out;
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t ru = r == 0 ? 0 : r - 1;
    const std::size_t rd = r + 1 == R ? r : r + 1;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t cl = c == 0 ? 0 : c - 1;
      const std::size_t cr = c + 1 == C ? c : c + 1;
      const double left = detail::triple_sum(s(ru, cl), s(r, cl), s(rd, cl));
      const double right = detail::triple_sum(s(ru, cr), s(r, cr), s(rd, cr));
      const double top = detail::triple_sum(s(ru, cl), s(ru, c), s(ru, cr));
      const double bottom = detail::triple_sum(s(rd, cl), s(rd, c), s(rd, cr));
      const double gx = left - right;
      const double gy = top - bottom;
      out(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

// Mean of the gradient magnitude map.
inline double mean_gradient(const SliceImage& s) {
  if (s.empty()) return 0.0;
  const auto g = gradient_magnitude(s);
  double sum = 0.0;
  for (double v : g.values()) sum += v;
  return sum / static_cast<double>(g.size());
}

// Both classifier inputs for one slice: the normalized intensity image and
// the normalized gradient magnitude of that normalized image.
struct SliceRepresentations {
  SliceImage intensity;
  SliceImage gradmag;
};

inline SliceRepresentations make_representations(const SliceImage& s, const NormConfig& cfg = {}) {
  SliceRepresentations out;
  out.intensity = normalize_slice(s, cfg);
  out.gradmag = normalize_slice(gradient_magnitude(out.intensity), cfg);
  return out;
}

}  // namespace cmrqa

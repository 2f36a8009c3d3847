#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmrqa/classifier.hpp"
#include "cmrqa/decision.hpp"
#include "cmrqa/rng.hpp"
#include "cmrqa/volume.hpp"

namespace cmrqa::synth {

struct Options {
  std::uint64_t seed = 0;
  std::size_t per_tier = 20;
  std::size_t held_in_per_tier = 4;
  std::size_t slices = 8;
  std::size_t min_side = 232;
  std::size_t max_side = 280;
  std::array<double, 3> amplitudes{0.0, 0.15, 0.35};  // ghost weight per tier
};

struct Case {
  std::string id;
  ArtefactLevel label = ArtefactLevel::mild;
  double amplitude = 0;
  bool held_in = false;
  Volume volume;
  MaskVolume mask;
};

namespace detail {

inline double gaussian(StreamRng& rng) {
  // Box-Muller; avoids std::normal_distribution, whose algorithm is unspecified
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform(StreamRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.unit(); }

// Soft-edged disk indicator, 1 inside, 0 outside, linear over one pixel.
inline double disk(double dr, double dc, double radius) {
  const double d = std::sqrt(dr * dr + dc * dc);
  return std::clamp(radius + 0.5 - d, 0.0, 1.0);
}

struct Blob {
  double row, col, radius, intensity;
};

// Unit-variance Gaussian random field: white noise smoothed by a separable
// Gaussian of width sigma pixels.
inline std::vector<double> smooth_field(StreamRng& rng, std::size_t H, std::size_t W, double sigma) {
  std::vector<double> noise(H * W);
  for (auto& v : noise) v = gaussian(rng);
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3 * sigma));
  std::vector<double> kernel;
  double norm = 0;
  for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
    kernel.push_back(std::exp(-0.5 * d * d / (sigma * sigma)));
    norm += kernel.back() * kernel.back();
  }
  // scale so the 2D result has unit variance
  for (auto& k : kernel) k /= std::sqrt(norm);
  const auto h = static_cast<std::ptrdiff_t>(H), w = static_cast<std::ptrdiff_t>(W);
  std::vector<double> tmp(H * W, 0.0), out(H * W, 0.0);
  for (std::ptrdiff_t i = 0; i < h; ++i)
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0;
      for (std::ptrdiff_t d = -radius; d <= radius; ++d) acc += kernel[d + radius] * noise[i * w + (j + d + w) % w];
      tmp[i * w + j] = acc;
    }
  for (std::ptrdiff_t i = 0; i < h; ++i)
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0;
      for (std::ptrdiff_t d = -radius; d <= radius; ++d) acc += kernel[d + radius] * tmp[((i + d + h) % h) * w + j];
      out[i * w + j] = acc;
    }
  return out;
}

// Circular shift along columns, the phase-encode direction.
inline void add_shifted(const std::vector<double>& src, std::vector<double>& dst, std::size_t H, std::size_t W,
                        std::ptrdiff_t shift, double weight) {
  for (std::size_t i = 0; i < H; ++i)
    for (std::size_t j = 0; j < W; ++j) {
      const auto sj = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(j) - shift) % static_cast<std::ptrdiff_t>(W) +
                                                static_cast<std::ptrdiff_t>(W)) %
                                               static_cast<std::ptrdiff_t>(W));
      dst[i * W + j] += weight * src[i * W + sj];
    }
}

}  // namespace detail

// One phantom: smooth elliptical body with low-frequency shading, a few
// organ-like blobs, and a short-axis heart (bright blood pool inside a darker
// myocardial ring) whose radius shrinks towards the apex. Tissue carries a
// fine Gaussian texture (sd 25, correlation 1.5 px) and the image gets Rician-
// like noise (|x + n|, sd 4); ghosting averages the texture away, which is
// what the sharpness stubs detect. The mask covers the heart; the apical
// slice mask can be empty. Ghosting replaces each slice by (1 - a) * slice +
// a * mean of four copies shifted by +-d and +-2d columns, d about W / 8.
// Values are rounded to int16 range, as scanners store them.
inline Case make_case(const Options& opt, std::size_t index, ArtefactLevel label) {
  StreamRng rng(opt.seed, 0x5eed0000ULL + index);
  const auto side = [&] { return opt.min_side + rng.below(opt.max_side - opt.min_side + 1); };
  const std::size_t H = side(), W = side(), S = opt.slices;
  const double a = opt.amplitudes[level_index(label)];

  char name[32];
  std::snprintf(name, sizeof name, "synth_%03zu", index);
  VolumeInfo info;
  info.subject_id = name;
  info.spacing_mm = {1.4, 1.4, 8.0};

  const double cr = H / 2.0 + detail::uniform(rng, -8, 8), cc = W / 2.0 + detail::uniform(rng, -8, 8);
  const double body_r = H * detail::uniform(rng, 0.38, 0.42), body_c = W * detail::uniform(rng, 0.42, 0.46);
  const double body_level = detail::uniform(rng, 580, 620);
  const double shade_fr = detail::uniform(rng, 0.5, 1.5), shade_fc = detail::uniform(rng, 0.5, 1.5);
  const double heart_r = cr + detail::uniform(rng, -15, 5), heart_c = cc + detail::uniform(rng, -10, 15);
  const double pool_r0 = detail::uniform(rng, 22, 28), wall = detail::uniform(rng, 7, 9);
  const double pool_level = detail::uniform(rng, 430, 470), wall_level = detail::uniform(rng, 180, 220);
  const bool empty_apex = rng.below(2) == 0;
  std::vector<detail::Blob> blobs;
  for (std::size_t b = 0; b < 6; ++b) {
    const double ang = detail::uniform(rng, 0, 2 * std::numbers::pi), rad = detail::uniform(rng, 0.45, 0.85);
    blobs.push_back({cr + rad * body_r * std::sin(ang), cc + rad * body_c * std::cos(ang), detail::uniform(rng, 7, 10),
                     detail::uniform(rng, 300, 400)});
  }
  const auto shift = static_cast<std::ptrdiff_t>(W / 8 + rng.below(W / 16 + 1));
  const double texture_sd = 25.0, noise_sigma = 4.0;

  std::vector<double> voxels(S * H * W);
  std::vector<unsigned char> mask(S * H * W, 0);
  for (std::size_t k = 0; k < S; ++k) {
    const double t = S > 1 ? static_cast<double>(k) / static_cast<double>(S - 1) : 0.0;
    const double pool_r = pool_r0 * (1.0 - 0.4 * t);
    const bool last = k + 1 == S;
    const auto texture = detail::smooth_field(rng, H, W, 1.5);
    std::vector<double> clean(H * W);
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        const double y = (i - cr) / body_r, x = (j - cc) / body_c;
        const double body = std::clamp((1.0 - std::sqrt(x * x + y * y)) * body_r + 0.5, 0.0, 1.0);
        double v = body_level * (1.0 + 0.1 * std::sin(shade_fr * y + 0.3 * k) * std::cos(shade_fc * x));
        for (const auto& bl : blobs) {
          const double w = detail::disk(i - bl.row, j - bl.col, bl.radius);
          v = (1 - w) * v + w * bl.intensity;
        }
        const double outer = detail::disk(i - heart_r, j - heart_c, pool_r + wall);
        const double inner = detail::disk(i - heart_r, j - heart_c, pool_r);
        v = (1 - outer) * v + (outer - inner) * wall_level + inner * pool_level;
        clean[i * W + j] = body * (v + texture_sd * texture[i * W + j]);
        const double dr = i - heart_r, dc = j - heart_c;
        if (!(last && empty_apex) && dr * dr + dc * dc <= (pool_r + wall) * (pool_r + wall))
          mask[(k * H + i) * W + j] = 1;
      }

    std::vector<double> ghosted(H * W, 0.0);
    detail::add_shifted(clean, ghosted, H, W, 0, 1.0 - a);
    if (a > 0)
      for (std::ptrdiff_t m : {-2, -1, 1, 2}) detail::add_shifted(clean, ghosted, H, W, m * shift, a / 4.0);
    for (std::size_t p = 0; p < H * W; ++p) {
      const double v = std::abs(ghosted[p] + noise_sigma * detail::gaussian(rng));
      voxels[k * H * W + p] = std::round(std::min(v, 32767.0));
    }
  }

  Case c;
  c.id = name;
  c.label = label;
  c.amplitude = a;
  c.volume = Volume({H, W, S}, std::move(voxels), info);
  c.mask = MaskVolume({H, W, S}, std::move(mask));
  return c;
}

// per_tier cases of each level, interleaved mild/intermediate/severe; the
// first held_in_per_tier of each level are flagged for calibration.
inline std::vector<Case> make_benchmark(const Options& opt) {
  std::vector<Case> out;
  for (std::size_t i = 0; i < 3 * opt.per_tier; ++i) {
    out.push_back(make_case(opt, i, level_from_index(i % 3)));
    out.back().held_in = i / 3 < opt.held_in_per_tier;
  }
  return out;
}

struct Calibration {
  SharpnessParams intensity;
  SharpnessParams gradmag;
  std::array<double, 3> intensity_means{};  // per level, mean over held-in slices
  std::array<double, 3> gradmag_means{};
  std::size_t held_in_correct = 0;  // ensemble hits on the held-in volumes
};

// Mean gradient of every sampled patch, per representation and slice,
// sampled exactly as classify_subject samples them.
using PatchScores = std::vector<std::vector<double>>;

inline std::array<PatchScores, 2> patch_sharpness(const Case& c, const PipelineParams& params) {
  std::array<PatchScores, 2> out;
  const auto& v = c.volume;
  for (std::size_t k = 0; k < v.slices(); ++k) {
    auto slice = v.slice(k);
    const SliceImage raw(v.height(), v.width(), std::vector<double>(slice.begin(), slice.end()));
    const auto reps = make_representations(raw, params.norm);
    const auto roi = roi_for_slice(c.mask, k, params.sampler.patch_size);
    const auto origins =
        sample_origins(roi, params.sampler.patches_per_slice_test, params.sampler, slice_stream_id(v.subject_id(), k));
    for (std::size_t r = 0; r < 2; ++r) {
      out[r].emplace_back();
      for (const auto& o : origins)
        out[r].back().push_back(
            mean_gradient(extract_patch(r == 0 ? reps.intensity : reps.gradmag, o, params.sampler.patch_size)));
    }
  }
  return out;
}

// Subject label a sharpness stub would give, from precomputed patch scores.
inline ArtefactLevel stub_label(const PatchScores& scores, const SharpnessParams& p, const VotingParams& voting) {
  const SharpnessClassifier stub(Representation::intensity, p);
  SliceCounts counts;
  std::vector<ClassProb> probs;
  for (const auto& slice : scores) {
    probs.clear();
    for (double m : slice) probs.push_back(stub.score(m));
    counts.add(aggregate_slice(probs).label);
  }
  return biased_vote(counts, voting);
}

// Calibrates both representations on held-in volumes.
//
// Start from thresholds at the midpoints between per-level mean sharpness,
// with the scale sign following the observed direction so the stub also works
// when artefacts raise the statistic. Then search t1 over [mean_mild,
// mean_intermediate] and t2 over [mean_intermediate, mean_severe] on a grid,
// keep the settings where the full ensemble labels the most held-in subjects
// correctly, and move each threshold to the middle of that plateau. Midpoints
// alone ignore that a representation which over-escalates costs the ensemble
// more than one which under-escalates, since ties go to the severe side.
inline Calibration calibrate(std::span<const Case> held_in, const PipelineParams& params) {
  std::vector<std::array<PatchScores, 2>> scores;
  std::array<std::array<double, 3>, 2> sum{}, n{};
  for (const auto& c : held_in) {
    scores.push_back(patch_sharpness(c, params));
    for (std::size_t r = 0; r < 2; ++r)
      for (const auto& slice : scores.back()[r]) {
        double m = 0;
        for (double v : slice) m += v;
        sum[r][level_index(c.label)] += m / static_cast<double>(slice.size());
        n[r][level_index(c.label)] += 1;
      }
  }
  Calibration cal;
  std::array<SharpnessParams, 2> base;
  std::array<std::array<double, 3>, 2> mean{};
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t l = 0; l < 3; ++l) {
      if (n[r][l] == 0) throw ValidationError("calibration needs held-in volumes of every level");
      mean[r][l] = sum[r][l] / n[r][l];
    }
    const double gap = std::min(std::abs(mean[r][0] - mean[r][1]), std::abs(mean[r][1] - mean[r][2]));
    if (!(gap > 0)) throw ValidationError("calibration: levels are indistinguishable");
    base[r].scale = (mean[r][0] > mean[r][2] ? 4.0 : -4.0) / gap;
  }
  cal.intensity_means = mean[0];
  cal.gradmag_means = mean[1];

  constexpr std::size_t G = 20, N = G + 1;
  const auto at = [&](std::size_t r, std::size_t i, std::size_t j) {
    SharpnessParams p = base[r];
    p.t1 = mean[r][0] + (mean[r][1] - mean[r][0]) * static_cast<double>(i) / G;
    p.t2 = mean[r][1] + (mean[r][2] - mean[r][1]) * static_cast<double>(j) / G;
    return p;
  };
  // labels[r][i * N + j][subject]
  std::array<std::vector<std::vector<ArtefactLevel>>, 2> labels;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        labels[r].emplace_back();
        for (const auto& s : scores) labels[r].back().push_back(stub_label(s[r], at(r, i, j), params.voting));
      }

  using Point = std::array<std::size_t, 4>;  // intensity t1, t2, gradmag t1, t2
  const std::size_t per_rep = kAllArchitectures.size();
  std::vector<std::size_t> correct(N * N * N * N);
  const auto flat = [&](const Point& q) { return ((q[0] * N + q[1]) * N + q[2]) * N + q[3]; };
  std::vector<ArtefactLevel> votes(2 * per_rep);
  std::size_t best = 0;
  for (std::size_t a = 0; a < N * N; ++a)
    for (std::size_t b = 0; b < N * N; ++b) {
      std::size_t ok = 0;
      for (std::size_t s = 0; s < held_in.size(); ++s) {
        std::fill_n(votes.begin(), per_rep, labels[0][a][s]);
        std::fill_n(votes.begin() + per_rep, per_rep, labels[1][b][s]);
        ok += ensemble_vote(votes) == held_in[s].label;
      }
      correct[a * N * N + b] = ok;
      best = std::max(best, ok);
    }

  // best point closest to the midpoints, then centre each coordinate on its plateau
  Point q{};
  std::size_t q_dist = SIZE_MAX;
  for (std::size_t f = 0; f < correct.size(); ++f) {
    if (correct[f] != best) continue;
    const Point c{f / (N * N * N), f / (N * N) % N, f / N % N, f % N};
    std::size_t d = 0;
    for (auto v : c) d += v > G / 2 ? v - G / 2 : G / 2 - v;
    if (d < q_dist) q = c, q_dist = d;
  }
  for (int pass = 0; pass < 3; ++pass)
    for (std::size_t d = 0; d < 4; ++d) {
      Point lo = q, hi = q;
      while (lo[d] > 0) {
        Point t = lo;
        --t[d];
        if (correct[flat(t)] != best) break;
        lo = t;
      }
      while (hi[d] < G) {
        Point t = hi;
        ++t[d];
        if (correct[flat(t)] != best) break;
        hi = t;
      }
      q[d] = (lo[d] + hi[d]) / 2;
    }
  cal.intensity = at(0, q[0], q[1]);
  cal.gradmag = at(1, q[2], q[3]);
  cal.held_in_correct = best;
  return cal;
}

inline nlohmann::json to_params(const SharpnessParams& p) { return {{"t1", p.t1}, {"t2", p.t2}, {"s", p.scale}}; }

// Six stub_sharpness specs; each architecture gets the calibrated parameters
// of its representation.
inline std::vector<ClassifierSpec> roster_specs(const Calibration& cal) {
  std::vector<ClassifierSpec> out;
  for (auto a : kAllArchitectures)
    for (auto r : {Representation::intensity, Representation::gradmag}) {
      ClassifierSpec s{a, r, Backend::stub_sharpness};
      s.params = to_params(r == Representation::intensity ? cal.intensity : cal.gradmag);
      out.push_back(s);
    }
  return out;
}

}  // namespace cmrqa::synth

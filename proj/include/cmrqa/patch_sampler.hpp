#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cmrqa/errors.hpp"
#include "cmrqa/image.hpp"
#include "cmrqa/rng.hpp"
#include "cmrqa/roi_mask.hpp"
#include "cmrqa/types.hpp"

namespace cmrqa {

struct SamplerConfig {
  std::size_t patch_size = 224;
  double coverage_threshold = 0.8;
  std::size_t patches_per_slice_test = 20;
  std::size_t max_rejection_attempts = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0))
      throw ValidationError("coverage_threshold must be in (0, 1]");
    if (patch_size < 1) throw ValidationError("patch_size must be >= 1");
    if (patches_per_slice_test < 1) throw ValidationError("patches_per_slice_test must be >= 1");
    if (max_rejection_attempts < 1) throw ValidationError("max_rejection_attempts must be >= 1");
  }
};

// Top-left corner of a patch window in padded-slice coordinates.
struct PatchOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  bool fallback = false;

  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

struct Patch {
  SliceImage pixels;
  PatchOrigin origin;
  std::size_t slice_index = 0;
  Representation representation = Representation::intensity;
  std::string subject_id;

  bool fallback() const noexcept { return origin.fallback; }
};

// Symmetric zero padding that brings each slice axis up to the patch size.
struct Padding {
  std::size_t top = 0, left = 0;
  std::size_t rows = 0, cols = 0;  // padded extent

  static Padding for_slice(std::size_t rows, std::size_t cols, std::size_t patch_size) {
    Padding p;
    p.top = rows < patch_size ? (patch_size - rows) / 2 : 0;
    p.left = cols < patch_size ? (patch_size - cols) / 2 : 0;
    p.rows = std::max(rows, patch_size);
    p.cols = std::max(cols, patch_size);
    return p;
  }
};

// Summed-area table of an ROI foreground for O(1) window counts.
class CoverageIndex {
 public:
  explicit CoverageIndex(const RoiSlice& roi) : rows_(roi.rows()), cols_(roi.cols()), total_(roi.pixel_count()) {
    sat_.assign((rows_ + 1) * (cols_ + 1), 0);
    const auto& fg = roi.foreground();
    for (std::size_t r = 0; r < rows_; ++r) {
      std::size_t run = 0;
      for (std::size_t c = 0; c < cols_; ++c) {
        run += fg(r, c) ? 1 : 0;
        at(r + 1, c + 1) = at(r, c + 1) + run;
      }
    }
  }

  // Foreground pixels inside the window [row, row+size) x [col, col+size),
  // given in slice coordinates; the window may extend past the slice.
  std::size_t count(std::ptrdiff_t row, std::ptrdiff_t col, std::size_t size) const {
    const auto clampr = [&](std::ptrdiff_t v) {
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(rows_)));
    };
    const auto clampc = [&](std::ptrdiff_t v) {
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(cols_)));
    };
    const auto s = static_cast<std::ptrdiff_t>(size);
    const std::size_t r0 = clampr(row), r1 = clampr(row + s);
    const std::size_t c0 = clampc(col), c1 = clampc(col + s);
    if (r0 >= r1 || c0 >= c1) return 0;
    return at(r1, c1) + at(r0, c0) - at(r0, c1) - at(r1, c0);
  }

  double coverage(std::ptrdiff_t row, std::ptrdiff_t col, std::size_t size) const {
    return static_cast<double>(count(row, col, size)) / static_cast<double>(total_);
  }

  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t& at(std::size_t r, std::size_t c) { return sat_[r * (cols_ + 1) + c]; }
  std::size_t at(std::size_t r, std::size_t c) const { return sat_[r * (cols_ + 1) + c]; }

  std::size_t rows_, cols_, total_;
  std::vector<std::size_t> sat_;
};

// Fraction of the ROI foreground captured by a patch_size window whose
// top-left corner is (row, col) in slice coordinates.
inline double coverage(std::ptrdiff_t row, std::ptrdiff_t col, std::size_t patch_size, const RoiSlice& roi) {
  return CoverageIndex(roi).coverage(row, col, patch_size);
}

// Draws `count` patch origins. Candidates are uniform over origins whose
// window meets the foreground bounding box and are accepted when coverage
// reaches the threshold; after max_rejection_attempts misses the patch falls
// back to the window centered on the foreground centroid.
inline std::vector<PatchOrigin> sample_origins(const RoiSlice& roi, std::size_t count, const SamplerConfig& cfg,
                                               std::uint64_t stream_id) {
  cfg.validate();
  if (count < 1) throw ValidationError("patch count must be >= 1");
  const std::size_t P = cfg.patch_size;
  const auto pad = Padding::for_slice(roi.rows(), roi.cols(), P);
  const CoverageIndex index(roi);
  const auto& box = roi.bounding_box();

  const std::size_t br0 = box.row0 + pad.top, br1 = box.row1 + pad.top;
  const std::size_t bc0 = box.col0 + pad.left, bc1 = box.col1 + pad.left;
  const std::size_t row_lo = br0 + 1 > P ? br0 + 1 - P : 0;
  const std::size_t row_hi = std::min(pad.rows - P, br1);
  const std::size_t col_lo = bc0 + 1 > P ? bc0 + 1 - P : 0;
  const std::size_t col_hi = std::min(pad.cols - P, bc1);

  const auto cover = [&](std::size_t r, std::size_t c) {
    return index.coverage(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(pad.top),
                          static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(pad.left), P);
  };

  const auto centered = [&](double centroid, std::size_t offset, std::size_t extent) {
    const double want = centroid + static_cast<double>(offset) - static_cast<double>(P - 1) / 2.0;
    const auto o = static_cast<std::ptrdiff_t>(std::llround(want));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(o, 0, static_cast<std::ptrdiff_t>(extent - P)));
  };
  const PatchOrigin fallback{centered(roi.centroid_row(), pad.top, pad.rows),
                             centered(roi.centroid_col(), pad.left, pad.cols), true};

  StreamRng rng(cfg.seed, stream_id);
  std::vector<PatchOrigin> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < cfg.max_rejection_attempts; ++attempt) {
      const std::size_t r = row_lo + rng.below(row_hi - row_lo + 1);
      const std::size_t c = col_lo + rng.below(col_hi - col_lo + 1);
      if (cover(r, c) >= cfg.coverage_threshold) {
        out.push_back({r, c, false});
        accepted = true;
        break;
      }
    }
    if (!accepted) out.push_back(fallback);
  }
  return out;
}

// The patch_size window at `origin` of the zero-padded slice.
inline SliceImage extract_patch(const SliceImage& slice, const PatchOrigin& origin, std::size_t patch_size) {
  const auto pad = Padding::for_slice(slice.rows(), slice.cols(), patch_size);
  if (origin.row + patch_size > pad.rows || origin.col + patch_size > pad.cols)
    throw ValidationError("patch origin outside padded slice");
  SliceImage out(patch_size, patch_size, 0.0);
  for (std::size_t r = 0; r < patch_size; ++r) {
    const std::size_t pr = origin.row + r;
    if (pr < pad.top || pr - pad.top >= slice.rows()) continue;
    const std::size_t sr = pr - pad.top;
    for (std::size_t c = 0; c < patch_size; ++c) {
      const std::size_t pc = origin.col + c;
      if (pc < pad.left || pc - pad.left >= slice.cols()) continue;
      out(r, c) = slice(sr, pc - pad.left);
    }
  }
  return out;
}

struct PatchProvenance {
  std::string subject_id;
  std::size_t slice_index = 0;
  Representation representation = Representation::intensity;
};

inline std::vector<Patch> extract_patches(const SliceImage& slice, const std::vector<PatchOrigin>& origins,
                                          std::size_t patch_size, const PatchProvenance& prov) {
  std::vector<Patch> out;
  out.reserve(origins.size());
  for (const auto& o : origins)
    out.push_back(Patch{extract_patch(slice, o, patch_size), o, prov.slice_index, prov.representation,
                        prov.subject_id});
  return out;
}

// Samples `count` patches from `slice`; deterministic in (cfg.seed, stream_id).
inline std::vector<Patch> sample_patches(const SliceImage& slice, const RoiSlice& roi, std::size_t count,
                                         const SamplerConfig& cfg, std::uint64_t stream_id,
                                         const PatchProvenance& prov = {}) {
  if (roi.rows() != slice.rows() || roi.cols() != slice.cols())
    throw ValidationError("ROI dims do not match slice dims");
  return extract_patches(slice, sample_origins(roi, count, cfg, stream_id), cfg.patch_size, prov);
}

}  // namespace cmrqa

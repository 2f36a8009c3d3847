#pragma once

#include <algorithm>
#include <cstddef>

#include "cmrqa/errors.hpp"
#include "cmrqa/image.hpp"
#include "cmrqa/volume.hpp"

namespace cmrqa {

enum class RoiSource { mask, fallback_center };

struct BoundingBox {
  std::size_t row0 = 0, col0 = 0;  // inclusive
  std::size_t row1 = 0, col1 = 0;  // inclusive
};

// Foreground of one slice. Never empty.
class RoiSlice {
 public:
  RoiSlice(BinaryImage foreground, RoiSource source) : fg_(std::move(foreground)), source_(source) {
    bool any = false;
    double sr = 0, sc = 0;
    for (std::size_t r = 0; r < fg_.rows(); ++r) {
      for (std::size_t c = 0; c < fg_.cols(); ++c) {
        if (!fg_(r, c)) continue;
        if (!any) {
          box_ = {r, c, r, c};
          any = true;
        }
        box_.row0 = std::min(box_.row0, r);
        box_.row1 = std::max(box_.row1, r);
        box_.col0 = std::min(box_.col0, c);
        box_.col1 = std::max(box_.col1, c);
        sr += static_cast<double>(r);
        sc += static_cast<double>(c);
        ++count_;
      }
    }
    if (!any) throw ValidationError("ROI foreground is empty");
    centroid_row_ = sr / static_cast<double>(count_);
    centroid_col_ = sc / static_cast<double>(count_);
  }

  const BinaryImage& foreground() const noexcept { return fg_; }
  RoiSource source() const noexcept { return source_; }
  std::size_t pixel_count() const noexcept { return count_; }
  const BoundingBox& bounding_box() const noexcept { return box_; }
  double centroid_row() const noexcept { return centroid_row_; }
  double centroid_col() const noexcept { return centroid_col_; }
  std::size_t rows() const noexcept { return fg_.rows(); }
  std::size_t cols() const noexcept { return fg_.cols(); }

 private:
  BinaryImage fg_;
  RoiSource source_;
  std::size_t count_ = 0;
  BoundingBox box_;
  double centroid_row_ = 0, centroid_col_ = 0;
};

// Centered square of side max(1, min(rows, cols, patch_size) / 2).
inline BinaryImage center_square(std::size_t rows, std::size_t cols, std::size_t patch_size = 224) {
  const std::size_t side = std::max<std::size_t>(1, std::min({rows, cols, patch_size}) / 2);
  const std::size_t r0 = (rows - side) / 2, c0 = (cols - side) / 2;
  BinaryImage out(rows, cols, 0);
  for (std::size_t r = r0; r < r0 + side; ++r)
    for (std::size_t c = c0; c < c0 + side; ++c) out(r, c) = 1;
  return out;
}

inline RoiSlice roi_from_image(BinaryImage mask_slice, std::size_t patch_size = 224) {
  for (auto v : mask_slice.values())
    if (v) return RoiSlice(std::move(mask_slice), RoiSource::mask);
  return RoiSlice(center_square(mask_slice.rows(), mask_slice.cols(), patch_size), RoiSource::fallback_center);
}

// Mask support of slice `slice_index`, or the centered fallback square when
// that slice has no foreground.
inline RoiSlice roi_for_slice(const MaskVolume& mask, std::size_t slice_index, std::size_t patch_size = 224) {
  if (slice_index >= mask.slices())
    throw ValidationError("slice index " + std::to_string(slice_index) + " out of range (" +
                          std::to_string(mask.slices()) + " slices)");
  return roi_from_image(mask.slice_image(slice_index), patch_size);
}

}  // namespace cmrqa

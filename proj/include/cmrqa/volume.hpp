#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmrqa/errors.hpp"
#include "cmrqa/image.hpp"

namespace cmrqa {

enum class Phase { ED, ES };
enum class BreathCondition { breath_hold, half_breath_hold, free_breath, intense_breath };

struct VolumeShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t slices = 0;

  std::size_t voxel_count() const noexcept { return height * width * slices; }
  std::string str() const {
    return "(" + std::to_string(height) + "," + std::to_string(width) + "," +
           std::to_string(slices) + ")";
  }
  friend bool operator==(const VolumeShape&, const VolumeShape&) = default;
};

struct VolumeInfo {
  std::string subject_id;
  std::optional<Phase> phase;
  std::optional<BreathCondition> condition;
  std::optional<std::array<double, 3>> spacing_mm;
};

// Voxels are stored slice-major then row then column, so a slice is one
// contiguous run of height*width values.
template <typename T>
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(VolumeShape shape, std::vector<T> voxels) : shape_(shape), voxels_(std::move(voxels)) {
    if (shape.height == 0 || shape.width == 0 || shape.slices == 0)
      throw ValidationError("volume dims must be positive, got " + shape.str());
    if (voxels_.size() != shape.voxel_count())
      throw ValidationError("voxel buffer holds " + std::to_string(voxels_.size()) +
                            " values, shape " + shape.str() + " needs " +
                            std::to_string(shape.voxel_count()));
  }

  const VolumeShape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t slices() const noexcept { return shape_.slices; }

  std::size_t offset(std::size_t row, std::size_t col, std::size_t slice) const noexcept {
    return (slice * shape_.height + row) * shape_.width + col;
  }
  const T& at(std::size_t row, std::size_t col, std::size_t slice) const {
    return voxels_[offset(row, col, slice)];
  }
  std::span<const T> slice(std::size_t k) const {
    return std::span<const T>(voxels_).subspan(k * shape_.height * shape_.width,
                                               shape_.height * shape_.width);
  }
  std::span<const T> voxels() const noexcept { return voxels_; }

 private:
  VolumeShape shape_;
  std::vector<T> voxels_;
};

// Scalar MRI volume in canonical (row, column, slice) order. Immutable once
// built, so it can be shared between threads.
class Volume : public VoxelGrid<double> {
 public:
  Volume() = default;
  Volume(VolumeShape shape, std::vector<double> voxels, VolumeInfo info = {})
      : VoxelGrid<double>(shape, std::move(voxels)), info_(std::move(info)) {
    const auto v = this->voxels();
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!std::isfinite(v[n])) {
        const std::size_t plane = shape.height * shape.width;
        throw ValidationError("non-finite voxel at (row=" + std::to_string((n % plane) / shape.width) +
                              ", col=" + std::to_string(n % shape.width) +
                              ", slice=" + std::to_string(n / plane) + ")");
      }
    }
  }

  const VolumeInfo& info() const noexcept { return info_; }
  const std::string& subject_id() const noexcept { return info_.subject_id; }

 private:
  VolumeInfo info_;
};

// Binary foreground labels paired with a Volume (values are 0 or 1).
class MaskVolume : public VoxelGrid<unsigned char> {
 public:
  MaskVolume() = default;
  MaskVolume(VolumeShape shape, std::vector<unsigned char> labels)
      : VoxelGrid<unsigned char>(shape, std::move(labels)) {
    for (auto v : voxels())
      if (v > 1) throw ValidationError("mask labels must be 0 or 1");
  }

  static MaskVolume zeros(VolumeShape shape) {
    return MaskVolume(shape, std::vector<unsigned char>(shape.voxel_count(), 0));
  }

  BinaryImage slice_image(std::size_t k) const {
    auto s = slice(k);
    return BinaryImage(height(), width(), std::vector<unsigned char>(s.begin(), s.end()));
  }
};

// Slice k of v as an independent 2D image; concatenating all slices along the
// third axis rebuilds v.
inline std::vector<SliceImage> extract_slices(const Volume& v) {
  std::vector<SliceImage> out;
  out.reserve(v.slices());
  for (std::size_t k = 0; k < v.slices(); ++k) {
    auto s = v.slice(k);
    out.emplace_back(v.height(), v.width(), std::vector<double>(s.begin(), s.end()));
  }
  return out;
}

}  // namespace cmrqa

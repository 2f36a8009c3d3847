#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmrqa/errors.hpp"
#include "cmrqa/nifti.hpp"
#include "cmrqa/volume.hpp"

namespace cmrqa {

namespace detail {

struct RawArray {
  VolumeShape shape;
  std::vector<double> values;  // canonical slice-major order
  VolumeInfo info;
};

inline bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// File name without .nii / .nii.gz / .json.
inline std::string volume_stem(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (std::string_view ext : {".nii.gz", ".nii", ".json"}) {
    if (has_suffix(name, ext)) return name.substr(0, name.size() - ext.size());
  }
  return path.stem().string();
}

// CMRxMotion-style names carry condition and phase: "<subject>-<1..4>-<ED|ES>".
inline VolumeInfo info_from_name(const std::string& stem) {
  VolumeInfo info;
  info.subject_id = stem;
  static const std::regex pattern(R"(^.*-([1-4])-(ED|ES)$)");
  std::smatch m;
  if (std::regex_match(stem, m, pattern)) {
    info.condition = static_cast<BreathCondition>(m[1].str()[0] - '1');
    info.phase = m[2] == "ED" ? Phase::ED : Phase::ES;
  }
  return info;
}

inline RawArray read_nifti_array(const std::filesystem::path& path) {
  auto img = nifti::read(path);
  // trailing singleton axes are tolerated; anything else beyond 3D is not
  for (std::size_t i = 3; i < img.dims.size(); ++i) {
    if (img.dims[i] != 1)
      throw FormatError("'" + path.string() + "' is " + std::to_string(img.dims.size()) +
                        "D; only 3D scalar volumes are supported");
  }
  while (img.dims.size() < 3) img.dims.push_back(1);

  RawArray out;
  out.shape = {img.dims[0], img.dims[1], img.dims[2]};
  out.values.resize(out.shape.voxel_count());
  const std::size_t H = out.shape.height, W = out.shape.width;
  // file order is row fastest: i + H*(j + W*k)
  for (std::size_t k = 0; k < out.shape.slices; ++k)
    for (std::size_t j = 0; j < W; ++j)
      for (std::size_t i = 0; i < H; ++i)
        out.values[(k * H + i) * W + j] = img.values[i + H * (j + W * k)];
  out.info = info_from_name(volume_stem(path));
  const auto& pd = img.header.pixdim;
  if (pd[1] > 0 && pd[2] > 0 && pd[3] > 0) out.info.spacing_mm = std::array<double, 3>{pd[1], pd[2], pd[3]};
  return out;
}

template <typename T>
void decode_blob(const std::vector<char>& bytes, std::vector<double>& out) {
  out.resize(bytes.size() / sizeof(T));
  for (std::size_t n = 0; n < out.size(); ++n) {
    T v;
    std::memcpy(&v, bytes.data() + n * sizeof(T), sizeof(T));
    out[n] = static_cast<double>(v);
  }
}

inline std::size_t raw_dtype_size(const std::string& dtype) {
  if (dtype == "f64" || dtype == "i64") return 8;
  if (dtype == "f32" || dtype == "i32") return 4;
  if (dtype == "i16") return 2;
  if (dtype == "u8") return 1;
  return 0;
}

inline RawArray read_raw_json_array(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  RawArray out;
  std::string dtype;
  std::string data;
  try {
    out.shape = {meta.at("height").get<std::size_t>(), meta.at("width").get<std::size_t>(),
                 meta.at("slices").get<std::size_t>()};
    dtype = meta.value("dtype", std::string("f64"));
    data = meta.at("data").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "' is not a raw volume sidecar: " + e.what());
  }
  const std::size_t esize = raw_dtype_size(dtype);
  if (esize == 0) throw FormatError("unsupported raw dtype '" + dtype + "'");
  if (out.shape.voxel_count() == 0) throw FormatError("raw volume dims must be positive");

  auto blob_path = std::filesystem::path(data);
  if (blob_path.is_relative()) blob_path = path.parent_path() / blob_path;
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("cannot read raw blob '" + blob_path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());
  if (bytes.size() != out.shape.voxel_count() * esize)
    throw FormatError("raw blob '" + blob_path.string() + "' holds " + std::to_string(bytes.size()) +
                      " bytes, expected " + std::to_string(out.shape.voxel_count() * esize));
  if (dtype == "f64") decode_blob<double>(bytes, out.values);
  else if (dtype == "f32") decode_blob<float>(bytes, out.values);
  else if (dtype == "i64") decode_blob<std::int64_t>(bytes, out.values);
  else if (dtype == "i32") decode_blob<std::int32_t>(bytes, out.values);
  else if (dtype == "i16") decode_blob<std::int16_t>(bytes, out.values);
  else decode_blob<std::uint8_t>(bytes, out.values);

  out.info = info_from_name(volume_stem(path));
  if (meta.contains("subject")) out.info.subject_id = meta["subject"].get<std::string>();
  if (meta.contains("phase")) out.info.phase = meta["phase"] == "ED" ? Phase::ED : Phase::ES;
  if (meta.contains("spacing")) out.info.spacing_mm = meta["spacing"].get<std::array<double, 3>>();
  return out;
}

inline RawArray read_any(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (has_suffix(name, ".json")) return read_raw_json_array(path);
  if (has_suffix(name, ".nii") || has_suffix(name, ".nii.gz")) return read_nifti_array(path);
  throw FormatError("unsupported volume file '" + path.string() + "' (expected .nii, .nii.gz or .json)");
}

}  // namespace detail

// True for file names the loaders accept.
inline bool is_volume_file(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  return detail::has_suffix(name, ".nii") || detail::has_suffix(name, ".nii.gz") ||
         detail::has_suffix(name, ".json");
}

// Loads a 3D scalar volume from NIfTI-1 (.nii, .nii.gz) or a raw-JSON sidecar.
inline Volume load_volume(const std::filesystem::path& path) {
  auto raw = detail::read_any(path);
  return Volume(raw.shape, std::move(raw.values), std::move(raw.info));
}

// Loads a foreground mask for `paired`; values > 0.5 become 1.
inline MaskVolume load_mask(const std::filesystem::path& path, const Volume& paired) {
  auto raw = detail::read_any(path);
  if (!(raw.shape == paired.shape()))
    throw ValidationError("mask '" + path.string() + "' has dims " + raw.shape.str() +
                          " but volume has dims " + paired.shape().str());
  std::vector<unsigned char> labels(raw.values.size());
  for (std::size_t n = 0; n < labels.size(); ++n) labels[n] = raw.values[n] > 0.5 ? 1 : 0;
  return MaskVolume(raw.shape, std::move(labels));
}

namespace detail {

template <typename T>
void write_raw_values(const std::filesystem::path& sidecar, VolumeShape shape, std::span<const T> values,
                      const VolumeInfo& info, const char* dtype) {
  const auto blob_name = volume_stem(sidecar) + ".bin";
  const auto blob_path = sidecar.parent_path() / blob_name;
  {
    std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
    if (!blob) throw IoError("cannot write '" + blob_path.string() + "'");
    blob.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(T)));
    if (!blob) throw IoError("write error on '" + blob_path.string() + "'");
  }
  nlohmann::ordered_json meta;
  meta["height"] = shape.height;
  meta["width"] = shape.width;
  meta["slices"] = shape.slices;
  meta["dtype"] = dtype;
  meta["data"] = blob_name;
  if (!info.subject_id.empty()) meta["subject"] = info.subject_id;
  if (info.phase) meta["phase"] = *info.phase == Phase::ED ? "ED" : "ES";
  if (info.spacing_mm) meta["spacing"] = *info.spacing_mm;
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + sidecar.string() + "'");
  out << meta.dump(2) << '\n';
}

}  // namespace detail

// Writes the raw-JSON format: `sidecar` plus "<stem>.bin" next to it holding
// little-endian f64 values in slice, row, column order.
inline void write_raw(const std::filesystem::path& sidecar, const Volume& v) {
  detail::write_raw_values<double>(sidecar, v.shape(), v.voxels(), v.info(), "f64");
}

inline void write_raw(const std::filesystem::path& sidecar, const MaskVolume& m) {
  detail::write_raw_values<unsigned char>(sidecar, m.shape(), m.voxels(), VolumeInfo{}, "u8");
}

namespace detail {

template <typename T>
std::vector<double> to_file_order(const VoxelGrid<T>& v) {
  const std::size_t H = v.height(), W = v.width();
  std::vector<double> out(v.shape().voxel_count());
  for (std::size_t k = 0; k < v.slices(); ++k)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) out[i + H * (j + W * k)] = static_cast<double>(v.at(i, j, k));
  return out;
}

}  // namespace detail

inline void write_nifti(const std::filesystem::path& path, const Volume& v,
                        nifti::Datatype dt = nifti::Datatype::float64) {
  const std::size_t dims[3] = {v.height(), v.width(), v.slices()};
  std::vector<float> pixdim;
  if (v.info().spacing_mm)
    for (double s : *v.info().spacing_mm) pixdim.push_back(static_cast<float>(s));
  nifti::write(path, dims, dt, detail::to_file_order(v), pixdim);
}

inline void write_nifti(const std::filesystem::path& path, const MaskVolume& m) {
  const std::size_t dims[3] = {m.height(), m.width(), m.slices()};
  nifti::write(path, dims, nifti::Datatype::uint8, detail::to_file_order(m));
}

}  // namespace cmrqa

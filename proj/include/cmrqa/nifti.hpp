#pragma once

// Minimal NIfTI-1 single-file (.nii / .nii.gz) reader and writer for 3D
// scalar images.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cmrqa/errors.hpp"

namespace cmrqa::nifti {

enum class Datatype : std::int16_t {
  uint8 = 2,
  int16 = 4,
  int32 = 8,
  float32 = 16,
  float64 = 64,
};

inline constexpr std::size_t kHeaderSize = 348;
inline constexpr std::size_t kDataOffset = 352;

// Decoded header fields we care about. dims[0] is the rank.
struct Header {
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 0;
  float scl_slope = 0;
  float scl_inter = 0;
};

// Values in file order (first axis fastest) converted to double, plus header.
struct Image {
  Header header;
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

namespace detail {

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw IoError("cannot read '" + path.string() + "': no such file");
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> buf;
  unsigned char chunk[1 << 16];
  int n = 0;
  while ((n = gzread(f, chunk, sizeof chunk)) > 0) buf.insert(buf.end(), chunk, chunk + n);
  int err = 0;
  const char* msg = gzerror(f, &err);
  gzclose(f);
  if (n < 0 || (err != Z_OK && err != Z_STREAM_END))
    throw IoError("read error in '" + path.string() + "': " + (msg ? msg : "unknown"));
  return buf;
}

template <typename T>
T load(const unsigned char* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swap) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void store(std::vector<unsigned char>& buf, std::size_t at, T v) {
  std::memcpy(buf.data() + at, &v, sizeof(T));
}

inline std::size_t datatype_size(std::int16_t dt) {
  switch (static_cast<Datatype>(dt)) {
    case Datatype::uint8: return 1;
    case Datatype::int16: return 2;
    case Datatype::int32: return 4;
    case Datatype::float32: return 4;
    case Datatype::float64: return 8;
  }
  return 0;
}

}  // namespace detail

inline Image read(const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  const auto buf = detail::read_all(path);
  if (buf.size() < kHeaderSize) throw FormatError("'" + path.string() + "' is too short for a NIfTI-1 header");

  const unsigned char* h = buf.data();
  bool swap = false;
  auto sizeof_hdr = detail::load<std::int32_t>(h, false);
  if (sizeof_hdr != 348) {
    swap = true;
    sizeof_hdr = detail::load<std::int32_t>(h, true);
    if (sizeof_hdr != 348) throw FormatError("'" + path.string() + "' is not a NIfTI-1 file");
  }
  if (std::memcmp(h + 344, "n+1", 4) != 0)
    throw FormatError("'" + path.string() + "' is not a single-file NIfTI-1 image (magic n+1)");

  Image img;
  for (int i = 0; i < 8; ++i) img.header.dim[i] = detail::load<std::int16_t>(h + 40 + 2 * i, swap);
  img.header.datatype = detail::load<std::int16_t>(h + 70, swap);
  img.header.bitpix = detail::load<std::int16_t>(h + 72, swap);
  for (int i = 0; i < 8; ++i) img.header.pixdim[i] = detail::load<float>(h + 76 + 4 * i, swap);
  img.header.vox_offset = detail::load<float>(h + 108, swap);
  img.header.scl_slope = detail::load<float>(h + 112, swap);
  img.header.scl_inter = detail::load<float>(h + 116, swap);

  const int rank = img.header.dim[0];
  if (rank < 1 || rank > 7) throw FormatError("invalid NIfTI rank " + std::to_string(rank));
  std::size_t count = 1;
  for (int i = 1; i <= rank; ++i) {
    if (img.header.dim[i] < 1)
      throw FormatError("invalid NIfTI dim[" + std::to_string(i) + "]=" + std::to_string(img.header.dim[i]));
    img.dims.push_back(static_cast<std::size_t>(img.header.dim[i]));
    count *= img.dims.back();
  }

  const std::size_t esize = detail::datatype_size(img.header.datatype);
  if (esize == 0) throw FormatError("unsupported NIfTI datatype code " + std::to_string(img.header.datatype));
  const auto offset = static_cast<std::size_t>(img.header.vox_offset);
  if (offset < kHeaderSize || buf.size() < offset + count * esize)
    throw FormatError("'" + path.string() + "' is truncated: expected " + std::to_string(count * esize) +
                      " data bytes at offset " + std::to_string(offset));

  img.values.resize(count);
  const unsigned char* d = buf.data() + offset;
  for (std::size_t n = 0; n < count; ++n) {
    const unsigned char* p = d + n * esize;
    switch (static_cast<Datatype>(img.header.datatype)) {
      case Datatype::uint8: img.values[n] = *p; break;
      case Datatype::int16: img.values[n] = detail::load<std::int16_t>(p, swap); break;
      case Datatype::int32: img.values[n] = detail::load<std::int32_t>(p, swap); break;
      case Datatype::float32: img.values[n] = detail::load<float>(p, swap); break;
      case Datatype::float64: img.values[n] = detail::load<double>(p, swap); break;
    }
  }
  if (img.header.scl_slope != 0.0f && std::isfinite(img.header.scl_slope) &&
      !(img.header.scl_slope == 1.0f && img.header.scl_inter == 0.0f)) {
    const double slope = img.header.scl_slope, inter = img.header.scl_inter;
    for (auto& v : img.values) v = v * slope + inter;
  }
  return img;
}

// Writes values (first axis fastest) with the given dims. A path ending in
// ".gz" is gzip-compressed.
inline void write(const std::filesystem::path& path, std::span<const std::size_t> dims, Datatype dt,
                  std::span<const double> values, std::span<const float> pixdim = {}) {
  if (dims.empty() || dims.size() > 7) throw ValidationError("NIfTI rank must be 1..7");
  std::size_t count = 1;
  for (auto d : dims) {
    if (d < 1 || d > 32767) throw ValidationError("NIfTI dims must be in 1..32767");
    count *= d;
  }
  if (count != values.size()) throw ValidationError("NIfTI value count does not match dims");

  const std::size_t esize = detail::datatype_size(static_cast<std::int16_t>(dt));
  std::vector<unsigned char> buf(kDataOffset + count * esize, 0);
  detail::store<std::int32_t>(buf, 0, 348);
  detail::store<std::int16_t>(buf, 40, static_cast<std::int16_t>(dims.size()));
  for (std::size_t i = 0; i < 7; ++i)
    detail::store<std::int16_t>(buf, 42 + 2 * i, static_cast<std::int16_t>(i < dims.size() ? dims[i] : 1));
  detail::store<std::int16_t>(buf, 70, static_cast<std::int16_t>(dt));
  detail::store<std::int16_t>(buf, 72, static_cast<std::int16_t>(esize * 8));
  detail::store<float>(buf, 76, 1.0f);
  for (std::size_t i = 1; i < 8; ++i)
    detail::store<float>(buf, 76 + 4 * i, i - 1 < pixdim.size() ? pixdim[i - 1] : 1.0f);
  detail::store<float>(buf, 108, static_cast<float>(kDataOffset));
  detail::store<float>(buf, 112, 1.0f);
  detail::store<std::int16_t>(buf, 254, 2);  // qform_code = aligned
  std::memcpy(buf.data() + 344, "n+1", 4);

  unsigned char* d = buf.data() + kDataOffset;
  for (std::size_t n = 0; n < count; ++n) {
    unsigned char* p = d + n * esize;
    const double v = values[n];
    switch (dt) {
      case Datatype::uint8: *p = static_cast<std::uint8_t>(v); break;
      case Datatype::int16: { auto x = static_cast<std::int16_t>(v); std::memcpy(p, &x, 2); break; }
      case Datatype::int32: { auto x = static_cast<std::int32_t>(v); std::memcpy(p, &x, 4); break; }
      case Datatype::float32: { auto x = static_cast<float>(v); std::memcpy(p, &x, 4); break; }
      case Datatype::float64: std::memcpy(p, &v, 8); break;
    }
  }

  const bool gz = path.extension() == ".gz";
  gzFile f = gzopen(path.string().c_str(), gz ? "wb6" : "wbT");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const int written = gzwrite(f, buf.data(), static_cast<unsigned>(buf.size()));
  const int rc = gzclose(f);
  if (written != static_cast<int>(buf.size()) || rc != Z_OK)
    throw IoError("write error on '" + path.string() + "'");
}

}  // namespace cmrqa::nifti

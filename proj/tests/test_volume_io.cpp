#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cmrqa/volume_io.hpp"
#include "support.hpp"

using namespace cmrqa;

namespace {

// voxel(i, j, k) = i + 10 j + 100 k
Volume indexed_volume(std::size_t H, std::size_t W, std::size_t S) {
  std::vector<double> v(H * W * S);
  for (std::size_t k = 0; k < S; ++k)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) v[(k * H + i) * W + j] = static_cast<double>(i + 10 * j + 100 * k);
  return Volume({H, W, S}, std::move(v));
}

void write_nifti_raw(const std::filesystem::path& p, std::vector<std::size_t> dims, nifti::Datatype dt,
                     const std::vector<double>& file_order) {
  nifti::write(p, dims, dt, file_order);
}

}  // namespace

TEST(VolumeIo, NiftiValuesIndexedByRowColumnSlice) {
  test::TempDir dir("vio");
  std::vector<double> file_order(8 * 8 * 3);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t i = 0; i < 8; ++i) file_order[i + 8 * (j + 8 * k)] = static_cast<double>(i + 10 * j + 100 * k);
  write_nifti_raw(dir / "a.nii", {8, 8, 3}, nifti::Datatype::int16, file_order);
  const auto v = load_volume(dir / "a.nii");
  ASSERT_EQ(v.shape(), (VolumeShape{8, 8, 3}));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(v.at(i, j, k), static_cast<double>(i + 10 * j + 100 * k));
  EXPECT_EQ(v.subject_id(), "a");
}

TEST(VolumeIo, GzipIsTransparent) {
  test::TempDir dir("vio");
  const auto v = indexed_volume(8, 8, 3);
  write_nifti(dir / "p.nii", v);
  write_nifti(dir / "p.nii.gz", v);
  const auto a = load_volume(dir / "p.nii"), b = load_volume(dir / "p.nii.gz");
  EXPECT_TRUE(std::equal(a.voxels().begin(), a.voxels().end(), b.voxels().begin(), b.voxels().end()));
  EXPECT_LT(std::filesystem::file_size(dir / "p.nii.gz"), std::filesystem::file_size(dir / "p.nii"));
}

TEST(VolumeIo, AllDatatypesRoundTrip) {
  test::TempDir dir("vio");
  const auto v = indexed_volume(5, 4, 2);
  for (auto dt : {nifti::Datatype::uint8, nifti::Datatype::int16, nifti::Datatype::int32, nifti::Datatype::float32,
                  nifti::Datatype::float64}) {
    const auto p = dir / ("t" + std::to_string(static_cast<int>(dt)) + ".nii");
    write_nifti(p, v, dt);
    const auto back = load_volume(p);
    EXPECT_TRUE(std::equal(v.voxels().begin(), v.voxels().end(), back.voxels().begin(), back.voxels().end()))
        << "datatype " << static_cast<int>(dt);
  }
}

TEST(VolumeIo, FourDimensionalFileIsFormatError) {
  test::TempDir dir("vio");
  write_nifti_raw(dir / "t.nii", {4, 4, 2, 3}, nifti::Datatype::float32, std::vector<double>(4 * 4 * 2 * 3, 1.0));
  EXPECT_THROW(load_volume(dir / "t.nii"), FormatError);
}

TEST(VolumeIo, TrailingSingletonDimsAccepted) {
  test::TempDir dir("vio");
  write_nifti_raw(dir / "t.nii", {4, 4, 2, 1}, nifti::Datatype::float32, std::vector<double>(32, 2.0));
  EXPECT_EQ(load_volume(dir / "t.nii").shape(), (VolumeShape{4, 4, 2}));
}

TEST(VolumeIo, MissingFileIsIoError) {
  test::TempDir dir("vio");
  EXPECT_THROW(load_volume(dir / "nope.nii"), IoError);
  EXPECT_THROW(load_volume(dir / "nope.json"), IoError);
}

TEST(VolumeIo, GarbageIsFormatError) {
  test::TempDir dir("vio");
  std::ofstream(dir / "bad.nii") << "definitely not a nifti header";
  EXPECT_THROW(load_volume(dir / "bad.nii"), FormatError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_volume(dir / "bad.json"), FormatError);
}

TEST(VolumeIo, NonFiniteVoxelNamesIndex) {
  test::TempDir dir("vio");
  std::vector<double> file_order(3 * 3 * 2, 1.0);
  file_order[1 + 3 * (2 + 3 * 1)] = std::nan("");  // row 1, col 2, slice 1
  write_nifti_raw(dir / "n.nii", {3, 3, 2}, nifti::Datatype::float64, file_order);
  try {
    load_volume(dir / "n.nii");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row=1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("col=2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("slice=1"), std::string::npos) << msg;
  }
}

TEST(VolumeIo, RawJsonRoundTripIsBitwise) {
  test::TempDir dir("vio");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> vals(6 * 7 * 3);
  for (auto& x : vals) x = u(rng);
  const Volume v({6, 7, 3}, vals);
  write_raw(dir / "r.json", v);
  const auto a = load_volume(dir / "r.json");
  write_raw(dir / "r2.json", a);
  const auto b = load_volume(dir / "r2.json");
  EXPECT_EQ(std::memcmp(v.voxels().data(), b.voxels().data(), vals.size() * sizeof(double)), 0);
}

TEST(VolumeIo, RawJsonSidecarLayout) {
  test::TempDir dir("vio");
  write_raw(dir / "s.json", indexed_volume(2, 3, 2));
  std::ifstream in(dir / "s.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["height"], 2);
  EXPECT_EQ(j["width"], 3);
  EXPECT_EQ(j["slices"], 2);
  EXPECT_EQ(j["dtype"], "f64");
  EXPECT_EQ(j["data"], "s.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "s.bin"), 2u * 3 * 2 * 8);
  // slice-major, then row, then column
  std::ifstream blob(dir / "s.bin", std::ios::binary);
  std::vector<double> raw(12);
  blob.read(reinterpret_cast<char*>(raw.data()), 96);
  EXPECT_EQ(raw[0], 0.0);
  EXPECT_EQ(raw[1], 10.0);    // (0,1,0)
  EXPECT_EQ(raw[3], 1.0);     // (1,0,0)
  EXPECT_EQ(raw[6], 100.0);   // (0,0,1)
}

TEST(VolumeIo, RawJsonWrongBlobSizeIsFormatError) {
  test::TempDir dir("vio");
  write_raw(dir / "s.json", indexed_volume(2, 3, 2));
  std::filesystem::resize_file(dir / "s.bin", 40);
  EXPECT_THROW(load_volume(dir / "s.json"), FormatError);
}

TEST(VolumeIo, SubjectAndPhaseFromName) {
  test::TempDir dir("vio");
  write_nifti(dir / "P012-3-ES.nii.gz", indexed_volume(2, 2, 1));
  const auto v = load_volume(dir / "P012-3-ES.nii.gz");
  EXPECT_EQ(v.subject_id(), "P012-3-ES");
  ASSERT_TRUE(v.info().phase.has_value());
  EXPECT_EQ(*v.info().phase, Phase::ES);
}

TEST(MaskIo, ZerosStayZero) {
  test::TempDir dir("vio");
  const auto v = indexed_volume(4, 4, 2);
  write_nifti(dir / "m.nii", MaskVolume::zeros(v.shape()));
  const auto m = load_mask(dir / "m.nii", v);
  for (auto x : m.voxels()) EXPECT_EQ(x, 0);
}

TEST(MaskIo, MultiLabelBinarized) {
  test::TempDir dir("vio");
  const auto v = indexed_volume(4, 4, 2);
  std::vector<double> labels(32, 0.0);
  for (std::size_t n = 0; n < 32; n += 3) labels[n] = 3.0;
  write_nifti_raw(dir / "m.nii", {4, 4, 2}, nifti::Datatype::uint8, labels);
  const auto m = load_mask(dir / "m.nii", v);
  std::size_t ones = 0;
  for (auto x : m.voxels()) {
    EXPECT_TRUE(x == 0 || x == 1);
    ones += x;
  }
  EXPECT_EQ(ones, 11u);
}

TEST(MaskIo, DimMismatchReportsBothShapes) {
  test::TempDir dir("vio");
  const auto v = indexed_volume(8, 8, 3);
  write_nifti(dir / "m.nii", MaskVolume::zeros({8, 8, 2}));
  try {
    load_mask(dir / "m.nii", v);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(VolumeShape{8, 8, 2}.str()), std::string::npos) << msg;
    EXPECT_NE(msg.find(VolumeShape{8, 8, 3}.str()), std::string::npos) << msg;
  }
}

TEST(ExtractSlices, ViewsReconstructVolume) {
  const auto v = indexed_volume(8, 8, 3);
  const auto slices = extract_slices(v);
  ASSERT_EQ(slices.size(), 3u);
  std::vector<double> joined;
  for (const auto& s : slices) {
    EXPECT_EQ(s.rows(), 8u);
    EXPECT_EQ(s.cols(), 8u);
    joined.insert(joined.end(), s.values().begin(), s.values().end());
  }
  EXPECT_TRUE(std::equal(joined.begin(), joined.end(), v.voxels().begin(), v.voxels().end()));
  std::mt19937_64 rng(2);
  for (int n = 0; n < 50; ++n) {
    const std::size_t i = rng() % 8, j = rng() % 8, k = rng() % 3;
    EXPECT_EQ(slices[k](i, j), v.at(i, j, k));
  }
  EXPECT_EQ(extract_slices(indexed_volume(3, 2, 1)).size(), 1u);
}

TEST(VolumeType, RejectsZeroDims) {
  EXPECT_THROW(Volume({0, 4, 1}, {}), ValidationError);
  EXPECT_THROW(MaskVolume({2, 2, 1}, std::vector<unsigned char>{0, 1, 2, 0}), ValidationError);
}

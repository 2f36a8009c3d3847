#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace cmrqa::onnx {

// Element types, numbered as in the ONNX TensorProto.DataType enum.
enum class ElemType : int {
  undefined = 0,
  float32 = 1,
  uint8 = 2,
  int8 = 3,
  uint16 = 4,
  int16 = 5,
  int32 = 6,
  int64 = 7,
  boolean = 9,
  float64 = 11,
  uint32 = 12,
  uint64 = 13,
};

inline bool is_integral(ElemType t) {
  return t != ElemType::float32 && t != ElemType::float64 && t != ElemType::undefined;
}

using Shape = std::vector<std::int64_t>;

inline std::int64_t element_count(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

// Row-major tensor. Every element type is held as double; integer tensors
// only ever carry shape-sized values, which double represents exactly.
struct Tensor {
  Shape shape;
  std::vector<double> data;
  ElemType type = ElemType::float32;

  Tensor() = default;
  Tensor(Shape s, ElemType t = ElemType::float32)
      : shape(std::move(s)), data(static_cast<std::size_t>(element_count(shape)), 0.0), type(t) {}
  Tensor(Shape s, std::vector<double> d, ElemType t = ElemType::float32)
      : shape(std::move(s)), data(std::move(d)), type(t) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
};

}  // namespace cmrqa::onnx

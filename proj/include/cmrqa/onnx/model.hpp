#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmrqa/onnx/tensor.hpp"

namespace cmrqa::onnx {

// Declared graph input or output. Symbolic dims are nullopt.
struct ValueSpec {
  std::string name;
  ElemType type = ElemType::undefined;
  std::vector<std::optional<std::int64_t>> dims;
  bool has_shape = false;
};

// Reference interpreter for ONNX inference graphs. Loaded models are
// immutable and run() is safe to call from several threads at once.
// Arithmetic is carried out in double precision.
class Model {
 public:
  static Model load(const std::filesystem::path& path);
  static Model parse(std::string_view bytes, const std::string& origin = "<memory>");

  // Graph inputs that are not initializers.
  const std::vector<ValueSpec>& inputs() const;
  const std::vector<ValueSpec>& outputs() const;
  std::int64_t opset() const;
  const std::map<std::string, std::string>& metadata() const;

  std::vector<Tensor> run(const std::map<std::string, Tensor>& feeds) const;

  // Single-input, first-output convenience.
  Tensor run(const Tensor& input) const;

  // Operator types the interpreter implements.
  static std::vector<std::string> supported_ops();

 private:
  struct Impl;
  explicit Model(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace cmrqa::onnx

#pragma once

// Internal graph representation shared by the loader and the kernels.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmrqa/errors.hpp"
#include "cmrqa/onnx/tensor.hpp"

namespace cmrqa::onnx {

struct Attribute {
  enum class Kind { f, i, s, t, floats, ints, strings, other };
  Kind kind = Kind::other;
  double f = 0;
  std::int64_t i = 0;
  std::string s;
  std::optional<Tensor> t;
  std::vector<double> floats;
  std::vector<std::int64_t> ints;
  std::vector<std::string> strings;
};

class Attributes {
 public:
  void set(std::string name, Attribute a) { map_[std::move(name)] = std::move(a); }
  bool has(const std::string& name) const { return map_.count(name) != 0; }

  std::int64_t get_int(const std::string& name, std::int64_t fallback) const {
    auto it = map_.find(name);
    return it == map_.end() ? fallback : it->second.i;
  }
  double get_float(const std::string& name, double fallback) const {
    auto it = map_.find(name);
    return it == map_.end() ? fallback : it->second.f;
  }
  std::string get_string(const std::string& name, std::string fallback) const {
    auto it = map_.find(name);
    return it == map_.end() ? fallback : it->second.s;
  }
  std::vector<std::int64_t> get_ints(const std::string& name, std::vector<std::int64_t> fallback = {}) const {
    auto it = map_.find(name);
    return it == map_.end() ? fallback : it->second.ints;
  }
  const Attribute* find(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, Attribute> map_;
};

struct Node;

// Inputs of one node invocation; absent optional inputs are nullptr.
struct OpContext {
  const Node& node;
  std::vector<const Tensor*> inputs;
  std::int64_t opset;

  std::size_t count() const { return inputs.size(); }
  bool has(std::size_t i) const { return i < inputs.size() && inputs[i] != nullptr; }
  const Tensor& in(std::size_t i) const;
  [[noreturn]] void fail(const std::string& what) const;
};

using Kernel = std::vector<Tensor> (*)(const OpContext&);

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Attributes attrs;
  Kernel kernel = nullptr;
};

// nullptr when op_type is not implemented.
Kernel find_kernel(const std::string& op_type);
std::vector<std::string> kernel_names();

}  // namespace cmrqa::onnx

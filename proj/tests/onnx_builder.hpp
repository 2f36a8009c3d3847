#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "onnx.pb.h"

namespace cmrqa::test {

// Assembles small ONNX models in memory for interpreter and classifier tests.
class OnnxBuilder {
 public:
  explicit OnnxBuilder(std::int64_t opset = 17) {
    model_.set_ir_version(8);
    model_.set_producer_name("cmrqa-tests");
    auto* op = model_.add_opset_import();
    op->set_domain("");
    op->set_version(opset);
  }

  // Dims given as nullopt become the symbolic "batch".
  OnnxBuilder& input(const std::string& name, std::vector<std::optional<std::int64_t>> dims, int elem = 1) {
    describe(graph()->add_input(), name, dims, elem);
    return *this;
  }

  OnnxBuilder& output(const std::string& name, std::vector<std::optional<std::int64_t>> dims, int elem = 1) {
    describe(graph()->add_output(), name, dims, elem);
    return *this;
  }

  OnnxBuilder& initializer(const std::string& name, std::vector<std::int64_t> dims, const std::vector<float>& values) {
    auto* t = graph()->add_initializer();
    t->set_name(name);
    t->set_data_type(1);
    for (auto d : dims) t->add_dims(d);
    for (float v : values) t->add_float_data(v);
    return *this;
  }

  OnnxBuilder& int_initializer(const std::string& name, std::vector<std::int64_t> dims,
                               const std::vector<std::int64_t>& values) {
    auto* t = graph()->add_initializer();
    t->set_name(name);
    t->set_data_type(7);
    for (auto d : dims) t->add_dims(d);
    for (auto v : values) t->add_int64_data(v);
    return *this;
  }

  struct Attr {
    std::string name;
    std::optional<std::int64_t> i;
    std::optional<float> f;
    std::vector<std::int64_t> ints;
  };

  OnnxBuilder& node(const std::string& op, std::vector<std::string> in, std::vector<std::string> out,
                    std::vector<Attr> attrs = {}) {
    auto* n = graph()->add_node();
    n->set_op_type(op);
    n->set_name(op + "_" + std::to_string(graph()->node_size()));
    for (auto& s : in) n->add_input(s);
    for (auto& s : out) n->add_output(s);
    for (const auto& a : attrs) {
      auto* p = n->add_attribute();
      p->set_name(a.name);
      if (a.i) {
        p->set_type(::onnx::AttributeProto::INT);
        p->set_i(*a.i);
      } else if (a.f) {
        p->set_type(::onnx::AttributeProto::FLOAT);
        p->set_f(*a.f);
      } else {
        p->set_type(::onnx::AttributeProto::INTS);
        for (auto v : a.ints) p->add_ints(v);
      }
    }
    return *this;
  }

  std::string bytes() const { return model_.SerializeAsString(); }

  std::filesystem::path save(const std::filesystem::path& p) const {
    std::ofstream(p, std::ios::binary) << bytes();
    return p;
  }

 private:
  ::onnx::GraphProto* graph() { return model_.mutable_graph(); }

  static void describe(::onnx::ValueInfoProto* v, const std::string& name,
                       const std::vector<std::optional<std::int64_t>>& dims, int elem) {
    v->set_name(name);
    auto* tt = v->mutable_type()->mutable_tensor_type();
    tt->set_elem_type(elem);
    auto* shape = tt->mutable_shape();
    for (const auto& d : dims) {
      auto* dim = shape->add_dim();
      if (d)
        dim->set_dim_value(*d);
      else
        dim->set_dim_param("batch");
    }
  }

  ::onnx::ModelProto model_;
};

// (batch,1,224,224) -> GlobalAveragePool -> Flatten -> Gemm(w, b): logits are
// mean(patch) * w + b.
inline OnnxBuilder mean_logit_model(const std::vector<float>& w, const std::vector<float>& b,
                                    std::optional<std::int64_t> batch = std::nullopt, std::int64_t channels = 1) {
  OnnxBuilder m;
  m.input("x", {batch, channels, 224, 224})
      .output("logits", {batch, 3})
      .initializer("w", {channels, 3}, w)
      .initializer("b", {3}, b)
      .node("GlobalAveragePool", {"x"}, {"g"})
      .node("Flatten", {"g"}, {"f"}, {{"axis", 1}})
      .node("Gemm", {"f", "w", "b"}, {"logits"});
  return m;
}

}  // namespace cmrqa::test

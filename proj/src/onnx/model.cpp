#include "cmrqa/onnx/model.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "graph.hpp"
#include "onnx.pb.h"

namespace cmrqa::onnx {

struct Model::Impl {
  std::vector<Node> nodes;
  std::unordered_map<std::string, Tensor> initializers;
  std::vector<ValueSpec> inputs;
  std::vector<ValueSpec> outputs;
  std::int64_t opset = 0;
  std::map<std::string, std::string> metadata;
  // index of the last node reading each value; graph outputs never expire
  std::unordered_map<std::string, std::size_t> last_use;
};

namespace {

template <typename T>
void decode_raw(const std::string& raw, std::vector<double>& out, const std::string& name) {
  if (raw.size() % sizeof(T) != 0) throw FormatError("initializer '" + name + "' has a ragged raw_data buffer");
  out.resize(raw.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(v);
  }
}

Tensor decode_tensor(const ::onnx::TensorProto& tp) {
  const std::string name = tp.name();
  if (tp.data_location() == ::onnx::TensorProto::EXTERNAL)
    throw FormatError("tensor '" + name + "' uses external data, which is not supported");
  Tensor t;
  t.type = static_cast<ElemType>(tp.data_type());
  for (auto d : tp.dims()) t.shape.push_back(d);
  const std::string& raw = tp.raw_data();
  using DT = ::onnx::TensorProto;
  switch (tp.data_type()) {
    case DT::FLOAT:
      if (!raw.empty()) decode_raw<float>(raw, t.data, name);
      else t.data.assign(tp.float_data().begin(), tp.float_data().end());
      break;
    case DT::DOUBLE:
      if (!raw.empty()) decode_raw<double>(raw, t.data, name);
      else t.data.assign(tp.double_data().begin(), tp.double_data().end());
      break;
    case DT::INT64:
      if (!raw.empty()) decode_raw<std::int64_t>(raw, t.data, name);
      else t.data.assign(tp.int64_data().begin(), tp.int64_data().end());
      break;
    case DT::INT32:
      if (!raw.empty()) decode_raw<std::int32_t>(raw, t.data, name);
      else t.data.assign(tp.int32_data().begin(), tp.int32_data().end());
      break;
    case DT::INT16:
      if (!raw.empty()) decode_raw<std::int16_t>(raw, t.data, name);
      else t.data.assign(tp.int32_data().begin(), tp.int32_data().end());
      break;
    case DT::UINT16:
      if (!raw.empty()) decode_raw<std::uint16_t>(raw, t.data, name);
      else t.data.assign(tp.int32_data().begin(), tp.int32_data().end());
      break;
    case DT::INT8:
      if (!raw.empty()) decode_raw<std::int8_t>(raw, t.data, name);
      else t.data.assign(tp.int32_data().begin(), tp.int32_data().end());
      break;
    case DT::UINT8:
    case DT::BOOL:
      if (!raw.empty()) decode_raw<std::uint8_t>(raw, t.data, name);
      else t.data.assign(tp.int32_data().begin(), tp.int32_data().end());
      break;
    case DT::UINT32:
      if (!raw.empty()) decode_raw<std::uint32_t>(raw, t.data, name);
      else t.data.assign(tp.uint64_data().begin(), tp.uint64_data().end());
      break;
    case DT::UINT64:
      if (!raw.empty()) decode_raw<std::uint64_t>(raw, t.data, name);
      else t.data.assign(tp.uint64_data().begin(), tp.uint64_data().end());
      break;
    default:
      throw FormatError("tensor '" + name + "' has unsupported data type " + std::to_string(tp.data_type()));
  }
  if (static_cast<std::int64_t>(t.data.size()) != element_count(t.shape))
    throw FormatError("tensor '" + name + "' holds " + std::to_string(t.data.size()) + " values but shape " +
                      shape_str(t.shape) + " needs " + std::to_string(element_count(t.shape)));
  return t;
}

Attribute decode_attribute(const ::onnx::AttributeProto& ap) {
  Attribute a;
  using AT = ::onnx::AttributeProto;
  switch (ap.type()) {
    case AT::FLOAT: a.kind = Attribute::Kind::f; a.f = ap.f(); break;
    case AT::INT: a.kind = Attribute::Kind::i; a.i = ap.i(); break;
    case AT::STRING: a.kind = Attribute::Kind::s; a.s = ap.s(); break;
    case AT::TENSOR: a.kind = Attribute::Kind::t; a.t = decode_tensor(ap.t()); break;
    case AT::FLOATS: a.kind = Attribute::Kind::floats; a.floats.assign(ap.floats().begin(), ap.floats().end()); break;
    case AT::INTS: a.kind = Attribute::Kind::ints; a.ints.assign(ap.ints().begin(), ap.ints().end()); break;
    case AT::STRINGS: a.kind = Attribute::Kind::strings; a.strings.assign(ap.strings().begin(), ap.strings().end()); break;
    default: a.kind = Attribute::Kind::other; break;
  }
  return a;
}

ValueSpec decode_value_info(const ::onnx::ValueInfoProto& vi) {
  ValueSpec v;
  v.name = vi.name();
  if (vi.has_type() && vi.type().has_tensor_type()) {
    const auto& tt = vi.type().tensor_type();
    v.type = static_cast<ElemType>(tt.elem_type());
    if (tt.has_shape()) {
      v.has_shape = true;
      for (const auto& d : tt.shape().dim()) {
        if (d.has_dim_value()) v.dims.emplace_back(d.dim_value());
        else v.dims.emplace_back(std::nullopt);
      }
    }
  }
  return v;
}

}  // namespace

Model Model::load(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw IoError("model file '" + path.string() + "' does not exist");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

Model Model::parse(std::string_view bytes, const std::string& origin) {
  ::onnx::ModelProto proto;
  if (bytes.empty() || !proto.ParseFromArray(bytes.data(), static_cast<int>(bytes.size())) || !proto.has_graph())
    throw FormatError("'" + origin + "' is not a valid ONNX model (corrupt or truncated file)");

  auto impl = std::make_shared<Impl>();
  for (const auto& op : proto.opset_import())
    if (op.domain().empty() || op.domain() == "ai.onnx") impl->opset = op.version();
  if (impl->opset == 0) throw FormatError("'" + origin + "' does not import the default ONNX operator set");
  for (const auto& kv : proto.metadata_props()) impl->metadata[kv.key()] = kv.value();

  const auto& g = proto.graph();
  std::set<std::string> defined;
  for (const auto& init : g.initializer()) {
    impl->initializers.emplace(init.name(), decode_tensor(init));
    defined.insert(init.name());
  }
  for (const auto& vi : g.input()) {
    if (impl->initializers.count(vi.name())) continue;  // IR < 4 lists initializers as inputs
    impl->inputs.push_back(decode_value_info(vi));
    defined.insert(vi.name());
  }
  for (const auto& vi : g.output()) impl->outputs.push_back(decode_value_info(vi));
  if (impl->outputs.empty()) throw FormatError("'" + origin + "' declares no graph outputs");

  for (int n = 0; n < g.node_size(); ++n) {
    const auto& np = g.node(n);
    Node node;
    node.name = np.name().empty() ? np.op_type() + "_" + std::to_string(n) : np.name();
    node.op_type = np.op_type();
    if (!np.domain().empty() && np.domain() != "ai.onnx")
      throw FormatError("'" + origin + "': operator " + np.domain() + "::" + np.op_type() + " is not supported");
    node.kernel = find_kernel(node.op_type);
    if (!node.kernel) throw FormatError("'" + origin + "': operator " + node.op_type + " is not supported");
    for (const auto& in : np.input()) {
      if (!in.empty() && !defined.count(in))
        throw FormatError("'" + origin + "': node '" + node.name + "' reads undefined value '" + in + "'");
      node.inputs.push_back(in);
      if (!in.empty()) impl->last_use[in] = static_cast<std::size_t>(n);
    }
    for (const auto& out : np.output()) {
      node.outputs.push_back(out);
      if (!out.empty()) defined.insert(out);
    }
    for (const auto& ap : np.attribute()) node.attrs.set(ap.name(), decode_attribute(ap));
    impl->nodes.push_back(std::move(node));
  }
  for (const auto& o : impl->outputs) {
    if (!defined.count(o.name)) throw FormatError("'" + origin + "': graph output '" + o.name + "' is never produced");
    impl->last_use[o.name] = impl->nodes.size();
  }
  return Model(std::move(impl));
}

const std::vector<ValueSpec>& Model::inputs() const { return impl_->inputs; }
const std::vector<ValueSpec>& Model::outputs() const { return impl_->outputs; }
std::int64_t Model::opset() const { return impl_->opset; }
const std::map<std::string, std::string>& Model::metadata() const { return impl_->metadata; }

std::vector<Tensor> Model::run(const std::map<std::string, Tensor>& feeds) const {
  std::unordered_map<std::string, const Tensor*> env;
  std::unordered_map<std::string, std::shared_ptr<Tensor>> owned;
  for (const auto& [name, t] : impl_->initializers) env[name] = &t;
  for (const auto& spec : impl_->inputs) {
    auto it = feeds.find(spec.name);
    if (it == feeds.end()) throw ValidationError("missing model input '" + spec.name + "'");
    const Tensor& t = it->second;
    if (spec.has_shape) {
      if (t.rank() != spec.dims.size())
        throw ValidationError("input '" + spec.name + "' has rank " + std::to_string(t.rank()) + ", model expects " +
                              std::to_string(spec.dims.size()));
      for (std::size_t d = 0; d < t.rank(); ++d)
        if (spec.dims[d] && *spec.dims[d] != t.shape[d])
          throw ValidationError("input '" + spec.name + "' has shape " + shape_str(t.shape) +
                                ", incompatible with the declared dim " + std::to_string(*spec.dims[d]) +
                                " at axis " + std::to_string(d));
    }
    if (static_cast<std::int64_t>(t.size()) != element_count(t.shape))
      throw ValidationError("input '" + spec.name + "' buffer does not match its shape");
    env[spec.name] = &t;
  }

  for (std::size_t n = 0; n < impl_->nodes.size(); ++n) {
    const Node& node = impl_->nodes[n];
    OpContext ctx{node, {}, impl_->opset};
    for (const auto& in : node.inputs) ctx.inputs.push_back(in.empty() ? nullptr : env.at(in));
    auto results = node.kernel(ctx);
    for (std::size_t k = 0; k < node.outputs.size() && k < results.size(); ++k) {
      const auto& name = node.outputs[k];
      if (name.empty()) continue;
      auto holder = std::make_shared<Tensor>(std::move(results[k]));
      env[name] = holder.get();
      owned[name] = std::move(holder);
    }
    for (const auto& in : node.inputs) {
      if (in.empty()) continue;
      auto lu = impl_->last_use.find(in);
      if (lu != impl_->last_use.end() && lu->second == n && owned.count(in)) {
        owned.erase(in);
        env.erase(in);
      }
    }
  }

  std::vector<Tensor> out;
  for (const auto& spec : impl_->outputs) out.push_back(*env.at(spec.name));
  return out;
}

Tensor Model::run(const Tensor& input) const {
  if (impl_->inputs.size() != 1)
    throw ValidationError("model has " + std::to_string(impl_->inputs.size()) + " inputs, expected 1");
  std::map<std::string, Tensor> feeds{{impl_->inputs.front().name, input}};
  return run(feeds).front();
}

std::vector<std::string> Model::supported_ops() { return kernel_names(); }

}  // namespace cmrqa::onnx

#include "cmrqa/model_classifier.hpp"

#include <algorithm>

namespace cmrqa {

namespace {

std::string dims_str(const onnx::ValueSpec& v) {
  if (!v.has_shape) return "<undeclared>";
  std::string s = "(";
  for (std::size_t i = 0; i < v.dims.size(); ++i) {
    if (i) s += ",";
    s += v.dims[i] ? std::to_string(*v.dims[i]) : std::string("?");
  }
  return s + ")";
}

bool dim_is(const std::optional<std::int64_t>& d, std::int64_t want) { return d && *d == want; }

}  // namespace

ModelClassifier::ModelClassifier(Representation rep, onnx::Model model) : Classifier(rep), model_(std::move(model)) {
  const std::string required_in = "(batch,1," + std::to_string(kModelPatchSize) + "," + std::to_string(kModelPatchSize) + ")";
  if (model_.inputs().size() != 1)
    throw ValidationError("model declares " + std::to_string(model_.inputs().size()) +
                          " inputs; required exactly one of shape " + required_in);
  if (model_.outputs().size() != 1)
    throw ValidationError("model declares " + std::to_string(model_.outputs().size()) +
                          " outputs; required exactly one of shape (batch,3)");
  const auto& in = model_.inputs().front();
  const auto P = static_cast<std::int64_t>(kModelPatchSize);
  if (!in.has_shape || in.dims.size() != 4 || !dim_is(in.dims[1], 1) || !dim_is(in.dims[2], P) || !dim_is(in.dims[3], P))
    throw ValidationError("model input shape " + dims_str(in) + " violates the required " + required_in);
  const auto& out = model_.outputs().front();
  if (!out.has_shape || out.dims.size() != 2 || !dim_is(out.dims[1], 3))
    throw ValidationError("model output shape " + dims_str(out) + " violates the required (batch,3)");
  if (in.dims[0]) {
    if (*in.dims[0] < 1) throw ValidationError("model input declares a non-positive batch size");
    fixed_batch_ = *in.dims[0];
  }
}

std::shared_ptr<const ModelClassifier> ModelClassifier::load(const std::filesystem::path& path, Representation rep) {
  return std::make_shared<ModelClassifier>(rep, onnx::Model::load(path));
}

std::vector<std::array<double, 3>> ModelClassifier::logits(std::span<const Patch> batch) const {
  const std::size_t plane = kModelPatchSize * kModelPatchSize;
  const std::size_t step = fixed_batch_ ? static_cast<std::size_t>(*fixed_batch_) : batch.size();
  std::vector<std::array<double, 3>> out;
  out.reserve(batch.size());
  for (std::size_t start = 0; start < batch.size(); start += step) {
    const std::size_t n = std::min(step, batch.size() - start);
    // a fixed-batch model gets its last chunk zero-filled up to the batch size
    const std::size_t rows = fixed_batch_ ? step : n;
    onnx::Tensor input({static_cast<std::int64_t>(rows), 1, static_cast<std::int64_t>(kModelPatchSize),
                        static_cast<std::int64_t>(kModelPatchSize)});
    for (std::size_t i = 0; i < n; ++i) {
      const auto px = batch[start + i].pixels.values();
      std::copy(px.begin(), px.end(), input.data.begin() + static_cast<std::ptrdiff_t>(i * plane));
    }
    const auto result = model_.run(input);
    if (result.rank() != 2 || result.shape[0] != static_cast<std::int64_t>(rows) || result.shape[1] != 3)
      throw ValidationError("model produced output of shape " + onnx::shape_str(result.shape) + ", expected (" +
                            std::to_string(rows) + ",3)");
    for (std::size_t i = 0; i < n; ++i) out.push_back({result.data[3 * i], result.data[3 * i + 1], result.data[3 * i + 2]});
  }
  return out;
}

std::vector<ClassProb> ModelClassifier::run(std::span<const Patch> batch) const {
  std::vector<ClassProb> out;
  for (const auto& l : logits(batch)) {
    for (double v : l)
      if (!std::isfinite(v)) throw ValidationError("model produced a non-finite logit");
    out.push_back(softmax(l));
  }
  return out;
}

ClassifierHandle load_classifier(const ClassifierSpec& spec) {
  spec.validate();
  if (spec.backend == Backend::model_file) return ModelClassifier::load(*spec.model_path, spec.representation);
  return make_stub(spec.backend, spec.params, spec.representation);
}

}  // namespace cmrqa

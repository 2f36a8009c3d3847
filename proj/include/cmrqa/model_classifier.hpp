#pragma once

#include <filesystem>
#include <memory>

#include "cmrqa/classifier.hpp"
#include "cmrqa/onnx/model.hpp"

namespace cmrqa {

// Input contract for exported models: (batch, 1, 224, 224) in, (batch, 3)
// logits out.
inline constexpr std::size_t kModelPatchSize = 224;

// Classifier backed by an ONNX model file. Outputs are treated as logits and
// passed through softmax.
class ModelClassifier final : public Classifier {
 public:
  ModelClassifier(Representation rep, onnx::Model model);

  static std::shared_ptr<const ModelClassifier> load(const std::filesystem::path& path, Representation rep);

  std::optional<std::size_t> required_patch_size() const override { return kModelPatchSize; }
  const onnx::Model& model() const noexcept { return model_; }

  // Raw logits for a batch, before softmax.
  std::vector<std::array<double, 3>> logits(std::span<const Patch> batch) const;

 protected:
  std::vector<ClassProb> run(std::span<const Patch> batch) const override;

 private:
  onnx::Model model_;
  std::optional<std::int64_t> fixed_batch_;
};

// Builds the backend named by spec.backend.
ClassifierHandle load_classifier(const ClassifierSpec& spec);

}  // namespace cmrqa

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmrqa/errors.hpp"
#include "cmrqa/patch_sampler.hpp"
#include "cmrqa/preprocess.hpp"
#include "cmrqa/types.hpp"

namespace cmrqa {

enum class Backend { model_file, stub_constant, stub_lookup, stub_sharpness };

constexpr std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::model_file: return "model_file";
    case Backend::stub_constant: return "stub_constant";
    case Backend::stub_lookup: return "stub_lookup";
    case Backend::stub_sharpness: return "stub_sharpness";
  }
  return "?";
}

inline Backend parse_backend(std::string_view s) {
  if (s == "model_file") return Backend::model_file;
  if (s == "stub_constant") return Backend::stub_constant;
  if (s == "stub_lookup") return Backend::stub_lookup;
  if (s == "stub_sharpness") return Backend::stub_sharpness;
  throw ValidationError("unknown classifier backend '" + std::string(s) + "'");
}

// One roster entry: which of the six ensemble members this is, and how to
// build it. Stub parameters live in `params`.
struct ClassifierSpec {
  Architecture architecture = Architecture::resnet;
  Representation representation = Representation::intensity;
  Backend backend = Backend::stub_constant;
  std::optional<std::filesystem::path> model_path;
  nlohmann::json params = nlohmann::json::object();

  // e.g. "resnet-int", "vit-mag"
  std::string name() const {
    return std::string(to_string(architecture)) + (representation == Representation::intensity ? "-int" : "-mag");
  }

  void validate() const {
    if (backend == Backend::model_file && !model_path)
      throw ValidationError("classifier " + name() + ": model_file backend needs model_path");
  }
};

inline constexpr double kSimplexTolerance = 1e-6;

inline bool on_simplex(const ClassProb& p, double tol = kSimplexTolerance) {
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

// Numerically stable softmax over three logits.
inline ClassProb softmax(const std::array<double, 3>& logits) {
  const double m = std::max({logits[0], logits[1], logits[2]});
  ClassProb p{};
  double sum = 0;
  for (std::size_t i = 0; i < 3; ++i) sum += (p[i] = std::exp(logits[i] - m));
  for (auto& v : p) v /= sum;
  return p;
}

// Per-patch three-class classifier. Implementations are immutable and
// predict() may be called concurrently.
class Classifier {
 public:
  explicit Classifier(Representation rep) : representation_(rep) {}
  virtual ~Classifier() = default;

  Representation representation() const noexcept { return representation_; }

  // Patch side length the backend requires, if it has one.
  virtual std::optional<std::size_t> required_patch_size() const { return std::nullopt; }

  std::vector<ClassProb> predict(std::span<const Patch> batch) const {
    if (batch.empty()) throw ValidationError("predict called with an empty batch");
    for (const auto& p : batch) {
      if (p.representation != representation_)
        throw ValidationError("classifier expects " + std::string(to_string(representation_)) +
                              " patches, got a " + std::string(to_string(p.representation)) + " patch");
      if (auto side = required_patch_size(); side && (p.pixels.rows() != *side || p.pixels.cols() != *side))
        throw ValidationError("classifier expects " + std::to_string(*side) + "x" + std::to_string(*side) +
                              " patches, got " + std::to_string(p.pixels.rows()) + "x" +
                              std::to_string(p.pixels.cols()));
    }
    return run(batch);
  }

 protected:
  virtual std::vector<ClassProb> run(std::span<const Patch> batch) const = 0;

 private:
  Representation representation_;
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

class ConstantClassifier final : public Classifier {
 public:
  ConstantClassifier(Representation rep, ClassProb p) : Classifier(rep), p_(p) {
    if (!on_simplex(p_)) throw ValidationError("stub_constant: p must lie on the probability simplex");
  }

 protected:
  std::vector<ClassProb> run(std::span<const Patch> batch) const override {
    return std::vector<ClassProb>(batch.size(), p_);
  }

 private:
  ClassProb p_;
};

// Probabilities looked up by (subject, slice) of each patch.
class LookupClassifier final : public Classifier {
 public:
  using Key = std::pair<std::string, std::size_t>;

  LookupClassifier(Representation rep, std::map<Key, ClassProb> table) : Classifier(rep), table_(std::move(table)) {
    for (const auto& [key, p] : table_)
      if (!on_simplex(p))
        throw ValidationError("stub_lookup: entry (" + key.first + "," + std::to_string(key.second) +
                              ") is not on the probability simplex");
  }

 protected:
  std::vector<ClassProb> run(std::span<const Patch> batch) const override {
    std::vector<ClassProb> out;
    out.reserve(batch.size());
    for (const auto& p : batch) {
      auto it = table_.find({p.subject_id, p.slice_index});
      if (it == table_.end())
        throw ValidationError("stub_lookup: no entry for (" + p.subject_id + "," + std::to_string(p.slice_index) + ")");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::map<Key, ClassProb> table_;
};

struct SharpnessParams {
  double t1 = 0.10;  // mild above this mean gradient
  double t2 = 0.02;  // severe below this mean gradient
  double scale = 20.0;
};

// Scores a patch by its mean Prewitt gradient magnitude m:
// softmax(s*(m - t1), 0, s*(t2 - m)). Sharper patches score milder.
class SharpnessClassifier final : public Classifier {
 public:
  SharpnessClassifier(Representation rep, SharpnessParams params) : Classifier(rep), params_(params) {
    if (!std::isfinite(params_.t1) || !std::isfinite(params_.t2) || !std::isfinite(params_.scale))
      throw ValidationError("stub_sharpness: parameters must be finite");
  }

  const SharpnessParams& params() const noexcept { return params_; }

  ClassProb score(double mean_grad) const {
    return softmax({params_.scale * (mean_grad - params_.t1), 0.0, params_.scale * (params_.t2 - mean_grad)});
  }

 protected:
  std::vector<ClassProb> run(std::span<const Patch> batch) const override {
    std::vector<ClassProb> out;
    out.reserve(batch.size());
    for (const auto& p : batch) out.push_back(score(mean_gradient(p.pixels)));
    return out;
  }

 private:
  SharpnessParams params_;
};

namespace detail {

inline ClassProb prob_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + ": expected a 3-element probability array");
  ClassProb p{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + ": probabilities must be numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

}  // namespace detail

// Builds a stub backend from its parameter map:
//   stub_constant  {"p": [pm, pi, ps]}
//   stub_lookup    {"table": [{"subject": s, "slice": k, "p": [...]}, ...]}
//   stub_sharpness {"t1": .., "t2": .., "s": ..}  (all optional)
inline ClassifierHandle make_stub(Backend kind, const nlohmann::json& params, Representation rep) {
  if (!params.is_null() && !params.is_object()) throw ValidationError("stub params must be a JSON object");
  switch (kind) {
    case Backend::stub_constant: {
      if (!params.contains("p")) throw ValidationError("stub_constant: missing param 'p'");
      return std::make_shared<ConstantClassifier>(rep, detail::prob_from_json(params["p"], "stub_constant"));
    }
    case Backend::stub_lookup: {
      if (!params.contains("table")) throw ValidationError("stub_lookup: missing param 'table'");
      const auto& table = params["table"];
      if (!table.is_array()) throw ValidationError("stub_lookup: 'table' must be an array");
      std::map<LookupClassifier::Key, ClassProb> entries;
      for (const auto& row : table) {
        if (!row.contains("subject") || !row.contains("slice") || !row.contains("p"))
          throw ValidationError("stub_lookup: table rows need subject, slice and p");
        entries[{row["subject"].get<std::string>(), row["slice"].get<std::size_t>()}] =
            detail::prob_from_json(row["p"], "stub_lookup");
      }
      return std::make_shared<LookupClassifier>(rep, std::move(entries));
    }
    case Backend::stub_sharpness: {
      SharpnessParams sp;
      const auto p = params.is_object() ? params : nlohmann::json::object();
      sp.t1 = p.value("t1", sp.t1);
      sp.t2 = p.value("t2", sp.t2);
      sp.scale = p.value("s", sp.scale);
      return std::make_shared<SharpnessClassifier>(rep, sp);
    }
    case Backend::model_file: break;
  }
  throw ValidationError("make_stub: '" + std::string(to_string(kind)) + "' is not a stub kind");
}

inline ClassifierHandle make_stub(std::string_view kind, const nlohmann::json& params, Representation rep) {
  return make_stub(parse_backend(kind), params, rep);
}

}  // namespace cmrqa

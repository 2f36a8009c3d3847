#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmrqa/classifier.hpp"
#include "cmrqa/decision.hpp"
#include "cmrqa/errors.hpp"

namespace cmrqa {

// Everything a pipeline run needs. Defaults:
// 224 px patches, 20 test patches per slice, r1 = 0.4, r2 = 0.25, batch 30.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  SamplerConfig sampler;
  NormConfig norm;
  VotingParams voting;
  std::size_t batch_size = 30;
  bool require_full_roster = true;
  bool use_masks = true;  // false forces the centre-square fallback ROI
  std::vector<ClassifierSpec> classifiers;
  std::optional<std::filesystem::path> data_root;
  std::optional<std::filesystem::path> mask_root;
  std::optional<std::filesystem::path> output_dir;
  std::vector<std::string> inputs;  // volume file names under data_root; empty = every volume file

  PipelineParams pipeline_params() const {
    PipelineParams p;
    p.sampler = sampler;
    p.sampler.seed = seed;
    p.norm = norm;
    p.voting = voting;
    p.require_full_roster = require_full_roster;
    p.workers = workers;
    return p;
  }

  void validate() const {
    try {
      sampler.validate();
      norm.validate();
      voting.validate();
      for (const auto& c : classifiers) c.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    if (batch_size == 0 || batch_size % 3 != 0) throw ConfigError("batch_size must be a positive multiple of 3");
    if (workers == 0) throw ConfigError("workers must be >= 1");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

inline std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_absolute() || base.empty()) return p.lexically_normal();
  return (base / p).lexically_normal();
}

}  // namespace detail

inline ClassifierSpec classifier_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  detail::reject_unknown(j, {"architecture", "representation", "backend", "model_path", "params"}, "classifier");
  ClassifierSpec s;
  s.architecture = parse_architecture(j.at("architecture").get<std::string>());
  s.representation = parse_representation(j.at("representation").get<std::string>());
  s.backend = parse_backend(j.value("backend", std::string("model_file")));
  if (j.contains("model_path")) s.model_path = detail::resolve(j["model_path"].get<std::string>(), base);
  if (j.contains("params")) s.params = j["params"];
  return s;
}

inline nlohmann::ordered_json to_json(const ClassifierSpec& s) {
  nlohmann::ordered_json j;
  j["architecture"] = to_string(s.architecture);
  j["representation"] = to_string(s.representation);
  j["backend"] = to_string(s.backend);
  if (s.model_path) j["model_path"] = s.model_path->string();
  if (!s.params.empty()) j["params"] = s.params;
  return j;
}

// Parses a config object; relative paths resolve against `base`.
inline PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  try {
    detail::reject_unknown(j,
                           {"seed", "workers", "sampler", "norm", "voting", "batch_size", "require_full_roster",
                            "use_masks", "classifiers", "data_root", "mask_root", "output_dir", "inputs"},
                           "config");
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("sampler")) {
      const auto& s = j["sampler"];
      detail::reject_unknown(s, {"patch_size", "coverage_threshold", "patches_per_slice_test", "max_rejection_attempts"},
                             "sampler");
      c.sampler.patch_size = s.value("patch_size", c.sampler.patch_size);
      c.sampler.coverage_threshold = s.value("coverage_threshold", c.sampler.coverage_threshold);
      c.sampler.patches_per_slice_test = s.value("patches_per_slice_test", c.sampler.patches_per_slice_test);
      c.sampler.max_rejection_attempts = s.value("max_rejection_attempts", c.sampler.max_rejection_attempts);
    }
    if (j.contains("norm")) {
      const auto& n = j["norm"];
      detail::reject_unknown(n, {"lower_percentile", "upper_percentile"}, "norm");
      c.norm.lower_percentile = n.value("lower_percentile", c.norm.lower_percentile);
      c.norm.upper_percentile = n.value("upper_percentile", c.norm.upper_percentile);
    }
    if (j.contains("voting")) {
      const auto& v = j["voting"];
      detail::reject_unknown(v, {"r1", "r2"}, "voting");
      c.voting.r1 = v.value("r1", c.voting.r1);
      c.voting.r2 = v.value("r2", c.voting.r2);
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.require_full_roster = j.value("require_full_roster", c.require_full_roster);
    c.use_masks = j.value("use_masks", c.use_masks);
    if (j.contains("classifiers"))
      for (const auto& cj : j["classifiers"]) c.classifiers.push_back(classifier_spec_from_json(cj, base));
    if (j.contains("data_root")) c.data_root = detail::resolve(j["data_root"].get<std::string>(), base);
    if (j.contains("mask_root")) c.mask_root = detail::resolve(j["mask_root"].get<std::string>(), base);
    if (j.contains("output_dir")) c.output_dir = detail::resolve(j["output_dir"].get<std::string>(), base);
    if (j.contains("inputs")) c.inputs = j["inputs"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

// Fully defaulted config; `workers` is left out because it never changes
// results.
inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["sampler"] = {{"patch_size", c.sampler.patch_size},
                  {"coverage_threshold", c.sampler.coverage_threshold},
                  {"patches_per_slice_test", c.sampler.patches_per_slice_test},
                  {"max_rejection_attempts", c.sampler.max_rejection_attempts}};
  j["norm"] = {{"lower_percentile", c.norm.lower_percentile}, {"upper_percentile", c.norm.upper_percentile}};
  j["voting"] = {{"r1", c.voting.r1}, {"r2", c.voting.r2}};
  j["batch_size"] = c.batch_size;
  j["require_full_roster"] = c.require_full_roster;
  j["use_masks"] = c.use_masks;
  j["classifiers"] = nlohmann::ordered_json::array();
  for (const auto& s : c.classifiers) j["classifiers"].push_back(to_json(s));
  if (c.data_root) j["data_root"] = c.data_root->string();
  if (c.mask_root) j["mask_root"] = c.mask_root->string();
  if (c.output_dir) j["output_dir"] = c.output_dir->string();
  if (!c.inputs.empty()) j["inputs"] = c.inputs;
  return j;
}

}  // namespace cmrqa

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cmrqa/classifier.hpp"
#include "cmrqa/errors.hpp"
#include "cmrqa/parallel.hpp"
#include "cmrqa/patch_sampler.hpp"
#include "cmrqa/preprocess.hpp"
#include "cmrqa/roi_mask.hpp"
#include "cmrqa/rng.hpp"
#include "cmrqa/types.hpp"
#include "cmrqa/volume.hpp"

namespace cmrqa {

struct SliceDecision {
  ClassProb mean_prob{};
  ArtefactLevel label = ArtefactLevel::mild;
};

// Slice tallies (N1, N2, N3) of one subject under one classifier.
struct SliceCounts {
  std::size_t mild = 0;
  std::size_t intermediate = 0;
  std::size_t severe = 0;

  std::size_t total() const noexcept { return mild + intermediate + severe; }
  void add(ArtefactLevel l) noexcept {
    switch (l) {
      case ArtefactLevel::mild: ++mild; break;
      case ArtefactLevel::intermediate: ++intermediate; break;
      case ArtefactLevel::severe: ++severe; break;
    }
  }
  friend bool operator==(const SliceCounts&, const SliceCounts&) = default;
};

struct VotingParams {
  double r1 = 0.4;   // non-mild share needed to leave mild
  double r2 = 0.25;  // severe share of non-mild needed for severe

  void validate() const {
    if (!(r1 >= 0.0 && r1 <= 1.0) || !(r2 >= 0.0 && r2 <= 1.0))
      throw ValidationError("voting ratios must lie in [0, 1]");
  }
};

// Index of the largest probability; exact ties go to the most severe class.
inline ArtefactLevel argmax_most_severe(const ClassProb& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (p[i] >= p[best]) best = i;
  return level_from_index(best);
}

// Mean of the patch probabilities (summed in input order) and its label.
inline SliceDecision aggregate_slice(std::span<const ClassProb> probs) {
  if (probs.empty()) throw ValidationError("aggregate_slice needs at least one probability vector");
  SliceDecision d;
  for (const auto& p : probs)
    for (std::size_t i = 0; i < 3; ++i) d.mean_prob[i] += p[i];
  const auto n = static_cast<double>(probs.size());
  for (auto& v : d.mean_prob) v /= n;
  d.label = argmax_most_severe(d.mean_prob);
  return d;
}

// Subject label from slice tallies. A minority of non-mild slices can
// escalate the subject: leave mild when the non-mild share exceeds r1, then
// pick severe when severe slices exceed r2 of the non-mild ones. Both
// comparisons are strict.
inline ArtefactLevel biased_vote(const SliceCounts& counts, const VotingParams& params = {}) {
  const std::size_t total = counts.total();
  if (total == 0) throw ValidationError("biased_vote needs at least one slice");
  const auto non_mild = static_cast<double>(counts.intermediate + counts.severe);
  if (non_mild > params.r1 * static_cast<double>(total)) {
    if (static_cast<double>(counts.severe) > params.r2 * non_mild) return ArtefactLevel::severe;
    return ArtefactLevel::intermediate;
  }
  return ArtefactLevel::mild;
}

// Plurality vote; among tied leaders the most severe level wins.
inline ArtefactLevel ensemble_vote(std::span<const ArtefactLevel> labels) {
  if (labels.empty()) throw ValidationError("ensemble_vote needs at least one label");
  std::array<std::size_t, 3> votes{};
  for (auto l : labels) ++votes[level_index(l)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (votes[i] >= votes[best]) best = i;
  return level_from_index(best);
}

struct RosterEntry {
  ClassifierSpec spec;
  ClassifierHandle handle;
};

// The roster must name each (architecture, representation) pair once; with
// require_full it must hold all six.
inline void validate_roster(std::span<const RosterEntry> roster, bool require_full = true) {
  if (roster.empty()) throw ValidationError("classifier roster is empty");
  std::set<std::string> seen;
  for (const auto& e : roster) {
    if (!e.handle) throw ValidationError("classifier " + e.spec.name() + " has no handle");
    if (e.handle->representation() != e.spec.representation)
      throw ValidationError("classifier " + e.spec.name() + " handle representation disagrees with its spec");
    if (!seen.insert(e.spec.name()).second) throw ValidationError("classifier " + e.spec.name() + " appears twice");
  }
  if (require_full && seen.size() != kAllArchitectures.size() * 2) {
    std::string missing;
    for (auto a : kAllArchitectures)
      for (auto r : {Representation::intensity, Representation::gradmag}) {
        ClassifierSpec s{a, r};
        if (!seen.count(s.name())) missing += (missing.empty() ? "" : ", ") + s.name();
      }
    throw ValidationError("classifier roster is incomplete; missing " + missing);
  }
}

struct PipelineParams {
  SamplerConfig sampler;
  NormConfig norm;
  VotingParams voting;
  bool require_full_roster = true;
  std::size_t workers = 1;
};

struct ClassifierOutcome {
  std::string name;
  std::vector<SliceDecision> slices;
  SliceCounts counts;
  ArtefactLevel label = ArtefactLevel::mild;
};

// Where patches were drawn on one slice; shared by both representations.
struct SliceSampling {
  std::size_t slice_index = 0;
  RoiSource roi_source = RoiSource::mask;
  std::vector<PatchOrigin> origins;
};

struct SubjectPrediction {
  std::string subject_id;
  std::vector<ClassifierOutcome> per_classifier;  // roster order
  ArtefactLevel ensemble = ArtefactLevel::mild;
  std::vector<SliceSampling> sampling;
};

// Patch -> slice -> classifier -> ensemble decision for one volume.
// Deterministic in params.sampler.seed and independent of params.workers.
inline SubjectPrediction classify_subject(const Volume& v, const MaskVolume& mask, std::span<const RosterEntry> roster,
                                          const PipelineParams& params) {
  params.sampler.validate();
  params.norm.validate();
  params.voting.validate();
  validate_roster(roster, params.require_full_roster);
  if (!(mask.shape() == v.shape()))
    throw ValidationError("mask dims " + mask.shape().str() + " do not match volume dims " + v.shape().str());

  const std::size_t S = v.slices();
  const std::size_t count = params.sampler.patches_per_slice_test;
  bool need_int = false, need_mag = false;
  for (const auto& e : roster) (e.spec.representation == Representation::intensity ? need_int : need_mag) = true;

  // probs[slice][classifier] = one ClassProb per patch
  std::vector<std::vector<std::vector<ClassProb>>> probs(S, std::vector<std::vector<ClassProb>>(roster.size()));
  std::vector<SliceSampling> sampling(S);

  parallel_for(S, params.workers, [&](std::size_t k) {
    auto slice = v.slice(k);
    const SliceImage raw(v.height(), v.width(), std::vector<double>(slice.begin(), slice.end()));
    const auto reps = make_representations(raw, params.norm);
    const auto roi = roi_for_slice(mask, k, params.sampler.patch_size);
    const auto origins = sample_origins(roi, count, params.sampler, slice_stream_id(v.subject_id(), k));
    sampling[k] = {k, roi.source(), origins};

    std::vector<Patch> int_patches, mag_patches;
    if (need_int)
      int_patches = extract_patches(reps.intensity, origins, params.sampler.patch_size,
                                    {v.subject_id(), k, Representation::intensity});
    if (need_mag)
      mag_patches = extract_patches(reps.gradmag, origins, params.sampler.patch_size,
                                    {v.subject_id(), k, Representation::gradmag});
    for (std::size_t c = 0; c < roster.size(); ++c) {
      const auto& batch = roster[c].spec.representation == Representation::intensity ? int_patches : mag_patches;
      probs[k][c] = roster[c].handle->predict(batch);
    }
  });

  SubjectPrediction out;
  out.subject_id = v.subject_id();
  out.sampling = std::move(sampling);
  std::vector<ArtefactLevel> labels;
  for (std::size_t c = 0; c < roster.size(); ++c) {
    ClassifierOutcome oc;
    oc.name = roster[c].spec.name();
    for (std::size_t k = 0; k < S; ++k) {
      oc.slices.push_back(aggregate_slice(probs[k][c]));
      oc.counts.add(oc.slices.back().label);
    }
    oc.label = biased_vote(oc.counts, params.voting);
    labels.push_back(oc.label);
    out.per_classifier.push_back(std::move(oc));
  }
  out.ensemble = ensemble_vote(labels);
  return out;
}

}  // namespace cmrqa

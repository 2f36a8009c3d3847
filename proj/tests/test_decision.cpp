#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "cmrqa/decision.hpp"
#include "cmrqa/model_classifier.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cmrqa;

namespace {

constexpr auto M = ArtefactLevel::mild;
constexpr auto I = ArtefactLevel::intermediate;
constexpr auto S = ArtefactLevel::severe;

ArtefactLevel vote(std::size_t a, std::size_t b, std::size_t c, VotingParams p = {}) {
  return biased_vote(SliceCounts{a, b, c}, p);
}

Volume random_volume(std::uint64_t seed, std::size_t H, std::size_t W, std::size_t slices, std::string id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1000);
  std::vector<double> v(H * W * slices);
  for (auto& x : v) x = u(rng);
  return Volume({H, W, slices}, std::move(v), VolumeInfo{std::move(id)});
}

MaskVolume centre_mask(std::size_t H, std::size_t W, std::size_t slices, std::size_t half) {
  auto m = MaskVolume::zeros({H, W, slices});
  std::vector<unsigned char> data(m.voxels().begin(), m.voxels().end());
  for (std::size_t k = 0; k < slices; ++k)
    for (std::size_t r = H / 2 - half; r < H / 2 + half; ++r)
      for (std::size_t c = W / 2 - half; c < W / 2 + half; ++c) data[(k * H + r) * W + c] = 1;
  return MaskVolume({H, W, slices}, std::move(data));
}

std::vector<RosterEntry> roster_from(const std::vector<nlohmann::json>& params, const std::vector<Backend>& kinds) {
  std::vector<RosterEntry> out;
  std::size_t n = 0;
  for (auto rep : {Representation::intensity, Representation::gradmag})
    for (auto arch : kAllArchitectures) {
      ClassifierSpec spec{arch, rep, kinds[n], std::nullopt, params[n]};
      out.push_back({spec, load_classifier(spec)});
      ++n;
    }
  return out;
}

std::vector<RosterEntry> constant_roster(const std::vector<ClassProb>& ps) {
  std::vector<nlohmann::json> params;
  for (const auto& p : ps) params.push_back({{"p", p}});
  return roster_from(params, std::vector<Backend>(6, Backend::stub_constant));
}

}  // namespace

TEST(AggregateSlice, Examples) {
  const std::vector<ClassProb> one{{0.2, 0.3, 0.5}};
  EXPECT_EQ(aggregate_slice(one).label, S);

  const std::vector<ClassProb> two{{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}};
  const auto d = aggregate_slice(two);
  EXPECT_EQ(d.mean_prob[0], d.mean_prob[1]);
  EXPECT_NEAR(d.mean_prob[2], 0.2, 1e-15);
  EXPECT_EQ(d.label, I);

  const ClassProb p{0.125, 0.5, 0.375};
  EXPECT_EQ(aggregate_slice(std::vector<ClassProb>(7, p)).mean_prob, p);
  EXPECT_THROW(aggregate_slice(std::vector<ClassProb>{}), ValidationError);
}

TEST(AggregateSlice, ExactTiesGoToMostSevere) {
  EXPECT_EQ(argmax_most_severe({0.5, 0.5, 0.0}), I);
  EXPECT_EQ(argmax_most_severe({0.5, 0.0, 0.5}), S);
  EXPECT_EQ(argmax_most_severe({0.0, 0.5, 0.5}), S);
  EXPECT_EQ(argmax_most_severe({0.25, 0.25, 0.25}), S);
  EXPECT_EQ(argmax_most_severe({0.5, 0.25, 0.25}), M);
}

TEST(BiasedVote, Examples) {
  EXPECT_EQ(vote(10, 0, 0), M);
  EXPECT_EQ(vote(0, 0, 10), S);
  EXPECT_EQ(vote(6, 4, 0), M);
  EXPECT_EQ(vote(5, 4, 1), I);
  EXPECT_EQ(vote(5, 3, 2), S);
  EXPECT_THROW(vote(0, 0, 0), ValidationError);
}

TEST(BiasedVote, MatchesTranscribedAlgorithm) {
  for (int n = 1; n <= 20; ++n)
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        const int c = n - a - b;
        EXPECT_EQ(static_cast<int>(vote(a, b, c)), oracle::biased_vote(a, b, c)) << a << "," << b << "," << c;
      }
}

TEST(BiasedVote, MonotoneWhenASliceBecomesSevere) {
  for (std::size_t n = 1; n <= 20; ++n)
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; a + b <= n; ++b) {
        const std::size_t c = n - a - b;
        const auto base = vote(a, b, c);
        if (a) EXPECT_GE(vote(a - 1, b, c + 1), base);
        if (b) EXPECT_GE(vote(a, b - 1, c + 1), base);
      }
}

// Expected to fail: the voting rule itself drops to intermediate when an
// extra intermediate slice dilutes the severe share, e.g. (2,2,1) -> severe
// but (1,3,1) -> intermediate.
TEST(BiasedVote, MonotoneWhenAMildSliceBecomesIntermediate) {
  for (std::size_t n = 1; n <= 20; ++n)
    for (std::size_t a = 1; a <= n; ++a)
      for (std::size_t b = 0; a + b <= n; ++b) {
        const std::size_t c = n - a - b;
        EXPECT_GE(vote(a - 1, b + 1, c), vote(a, b, c)) << a << "," << b << "," << c;
      }
}

TEST(BiasedVote, ZeroRatiosEscalateOnAnyEvidence) {
  const VotingParams zero{0.0, 0.0};
  for (std::size_t n = 1; n <= 20; ++n)
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; a + b <= n; ++b) {
        const std::size_t c = n - a - b;
        const auto l = vote(a, b, c, zero);
        EXPECT_EQ(l == M, b + c == 0);
        EXPECT_EQ(l == S, c >= 1);
      }
}

TEST(BiasedVote, RatiosValidated) {
  EXPECT_THROW((VotingParams{1.5, 0.2}.validate()), ValidationError);
  EXPECT_THROW((VotingParams{0.4, -0.1}.validate()), ValidationError);
}

TEST(EnsembleVote, Examples) {
  EXPECT_EQ(ensemble_vote(std::vector{M, M, M, M, M, M}), M);
  EXPECT_EQ(ensemble_vote(std::vector{M, M, M, S, S, S}), S);
  EXPECT_EQ(ensemble_vote(std::vector{M, M, I, I, S, S}), S);
  EXPECT_EQ(ensemble_vote(std::vector{M, M, M, M, I, S}), M);
  EXPECT_EQ(ensemble_vote(std::vector{M, M, I, I, I, S}), I);
  EXPECT_THROW(ensemble_vote(std::vector<ArtefactLevel>{}), ValidationError);
}

TEST(EnsembleVote, PermutationInvariant) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 200; ++n) {
    std::vector<ArtefactLevel> labels(6);
    for (auto& l : labels) l = level_from_index(rng() % 3);
    const auto want = ensemble_vote(labels);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(labels.begin(), labels.end(), rng);
      EXPECT_EQ(ensemble_vote(labels), want);
    }
  }
}

TEST(Roster, MustNameEachPairOnce) {
  auto roster = constant_roster(std::vector<ClassProb>(6, {1, 0, 0}));
  EXPECT_NO_THROW(validate_roster(roster));
  auto short_roster = roster;
  short_roster.pop_back();
  try {
    validate_roster(short_roster);
    FAIL() << "expected a roster error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("vit-mag"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(validate_roster(short_roster, false));
  auto dup = roster;
  dup[1].spec.architecture = Architecture::resnet;
  EXPECT_THROW(validate_roster(dup), ValidationError);
}

TEST(ClassifySubject, ConstantMildPropagates) {
  const auto v = random_volume(1, 40, 48, 6, "s1");
  const auto roster = constant_roster(std::vector<ClassProb>(6, {1, 0, 0}));
  PipelineParams params;
  params.sampler.patch_size = 32;
  params.sampler.patches_per_slice_test = 4;
  const auto pred = classify_subject(v, centre_mask(40, 48, 6, 6), roster, params);
  ASSERT_EQ(pred.per_classifier.size(), 6u);
  for (const auto& oc : pred.per_classifier) {
    EXPECT_EQ(oc.counts, (SliceCounts{6, 0, 0}));
    EXPECT_EQ(oc.label, M);
  }
  EXPECT_EQ(pred.ensemble, M);
  EXPECT_EQ(pred.subject_id, "s1");
  ASSERT_EQ(pred.sampling.size(), 6u);
  for (const auto& s : pred.sampling) EXPECT_EQ(s.origins.size(), 4u);
}

TEST(ClassifySubject, LookupForcedCountsGiveIntermediate) {
  const auto v = random_volume(2, 36, 36, 10, "L");
  // slices 0-4 mild, 5-8 intermediate, 9 severe
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 0; k < 10; ++k) {
    ClassProb p = k < 5 ? ClassProb{1, 0, 0} : k < 9 ? ClassProb{0, 1, 0} : ClassProb{0, 0, 1};
    table.push_back({{"subject", "L"}, {"slice", k}, {"p", p}});
  }
  const auto roster = roster_from(std::vector<nlohmann::json>(6, {{"table", table}}),
                                  std::vector<Backend>(6, Backend::stub_lookup));
  PipelineParams params;
  params.sampler.patch_size = 16;
  params.sampler.patches_per_slice_test = 3;
  const auto pred = classify_subject(v, MaskVolume::zeros(v.shape()), roster, params);
  for (const auto& oc : pred.per_classifier) {
    EXPECT_EQ(oc.counts, (SliceCounts{5, 4, 1}));
    EXPECT_EQ(oc.label, I);
  }
  EXPECT_EQ(pred.ensemble, I);
  for (const auto& s : pred.sampling) EXPECT_EQ(s.roi_source, RoiSource::fallback_center);
}

TEST(ClassifySubject, ThreeMildThreeSevereIsSevere) {
  const auto v = random_volume(3, 30, 30, 4, "t");
  const auto roster = constant_roster({{1, 0, 0}, {0, 0, 1}, {1, 0, 0}, {0, 0, 1}, {1, 0, 0}, {0, 0, 1}});
  PipelineParams params;
  params.sampler.patch_size = 16;
  params.sampler.patches_per_slice_test = 2;
  const auto pred = classify_subject(v, centre_mask(30, 30, 4, 4), roster, params);
  EXPECT_EQ(pred.ensemble, S);
}

TEST(ClassifySubject, DeterministicAndWorkerIndependent) {
  const auto v = random_volume(4, 64, 70, 7, "d");
  const auto mask = centre_mask(64, 70, 7, 10);
  std::vector<nlohmann::json> params6;
  for (int i = 0; i < 6; ++i) params6.push_back({{"t1", 0.1 + 0.01 * i}, {"t2", 0.02}, {"s", 30}});
  const auto roster = roster_from(params6, std::vector<Backend>(6, Backend::stub_sharpness));
  PipelineParams params;
  params.sampler.patch_size = 32;
  params.sampler.seed = 99;
  const auto a = classify_subject(v, mask, roster, params);
  params.workers = 3;
  const auto b = classify_subject(v, mask, roster, params);
  ASSERT_EQ(a.per_classifier.size(), b.per_classifier.size());
  for (std::size_t c = 0; c < a.per_classifier.size(); ++c) {
    EXPECT_EQ(a.per_classifier[c].counts, b.per_classifier[c].counts);
    for (std::size_t k = 0; k < 7; ++k)
      EXPECT_EQ(a.per_classifier[c].slices[k].mean_prob, b.per_classifier[c].slices[k].mean_prob);
  }
  for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(a.sampling[k].origins, b.sampling[k].origins);
  EXPECT_EQ(a.ensemble, b.ensemble);
}

TEST(ClassifySubject, RepresentationsShareOrigins) {
  // Lookup stubs ignore pixels, so a gradmag and an intensity classifier see
  // patches at the origins recorded once per slice.
  const auto v = random_volume(5, 50, 50, 3, "o");
  PipelineParams params;
  params.sampler.patch_size = 24;
  params.sampler.patches_per_slice_test = 5;
  const auto roster = constant_roster(std::vector<ClassProb>(6, {0, 1, 0}));
  const auto pred = classify_subject(v, centre_mask(50, 50, 3, 5), roster, params);
  const RoiSlice roi = roi_for_slice(centre_mask(50, 50, 3, 5), 1, 24);
  EXPECT_EQ(pred.sampling[1].origins, sample_origins(roi, 5, params.sampler, slice_stream_id("o", 1)));
}

TEST(ClassifySubject, RejectsMismatchedMaskAndIncompleteRoster) {
  const auto v = random_volume(6, 20, 20, 2, "x");
  auto roster = constant_roster(std::vector<ClassProb>(6, {1, 0, 0}));
  PipelineParams params;
  params.sampler.patch_size = 8;
  EXPECT_THROW(classify_subject(v, MaskVolume::zeros({20, 20, 3}), roster, params), ValidationError);
  roster.pop_back();
  EXPECT_THROW(classify_subject(v, MaskVolume::zeros(v.shape()), roster, params), ValidationError);
  params.require_full_roster = false;
  EXPECT_EQ(classify_subject(v, MaskVolume::zeros(v.shape()), roster, params).per_classifier.size(), 5u);
}

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cmrqa/dataprep.hpp"

using namespace cmrqa;

namespace {

// 20 subjects x 8 scans whose labels total (70, 69, 21).
std::vector<ScanRecord> cohort(std::uint64_t seed = 5) {
  std::vector<ArtefactLevel> labels;
  labels.insert(labels.end(), 70, ArtefactLevel::mild);
  labels.insert(labels.end(), 69, ArtefactLevel::intermediate);
  labels.insert(labels.end(), 21, ArtefactLevel::severe);
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<ScanRecord> scans;
  for (std::size_t s = 0; s < 20; ++s)
    for (std::size_t j = 0; j < 8; ++j)
      scans.push_back({"S" + std::to_string(s) + "_" + std::to_string(j), "S" + std::to_string(s), labels[s * 8 + j],
                       10 + (s + j) % 4});
  return scans;
}

SlicePools pools_of(std::size_t a, std::size_t b, std::size_t c) {
  SlicePools p;
  const std::array<std::size_t, 3> n{a, b, c};
  for (std::size_t cls = 0; cls < 3; ++cls)
    for (std::size_t i = 0; i < n[cls]; ++i) p[cls].push_back({"c" + std::to_string(cls) + "_" + std::to_string(i / 10), i % 10});
  return p;
}

}  // namespace

TEST(Folds, CohortSplitsIntoFiveFoldsOfThirtyTwoScans) {
  const auto scans = cohort();
  const auto fa = make_folds(scans, {5, 11});
  ASSERT_EQ(fa.tallies.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(fa.subjects_in(f).size(), 4u);
    const auto& t = fa.tallies[f];
    EXPECT_EQ(t[0] + t[1] + t[2], 32u);
    EXPECT_GE(t[2], 3u);
  }
  // tallies agree with an independent recount
  std::vector<ClassTally> recount(5, ClassTally{});
  for (const auto& s : scans) ++recount[fa.fold_of(s.subject_id)][level_index(s.label)];
  EXPECT_EQ(recount, fa.tallies);
}

TEST(Folds, PartitionSubjectsAndAreDeterministic) {
  const auto scans = cohort(9);
  const auto a = make_folds(scans, {5, 3}), b = make_folds(scans, {5, 3});
  EXPECT_EQ(a.subject_fold, b.subject_fold);
  EXPECT_EQ(a.attempts, b.attempts);
  std::set<std::string> all;
  for (std::size_t f = 0; f < 5; ++f)
    for (const auto& s : a.subjects_in(f)) EXPECT_TRUE(all.insert(s).second) << s << " in two folds";
  EXPECT_EQ(all.size(), 20u);
  const auto c = make_folds(scans, {5, 4});
  EXPECT_NE(a.subject_fold, c.subject_fold);
}

TEST(Folds, SingletonFolds) {
  std::vector<ScanRecord> scans;
  for (int s = 0; s < 5; ++s)
    for (int j = 0; j < 3; ++j) scans.push_back({"x" + std::to_string(s * 3 + j), "s" + std::to_string(s), ArtefactLevel::severe, 5});
  const auto fa = make_folds(scans, {5, 0, 3});
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(fa.subjects_in(f).size(), 1u);
}

TEST(Folds, InfeasibleConstraintReportsTallies) {
  std::vector<ScanRecord> scans;
  for (int s = 0; s < 10; ++s) scans.push_back({"m" + std::to_string(s), "s" + std::to_string(s), ArtefactLevel::mild, 4});
  try {
    make_folds(scans, {5, 0, 3, 50});
    FAIL() << "expected infeasibility";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("50 draws"), std::string::npos) << msg;
    EXPECT_NE(msg.find("severe=0"), std::string::npos) << msg;
  }
}

TEST(Folds, RejectsTooFewSubjectsOrBadK) {
  std::vector<ScanRecord> scans{{"a", "s1", ArtefactLevel::severe, 3}, {"b", "s2", ArtefactLevel::severe, 3}};
  EXPECT_THROW(make_folds(scans, {3, 0, 0}), ValidationError);
  EXPECT_THROW(make_folds(scans, {1, 0, 0}), ValidationError);
}

TEST(Batches, EqualPoolsGiveTenBatchesOfTenPerClass) {
  const auto m = balanced_batches(pools_of(100, 100, 100), 30, 1);
  ASSERT_EQ(m.batches.size(), 10u);
  std::array<std::set<std::pair<std::string, std::size_t>>, 3> seen;
  for (const auto& b : m.batches) {
    ASSERT_EQ(b.size(), 30u);
    std::array<int, 3> per{};
    for (const auto& e : b) {
      ++per[level_index(e.label)];
      seen[level_index(e.label)].insert({e.scan_id, e.slice_index});
    }
    EXPECT_EQ(per, (std::array<int, 3>{10, 10, 10}));
  }
  for (const auto& s : seen) EXPECT_EQ(s.size(), 100u);
}

TEST(Batches, MinorityClassesRecycle) {
  const auto pools = pools_of(90, 60, 30);
  const auto m = balanced_batches(pools, 30, 2);
  ASSERT_EQ(m.batches.size(), 9u);
  std::map<std::pair<std::string, std::size_t>, int> severe_uses;
  std::array<std::vector<std::pair<std::string, std::size_t>>, 3> draws;
  for (const auto& b : m.batches)
    for (const auto& e : b) {
      draws[level_index(e.label)].push_back({e.scan_id, e.slice_index});
      if (e.label == ArtefactLevel::severe) ++severe_uses[{e.scan_id, e.slice_index}];
    }
  EXPECT_EQ(severe_uses.size(), 30u);
  for (const auto& [ref, n] : severe_uses) EXPECT_EQ(n, 3);
  // no repeats inside one pass over a pool
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t pass = pools[c].size();
    for (std::size_t start = 0; start < draws[c].size(); start += pass) {
      std::set<std::pair<std::string, std::size_t>> window(draws[c].begin() + start,
                                                          draws[c].begin() + std::min(start + pass, draws[c].size()));
      EXPECT_EQ(window.size(), std::min(pass, draws[c].size() - start));
    }
  }
}

TEST(Batches, DeterministicAndSeedSensitive) {
  const auto pools = pools_of(40, 25, 12);
  const auto a = balanced_batches(pools, 12, 7), b = balanced_batches(pools, 12, 7), c = balanced_batches(pools, 12, 8);
  EXPECT_EQ(a.batches, b.batches);
  EXPECT_NE(a.batches, c.batches);
}

TEST(Batches, RejectsBadSizesAndEmptyPools) {
  EXPECT_THROW(balanced_batches(pools_of(10, 10, 10), 31, 0), ValidationError);
  EXPECT_THROW(balanced_batches(pools_of(10, 10, 10), 0, 0), ValidationError);
  EXPECT_THROW(balanced_batches(pools_of(10, 0, 10), 30, 0), ValidationError);
}

TEST(Batches, SlicePoolsFollowScanLabelsAndSubjects) {
  const std::vector<ScanRecord> scans{{"a", "s1", ArtefactLevel::mild, 3},
                                      {"b", "s2", ArtefactLevel::severe, 2},
                                      {"c", "s3", ArtefactLevel::severe, 4}};
  const auto all = slice_pools(scans);
  EXPECT_EQ(all[0].size(), 3u);
  EXPECT_EQ(all[1].size(), 0u);
  EXPECT_EQ(all[2].size(), 6u);
  const std::set<std::string> keep{"s2"};
  const auto some = slice_pools(scans, &keep);
  EXPECT_EQ(some[2].size(), 2u);
  EXPECT_EQ(some[0].size(), 0u);
}

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cmrqa/errors.hpp"
#include "cmrqa/rng.hpp"
#include "cmrqa/types.hpp"

namespace cmrqa {

struct ScanRecord {
  std::string scan_id;
  std::string subject_id;
  ArtefactLevel label = ArtefactLevel::mild;
  std::size_t n_slices = 1;
};

using ClassTally = std::array<std::size_t, 3>;  // mild, intermediate, severe

struct FoldOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t min_severe_per_fold = 3;
  std::size_t max_retries = 1000;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> subject_fold;
  std::vector<ClassTally> tallies;  // scans per class in each fold
  std::size_t attempts = 0;         // draws used to reach a feasible split

  std::size_t fold_of(const std::string& subject) const {
    auto it = subject_fold.find(subject);
    if (it == subject_fold.end()) throw ValidationError("subject '" + subject + "' has no fold");
    return it->second;
  }
  std::vector<std::string> subjects_in(std::size_t fold) const {
    std::vector<std::string> out;
    for (const auto& [s, f] : subject_fold)
      if (f == fold) out.push_back(s);
    return out;
  }
};

namespace detail {

inline std::string tally_report(const std::vector<ClassTally>& tallies) {
  std::string s;
  for (std::size_t f = 0; f < tallies.size(); ++f) {
    s += (f ? "; " : "") + std::string("fold ") + std::to_string(f) + ": mild=" + std::to_string(tallies[f][0]) +
         " intermediate=" + std::to_string(tallies[f][1]) + " severe=" + std::to_string(tallies[f][2]);
  }
  return s;
}

}  // namespace detail

// Subject-level k-fold split. Subjects are shuffled and dealt round-robin
// (fold sizes differ by at most one subject); the draw is repeated until
// every fold holds at least min_severe_per_fold severe scans and the mild and
// intermediate counts of each fold sit within one scan-group of their
// per-fold mean. A scan-group for a class is the largest number of scans of
// that class any single subject holds.
inline FoldAssignment make_folds(std::span<const ScanRecord> scans, const FoldOptions& opt = {}) {
  if (opt.k < 2) throw ValidationError("make_folds needs k >= 2");
  std::map<std::string, ClassTally> per_subject;
  for (const auto& s : scans) {
    if (s.n_slices < 1) throw ValidationError("scan '" + s.scan_id + "' has no slices");
    ++per_subject[s.subject_id][level_index(s.label)];
  }
  if (per_subject.size() < opt.k)
    throw ValidationError("make_folds needs at least k=" + std::to_string(opt.k) + " subjects, got " +
                          std::to_string(per_subject.size()));

  std::vector<std::string> subjects;
  ClassTally totals{}, group{};
  for (const auto& [id, t] : per_subject) {
    subjects.push_back(id);
    for (std::size_t c = 0; c < 3; ++c) {
      totals[c] += t[c];
      group[c] = std::max(group[c], t[c]);
    }
  }
  const auto k = static_cast<double>(opt.k);

  std::optional<FoldAssignment> best;
  double best_violation = std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(opt.max_retries, 1); ++attempt) {
    StreamRng rng(opt.seed, attempt);
    auto order = subjects;
    rng.shuffle(order.begin(), order.end());

    FoldAssignment fa;
    fa.k = opt.k;
    fa.tallies.assign(opt.k, ClassTally{});
    fa.attempts = attempt + 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t fold = i % opt.k;
      fa.subject_fold[order[i]] = fold;
      for (std::size_t c = 0; c < 3; ++c) fa.tallies[fold][c] += per_subject[order[i]][c];
    }

    double violation = 0;
    for (const auto& t : fa.tallies) {
      if (t[2] < opt.min_severe_per_fold) violation += static_cast<double>(opt.min_severe_per_fold - t[2]);
      for (std::size_t c = 0; c < 2; ++c) {
        const double dev = std::abs(static_cast<double>(t[c]) - static_cast<double>(totals[c]) / k);
        if (dev > static_cast<double>(group[c])) violation += dev - static_cast<double>(group[c]);
      }
    }
    if (violation == 0) return fa;
    if (violation < best_violation) {
      best_violation = violation;
      best = std::move(fa);
    }
  }
  throw ValidationError("no feasible " + std::to_string(opt.k) + "-fold split after " +
                        std::to_string(opt.max_retries) + " draws; best attempt tallies: " +
                        detail::tally_report(best->tallies));
}

struct SliceRef {
  std::string scan_id;
  std::size_t slice_index = 0;
};

struct BatchEntry {
  std::string scan_id;
  std::size_t slice_index = 0;
  ArtefactLevel label = ArtefactLevel::mild;

  friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

struct BatchManifest {
  std::size_t batch_size = 0;
  std::size_t patches_per_entry = 1;
  std::vector<std::vector<BatchEntry>> batches;
};

using SlicePools = std::array<std::vector<SliceRef>, 3>;  // indexed by level

// Every slice of every scan, grouped by the scan's label. When `subjects` is
// given only those subjects contribute.
inline SlicePools slice_pools(std::span<const ScanRecord> scans, const std::set<std::string>* subjects = nullptr) {
  SlicePools pools;
  for (const auto& s : scans) {
    if (subjects && !subjects->count(s.subject_id)) continue;
    for (std::size_t k = 0; k < s.n_slices; ++k) pools[level_index(s.label)].push_back({s.scan_id, k});
  }
  return pools;
}

// Class-balanced batches: batch_size/3 entries per class per batch. One epoch
// has enough batches to cover the largest pool once; smaller pools are
// reshuffled and recycled whenever they run out.
inline BatchManifest balanced_batches(const SlicePools& pools, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0 || batch_size % 3 != 0)
    throw ValidationError("batch_size must be a positive multiple of 3, got " + std::to_string(batch_size));
  for (std::size_t c = 0; c < 3; ++c)
    if (pools[c].empty())
      throw ValidationError("class pool '" + std::string(to_string(level_from_index(c))) + "' is empty");

  const std::size_t per = batch_size / 3;
  std::size_t largest = 0;
  for (const auto& p : pools) largest = std::max(largest, p.size());
  const std::size_t n_batches = (largest + per - 1) / per;

  struct Stream {
    const std::vector<SliceRef>* pool;
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    StreamRng rng;
  };
  std::vector<Stream> streams;
  for (std::size_t c = 0; c < 3; ++c) {
    Stream s{&pools[c], {}, 0, StreamRng(seed, c)};
    s.order.resize(pools[c].size());
    for (std::size_t i = 0; i < s.order.size(); ++i) s.order[i] = i;
    s.rng.shuffle(s.order.begin(), s.order.end());
    streams.push_back(std::move(s));
  }

  BatchManifest m;
  m.batch_size = batch_size;
  m.batches.resize(n_batches);
  for (auto& batch : m.batches) {
    batch.reserve(batch_size);
    for (std::size_t c = 0; c < 3; ++c) {
      auto& s = streams[c];
      for (std::size_t i = 0; i < per; ++i) {
        if (s.pos == s.order.size()) {
          s.rng.shuffle(s.order.begin(), s.order.end());
          s.pos = 0;
        }
        const auto& ref = (*s.pool)[s.order[s.pos++]];
        batch.push_back({ref.scan_id, ref.slice_index, level_from_index(c)});
      }
    }
  }
  return m;
}

}  // namespace cmrqa

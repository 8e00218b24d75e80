#pragma once

#include <array>
#include <atomic>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "grng/common.hpp"
#include "grng/dataset.hpp"
#include "grng/metric.hpp"
#include "grng/stats.hpp"

namespace grng {

/// Shadow counter of raw metric evaluations, kept separately from the
/// per-stage table so tests can assert that no evaluation escapes tagging.
struct EvalCounter {
  std::atomic<std::uint64_t> count{0};
};

/// Per-episode scratch: memoizes distances from one query point to dataset
/// members, keeps episode-local copies of the stage counters, records the
/// computation order for rank-ordered scans, and flags zero-distance hits
/// (duplicates). One scratch per insert/search episode; concurrent searches
/// each carry their own, which keeps per-episode counter deltas exact.
class QueryScratch {
 public:
  void begin(PointView query, std::size_t dataset_size, std::size_t layers);

  PointView query() const { return query_; }

  /// Once the query has been committed under an id, distances to that id
  /// resolve to 0 without evaluation.
  void set_self(PointId id) { self_ = id; }
  PointId self() const { return self_; }

  bool known(PointId x) const { return x == self_ || stamp_[x] == epoch_; }
  double get(PointId x) const { return x == self_ ? 0.0 : dist_[x]; }
  void put(PointId x, double d);

  void count(std::size_t layer, Stage stage) {
    counts_[layer][static_cast<std::size_t>(stage)] += 1;
  }
  StageStats::Snapshot episode_snapshot() const;

  PointId zero_hit() const { return zero_hit_; }

  /// Distances computed so far, ascending. Snapshot; later puts not seen.
  std::vector<std::pair<double, PointId>> ranked() const;

  const std::vector<PointId>& computed_ids() const { return computed_; }

 private:
  PointView query_;
  PointId self_ = kInvalidPoint;
  std::vector<double> dist_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<PointId> computed_;
  std::vector<std::array<std::uint64_t, kStageCount>> counts_;
  PointId zero_hit_ = kInvalidPoint;
};

/// All distance evaluations inside the hierarchy go through this object,
/// which owns the caching policy and charges every evaluation to exactly
/// one (layer, stage) cell, both globally and in the episode scratch.
///
/// The query-side cache lives in the episode scratch and is always on.
/// The member-member pair cache persists across episodes and is off by
/// default; when enabled it reproduces the accounting of an index that
/// remembers every distance it ever computed.
class DistanceEngine {
 public:
  DistanceEngine(const Dataset* data, std::shared_ptr<const Metric> metric,
                 StageStats* stats, EvalCounter* evals)
      : data_(data), metric_(std::move(metric)), stats_(stats), evals_(evals) {}

  const Metric& metric() const { return *metric_; }

  void enable_pair_cache(bool on) { pair_cache_on_ = on; }
  bool pair_cache_enabled() const { return pair_cache_on_; }

  /// Distance from the episode query to member x, memoized in the scratch.
  double to_query(QueryScratch& scratch, PointId x, std::size_t layer, Stage stage) const;

  /// Distance between two members. Consults the pair cache when enabled.
  double between(QueryScratch& scratch, PointId a, PointId b, std::size_t layer,
                 Stage stage) const;

  /// Pair-cache lookup without evaluation; false when unknown or cache off.
  bool peek_between(PointId a, PointId b, double* out) const;

  /// After the query has been committed as member `id`, persist its episode
  /// distances into the pair cache (no-op when the cache is off).
  void absorb_episode(const QueryScratch& scratch, PointId id);

  void clear_pair_cache();

 private:
  double eval(QueryScratch& scratch, PointView a, PointView b, std::size_t layer,
              Stage stage) const;
  static std::uint64_t pair_key(PointId a, PointId b) {
    PointId lo = a < b ? a : b, hi = a < b ? b : a;
    return (static_cast<std::uint64_t>(lo) << 32) | hi;
  }

  const Dataset* data_;
  std::shared_ptr<const Metric> metric_;
  StageStats* stats_;
  EvalCounter* evals_;
  bool pair_cache_on_ = false;
  mutable std::shared_mutex pair_mutex_;
  mutable std::unordered_map<std::uint64_t, double> pair_cache_;
};

/// Counting adapter for the brute-force oracle layer: same counters, same
/// shadow counter, independent of every hierarchy cache.
class OracleDistance {
 public:
  OracleDistance(const Metric& metric, StageStats* stats, EvalCounter* evals,
                 std::size_t layer = 0)
      : metric_(metric), stats_(stats), evals_(evals), layer_(layer) {}

  double operator()(PointView a, PointView b) const {
    if (stats_) stats_->add(layer_, Stage::Oracle);
    if (evals_) evals_->count.fetch_add(1, std::memory_order_relaxed);
    return metric_(a, b);
  }

 private:
  const Metric& metric_;
  StageStats* stats_;
  EvalCounter* evals_;
  std::size_t layer_;
};

}  // namespace grng

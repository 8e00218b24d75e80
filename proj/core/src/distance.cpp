#include "grng/distance.hpp"

#include <algorithm>

namespace grng {

void QueryScratch::begin(PointView query, std::size_t dataset_size, std::size_t layers) {
  query_ = query;
  self_ = kInvalidPoint;
  if (dist_.size() < dataset_size + 1) {
    dist_.resize(dataset_size + 1);
    stamp_.resize(dataset_size + 1, 0);
  }
  ++epoch_;
  if (epoch_ == 0) {  // stamp wrap: force a full reset
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  computed_.clear();
  counts_.assign(layers, {});
  zero_hit_ = kInvalidPoint;
}

void QueryScratch::put(PointId x, double d) {
  dist_[x] = d;
  stamp_[x] = epoch_;
  computed_.push_back(x);
  if (d == 0.0 && zero_hit_ == kInvalidPoint) zero_hit_ = x;
}

StageStats::Snapshot QueryScratch::episode_snapshot() const {
  StageStats::Snapshot s;
  s.cells = counts_;
  return s;
}

std::vector<std::pair<double, PointId>> QueryScratch::ranked() const {
  std::vector<std::pair<double, PointId>> out;
  out.reserve(computed_.size());
  for (PointId id : computed_) out.emplace_back(dist_[id], id);
  std::sort(out.begin(), out.end());
  return out;
}

double DistanceEngine::eval(QueryScratch& scratch, PointView a, PointView b, std::size_t layer,
                            Stage stage) const {
  if (a.size() != b.size()) throw InputError("distance between points of different dimension");
  stats_->add(layer, stage);
  scratch.count(layer, stage);
  evals_->count.fetch_add(1, std::memory_order_relaxed);
  return (*metric_)(a, b);
}

double DistanceEngine::to_query(QueryScratch& scratch, PointId x, std::size_t layer,
                                Stage stage) const {
  if (scratch.known(x)) return scratch.get(x);
  double d = eval(scratch, scratch.query(), data_->point(x), layer, stage);
  scratch.put(x, d);
  return d;
}

double DistanceEngine::between(QueryScratch& scratch, PointId a, PointId b, std::size_t layer,
                               Stage stage) const {
  if (a == b) return 0.0;
  if (pair_cache_on_) {
    std::uint64_t key = pair_key(a, b);
    {
      std::shared_lock lock(pair_mutex_);
      auto it = pair_cache_.find(key);
      if (it != pair_cache_.end()) return it->second;
    }
    double d = eval(scratch, data_->point(a), data_->point(b), layer, stage);
    std::unique_lock lock(pair_mutex_);
    pair_cache_.emplace(key, d);
    return d;
  }
  return eval(scratch, data_->point(a), data_->point(b), layer, stage);
}

bool DistanceEngine::peek_between(PointId a, PointId b, double* out) const {
  if (!pair_cache_on_) return false;
  if (a == b) {
    *out = 0.0;
    return true;
  }
  std::shared_lock lock(pair_mutex_);
  auto it = pair_cache_.find(pair_key(a, b));
  if (it == pair_cache_.end()) return false;
  *out = it->second;
  return true;
}

void DistanceEngine::absorb_episode(const QueryScratch& scratch, PointId id) {
  if (!pair_cache_on_) return;
  std::unique_lock lock(pair_mutex_);
  for (PointId x : scratch.computed_ids()) {
    if (x == id) continue;
    pair_cache_.emplace(pair_key(id, x), scratch.get(x));
  }
}

void DistanceEngine::clear_pair_cache() {
  std::unique_lock lock(pair_mutex_);
  pair_cache_.clear();
}

}  // namespace grng

#include "grng/oracles.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

namespace grng {

namespace {

/// Lower-triangular distance matrix plus, per node, ids ranked by distance.
/// The ranked orders let the pair loops stop as soon as no further witness
/// can satisfy the first lune condition.
class DistanceTable {
 public:
  DistanceTable(const Dataset& data, const OracleDistance& dist, bool ranked) : n_(data.size()) {
    d_.resize(n_ * (n_ + 1) / 2, 0.0);
    for (std::size_t i = 1; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        d_[index(i, j)] = dist(data.point(static_cast<PointId>(i)),
                               data.point(static_cast<PointId>(j)));
    if (!ranked) return;
    order_.resize(n_);
    std::vector<std::pair<double, PointId>> tmp(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < n_; ++k)
        tmp[k] = {at(i, k), static_cast<PointId>(k)};
      std::sort(tmp.begin(), tmp.end());
      order_[i].resize(n_);
      for (std::size_t k = 0; k < n_; ++k) order_[i][k] = tmp[k].second;
    }
  }

  double at(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return i > j ? d_[index(i, j)] : d_[index(j, i)];
  }

  const std::vector<PointId>& ranked_from(std::size_t i) const { return order_[i]; }

 private:
  static std::size_t index(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }
  std::size_t n_;
  std::vector<double> d_;
  std::vector<std::vector<PointId>> order_;
};

}  // namespace

bool lune_contains(PointView x1, PointView x2, PointView x3, const Metric& metric) {
  double d12 = metric(x1, x2);
  double d13 = metric(x3, x1);
  if (d13 >= d12) return false;
  return metric(x3, x2) < d12;
}

bool glune_contains(PointView pk, PointView pi, double ri, PointView pj, double rj,
                    const Metric& metric) {
  double d12 = metric(pi, pj);
  double d13 = metric(pk, pi);
  if (d13 >= lune_bound(d12, ri, rj)) return false;
  return metric(pk, pj) < lune_bound(d12, rj, ri);
}

UndirectedGraph brute_grng(const Dataset& pivots, const std::vector<double>& radii,
                           const Metric& metric, StageStats* stats, EvalCounter* evals) {
  std::size_t n = pivots.size();
  if (radii.size() != n) throw InputError("brute_grng: one radius per pivot required");
  for (double r : radii)
    if (!(r >= 0.0)) throw InputError("brute_grng: radii must be non-negative");
  UndirectedGraph g(n);
  if (n < 2) return g;

  OracleDistance dist(metric, stats, evals);
  DistanceTable table(pivots, dist, /*ranked=*/true);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d12 = table.at(i, j);
      double bound_i = lune_bound(d12, radii[i], radii[j]);
      double bound_j = lune_bound(d12, radii[j], radii[i]);
      bool blocked = false;
      if (bound_i > 0.0 && bound_j > 0.0) {
        for (PointId k : table.ranked_from(i)) {
          if (k == i || k == j) continue;
          double dki = table.at(i, k);
          if (dki >= bound_i) break;  // ranked: nothing further can qualify
          if (table.at(j, k) < bound_j) {
            blocked = true;
            break;
          }
        }
      }
      if (!blocked) g.add_edge(static_cast<PointId>(i), static_cast<PointId>(j));
    }
  }
  g.finalize();
  return g;
}

UndirectedGraph brute_rng(const Dataset& data, const Metric& metric, StageStats* stats,
                          EvalCounter* evals) {
  return brute_grng(data, std::vector<double>(data.size(), 0.0), metric, stats, evals);
}

UndirectedGraph brute_gg(const Dataset& data, const Metric& metric, StageStats* stats,
                         EvalCounter* evals) {
  std::size_t n = data.size();
  UndirectedGraph g(n);
  if (n < 2) return g;

  OracleDistance dist(metric, stats, evals);
  DistanceTable table(data, dist, /*ranked=*/true);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d12 = table.at(i, j);
      double d12sq = d12 * d12;
      bool blocked = false;
      for (PointId k : table.ranked_from(i)) {
        if (k == i || k == j) continue;
        double dki = table.at(i, k);
        if (dki >= d12) break;  // dki^2 alone already reaches d12^2
        double dkj = table.at(j, k);
        if (dki * dki + dkj * dkj < d12sq) {
          blocked = true;
          break;
        }
      }
      if (!blocked) g.add_edge(static_cast<PointId>(i), static_cast<PointId>(j));
    }
  }
  g.finalize();
  return g;
}

UndirectedGraph brute_mst(const Dataset& data, const Metric& metric, StageStats* stats,
                          EvalCounter* evals) {
  std::size_t n = data.size();
  UndirectedGraph g(n);
  if (n < 2) return g;

  OracleDistance dist(metric, stats, evals);
  struct WeightedEdge {
    double w;
    PointId u, v;
    bool operator<(const WeightedEdge& o) const {
      if (w != o.w) return w < o.w;
      if (u != o.u) return u < o.u;
      return v < o.v;
    }
  };
  std::vector<WeightedEdge> all;
  all.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      all.push_back({dist(data.point(static_cast<PointId>(i)), data.point(static_cast<PointId>(j))),
                     static_cast<PointId>(i), static_cast<PointId>(j)});
  std::sort(all.begin(), all.end());

  std::vector<PointId> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](PointId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t added = 0;
  for (const auto& e : all) {
    PointId ru = find(e.u), rv = find(e.v);
    if (ru == rv) continue;
    parent[ru] = rv;
    g.add_edge(e.u, e.v);
    if (++added == n - 1) break;
  }
  g.finalize();
  return g;
}

std::vector<std::vector<PointId>> brute_knn(const Dataset& data, const Metric& metric,
                                            std::size_t k, StageStats* stats,
                                            EvalCounter* evals) {
  std::size_t n = data.size();
  if (k >= n) throw InputError("brute_knn: k must be smaller than the dataset size");
  OracleDistance dist(metric, stats, evals);

  std::vector<std::vector<PointId>> lists(n);
  std::vector<std::pair<double, PointId>> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row.emplace_back(dist(data.point(static_cast<PointId>(i)), data.point(static_cast<PointId>(j))),
                       static_cast<PointId>(j));
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
    lists[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) lists[i].push_back(row[t].second);
  }
  return lists;
}

UndirectedGraph knn_edges(const std::vector<std::vector<PointId>>& lists, std::size_t n) {
  UndirectedGraph g(n);
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (PointId j : lists[i]) g.add_edge(static_cast<PointId>(i), j);
  g.finalize();
  return g;
}

std::vector<PointId> brute_rng_neighbors(const Dataset& data, PointView q, const Metric& metric,
                                         StageStats* stats, EvalCounter* evals) {
  OracleDistance dist(metric, stats, evals);
  std::size_t n = data.size();
  std::vector<double> dq(n);
  for (std::size_t i = 0; i < n; ++i) dq[i] = dist(q, data.point(static_cast<PointId>(i)));

  std::vector<PointId> by_dist(n);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::sort(by_dist.begin(), by_dist.end(), [&](PointId a, PointId b) {
    if (dq[a] != dq[b]) return dq[a] < dq[b];
    return a < b;
  });

  std::vector<PointId> neighbors;
  for (std::size_t ii = 0; ii < n; ++ii) {
    PointId i = by_dist[ii];
    bool blocked = false;
    // Candidates k closer to q than x_i come first in by_dist; any witness
    // must satisfy d(q,k) < d(q,x_i), so the prefix suffices.
    for (std::size_t kk = 0; kk < ii && !blocked; ++kk) {
      PointId k = by_dist[kk];
      if (dq[k] >= dq[i]) break;
      if (dist(data.point(k), data.point(i)) < dq[i]) blocked = true;
    }
    if (!blocked) neighbors.push_back(i);
  }
  std::sort(neighbors.begin(), neighbors.end());
  return neighbors;
}

}  // namespace grng

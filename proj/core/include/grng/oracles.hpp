#pragma once

#include <optional>
#include <vector>

#include "grng/dataset.hpp"
#include "grng/distance.hpp"
#include "grng/graph.hpp"
#include "grng/metric.hpp"

namespace grng {

/// Definition-level constructions used as ground truth. Everything here
/// recomputes its own distances from the metric; none of the hierarchy's
/// caches or bounds are consulted, so a bug cannot validate itself.

/// True iff x3 lies strictly inside lune(x1, x2): both distances to the
/// endpoints are strictly below d(x1, x2). Boundary points do not count.
bool lune_contains(PointView x1, PointView x2, PointView x3, const Metric& metric);

/// True iff pk lies inside the generalized lune of (pi, ri) and (pj, rj):
///   d(pk, pi) < d(pi, pj) - (2 ri + rj)  and
///   d(pk, pj) < d(pi, pj) - (ri + 2 rj).
/// With both radii zero this is exactly lune_contains.
bool glune_contains(PointView pk, PointView pi, double ri, PointView pj, double rj,
                    const Metric& metric);

/// Same tests on already-computed distances (d13 = d(x3,x1), d23 = d(x3,x2)).
inline bool lune_contains_d(double d12, double d13, double d23) {
  return d13 < d12 && d23 < d12;
}
inline bool glune_contains_d(double d12, double ri, double rj, double d13, double d23) {
  return d13 < lune_bound(d12, ri, rj) && d23 < lune_bound(d12, rj, ri);
}

UndirectedGraph brute_rng(const Dataset& data, const Metric& metric,
                          StageStats* stats = nullptr, EvalCounter* evals = nullptr);

/// Generalized graph over (point, radius) pivots; radii indexed like ids.
/// All radii zero reduces to brute_rng.
UndirectedGraph brute_grng(const Dataset& pivots, const std::vector<double>& radii,
                           const Metric& metric, StageStats* stats = nullptr,
                           EvalCounter* evals = nullptr);

/// Gabriel graph: edge iff every third point satisfies
/// d^2(x3,x1) + d^2(x3,x2) >= d^2(x1,x2) (boundary keeps the edge).
UndirectedGraph brute_gg(const Dataset& data, const Metric& metric,
                         StageStats* stats = nullptr, EvalCounter* evals = nullptr);

/// Minimum spanning tree; equal-weight edges are taken in (u, v) order so
/// the output is deterministic.
UndirectedGraph brute_mst(const Dataset& data, const Metric& metric,
                          StageStats* stats = nullptr, EvalCounter* evals = nullptr);

/// Directed k-nearest-neighbor lists, ties broken by id. Rejects k >= N.
std::vector<std::vector<PointId>> brute_knn(const Dataset& data, const Metric& metric,
                                            std::size_t k, StageStats* stats = nullptr,
                                            EvalCounter* evals = nullptr);

/// Undirected view of the kNN lists (edge iff either direction present).
UndirectedGraph knn_edges(const std::vector<std::vector<PointId>>& lists, std::size_t n);

/// RNG neighbors of one extra point q against the dataset, i.e. the edges
/// incident to q in brute_rng(data + {q}). O(N^2) instead of O(N^3).
std::vector<PointId> brute_rng_neighbors(const Dataset& data, PointView q,
                                         const Metric& metric, StageStats* stats = nullptr,
                                         EvalCounter* evals = nullptr);

}  // namespace grng

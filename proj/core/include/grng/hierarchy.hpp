#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "grng/common.hpp"
#include "grng/dataset.hpp"
#include "grng/distance.hpp"
#include "grng/graph.hpp"
#include "grng/metric.hpp"
#include "grng/stats.hpp"

namespace grng {

/// Layer radii schedule and engine knobs.
///
/// Layers are ordered coarse to fine; the bottom layer always has radius 0,
/// so its graph is the exact relative-neighborhood graph of the dataset.
/// When `radii` is empty a geometric schedule is derived: top radius (half
/// the sampled diameter unless given) decaying by `decay` per layer, with a
/// trailing 0.
struct HierarchyConfig {
  std::vector<double> radii;
  std::size_t layers = 3;
  double top_radius = 0.0;  // 0 = estimate from data
  double decay = 0.25;
  std::size_t k_budget = 25;  // stage-5 exploration budget per candidate
  std::uint64_t seed = 1;     // sampling seed for the diameter estimate
  bool pair_cache = false;    // persist member-member distances across episodes

  /// Pruning toggles for stages S1..S6 (index 0 = S1). Disabling a stage
  /// falls back to the exhaustive alternative; the produced graphs never
  /// change, only the distance counters do.
  std::array<bool, 6> stage_enabled{true, true, true, true, true, true};

  /// Materialize the radii schedule against a dataset (estimates the
  /// diameter by sampling when needed). Validates the invariants.
  std::vector<double> resolve_radii(const Dataset& data, const Metric& metric) const;
};

/// One point's role at one layer.
struct PivotEntry {
  double radius = 0.0;
  std::vector<std::pair<PointId, double>> parents;   // covering pivots, layer above
  std::vector<std::pair<PointId, double>> children;  // covered pivots, layer below

  // Within-layer adjacency and the adjacency against the layer above, both
  // with edge lengths, sorted by id.
  std::vector<std::pair<PointId, double>> neighbors;
  std::vector<std::pair<PointId, double>> coarse_neighbors;

  double max_child_dist = 0.0;  // exact max over children distances
  double link_threat = -kInf;   // max over links of lune_bound(d, r_self, r_other)
  double cross_threat = -kInf;  // same over coarse_neighbors

  // Chained subtree bounds, indexed by target layer minus own layer minus
  // one (own-layer values are the scalars above, span 0 for itself):
  //   subtree_span[i]: upper bound on the distance to any layer-t descendant
  //   subtree_link_threat[i]: if d(Q, this) >= value, Q threatens no
  //     within-layer link at any layer-t descendant
  //   subtree_cross_threat[i]: same for the descendants' coarse adjacency
  std::vector<double> subtree_span;
  std::vector<double> subtree_link_threat;
  std::vector<double> subtree_cross_threat;

  bool has_neighbor(PointId id) const;
  double neighbor_dist(PointId id) const;
  void add_neighbor(PointId id, double d);
  void remove_neighbor(PointId id);
  bool has_coarse(PointId id) const;
  void add_coarse(PointId id, double d);
  void remove_coarse(PointId id);
};

struct Layer {
  double radius = 0.0;
  std::vector<PointId> members;  // insertion order
  std::unordered_map<PointId, PivotEntry> entries;

  bool contains(PointId id) const { return entries.count(id) != 0; }
  std::size_t size() const { return members.size(); }
};

struct InsertReport {
  bool accepted = false;
  PointId id = kInvalidPoint;
  PointId duplicate_of = kInvalidPoint;
  std::vector<std::size_t> joined_layers;  // layers the point was promoted into
  std::vector<Edge> added_rng_links;       // bottom layer
  std::vector<Edge> removed_rng_links;     // bottom layer
  StageStats::Snapshot episode;            // distance counters for this insert
};

struct SearchResult {
  std::vector<PointId> neighbors;  // exact RNG neighbors of the query, ascending
  StageStats::Snapshot episode;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::size_t checks = 0;
  bool clean() const { return violations.empty(); }
};

/// Multi-layer pivot hierarchy with exact incremental maintenance of every
/// layer's generalized relative-neighborhood graph. The bottom layer holds
/// every point at radius zero, so after any insertion sequence its edge set
/// equals the brute-force RNG of the dataset.
///
/// Concurrency: one writer (insert) at a time; any number of concurrent
/// search() calls may run between inserts.
class Hierarchy {
 public:
  Hierarchy(std::shared_ptr<const Metric> metric, std::vector<double> radii,
            HierarchyConfig config = {});

  InsertReport insert(PointView point);

  /// Exact RNG neighbors of `point` against the current dataset; read-only.
  /// Throws DuplicatePointError when the point equals a member, InputError
  /// when the hierarchy is empty or dimensions mismatch.
  SearchResult search(PointView point) const;

  const Dataset& dataset() const { return data_; }
  const Metric& metric() const { return *metric_; }
  const HierarchyConfig& config() const { return config_; }
  const std::vector<double>& radii() const { return radii_; }

  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t l) const { return layers_[l]; }

  /// Edge set of one layer over dataset ids (node count = dataset size).
  UndirectedGraph layer_graph(std::size_t l) const;
  UndirectedGraph bottom_graph() const { return layer_graph(layers_.size() - 1); }

  const StageStats& stats() const { return stats_; }
  std::uint64_t metric_evaluations() const { return evals_.count.load(); }

  /// Audits every structural invariant; layers no larger than `audit_cap`
  /// are additionally compared against the brute-force graph oracle.
  ValidationReport validate(std::size_t audit_cap = 400) const;

 private:
  friend struct SnapshotAccess;

  enum class BoundFamily { Span, LinkThreat, CrossThreat };

  struct LayerPass {
    std::vector<PointId> parents;
    // Validated adjacency of the query against the layer above, distance
    // ascending. `guide` drives candidate collection and stage-4 pruning;
    // `own_coarse` is what gets stored as the new entry's coarse adjacency.
    std::vector<std::pair<PointId, double>> guide;
    std::vector<std::pair<PointId, double>> own_coarse;
    // Stage-6 survivors at this layer, distance ascending.
    std::vector<std::pair<PointId, double>> links;
  };

  bool stage_on(int s) const { return config_.stage_enabled[static_cast<std::size_t>(s - 1)]; }

  PivotEntry& entry(std::size_t l, PointId id) { return layers_[l].entries.at(id); }
  const PivotEntry& entry(std::size_t l, PointId id) const { return layers_[l].entries.at(id); }

  double bound_value(const PivotEntry& e, BoundFamily fam, std::size_t own,
                     std::size_t target) const;
  void raise_bound(BoundFamily fam, std::size_t l, PointId id, std::size_t target, double value);

  void attach_child(std::size_t parent_layer, PointId parent, PointId child, double d);
  void add_link(std::size_t l, PointId a, PointId b, double d);
  void add_cross(std::size_t fine_layer, PointId fine, PointId coarse, double d);

  /// Members of layer `target` within `radius` of the query, via the pivot
  /// tree. Distances are charged to (target, tag).
  std::vector<PointId> range_members(QueryScratch& scratch, std::size_t target, double radius,
                                     Stage tag) const;

  /// True iff some member w of layer `target` (w not in {other, exclude})
  /// satisfies d(w, query) < t_query and d(w, other) < t_other. Complete
  /// over the layer; `use_pruning` false forces the flat scan.
  bool find_witness(QueryScratch& scratch, std::size_t target, PointId other, double t_query,
                    double t_other, PointId exclude, Stage tag, bool use_pruning) const;

  /// Visits (id, d(query, id)) for every layer-`target` member whose own
  /// threat bound (chosen family) is not cleared by its query distance.
  void threat_scan(QueryScratch& scratch, std::size_t target, BoundFamily fam, Stage tag,
                   const std::function<void(PointId, double)>& visit) const;

  LayerPass localize_layer(QueryScratch& scratch, std::size_t f, double rq,
                           std::vector<PointId> parents,
                           const std::vector<std::pair<PointId, double>>* prev_links,
                           bool inserting, PointId qid) const;

  void commit_layer(QueryScratch& scratch, std::size_t f, PointId qid, LayerPass&& pass,
                    InsertReport& report);

  std::vector<Edge> invalidate_links(QueryScratch& scratch, std::size_t f, PointId qid);
  void maintain_cross_adjacency(QueryScratch& scratch, std::size_t coarse, PointId qid);

  Dataset data_;
  std::shared_ptr<const Metric> metric_;
  HierarchyConfig config_;
  std::vector<double> radii_;
  std::vector<Layer> layers_;
  StageStats stats_;
  EvalCounter evals_;
  DistanceEngine engine_;
};

struct BuildReport {
  std::size_t inserted = 0;
  std::size_t rejected_duplicates = 0;
  std::vector<std::size_t> layer_sizes;
  StageStats::Snapshot construction;
};

/// Fold insert over the dataset in order. The dataset should be
/// deduplicated; duplicates are rejected and counted.
std::pair<std::unique_ptr<Hierarchy>, BuildReport> build_hierarchy(
    const Dataset& data, std::shared_ptr<const Metric> metric, const HierarchyConfig& config);

}  // namespace grng

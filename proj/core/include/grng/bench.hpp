#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

#include "grng/dataset.hpp"
#include "grng/hierarchy.hpp"

namespace grng {

/// Scalar outcome of one build or search run; what the CLI prints and the
/// sweep emits as CSV rows. Wall-clock numbers are informational only; the
/// portable currency is the distance-evaluation counters.
struct BenchReport {
  std::string dataset_desc;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::string metric;
  std::vector<double> radii;
  std::vector<std::size_t> layer_sizes;
  std::size_t k_budget = 0;

  std::uint64_t construction_distances = 0;
  std::vector<std::uint64_t> per_stage;  // indexed by Stage over all layers

  std::size_t queries = 0;
  double search_mean = 0.0;
  double search_p50 = 0.0;
  double search_p90 = 0.0;
  double search_max = 0.0;

  double avg_degree = 0.0;
  std::size_t edge_count = 0;

  // -1 when the oracle comparison did not run.
  long long extra_links = -1;
  long long missing_links = -1;
  std::size_t oracle_failures = 0;

  std::uint64_t counter_total = 0;
  std::uint64_t shadow_total = 0;
  bool counters_reconcile() const { return counter_total == shadow_total; }

  double build_seconds = 0.0;
  double search_seconds = 0.0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Builds a hierarchy and fills the construction half of the report; when
/// `oracle` is set the bottom graph is compared (exactly) against brute_rng.
struct BuildRun {
  std::unique_ptr<Hierarchy> hierarchy;
  BenchReport report;
};
BuildRun run_build(const Dataset& data, std::shared_ptr<const Metric> metric,
                   const HierarchyConfig& config, bool oracle, std::size_t oracle_cap,
                   const std::string& dataset_desc);

/// Runs queries against a built hierarchy; `oracle` checks every result
/// against the definition. Duplicate queries are counted and skipped.
struct SearchOutcome {
  BenchReport report;
  std::size_t duplicates_skipped = 0;
  std::vector<std::vector<PointId>> neighbor_sets;
};
SearchOutcome run_search(const Hierarchy& h, const Dataset& queries, bool oracle);

struct SweepPoint {
  std::size_t layers;
  double decay;
  double top_radius;  // 0 = auto
};

/// Grid runner: one build (and optional search batch) per configuration.
std::vector<BenchReport> run_sweep(const Dataset& data, std::shared_ptr<const Metric> metric,
                                   const HierarchyConfig& base, const std::vector<SweepPoint>& grid,
                                   const Dataset* queries, bool oracle, std::size_t oracle_cap,
                                   const std::string& dataset_desc);

}  // namespace grng

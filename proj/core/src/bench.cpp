#include "grng/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "grng/oracles.hpp"

namespace grng {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint64_t> stage_totals(const StageStats::Snapshot& snap) {
  std::vector<std::uint64_t> out(kStageCount, 0);
  for (std::size_t s = 0; s < kStageCount; ++s)
    out[s] = snap.stage_total(static_cast<Stage>(s));
  return out;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double idx = p * (static_cast<double>(v.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(idx);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

json BenchReport::to_json() const {
  json j;
  j["dataset"] = {{"desc", dataset_desc}, {"n", n}, {"dim", dim}};
  j["metric"] = metric;
  j["config"] = {{"radii", radii}, {"k_budget", k_budget}};
  j["layer_sizes"] = layer_sizes;
  j["construction"] = {{"distances", construction_distances}};
  json stages = json::object();
  for (std::size_t s = 0; s < per_stage.size(); ++s)
    stages[stage_name(static_cast<Stage>(s))] = per_stage[s];
  j["construction"]["per_stage"] = stages;
  j["search"] = {{"queries", queries},
                 {"mean_distances", search_mean},
                 {"p50_distances", search_p50},
                 {"p90_distances", search_p90},
                 {"max_distances", search_max}};
  j["graph"] = {{"edges", edge_count}, {"avg_degree", avg_degree}};
  if (extra_links >= 0)
    j["oracle"] = {{"extra_links", extra_links},
                   {"missing_links", missing_links},
                   {"failures", oracle_failures}};
  j["counters"] = {{"table_total", counter_total},
                   {"metric_evaluations", shadow_total},
                   {"reconcile", counters_reconcile()}};
  j["wall_seconds"] = {{"build", build_seconds}, {"search", search_seconds}};
  return j;
}

std::string BenchReport::csv_header() {
  std::ostringstream os;
  os << "dataset,n,dim,metric,layers,layer_sizes,k_budget,radii,"
     << "construction_distances";
  for (std::size_t s = 0; s < kStageCount; ++s)
    os << ",stage_" << stage_name(static_cast<Stage>(s));
  os << ",queries,search_mean,search_p50,search_p90,search_max"
     << ",edges,avg_degree,extra_links,missing_links,counters_ok"
     << ",build_seconds,search_seconds";
  return os.str();
}

std::string BenchReport::csv_row() const {
  std::ostringstream os;
  auto join = [](const auto& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "|" : "") << v[i];
    return s.str();
  };
  os << dataset_desc << ',' << n << ',' << dim << ',' << metric << ',' << radii.size() << ','
     << join(layer_sizes) << ',' << k_budget << ',' << join(radii) << ','
     << construction_distances;
  for (std::size_t s = 0; s < kStageCount; ++s)
    os << ',' << (s < per_stage.size() ? per_stage[s] : 0);
  os << ',' << queries << ',' << search_mean << ',' << search_p50 << ',' << search_p90 << ','
     << search_max << ',' << edge_count << ',' << avg_degree << ',' << extra_links << ','
     << missing_links << ',' << (counters_reconcile() ? 1 : 0) << ',' << build_seconds << ','
     << search_seconds;
  return os.str();
}

BuildRun run_build(const Dataset& data, std::shared_ptr<const Metric> metric,
                   const HierarchyConfig& config, bool oracle, std::size_t oracle_cap,
                   const std::string& dataset_desc) {
  BuildRun run;
  auto t0 = Clock::now();
  auto [h, build_rep] = build_hierarchy(data, metric, config);
  run.report.build_seconds = seconds_since(t0);

  BenchReport& r = run.report;
  r.dataset_desc = dataset_desc;
  r.n = h->dataset().size();
  r.dim = h->dataset().dim();
  r.metric = metric->name();
  r.radii = h->radii();
  r.layer_sizes = build_rep.layer_sizes;
  r.k_budget = config.k_budget;
  r.construction_distances = build_rep.construction.total();
  r.per_stage = stage_totals(build_rep.construction);

  UndirectedGraph g = h->bottom_graph();
  r.edge_count = g.edge_count();
  r.avg_degree = g.average_degree();

  if (oracle) {
    if (h->dataset().size() > oracle_cap)
      throw InputError("oracle comparison refused: n exceeds the cap of " +
                       std::to_string(oracle_cap));
    UndirectedGraph truth = brute_rng(h->dataset(), *metric, nullptr, nullptr);
    auto diff = g.compare(truth);
    r.extra_links = static_cast<long long>(diff.extra.size());
    r.missing_links = static_cast<long long>(diff.missing.size());
  }

  r.counter_total = h->stats().total();
  r.shadow_total = h->metric_evaluations();
  run.hierarchy = std::move(h);
  return run;
}

SearchOutcome run_search(const Hierarchy& h, const Dataset& queries, bool oracle) {
  SearchOutcome out;
  BenchReport& r = out.report;
  r.dataset_desc = "search";
  r.n = h.dataset().size();
  r.dim = h.dataset().dim();
  r.metric = h.metric().name();
  r.radii = h.radii();
  r.k_budget = h.config().k_budget;
  for (std::size_t l = 0; l < h.layer_count(); ++l) r.layer_sizes.push_back(h.layer(l).size());

  std::vector<double> per_query;
  auto t0 = Clock::now();
  for (PointId qi = 0; qi < queries.size(); ++qi) {
    try {
      SearchResult res = h.search(queries.point(qi));
      per_query.push_back(static_cast<double>(res.episode.total()));
      if (oracle) {
        std::vector<PointId> truth =
            brute_rng_neighbors(h.dataset(), queries.point(qi), h.metric(), nullptr, nullptr);
        if (truth != res.neighbors) ++r.oracle_failures;
      }
      out.neighbor_sets.push_back(std::move(res.neighbors));
    } catch (const DuplicatePointError&) {
      ++out.duplicates_skipped;
      out.neighbor_sets.emplace_back();
    }
  }
  r.search_seconds = seconds_since(t0);
  r.queries = per_query.size();
  if (!per_query.empty()) {
    double sum = 0.0;
    for (double x : per_query) sum += x;
    r.search_mean = sum / static_cast<double>(per_query.size());
    r.search_p50 = percentile(per_query, 0.5);
    r.search_p90 = percentile(per_query, 0.9);
    r.search_max = *std::max_element(per_query.begin(), per_query.end());
  }
  if (oracle) {
    r.extra_links = 0;
    r.missing_links = 0;
  }
  r.counter_total = h.stats().total();
  r.shadow_total = h.metric_evaluations();
  return out;
}

std::vector<BenchReport> run_sweep(const Dataset& data, std::shared_ptr<const Metric> metric,
                                   const HierarchyConfig& base, const std::vector<SweepPoint>& grid,
                                   const Dataset* queries, bool oracle, std::size_t oracle_cap,
                                   const std::string& dataset_desc) {
  std::vector<BenchReport> out;
  for (const SweepPoint& pt : grid) {
    HierarchyConfig cfg = base;
    cfg.radii.clear();
    cfg.layers = pt.layers;
    cfg.decay = pt.decay;
    cfg.top_radius = pt.top_radius;
    BuildRun run = run_build(data, metric, cfg, oracle, oracle_cap, dataset_desc);
    if (queries && queries->size() > 0) {
      SearchOutcome s = run_search(*run.hierarchy, *queries, oracle);
      run.report.queries = s.report.queries;
      run.report.search_mean = s.report.search_mean;
      run.report.search_p50 = s.report.search_p50;
      run.report.search_p90 = s.report.search_p90;
      run.report.search_max = s.report.search_max;
      run.report.search_seconds = s.report.search_seconds;
      run.report.oracle_failures += s.report.oracle_failures;
      run.report.counter_total = run.hierarchy->stats().total();
      run.report.shadow_total = run.hierarchy->metric_evaluations();
    }
    out.push_back(run.report);
  }
  return out;
}

}  // namespace grng

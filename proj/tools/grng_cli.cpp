// Command-line front end: build and query exact RNG hierarchies, export
// definition-level proximity graphs, generate synthetic datasets, and emit
// per-stage distance statistics for benchmarking.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "grng/bench.hpp"
#include "grng/datagen.hpp"
#include "grng/hierarchy.hpp"
#include "grng/io.hpp"
#include "grng/metric.hpp"
#include "grng/oracles.hpp"
#include "grng/snapshot.hpp"

using namespace grng;
using nlohmann::json;

namespace {

struct DatasetOptions {
  std::string path;
  std::string format = "auto";
  std::string gen;  // "uniform" or "clusters" for synthetic input
  std::size_t n = 1000;
  std::size_t dim = 2;
  std::size_t clusters = 10;
  double sigma = 0.04;
  double outliers = 0.01;
  std::uint64_t seed = 1;
};

void add_dataset_options(CLI::App* cmd, DatasetOptions& o) {
  cmd->add_option("--dataset", o.path, "input dataset file (.fvecs/.csv, optionally .gz)");
  cmd->add_option("--format", o.format, "dataset format: auto|fvecs|csv")->default_val("auto");
  cmd->add_option("--gen", o.gen, "generate instead of loading: uniform|clusters");
  cmd->add_option("--n", o.n, "generated point count");
  cmd->add_option("--dim", o.dim, "generated dimension");
  cmd->add_option("--clusters", o.clusters, "cluster count (clusters generator)");
  cmd->add_option("--sigma", o.sigma, "cluster spread (clusters generator)");
  cmd->add_option("--outliers", o.outliers, "outlier fraction (clusters generator)");
  cmd->add_option("--seed", o.seed, "generator seed");
}

Dataset resolve_dataset(const DatasetOptions& o, std::string* desc) {
  if (!o.gen.empty()) {
    GenSpec spec;
    spec.kind = GenSpec::kind_from_name(o.gen);
    spec.n = o.n;
    spec.dim = o.dim;
    spec.clusters = o.clusters;
    spec.sigma = o.sigma;
    spec.outlier_fraction = o.outliers;
    spec.seed = o.seed;
    *desc = spec.kind_name() + "-n" + std::to_string(o.n) + "-d" + std::to_string(o.dim) +
            "-s" + std::to_string(o.seed);
    return generate(spec);
  }
  if (o.path.empty()) throw InputError("either --dataset or --gen is required");
  FileFormat fmt =
      o.format == "auto" ? format_from_path(o.path) : format_from_name(o.format);
  *desc = o.path;
  return load_dataset(o.path, fmt);
}

struct HierarchyOptions {
  std::size_t layers = 3;
  std::vector<double> radii;
  double top_radius = 0.0;
  double decay = 0.25;
  std::size_t kbudget = 25;
  bool pair_cache = false;
};

void add_hierarchy_options(CLI::App* cmd, HierarchyOptions& o) {
  cmd->add_option("--layers", o.layers, "layer count for the geometric schedule")
      ->default_val(3);
  cmd->add_option("--radii", o.radii, "explicit radii, coarse to fine, last must be 0");
  cmd->add_option("--top-radius", o.top_radius, "top radius (0 = estimate from data)");
  cmd->add_option("--decay", o.decay, "geometric decay per layer")->default_val(0.25);
  cmd->add_option("--kbudget", o.kbudget, "stage-5 exploration budget")->default_val(25);
  cmd->add_flag("--pair-cache", o.pair_cache,
                "persist member-member distances across episodes");
}

HierarchyConfig make_config(const HierarchyOptions& o, std::uint64_t seed) {
  HierarchyConfig cfg;
  cfg.layers = o.layers;
  cfg.radii = o.radii;
  cfg.top_radius = o.top_radius;
  cfg.decay = o.decay;
  cfg.k_budget = o.kbudget;
  cfg.pair_cache = o.pair_cache;
  cfg.seed = seed;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

void emit_report(const BenchReport& rep, const std::string& json_path,
                 const std::string& csv_path) {
  if (!json_path.empty()) write_text(json_path, rep.to_json().dump(2) + "\n");
  if (!csv_path.empty())
    write_text(csv_path, BenchReport::csv_header() + "\n" + rep.csv_row() + "\n");
}

void write_edges(const UndirectedGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  g.write_edge_list(out);
}

json degree_json(const UndirectedGraph& g) {
  json hist = json::object();
  for (auto [deg, cnt] : g.degree_histogram()) hist[std::to_string(deg)] = cnt;
  return json{{"nodes", g.node_count()},
              {"edges", g.edge_count()},
              {"avg_degree", g.average_degree()},
              {"connected", g.connected()},
              {"degree_histogram", hist}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact relative-neighborhood-graph hierarchy"};
  app.require_subcommand(1);

  // ------------------------------------------------------------------ build
  auto* build = app.add_subcommand("build", "build a hierarchy and report statistics");
  DatasetOptions b_data;
  HierarchyOptions b_hier;
  std::string b_out, b_stats_json, b_stats_csv;
  bool b_oracle = false;
  std::size_t b_oracle_cap = 5000;
  add_dataset_options(build, b_data);
  add_hierarchy_options(build, b_hier);
  build->add_option("--out", b_out, "write a hierarchy snapshot here");
  build->add_flag("--oracle", b_oracle, "compare against the brute-force RNG (exact)");
  build->add_option("--oracle-cap", b_oracle_cap, "max n for oracle runs")->default_val(5000);
  build->add_option("--stats-json", b_stats_json, "write the report as JSON");
  build->add_option("--stats-csv", b_stats_csv, "write the report as CSV");

  // ----------------------------------------------------------------- search
  auto* search = app.add_subcommand("search", "query a snapshot for RNG neighbors");
  std::string s_snapshot, s_queries, s_qformat = "auto", s_out, s_stats_json, s_stats_csv;
  bool s_oracle = false;
  search->add_option("--snapshot", s_snapshot, "hierarchy snapshot")->required();
  search->add_option("--queries", s_queries, "query vectors (.fvecs/.csv)")->required();
  search->add_option("--format", s_qformat, "query file format: auto|fvecs|csv");
  search->add_flag("--oracle", s_oracle, "verify each result against the definition");
  search->add_option("--out", s_out, "write neighbor sets as JSON");
  search->add_option("--stats-json", s_stats_json, "write the report as JSON");
  search->add_option("--stats-csv", s_stats_csv, "write the report as CSV");

  // ------------------------------------------------------------------ sweep
  auto* sweep = app.add_subcommand("sweep", "grid over layer counts / schedules");
  DatasetOptions w_data;
  HierarchyOptions w_hier;
  std::vector<std::size_t> w_layers{2, 3};
  std::vector<double> w_decays;
  std::size_t w_queries = 0;
  std::uint64_t w_qseed = 424242;
  std::string w_csv, w_json;
  bool w_oracle = false;
  std::size_t w_oracle_cap = 5000;
  add_dataset_options(sweep, w_data);
  add_hierarchy_options(sweep, w_hier);
  sweep->add_option("--layers-grid", w_layers, "layer counts to try")->delimiter(',');
  sweep->add_option("--decay-grid", w_decays, "decay values to try")->delimiter(',');
  sweep->add_option("--queries", w_queries, "random queries per configuration");
  sweep->add_option("--query-seed", w_qseed, "seed for generated queries");
  sweep->add_flag("--oracle", w_oracle, "verify builds against the brute-force RNG");
  sweep->add_option("--oracle-cap", w_oracle_cap, "max n for oracle runs")->default_val(5000);
  sweep->add_option("--out", w_csv, "CSV output path (default stdout)");
  sweep->add_option("--stats-json", w_json, "JSON output path");

  // ----------------------------------------------------------------- graphs
  auto* graphs = app.add_subcommand("graphs", "export knn/mst/rng/gg edge lists (small n)");
  DatasetOptions g_data;
  std::size_t g_k = 8;
  std::size_t g_cap = 5000;
  std::string g_prefix = "graphs", g_metric = "l2", g_stats_json;
  add_dataset_options(graphs, g_data);
  graphs->add_option("--metric", g_metric, "metric: l2|l1")->default_val("l2");
  graphs->add_option("--k", g_k, "k for the kNN export")->default_val(8);
  graphs->add_option("--oracle-cap", g_cap, "refuse datasets larger than this")
      ->default_val(5000);
  graphs->add_option("--out", g_prefix, "output path prefix")->default_val("graphs");
  graphs->add_option("--stats-json", g_stats_json, "write degree statistics as JSON");

  // ----------------------------------------------------------------- verify
  auto* verify = app.add_subcommand("verify", "metric axioms + hierarchy vs oracle");
  DatasetOptions v_data;
  HierarchyOptions v_hier;
  std::string v_metric = "l2", v_stats_json;
  std::size_t v_samples = 1000, v_oracle_cap = 5000;
  add_dataset_options(verify, v_data);
  add_hierarchy_options(verify, v_hier);
  verify->add_option("--metric", v_metric, "metric: l2|l1")->default_val("l2");
  verify->add_option("--samples", v_samples, "axiom sample count")->default_val(1000);
  verify->add_option("--oracle-cap", v_oracle_cap, "max n for the graph comparison")
      ->default_val(5000);
  verify->add_option("--stats-json", v_stats_json, "write the verification report as JSON");

  // -------------------------------------------------------------------- gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset file");
  DatasetOptions n_data;
  std::string n_out;
  std::string n_format = "auto";
  gen->add_option("--kind", n_data.gen, "uniform|clusters")->default_val("uniform");
  gen->add_option("--n", n_data.n, "point count")->required();
  gen->add_option("--dim", n_data.dim, "dimension")->default_val(2);
  gen->add_option("--clusters", n_data.clusters, "cluster count")->default_val(10);
  gen->add_option("--sigma", n_data.sigma, "cluster spread")->default_val(0.04);
  gen->add_option("--outliers", n_data.outliers, "outlier fraction")->default_val(0.01);
  gen->add_option("--seed", n_data.seed, "seed")->default_val(1);
  gen->add_option("--out", n_out, "output path (.fvecs/.csv)")->required();
  gen->add_option("--format", n_format, "auto|fvecs|csv")->default_val("auto");

  std::string metric_name = "l2";
  build->add_option("--metric", metric_name, "metric: l2|l1")->default_val("l2");
  sweep->add_option("--metric", metric_name, "metric: l2|l1")->default_val("l2");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      std::string desc;
      Dataset raw = resolve_dataset(b_data, &desc);
      DedupReport dedup;
      Dataset data = deduplicate(raw, &dedup);
      if (!dedup.clean())
        std::cerr << "note: dropped " << dedup.dropped.size() << " duplicate points\n";
      auto metric = make_metric(metric_name);
      BuildRun run =
          run_build(data, metric, make_config(b_hier, b_data.seed), b_oracle, b_oracle_cap, desc);
      if (!b_out.empty()) save_hierarchy(*run.hierarchy, b_out);
      emit_report(run.report, b_stats_json, b_stats_csv);
      std::cout << run.report.to_json().dump(2) << std::endl;
      if (!run.report.counters_reconcile()) {
        std::cerr << "counter reconciliation failed\n";
        return 1;
      }
      if (b_oracle && (run.report.extra_links != 0 || run.report.missing_links != 0)) {
        std::cerr << "oracle mismatch: +" << run.report.extra_links << "/-"
                  << run.report.missing_links << "\n";
        return 1;
      }
      return 0;
    }

    if (search->parsed()) {
      auto h = load_hierarchy(s_snapshot);
      FileFormat fmt = s_qformat == "auto" ? format_from_path(s_queries)
                                           : format_from_name(s_qformat);
      Dataset queries = load_dataset(s_queries, fmt);
      SearchOutcome out = run_search(*h, queries, s_oracle);
      if (out.duplicates_skipped)
        std::cerr << "note: " << out.duplicates_skipped
                  << " queries duplicated dataset points and were skipped\n";
      if (!s_out.empty()) {
        json res = json::array();
        for (const auto& nb : out.neighbor_sets) res.push_back(nb);
        write_text(s_out, res.dump() + "\n");
      }
      emit_report(out.report, s_stats_json, s_stats_csv);
      std::cout << out.report.to_json().dump(2) << std::endl;
      if (!out.report.counters_reconcile()) {
        std::cerr << "counter reconciliation failed\n";
        return 1;
      }
      if (s_oracle && out.report.oracle_failures > 0) {
        std::cerr << out.report.oracle_failures << " queries disagreed with the oracle\n";
        return 1;
      }
      return 0;
    }

    if (sweep->parsed()) {
      std::string desc;
      Dataset data = deduplicate(resolve_dataset(w_data, &desc));
      auto metric = make_metric(metric_name);
      std::vector<SweepPoint> grid;
      std::vector<double> decays = w_decays.empty() ? std::vector<double>{w_hier.decay} : w_decays;
      for (std::size_t L : w_layers)
        for (double d : decays) grid.push_back({L, d, w_hier.top_radius});
      Dataset queries;
      if (w_queries > 0) {
        GenSpec qs;
        qs.kind = w_data.gen.empty() ? GenSpec::Kind::UniformCube
                                     : GenSpec::kind_from_name(w_data.gen);
        qs.n = w_queries;
        qs.dim = data.dim();
        qs.seed = w_qseed;
        queries = generate(qs);
      }
      auto reports = run_sweep(data, metric, make_config(w_hier, w_data.seed), grid,
                               w_queries ? &queries : nullptr, w_oracle, w_oracle_cap, desc);
      std::ostringstream csv;
      csv << BenchReport::csv_header() << "\n";
      for (const auto& r : reports) csv << r.csv_row() << "\n";
      if (w_csv.empty())
        std::cout << csv.str();
      else
        write_text(w_csv, csv.str());
      if (!w_json.empty()) {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        write_text(w_json, arr.dump(2) + "\n");
      }
      for (const auto& r : reports)
        if (!r.counters_reconcile() || r.oracle_failures > 0 || r.extra_links > 0 ||
            r.missing_links > 0)
          return 1;
      return 0;
    }

    if (graphs->parsed()) {
      std::string desc;
      Dataset data = deduplicate(resolve_dataset(g_data, &desc));
      if (data.size() > g_cap)
        throw InputError("graphs: dataset exceeds the oracle cap of " + std::to_string(g_cap) +
                         " points (override with --oracle-cap)");
      auto metric = make_metric(g_metric);
      UndirectedGraph rng = brute_rng(data, *metric);
      UndirectedGraph gg = brute_gg(data, *metric);
      UndirectedGraph mst = brute_mst(data, *metric);
      UndirectedGraph knn =
          knn_edges(brute_knn(data, *metric, std::min(g_k, data.size() - 1)), data.size());
      write_edges(rng, g_prefix + ".rng.edges");
      write_edges(gg, g_prefix + ".gg.edges");
      write_edges(mst, g_prefix + ".mst.edges");
      write_edges(knn, g_prefix + ".knn.edges");
      json stats = {{"dataset", desc},
                    {"n", data.size()},
                    {"rng", degree_json(rng)},
                    {"gg", degree_json(gg)},
                    {"mst", degree_json(mst)},
                    {"knn", degree_json(knn)}};
      if (!g_stats_json.empty()) write_text(g_stats_json, stats.dump(2) + "\n");
      std::cout << stats.dump(2) << std::endl;
      return 0;
    }

    if (verify->parsed()) {
      std::string desc;
      Dataset data = deduplicate(resolve_dataset(v_data, &desc));
      auto metric = make_metric(v_metric);
      AxiomReport axioms = verify_metric_axioms(*metric, data, v_samples);
      json j = {{"dataset", desc},
                {"axioms",
                 {{"samples", axioms.samples_checked}, {"violations", axioms.violations.size()}}}};
      bool ok = axioms.clean();
      for (const auto& v : axioms.violations) std::cerr << v.describe() << "\n";
      if (data.size() <= v_oracle_cap && data.size() > 0) {
        BuildRun run = run_build(data, metric, make_config(v_hier, v_data.seed), true,
                                 v_oracle_cap, desc);
        ValidationReport val = run.hierarchy->validate();
        j["hierarchy"] = {{"extra_links", run.report.extra_links},
                          {"missing_links", run.report.missing_links},
                          {"validate_checks", val.checks},
                          {"validate_violations", val.violations.size()},
                          {"counters_reconcile", run.report.counters_reconcile()}};
        ok = ok && run.report.extra_links == 0 && run.report.missing_links == 0 &&
             val.clean() && run.report.counters_reconcile();
        for (const auto& v : val.violations) std::cerr << v << "\n";
      }
      j["ok"] = ok;
      if (!v_stats_json.empty()) write_text(v_stats_json, j.dump(2) + "\n");
      std::cout << j.dump(2) << std::endl;
      return ok ? 0 : 1;
    }

    if (gen->parsed()) {
      GenSpec spec;
      spec.kind = GenSpec::kind_from_name(n_data.gen);
      spec.n = n_data.n;
      spec.dim = n_data.dim;
      spec.clusters = n_data.clusters;
      spec.sigma = n_data.sigma;
      spec.outlier_fraction = n_data.outliers;
      spec.seed = n_data.seed;
      Dataset data = generate(spec);
      FileFormat fmt = n_format == "auto" ? format_from_path(n_out) : format_from_name(n_format);
      save_dataset(data, n_out, fmt);
      std::cout << "wrote " << data.size() << " points (" << data.dim() << "-d) to " << n_out
                << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 2;
}

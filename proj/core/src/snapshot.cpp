#include "grng/snapshot.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace grng {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json encode_bound(double v) {
  if (v == -kInf) return nullptr;
  return v;
}

double decode_bound(const json& j) {
  if (j.is_null()) return -kInf;
  return j.get<double>();
}

json encode_iddist(const std::vector<std::pair<PointId, double>>& v) {
  json out = json::array();
  for (auto [id, d] : v) out.push_back(json::array({id, d}));
  return out;
}

std::vector<std::pair<PointId, double>> decode_iddist(const json& j) {
  std::vector<std::pair<PointId, double>> out;
  out.reserve(j.size());
  for (const auto& e : j) out.emplace_back(e.at(0).get<PointId>(), e.at(1).get<double>());
  return out;
}

json encode_bounds(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(encode_bound(x));
  return out;
}

std::vector<double> decode_bounds(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(decode_bound(e));
  return out;
}

}  // namespace

struct SnapshotAccess {
  static json dump(const Hierarchy& h) {
    json j;
    j["format"] = "grng-hierarchy";
    j["version"] = kFormatVersion;
    j["metric"] = h.metric_->name();
    j["radii"] = h.radii_;
    const HierarchyConfig& c = h.config_;
    j["config"] = {{"k_budget", c.k_budget},
                   {"seed", c.seed},
                   {"pair_cache", c.pair_cache},
                   {"stage_enabled", c.stage_enabled}};
    j["dataset"] = {{"dim", h.data_.dim()}, {"coords", h.data_.raw()}};
    json layers = json::array();
    for (const Layer& layer : h.layers_) {
      json jl;
      jl["radius"] = layer.radius;
      jl["members"] = layer.members;
      json entries = json::object();
      for (PointId id : layer.members) {
        const PivotEntry& e = layer.entries.at(id);
        json je;
        je["parents"] = encode_iddist(e.parents);
        je["children"] = encode_iddist(e.children);
        je["neighbors"] = encode_iddist(e.neighbors);
        je["coarse_neighbors"] = encode_iddist(e.coarse_neighbors);
        je["max_child_dist"] = e.max_child_dist;
        je["link_threat"] = encode_bound(e.link_threat);
        je["cross_threat"] = encode_bound(e.cross_threat);
        je["subtree_span"] = encode_bounds(e.subtree_span);
        je["subtree_link_threat"] = encode_bounds(e.subtree_link_threat);
        je["subtree_cross_threat"] = encode_bounds(e.subtree_cross_threat);
        entries[std::to_string(id)] = std::move(je);
      }
      jl["entries"] = std::move(entries);
      layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j;
  }

  static std::unique_ptr<Hierarchy> restore(const json& j) {
    if (j.value("format", "") != "grng-hierarchy")
      throw InputError("snapshot: not a hierarchy container");
    if (j.value("version", 0) != kFormatVersion)
      throw InputError("snapshot: unsupported version " + std::to_string(j.value("version", 0)));

    HierarchyConfig config;
    const json& jc = j.at("config");
    config.k_budget = jc.at("k_budget").get<std::size_t>();
    config.seed = jc.at("seed").get<std::uint64_t>();
    config.pair_cache = jc.at("pair_cache").get<bool>();
    auto se = jc.at("stage_enabled");
    for (std::size_t i = 0; i < 6 && i < se.size(); ++i)
      config.stage_enabled[i] = se[i].get<bool>();

    std::vector<double> radii = j.at("radii").get<std::vector<double>>();
    config.radii = radii;
    auto metric = make_metric(j.at("metric").get<std::string>());
    auto h = std::make_unique<Hierarchy>(metric, radii, config);

    const json& jd = j.at("dataset");
    std::size_t dim = jd.at("dim").get<std::size_t>();
    std::vector<double> coords = jd.at("coords").get<std::vector<double>>();
    if (dim == 0 || coords.size() % dim != 0)
      throw InputError("snapshot: inconsistent dataset block");
    for (std::size_t off = 0; off < coords.size(); off += dim)
      h->data_.add(PointView(coords.data() + off, dim));

    const json& jl = j.at("layers");
    if (jl.size() != h->layers_.size()) throw InputError("snapshot: layer count mismatch");
    for (std::size_t l = 0; l < jl.size(); ++l) {
      Layer& layer = h->layers_[l];
      layer.members = jl[l].at("members").get<std::vector<PointId>>();
      for (PointId id : layer.members) {
        const json& je = jl[l].at("entries").at(std::to_string(id));
        PivotEntry e;
        e.radius = layer.radius;
        e.parents = decode_iddist(je.at("parents"));
        e.children = decode_iddist(je.at("children"));
        e.neighbors = decode_iddist(je.at("neighbors"));
        e.coarse_neighbors = decode_iddist(je.at("coarse_neighbors"));
        e.max_child_dist = je.at("max_child_dist").get<double>();
        e.link_threat = decode_bound(je.at("link_threat"));
        e.cross_threat = decode_bound(je.at("cross_threat"));
        e.subtree_span = decode_bounds(je.at("subtree_span"));
        e.subtree_link_threat = decode_bounds(je.at("subtree_link_threat"));
        e.subtree_cross_threat = decode_bounds(je.at("subtree_cross_threat"));
        std::size_t depth = h->layers_.size() - l;
        if (e.subtree_span.size() != depth - 1 || e.subtree_link_threat.size() != depth - 1 ||
            e.subtree_cross_threat.size() != depth - 1)
          throw InputError("snapshot: bound vector length mismatch");
        layer.entries.emplace(id, std::move(e));
      }
    }
    return h;
  }
};

void save_hierarchy(const Hierarchy& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << SnapshotAccess::dump(h);
  if (!out) throw InputError("write failed for '" + path + "'");
}

std::unique_ptr<Hierarchy> load_hierarchy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("snapshot parse error in '" + path + "': " + e.what());
  }
  return SnapshotAccess::restore(j);
}

}  // namespace grng

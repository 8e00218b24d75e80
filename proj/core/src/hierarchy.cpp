#include "grng/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

#include "grng/oracles.hpp"

namespace grng {

namespace {

using IdDist = std::pair<PointId, double>;

std::vector<IdDist>::const_iterator find_id(const std::vector<IdDist>& v, PointId id) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const IdDist& a, PointId b) { return a.first < b; });
  if (it != v.end() && it->first == id) return it;
  return v.end();
}

void insert_id(std::vector<IdDist>& v, PointId id, double d) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const IdDist& a, PointId b) { return a.first < b; });
  if (it != v.end() && it->first == id) {
    it->second = d;
    return;
  }
  v.insert(it, {id, d});
}

void erase_id(std::vector<IdDist>& v, PointId id) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const IdDist& a, PointId b) { return a.first < b; });
  if (it != v.end() && it->first == id) v.erase(it);
}

void sort_unique(std::vector<PointId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

// ---------------------------------------------------------------- PivotEntry

bool PivotEntry::has_neighbor(PointId id) const { return find_id(neighbors, id) != neighbors.end(); }

double PivotEntry::neighbor_dist(PointId id) const {
  auto it = find_id(neighbors, id);
  if (it == neighbors.end()) throw std::logic_error("neighbor_dist: no such link");
  return it->second;
}

void PivotEntry::add_neighbor(PointId id, double d) { insert_id(neighbors, id, d); }
void PivotEntry::remove_neighbor(PointId id) { erase_id(neighbors, id); }
bool PivotEntry::has_coarse(PointId id) const { return find_id(coarse_neighbors, id) != coarse_neighbors.end(); }
void PivotEntry::add_coarse(PointId id, double d) { insert_id(coarse_neighbors, id, d); }
void PivotEntry::remove_coarse(PointId id) { erase_id(coarse_neighbors, id); }

// ------------------------------------------------------------ HierarchyConfig

namespace {

void check_radii(const std::vector<double>& r) {
  if (r.empty()) throw InputError("radii schedule must have at least one layer");
  if (r.back() != 0.0) throw InputError("bottom layer radius must be exactly 0");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0) || !std::isfinite(r[i])) throw InputError("radii must be finite and >= 0");
    if (i > 0 && !(r[i] < r[i - 1])) throw InputError("radii must be strictly decreasing");
  }
}

}  // namespace

std::vector<double> HierarchyConfig::resolve_radii(const Dataset& data,
                                                   const Metric& metric) const {
  if (!radii.empty()) {
    check_radii(radii);
    return radii;
  }
  if (layers == 0) throw InputError("at least one layer required");
  if (layers == 1) return {0.0};
  double top = top_radius;
  if (top <= 0.0) {
    double diameter = 0.0;
    if (data.size() >= 2) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(data.size() - 1));
      std::size_t samples = std::min<std::size_t>(2048, data.size() * 4);
      for (std::size_t s = 0; s < samples; ++s) {
        PointId a = pick(rng), b = pick(rng);
        if (a == b) continue;
        diameter = std::max(diameter, metric(data.point(a), data.point(b)));
      }
    }
    top = diameter > 0.0 ? diameter / 2.0 : 1.0;
  }
  if (!(decay > 0.0 && decay < 1.0)) throw InputError("decay must lie in (0, 1)");
  std::vector<double> out;
  out.reserve(layers);
  for (std::size_t l = 0; l + 1 < layers; ++l) out.push_back(top * std::pow(decay, double(l)));
  out.push_back(0.0);
  check_radii(out);
  return out;
}

// ------------------------------------------------------------------ Hierarchy

Hierarchy::Hierarchy(std::shared_ptr<const Metric> metric, std::vector<double> radii,
                     HierarchyConfig config)
    : metric_(std::move(metric)),
      config_(std::move(config)),
      radii_(std::move(radii)),
      stats_(radii_.empty() ? 1 : radii_.size()),
      engine_(&data_, metric_, &stats_, &evals_) {
  check_radii(radii_);
  layers_.resize(radii_.size());
  for (std::size_t l = 0; l < radii_.size(); ++l) layers_[l].radius = radii_[l];
  engine_.enable_pair_cache(config_.pair_cache);
}

double Hierarchy::bound_value(const PivotEntry& e, BoundFamily fam, std::size_t own,
                              std::size_t target) const {
  if (target == own) {
    switch (fam) {
      case BoundFamily::Span: return 0.0;
      case BoundFamily::LinkThreat: return e.link_threat;
      case BoundFamily::CrossThreat: return e.cross_threat;
    }
  }
  std::size_t i = target - own - 1;
  switch (fam) {
    case BoundFamily::Span: return e.subtree_span[i];
    case BoundFamily::LinkThreat: return e.subtree_link_threat[i];
    case BoundFamily::CrossThreat: return e.subtree_cross_threat[i];
  }
  return kInf;
}

void Hierarchy::raise_bound(BoundFamily fam, std::size_t l, PointId id, std::size_t target,
                            double value) {
  if (value == -kInf) return;
  PivotEntry& e = entry(l, id);
  double* slot = nullptr;
  if (target == l) {
    switch (fam) {
      case BoundFamily::Span: return;  // own-layer span is identically 0
      case BoundFamily::LinkThreat: slot = &e.link_threat; break;
      case BoundFamily::CrossThreat: slot = &e.cross_threat; break;
    }
  } else {
    std::size_t i = target - l - 1;
    switch (fam) {
      case BoundFamily::Span: slot = &e.subtree_span[i]; break;
      case BoundFamily::LinkThreat: slot = &e.subtree_link_threat[i]; break;
      case BoundFamily::CrossThreat: slot = &e.subtree_cross_threat[i]; break;
    }
  }
  if (value <= *slot) return;
  *slot = value;
  for (auto [p, d] : e.parents)
    raise_bound(fam, l - 1, p, target, inflate_bound(value + d));
}

void Hierarchy::attach_child(std::size_t pl, PointId parent, PointId child, double d) {
  PivotEntry& pe = entry(pl, parent);
  pe.children.emplace_back(child, d);
  if (d > pe.max_child_dist) pe.max_child_dist = d;
  raise_bound(BoundFamily::Span, pl, parent, pl + 1, d);

  const PivotEntry& ce = entry(pl + 1, child);
  const std::size_t L = layers_.size();
  for (std::size_t t = pl + 2; t < L; ++t) {
    double cv = bound_value(ce, BoundFamily::Span, pl + 1, t);
    if (cv > -kInf) raise_bound(BoundFamily::Span, pl, parent, t, inflate_bound(d + cv));
  }
  for (std::size_t t = pl + 1; t < L; ++t) {
    double lt = bound_value(ce, BoundFamily::LinkThreat, pl + 1, t);
    if (lt > -kInf) raise_bound(BoundFamily::LinkThreat, pl, parent, t, inflate_bound(d + lt));
    double ct = bound_value(ce, BoundFamily::CrossThreat, pl + 1, t);
    if (ct > -kInf) raise_bound(BoundFamily::CrossThreat, pl, parent, t, inflate_bound(d + ct));
  }
}

void Hierarchy::add_link(std::size_t l, PointId a, PointId b, double d) {
  PivotEntry& ea = entry(l, a);
  PivotEntry& eb = entry(l, b);
  ea.add_neighbor(b, d);
  eb.add_neighbor(a, d);
  raise_bound(BoundFamily::LinkThreat, l, a, l, lune_bound(d, ea.radius, eb.radius));
  raise_bound(BoundFamily::LinkThreat, l, b, l, lune_bound(d, eb.radius, ea.radius));
}

void Hierarchy::add_cross(std::size_t fine_layer, PointId fine, PointId coarse, double d) {
  PivotEntry& e = entry(fine_layer, fine);
  e.add_coarse(coarse, d);
  raise_bound(BoundFamily::CrossThreat, fine_layer, fine, fine_layer,
              lune_bound(d, e.radius, radii_[fine_layer - 1]));
}

// ------------------------------------------------------------------- descents

std::vector<PointId> Hierarchy::range_members(QueryScratch& scratch, std::size_t target,
                                              double radius, Stage tag) const {
  std::vector<PointId> out;
  if (layers_[0].members.empty()) return out;
  std::vector<PointId> frontier = layers_[0].members;
  std::vector<PointId> next;
  for (std::size_t m = 0;; ++m) {
    if (m == target) {
      for (PointId id : frontier) {
        double d = engine_.to_query(scratch, id, target, tag);
        if (d <= radius) out.push_back(id);
      }
      return out;
    }
    next.clear();
    for (PointId id : frontier) {
      const PivotEntry& e = entry(m, id);
      double span = bound_value(e, BoundFamily::Span, m, target);
      if (span == -kInf) continue;  // no descendants at the target layer
      double dq = engine_.to_query(scratch, id, target, tag);
      if (dq - span > radius + prune_guard(dq, span)) continue;
      for (auto [ch, cd] : e.children) next.push_back(ch);
    }
    sort_unique(next);
    if (next.empty()) return out;
    frontier.swap(next);
  }
}

bool Hierarchy::find_witness(QueryScratch& scratch, std::size_t target, PointId other,
                             double t_query, double t_other, PointId exclude, Stage tag,
                             bool use_pruning) const {
  if (!(t_query > 0.0) || !(t_other > 0.0)) return false;
  const Layer& tl = layers_[target];

  if (!use_pruning || target == 0) {
    for (PointId w : tl.members) {
      if (w == other || w == exclude || w == scratch.self()) continue;
      double dqw = engine_.to_query(scratch, w, target, tag);
      if (dqw >= t_query) continue;
      double dow = engine_.between(scratch, other, w, target, tag);
      if (dow < t_other) return true;
    }
    return false;
  }

  // Walk domains down to the layer above the target, pruning subtrees whose
  // every descendant is provably outside the query-side lune condition.
  const std::size_t domain_level = target - 1;
  std::vector<PointId> frontier = layers_[0].members;
  std::vector<PointId> next;
  for (std::size_t m = 0; m < domain_level; ++m) {
    next.clear();
    for (PointId id : frontier) {
      const PivotEntry& e = entry(m, id);
      double span = bound_value(e, BoundFamily::Span, m, target);
      if (span == -kInf) continue;
      double dq = engine_.to_query(scratch, id, target, tag);
      if (dq - span >= t_query + prune_guard(dq, span)) continue;
      for (auto [ch, cd] : e.children) next.push_back(ch);
    }
    sort_unique(next);
    if (next.empty()) return false;
    frontier.swap(next);
  }

  std::vector<std::pair<double, PointId>> domains;
  domains.reserve(frontier.size());
  for (PointId id : frontier) {
    const PivotEntry& e = entry(domain_level, id);
    double span = bound_value(e, BoundFamily::Span, domain_level, target);
    if (span == -kInf) continue;
    double dq = engine_.to_query(scratch, id, target, tag);
    if (dq - span >= t_query + prune_guard(dq, span)) continue;
    domains.emplace_back(dq, id);
  }
  std::sort(domains.begin(), domains.end());

  std::vector<IdDist> viable;
  for (auto [dqp, p] : domains) {
    const PivotEntry& pe = entry(domain_level, p);
    viable.clear();
    for (auto [ch, dpc] : pe.children) {
      if (ch == other || ch == exclude || ch == scratch.self()) continue;
      if (dqp - dpc >= t_query + prune_guard(dqp, dpc)) continue;  // assisted, query side
      viable.emplace_back(ch, dpc);
    }
    if (viable.empty()) continue;

    double dop = engine_.between(scratch, other, p, target, tag);
    double span = bound_value(pe, BoundFamily::Span, domain_level, target);
    if (dop - span >= t_other + prune_guard(dop, span)) continue;  // whole domain, other side

    for (auto [ch, dpc] : viable) {
      if (dop - dpc >= t_other + prune_guard(dop, dpc)) continue;  // assisted, other side
      double dqw = engine_.to_query(scratch, ch, target, tag);
      if (dqw >= t_query) continue;
      double dow = engine_.between(scratch, other, ch, target, tag);
      if (dow < t_other) return true;
    }
  }
  return false;
}

void Hierarchy::threat_scan(QueryScratch& scratch, std::size_t target, BoundFamily fam, Stage tag,
                            const std::function<void(PointId, double)>& visit) const {
  if (layers_[0].members.empty()) return;
  std::vector<PointId> frontier = layers_[0].members;
  std::vector<PointId> next;
  for (std::size_t m = 0;; ++m) {
    if (m == target) {
      for (PointId id : frontier) {
        const PivotEntry& e = entry(target, id);
        double own = bound_value(e, fam, target, target);
        if (own == -kInf) continue;
        double dq = engine_.to_query(scratch, id, target, tag);
        if (dq < own) visit(id, dq);
      }
      return;
    }
    next.clear();
    for (PointId id : frontier) {
      const PivotEntry& e = entry(m, id);
      double bound = bound_value(e, fam, m, target);
      if (bound == -kInf) continue;
      double dq = engine_.to_query(scratch, id, target, tag);
      if (dq >= bound) continue;
      for (auto [ch, cd] : e.children) next.push_back(ch);
    }
    sort_unique(next);
    if (next.empty()) return;
    frontier.swap(next);
  }
}

// ------------------------------------------------------------------- localize

Hierarchy::LayerPass Hierarchy::localize_layer(QueryScratch& scratch, std::size_t f, double rq,
                                               std::vector<PointId> parents,
                                               const std::vector<IdDist>* prev_links,
                                               bool inserting, PointId qid) const {
  LayerPass pass;
  pass.parents = std::move(parents);
  const double r_f = radii_[f];

  // ---- top layer: validate the query against the whole (small) layer.
  if (f == 0) {
    std::vector<std::pair<double, PointId>> cand;
    if (!pass.parents.empty() && stage_on(1)) {
      std::vector<PointId> ids;
      for (PointId p : pass.parents) {
        ids.push_back(p);
        for (auto [nb, d] : entry(0, p).neighbors) ids.push_back(nb);
      }
      sort_unique(ids);
      for (PointId p : ids) {
        bool ok = true;
        for (PointId q : pass.parents) {
          if (p != q && !entry(0, q).has_neighbor(p)) {
            ok = false;
            break;
          }
        }
        if (ok) cand.emplace_back(engine_.to_query(scratch, p, 0, Stage::S1), p);
      }
    } else {
      for (PointId m : layers_[0].members)
        cand.emplace_back(engine_.to_query(scratch, m, 0, Stage::S1), m);
    }
    std::sort(cand.begin(), cand.end());

    // Witness pool: the full layer, ranked by query distance.
    std::vector<std::pair<double, PointId>> pool;
    pool.reserve(layers_[0].size());
    for (PointId m : layers_[0].members)
      pool.emplace_back(engine_.to_query(scratch, m, 0, Stage::S1), m);
    std::sort(pool.begin(), pool.end());

    for (auto [dj, pj] : cand) {
      double tq = lune_bound(dj, rq, r_f);
      double to = lune_bound(dj, r_f, rq);
      bool blocked = false;
      if (tq > 0.0 && to > 0.0) {
        for (auto [dw, w] : pool) {
          if (dw >= tq) break;
          if (w == pj) continue;
          double dwp = engine_.between(scratch, w, pj, 0, Stage::S2);
          if (dwp < to) {
            blocked = true;
            break;
          }
        }
      }
      if (!blocked) pass.links.emplace_back(pj, dj);
    }
    return pass;
  }

  const std::size_t c = f - 1;
  const double r_c = radii_[c];

  // ---- S1/S2: the query's validated adjacency against the coarse layer.
  if (prev_links == nullptr || inserting) {
    std::vector<std::pair<double, PointId>> cand;
    if (prev_links != nullptr) {
      // The query already sits in the coarse layer; its committed links are
      // the candidate set, plus its own coarse copy.
      for (const auto& [id, d] : *prev_links)
        cand.emplace_back(d, id);
      cand.emplace_back(0.0, qid);
    } else if (pass.parents.empty() || !stage_on(1)) {
      for (PointId m : layers_[c].members)
        cand.emplace_back(engine_.to_query(scratch, m, f, Stage::S2), m);
    } else {
      std::vector<PointId> ids;
      for (PointId p : pass.parents) {
        ids.push_back(p);
        for (auto [nb, d] : entry(c, p).neighbors) ids.push_back(nb);
      }
      sort_unique(ids);
      for (PointId p : ids) {
        bool ok = true;
        for (PointId q : pass.parents) {
          if (p != q && !entry(c, q).has_neighbor(p)) {
            ok = false;
            break;
          }
        }
        if (ok) cand.emplace_back(engine_.to_query(scratch, p, f, Stage::S2), p);
      }
    }
    std::sort(cand.begin(), cand.end());

    std::vector<IdDist> validated;
    if (!stage_on(2)) {
      for (auto [d, id] : cand) validated.emplace_back(id, d);
    } else {
      for (auto [dj, pj] : cand) {
        double tq = lune_bound(dj, rq, r_c);
        double to = lune_bound(dj, r_c, rq);
        bool blocked = false;
        if (tq > 0.0 && to > 0.0) {
          for (auto [dw, w] : cand) {
            if (dw >= tq) break;
            if (w == pj || w == qid) continue;
            double dwp = engine_.between(scratch, w, pj, f, Stage::S2);
            if (dwp < to) {
              blocked = true;
              break;
            }
          }
        }
        if (!blocked) validated.emplace_back(pj, dj);
      }
    }
    pass.own_coarse = validated;
    pass.guide = (prev_links != nullptr) ? *prev_links : std::move(validated);
  } else {
    pass.guide = *prev_links;  // search: previous pass output, already exact
  }

  // ---- S3: fine candidates from the guide's children, filtered by the
  // stored cross adjacency.
  std::vector<PointId> raw;
  if (!stage_on(3)) {
    raw = layers_[f].members;
  } else {
    for (const auto& [p, d] : pass.guide)
      for (auto [ch, cd] : entry(c, p).children) raw.push_back(ch);
    sort_unique(raw);
  }

  std::vector<PointId> guide_ids;
  guide_ids.reserve(pass.guide.size() + 1);
  for (const auto& [p, d] : pass.guide) guide_ids.push_back(p);
  if (qid != kInvalidPoint) guide_ids.push_back(qid);
  std::sort(guide_ids.begin(), guide_ids.end());

  std::vector<PointId> kept;
  kept.reserve(raw.size());
  for (PointId x : raw) {
    if (x == scratch.self()) continue;
    if (stage_on(3)) {
      const PivotEntry& xe = entry(f, x);
      bool ok = true;
      for (auto [px, d] : xe.parents) {
        if (!std::binary_search(guide_ids.begin(), guide_ids.end(), px)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        for (PointId pq : pass.parents) {
          if (!xe.has_coarse(pq)) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
    }
    kept.push_back(x);
  }

  Stage dist_tag = stage_on(4) ? Stage::S4 : (stage_on(5) ? Stage::S5 : Stage::S6);
  std::vector<std::pair<double, PointId>> cands;
  cands.reserve(kept.size());
  for (PointId x : kept)
    cands.emplace_back(engine_.to_query(scratch, x, f, dist_tag), x);
  std::sort(cands.begin(), cands.end());

  std::vector<char> alive(cands.size(), 1);

  // ---- S4: coarse pivots as lune occupiers (they are members of this layer
  // too, so any hit is a genuine witness).
  if (stage_on(4)) {
    for (std::size_t i = 0; i < cands.size(); ++i) {
      auto [dx, x] = cands[i];
      double tq = lune_bound(dx, rq, r_f);
      double to = lune_bound(dx, r_f, rq);
      if (!(tq > 0.0) || !(to > 0.0)) continue;
      const PivotEntry& xe = entry(f, x);
      for (const auto& [w, dw] : pass.guide) {
        if (dw >= tq) break;
        if (w == x) continue;
        // Skip rule: a stored parent distance can rule the occupier out
        // without evaluating d(w, x).
        bool skip = false;
        double dwp;
        for (auto [px, dpx] : xe.parents) {
          if (engine_.peek_between(w, px, &dwp) &&
              dwp - dpx >= to + prune_guard(dwp, dpx)) {
            skip = true;
            break;
          }
        }
        if (skip) continue;
        double dwx = engine_.between(scratch, w, x, f, Stage::S4);
        if (dwx < to) {
          alive[i] = 0;
          break;
        }
      }
    }
  }

  // ---- S5: nearby fine items: the candidate's graph neighborhood expanded
  // in increasing distance, then the rank-ordered cached query distances.
  if (stage_on(5)) {
    auto ranked = scratch.ranked();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!alive[i]) continue;
      auto [dx, x] = cands[i];
      double tq = lune_bound(dx, rq, r_f);
      double to = lune_bound(dx, r_f, rq);
      if (!(tq > 0.0) || !(to > 0.0)) continue;

      std::priority_queue<std::pair<double, PointId>, std::vector<std::pair<double, PointId>>,
                          std::greater<>> heap;
      std::set<PointId> seen{x};
      for (auto [nb, d] : entry(f, x).neighbors) {
        if (seen.insert(nb).second) heap.emplace(d, nb);
      }
      std::size_t budget = config_.k_budget;
      while (!heap.empty() && alive[i]) {
        auto [dxu, u] = heap.top();
        heap.pop();
        if (dxu >= to) break;
        double dqu = engine_.to_query(scratch, u, f, Stage::S5);
        if (dqu < tq) {
          alive[i] = 0;
          break;
        }
        for (auto [v, duv] : entry(f, u).neighbors) {
          if (budget == 0) break;
          if (!seen.insert(v).second) continue;
          --budget;
          double dxv = engine_.between(scratch, x, v, f, Stage::S5);
          heap.emplace(dxv, v);
        }
      }
      if (!alive[i]) continue;

      std::size_t checked = 0;
      for (auto [dqw, w] : ranked) {
        if (dqw >= tq) break;
        if (w == x || !layers_[f].contains(w)) continue;
        if (seen.count(w)) continue;
        if (checked++ >= config_.k_budget) break;
        double dxw = engine_.between(scratch, x, w, f, Stage::S5);
        if (dxw < to) {
          alive[i] = 0;
          break;
        }
      }
    }
  }

  // ---- S6: complete verification.
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!alive[i]) continue;
    auto [dx, x] = cands[i];
    double tq = lune_bound(dx, rq, r_f);
    double to = lune_bound(dx, r_f, rq);
    if (find_witness(scratch, f, x, tq, to, kInvalidPoint, Stage::S6, stage_on(6))) continue;
    pass.links.emplace_back(x, dx);
  }
  return pass;
}

// --------------------------------------------------------------------- commit

void Hierarchy::commit_layer(QueryScratch& scratch, std::size_t f, PointId qid, LayerPass&& pass,
                             InsertReport& report) {
  const std::size_t L = layers_.size();
  Layer& lf = layers_[f];

  PivotEntry e;
  e.radius = radii_[f];
  std::size_t depth = L - f;
  e.subtree_span.assign(depth - 1 > 0 ? depth - 1 : 0, -kInf);
  e.subtree_link_threat.assign(depth - 1 > 0 ? depth - 1 : 0, -kInf);
  e.subtree_cross_threat.assign(depth - 1 > 0 ? depth - 1 : 0, -kInf);

  for (PointId p : pass.parents) e.parents.emplace_back(p, scratch.get(p));

  e.coarse_neighbors = pass.own_coarse;
  std::sort(e.coarse_neighbors.begin(), e.coarse_neighbors.end());
  if (f > 0) {
    for (const auto& [p, d] : e.coarse_neighbors)
      e.cross_threat = std::max(e.cross_threat, lune_bound(d, e.radius, radii_[f - 1]));
  }

  lf.entries.emplace(qid, std::move(e));
  lf.members.push_back(qid);

  for (auto [p, d] : entry(f, qid).parents) attach_child(f - 1, p, qid, d);

  for (const auto& [x, d] : pass.links) add_link(f, qid, x, d);
  if (f + 1 == L) {
    for (const auto& [x, d] : pass.links)
      report.added_rng_links.emplace_back(std::min(qid, x), std::max(qid, x));
  }

  std::vector<Edge> removed = invalidate_links(scratch, f, qid);
  if (f + 1 == L)
    report.removed_rng_links.insert(report.removed_rng_links.end(), removed.begin(),
                                    removed.end());

  if (f + 1 < L) maintain_cross_adjacency(scratch, f, qid);
}

std::vector<Edge> Hierarchy::invalidate_links(QueryScratch& scratch, std::size_t f, PointId qid) {
  std::vector<std::pair<PointId, double>> endangered;
  threat_scan(scratch, f, BoundFamily::LinkThreat, Stage::S7, [&](PointId id, double dq) {
    if (id != qid) endangered.emplace_back(id, dq);
  });
  std::vector<PointId> endangered_ids;
  endangered_ids.reserve(endangered.size());
  for (auto& [id, dq] : endangered) endangered_ids.push_back(id);
  std::sort(endangered_ids.begin(), endangered_ids.end());

  std::vector<Edge> removed;
  for (auto [x, dqx] : endangered) {
    const PivotEntry& xe = entry(f, x);
    for (auto [y, dxy] : xe.neighbors) {
      if (y == qid) continue;
      if (std::binary_search(endangered_ids.begin(), endangered_ids.end(), y) && y < x)
        continue;  // that side handles the pair
      double tx = lune_bound(dxy, xe.radius, entry(f, y).radius);
      double ty = lune_bound(dxy, entry(f, y).radius, xe.radius);
      if (dqx >= tx) continue;
      double dqy = engine_.to_query(scratch, y, f, Stage::S7);
      if (dqy >= ty) continue;
      removed.emplace_back(std::min(x, y), std::max(x, y));
    }
  }
  for (auto [u, v] : removed) {
    entry(f, u).remove_neighbor(v);
    entry(f, v).remove_neighbor(u);
  }
  return removed;
}

void Hierarchy::maintain_cross_adjacency(QueryScratch& scratch, std::size_t c, PointId qid) {
  const std::size_t f = c + 1;
  const double r_c = radii_[c], r_f = radii_[f];

  // New coarse pivot: existing fine pivots may gain it as a coarse
  // neighbor. Candidates are exactly the children of the query's new
  // within-layer links.
  std::vector<PointId> cand;
  for (auto [nb, d] : entry(c, qid).neighbors)
    for (auto [ch, cd] : entry(c, nb).children) cand.push_back(ch);
  sort_unique(cand);
  for (PointId x : cand) {
    double dxq = engine_.to_query(scratch, x, f, Stage::ParentScan);
    double t_query = lune_bound(dxq, r_c, r_f);  // query side (coarse role)
    double t_fine = lune_bound(dxq, r_f, r_c);
    if (!find_witness(scratch, c, x, t_query, t_fine, qid, Stage::ParentScan, stage_on(6)))
      add_cross(f, x, qid, dxq);
  }

  // The query is also a fresh witness against existing cross links.
  std::vector<std::pair<PointId, double>> endangered;
  threat_scan(scratch, f, BoundFamily::CrossThreat, Stage::ParentScan,
              [&](PointId id, double dq) { endangered.emplace_back(id, dq); });
  for (auto [x, dqx] : endangered) {
    const PivotEntry& xe = entry(f, x);
    std::vector<PointId> drop;
    for (auto [p, dxp] : xe.coarse_neighbors) {
      if (p == qid) continue;
      double tx = lune_bound(dxp, r_f, r_c);
      double tp = lune_bound(dxp, r_c, r_f);
      if (dqx >= tx) continue;
      double dqp = engine_.to_query(scratch, p, f, Stage::ParentScan);
      if (dqp >= tp) continue;
      drop.push_back(p);
    }
    for (PointId p : drop) entry(f, x).remove_coarse(p);
  }
}

// ------------------------------------------------------------- insert/search

InsertReport Hierarchy::insert(PointView q) {
  if (q.empty()) throw InputError("cannot insert an empty point");
  if (!data_.empty() && q.size() != data_.dim())
    throw InputError("insert: point dimension does not match the dataset");

  const std::size_t L = layers_.size();
  QueryScratch scratch;
  scratch.begin(q, data_.size(), L);

  std::vector<std::vector<PointId>> cover(L);
  std::size_t join_from = 0;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    cover[l] = range_members(scratch, l, radii_[l] - radii_[l + 1], Stage::S1);
    if (!cover[l].empty()) join_from = l + 1;
  }

  InsertReport report;
  if (scratch.zero_hit() != kInvalidPoint) {
    report.duplicate_of = scratch.zero_hit();
    report.episode = scratch.episode_snapshot();
    return report;
  }

  report.accepted = true;
  PointId qid = kInvalidPoint;
  std::vector<IdDist> prev_links;
  for (std::size_t f = join_from; f < L; ++f) {
    std::vector<PointId> parents;
    if (f > 0) parents = (f == join_from) ? cover[f - 1] : std::vector<PointId>{qid};
    LayerPass pass = localize_layer(scratch, f, radii_[f], std::move(parents),
                                    f == join_from ? nullptr : &prev_links, true, qid);
    if (scratch.zero_hit() != kInvalidPoint) {
      if (qid != kInvalidPoint)
        throw std::logic_error("duplicate surfaced after promotion; coverage broken");
      report.accepted = false;
      report.duplicate_of = scratch.zero_hit();
      report.episode = scratch.episode_snapshot();
      return report;
    }
    if (qid == kInvalidPoint) {
      qid = data_.add(q);
      scratch.set_self(qid);
    }
    prev_links = pass.links;
    commit_layer(scratch, f, qid, std::move(pass), report);
    report.joined_layers.push_back(f);
  }

  engine_.absorb_episode(scratch, qid);
  report.id = qid;
  report.episode = scratch.episode_snapshot();
  return report;
}

SearchResult Hierarchy::search(PointView q) const {
  if (data_.empty()) throw InputError("search on an empty hierarchy");
  if (q.size() != data_.dim())
    throw InputError("search: point dimension does not match the dataset");

  const std::size_t L = layers_.size();
  thread_local QueryScratch scratch;
  scratch.begin(q, data_.size(), L);

  std::vector<IdDist> prev;
  for (std::size_t f = 0; f < L; ++f) {
    std::vector<PointId> parents =
        range_members(scratch, f == 0 ? 0 : f - 1, f == 0 ? radii_[0] : radii_[f - 1],
                      Stage::S1);
    LayerPass pass = localize_layer(scratch, f, 0.0, std::move(parents),
                                    f == 0 ? nullptr : &prev, false, kInvalidPoint);
    if (scratch.zero_hit() != kInvalidPoint)
      throw DuplicatePointError(scratch.zero_hit(),
                                "query duplicates member " + std::to_string(scratch.zero_hit()));
    prev = std::move(pass.links);
  }

  SearchResult res;
  res.neighbors.reserve(prev.size());
  for (auto [id, d] : prev) res.neighbors.push_back(id);
  std::sort(res.neighbors.begin(), res.neighbors.end());
  res.episode = scratch.episode_snapshot();
  return res;
}

// ------------------------------------------------------------------ reporting

UndirectedGraph Hierarchy::layer_graph(std::size_t l) const {
  UndirectedGraph g(data_.size());
  for (PointId id : layers_[l].members) {
    for (auto [nb, d] : entry(l, id).neighbors)
      if (id < nb) g.add_edge(id, nb);
  }
  g.finalize();
  return g;
}

ValidationReport Hierarchy::validate(std::size_t audit_cap) const {
  ValidationReport rep;
  auto flag = [&rep](const std::string& s) { rep.violations.push_back(s); };
  const Metric& m = *metric_;
  const std::size_t L = layers_.size();

  auto dist = [&](PointId a, PointId b) { return m(data_.point(a), data_.point(b)); };

  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = layers_[l];
    if (layer.members.size() != layer.entries.size())
      flag("layer " + std::to_string(l) + ": member list and entry map disagree");
    for (PointId id : layer.members) {
      const PivotEntry& e = entry(l, id);
      ++rep.checks;
      if (e.radius != radii_[l]) flag("entry radius mismatch at layer " + std::to_string(l));

      // nesting: a pivot occupies every finer layer as well
      if (l + 1 < L && !layers_[l + 1].contains(id))
        flag("nesting broken: " + std::to_string(id) + " in layer " + std::to_string(l) +
             " but not below");

      // coverage
      if (l > 0) {
        if (e.parents.empty())
          flag("no parent for " + std::to_string(id) + " at layer " + std::to_string(l));
        for (auto [p, d] : e.parents) {
          if (!layers_[l - 1].contains(p)) {
            flag("parent not in layer above");
            continue;
          }
          double dd = dist(p, id);
          if (dd != d) flag("stored parent distance differs for " + std::to_string(id));
          if (dd > radii_[l - 1] - radii_[l])
            flag("coverage violated for " + std::to_string(id) + " at layer " +
                 std::to_string(l));
        }
      }

      // children bookkeeping and exact max distance
      double maxc = 0.0;
      for (auto [ch, d] : e.children) {
        double dd = dist(id, ch);
        if (dd != d) flag("stored child distance differs for " + std::to_string(id));
        maxc = std::max(maxc, d);
      }
      if (maxc != e.max_child_dist)
        flag("max_child_dist stale for " + std::to_string(id) + " at layer " +
             std::to_string(l));

      // adjacency symmetry and stored lengths
      for (auto [nb, d] : e.neighbors) {
        if (!layer.contains(nb)) {
          flag("neighbor outside layer");
          continue;
        }
        if (!entry(l, nb).has_neighbor(id)) flag("asymmetric adjacency");
        if (dist(id, nb) != d) flag("stored edge length differs");
      }

      // conservative threat bounds
      double true_link = -kInf;
      for (auto [nb, d] : e.neighbors)
        true_link = std::max(true_link, lune_bound(d, e.radius, entry(l, nb).radius));
      if (true_link > e.link_threat) flag("link_threat below true value");
      if (l > 0) {
        double true_cross = -kInf;
        for (auto [p, d] : e.coarse_neighbors)
          true_cross = std::max(true_cross, lune_bound(d, e.radius, radii_[l - 1]));
        if (true_cross > e.cross_threat) flag("cross_threat below true value");
        for (auto [p, d] : e.coarse_neighbors)
          if (dist(id, p) != d) flag("stored coarse distance differs");
      }
    }
  }

  // chained subtree bounds: audit against a direct descendant walk
  for (std::size_t l = 0; l + 1 < L; ++l) {
    for (PointId id : layers_[l].members) {
      const PivotEntry& e = entry(l, id);
      std::vector<PointId> frontier{id};
      for (std::size_t t = l + 1; t < L; ++t) {
        std::vector<PointId> next;
        for (PointId a : frontier)
          for (auto [ch, d] : entry(t - 1, a).children) next.push_back(ch);
        sort_unique(next);
        frontier = next;
        ++rep.checks;
        double span = bound_value(e, BoundFamily::Span, l, t);
        double lt = bound_value(e, BoundFamily::LinkThreat, l, t);
        double ct = bound_value(e, BoundFamily::CrossThreat, l, t);
        for (PointId w : frontier) {
          double dw = dist(id, w);
          if (dw > span) flag("subtree_span below true descendant distance");
          const PivotEntry& we = entry(t, w);
          double wl = -kInf;
          for (auto [nb, d] : we.neighbors)
            wl = std::max(wl, lune_bound(d, we.radius, entry(t, nb).radius));
          if (wl > -kInf && wl + dw > lt + prune_guard(wl, dw))
            flag("subtree_link_threat below true value");
          double wc = -kInf;
          for (auto [p, d] : we.coarse_neighbors)
            wc = std::max(wc, lune_bound(d, we.radius, radii_[t - 1]));
          if (wc > -kInf && wc + dw > ct + prune_guard(wc, dw))
            flag("subtree_cross_threat below true value");
        }
      }
    }
  }

  // stored cross adjacency must cover the true adjacency (pairs with no
  // witness in the coarse layer)
  for (std::size_t f = 1; f < L; ++f) {
    const Layer& fine = layers_[f];
    const Layer& coarse = layers_[f - 1];
    if (fine.size() > audit_cap || coarse.size() > audit_cap) continue;
    for (PointId x : fine.members) {
      for (PointId p : coarse.members) {
        if (p == x) continue;
        double dxp = dist(x, p);
        double tx = lune_bound(dxp, radii_[f], radii_[f - 1]);
        double tp = lune_bound(dxp, radii_[f - 1], radii_[f]);
        bool witness = false;
        for (PointId w : coarse.members) {
          if (w == x || w == p) continue;
          if (dist(w, x) < tx && dist(w, p) < tp) {
            witness = true;
            break;
          }
        }
        ++rep.checks;
        if (!witness && !entry(f, x).has_coarse(p))
          flag("stored coarse adjacency misses a live pair at layer " + std::to_string(f));
      }
    }
  }

  // per-layer graphs against the brute-force oracle
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = layers_[l];
    if (layer.size() > audit_cap) continue;
    std::vector<PointId> ids = layer.members;
    std::sort(ids.begin(), ids.end());
    Dataset sub(data_.dim() == 0 ? 1 : data_.dim());
    if (data_.empty()) continue;
    for (PointId id : ids) sub.add(data_.point(id));
    UndirectedGraph oracle =
        brute_grng(sub, std::vector<double>(ids.size(), radii_[l]), m, nullptr, nullptr);
    UndirectedGraph mine(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (auto [nb, d] : entry(l, ids[i]).neighbors) {
        auto it = std::lower_bound(ids.begin(), ids.end(), nb);
        std::size_t j = static_cast<std::size_t>(it - ids.begin());
        if (i < j) mine.add_edge(static_cast<PointId>(i), static_cast<PointId>(j));
      }
    }
    mine.finalize();
    ++rep.checks;
    auto diff = mine.compare(oracle);
    if (!diff.identical())
      flag("layer " + std::to_string(l) + " graph differs from oracle: +" +
           std::to_string(diff.extra.size()) + "/-" + std::to_string(diff.missing.size()));
  }

  return rep;
}

std::pair<std::unique_ptr<Hierarchy>, BuildReport> build_hierarchy(
    const Dataset& data, std::shared_ptr<const Metric> metric, const HierarchyConfig& config) {
  std::vector<double> radii = config.resolve_radii(data, *metric);
  auto h = std::make_unique<Hierarchy>(metric, radii, config);
  BuildReport rep;
  for (PointId id = 0; id < data.size(); ++id) {
    InsertReport r = h->insert(data.point(id));
    if (r.accepted)
      ++rep.inserted;
    else
      ++rep.rejected_duplicates;
  }
  for (std::size_t l = 0; l < h->layer_count(); ++l) rep.layer_sizes.push_back(h->layer(l).size());
  rep.construction = h->stats().snapshot();
  return {std::move(h), rep};
}

}  // namespace grng

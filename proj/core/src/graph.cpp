#include "grng/graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

namespace grng {

void UndirectedGraph::add_edge(PointId u, PointId v) {
  if (u == v) throw InputError("self-loops are not allowed");
  if (u >= n_ || v >= n_) throw InputError("edge endpoint out of range");
  if (u > v) std::swap(u, v);
  edges_.emplace_back(u, v);
  finalized_ = false;
}

void UndirectedGraph::finalize() {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  finalized_ = true;
}

bool UndirectedGraph::has_edge(PointId u, PointId v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
}

std::vector<std::vector<PointId>> UndirectedGraph::adjacency() const {
  std::vector<std::vector<PointId>> adj(n_);
  for (auto [u, v] : edges_) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

std::vector<std::size_t> UndirectedGraph::degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  for (auto [u, v] : edges_) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

double UndirectedGraph::average_degree() const {
  if (n_ == 0) return 0.0;
  return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_);
}

std::map<std::size_t, std::size_t> UndirectedGraph::degree_histogram() const {
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t d : degrees()) ++hist[d];
  return hist;
}

bool UndirectedGraph::connected() const {
  if (n_ <= 1) return true;
  std::vector<PointId> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](PointId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = n_;
  for (auto [u, v] : edges_) {
    PointId ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[ru] = rv;
      --components;
    }
  }
  return components == 1;
}

UndirectedGraph::Diff UndirectedGraph::compare(const UndirectedGraph& other) const {
  Diff d;
  std::set_difference(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                      std::back_inserter(d.extra));
  std::set_difference(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end(),
                      std::back_inserter(d.missing));
  return d;
}

void UndirectedGraph::write_edge_list(std::ostream& os) const {
  for (auto [u, v] : edges_) os << u << ' ' << v << '\n';
}

UndirectedGraph UndirectedGraph::read_edge_list(std::istream& is, std::size_t n) {
  UndirectedGraph g(n);
  PointId u, v;
  while (is >> u >> v) g.add_edge(u, v);
  g.finalize();
  return g;
}

}  // namespace grng

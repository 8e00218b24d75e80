#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "grng/common.hpp"

namespace grng {

using Edge = std::pair<PointId, PointId>;  // canonical: first < second

/// Canonical undirected edge set over nodes 0..n-1. Edges are stored sorted
/// with u < v so graphs compare as plain sets.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t n) : n_(n) {}

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  void add_edge(PointId u, PointId v);
  bool has_edge(PointId u, PointId v) const;

  /// Must be called after the last add_edge and before comparisons/queries.
  void finalize();

  const std::vector<Edge>& edges() const { return edges_; }

  std::vector<std::vector<PointId>> adjacency() const;
  std::vector<std::size_t> degrees() const;
  double average_degree() const;
  std::map<std::size_t, std::size_t> degree_histogram() const;
  bool connected() const;

  struct Diff {
    std::vector<Edge> extra;    // present here, absent in other
    std::vector<Edge> missing;  // absent here, present in other
    bool identical() const { return extra.empty() && missing.empty(); }
  };
  Diff compare(const UndirectedGraph& other) const;

  bool operator==(const UndirectedGraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

  /// One "u v" pair per line, u < v, lexicographically sorted.
  void write_edge_list(std::ostream& os) const;
  static UndirectedGraph read_edge_list(std::istream& is, std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  bool finalized_ = true;
};

}  // namespace grng

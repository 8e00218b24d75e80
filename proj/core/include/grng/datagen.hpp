#pragma once

#include <cstdint>
#include <string>

#include "grng/dataset.hpp"

namespace grng {

/// Synthetic dataset description. Identical spec + seed always produces the
/// identical dataset. Points live in the cube [-1, 1]^dim.
struct GenSpec {
  enum class Kind { UniformCube, GaussianClusters };

  Kind kind = Kind::UniformCube;
  std::size_t n = 0;
  std::size_t dim = 2;
  std::uint64_t seed = 1;

  // Cluster parameters. The spread is the per-axis standard deviation;
  // defaults are 10 clusters, sigma 2% of the cube side and 1% outliers.
  std::size_t clusters = 10;
  double sigma = 0.04;
  double outlier_fraction = 0.01;

  static Kind kind_from_name(const std::string& name);
  std::string kind_name() const;
};

/// Draws the dataset. Exact duplicates are re-drawn so the output always
/// satisfies the identity axiom point-wise.
Dataset generate(const GenSpec& spec);

}  // namespace grng

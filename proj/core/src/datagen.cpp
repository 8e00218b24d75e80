#include "grng/datagen.hpp"

#include <cstring>
#include <random>
#include <unordered_set>

namespace grng {

GenSpec::Kind GenSpec::kind_from_name(const std::string& name) {
  if (name == "uniform" || name == "uniform-cube") return Kind::UniformCube;
  if (name == "clusters" || name == "gaussian-clusters") return Kind::GaussianClusters;
  throw InputError("unknown generator kind '" + name + "'");
}

std::string GenSpec::kind_name() const {
  return kind == Kind::UniformCube ? "uniform-cube" : "gaussian-clusters";
}

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<double>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (double x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof(bits));
      h ^= bits;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

Dataset generate(const GenSpec& spec) {
  if (spec.dim == 0) throw InputError("generate: dim must be >= 1");
  if (spec.kind == GenSpec::Kind::GaussianClusters && spec.clusters == 0)
    throw InputError("generate: cluster count must be >= 1");

  Dataset data(spec.dim);
  if (spec.n == 0) return Dataset{};

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> cube(-1.0, 1.0);

  std::vector<std::vector<double>> centers;
  if (spec.kind == GenSpec::Kind::GaussianClusters) {
    std::unordered_set<std::vector<double>, VecHash> seen;
    while (centers.size() < spec.clusters) {
      std::vector<double> c(spec.dim);
      for (double& x : c) x = cube(rng);
      if (seen.insert(c).second) centers.push_back(std::move(c));
    }
  }

  std::normal_distribution<double> noise(0.0, spec.sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_center(0, spec.clusters ? spec.clusters - 1 : 0);

  std::unordered_set<std::vector<double>, VecHash> used;
  used.reserve(spec.n);
  std::vector<double> p(spec.dim);
  for (std::size_t i = 0; i < spec.n;) {
    if (spec.kind == GenSpec::Kind::UniformCube) {
      for (double& x : p) x = cube(rng);
    } else if (unit(rng) < spec.outlier_fraction) {
      for (double& x : p) x = cube(rng);
    } else {
      const auto& c = centers[pick_center(rng)];
      for (std::size_t k = 0; k < spec.dim; ++k) p[k] = c[k] + noise(rng);
    }
    if (!used.insert(p).second) continue;  // duplicate: re-draw
    data.add(p);
    ++i;
  }
  return data;
}

}  // namespace grng

#include "grng/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace grng {

double L2Metric::operator()(PointView a, PointView b) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double L1Metric::operator()(PointView a, PointView b) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

std::shared_ptr<const Metric> make_metric(const std::string& name) {
  if (name == "l2") return std::make_shared<L2Metric>();
  if (name == "l1") return std::make_shared<L1Metric>();
  throw InputError("unknown metric '" + name + "' (expected l2 or l1)");
}

std::string AxiomViolation::describe() const {
  switch (kind) {
    case Kind::Identity:
      return "identity violated at (" + std::to_string(a) + "," + std::to_string(b) +
             "): d=" + std::to_string(detail);
    case Kind::Symmetry:
      return "symmetry violated at (" + std::to_string(a) + "," + std::to_string(b) +
             "): |d(a,b)-d(b,a)|=" + std::to_string(detail);
    case Kind::Triangle:
      return "triangle inequality violated at (" + std::to_string(a) + "," +
             std::to_string(b) + "," + std::to_string(c) + "): excess=" + std::to_string(detail);
  }
  return "?";
}

AxiomReport verify_metric_axioms(const Metric& metric, const Dataset& data,
                                 std::size_t samples, std::uint64_t seed) {
  AxiomReport report;
  if (data.size() < 2) return report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(data.size() - 1));

  for (std::size_t s = 0; s < samples; ++s) {
    PointId a = pick(rng), b = pick(rng), c = pick(rng);
    PointView pa = data.point(a), pb = data.point(b), pc = data.point(c);
    ++report.samples_checked;

    double dab = metric(pa, pb);
    double dba = metric(pb, pa);
    double daa = metric(pa, pa);

    if (daa != 0.0) {
      report.violations.push_back({AxiomViolation::Kind::Identity, a, a, kInvalidPoint, daa});
    }
    bool same = std::equal(pa.begin(), pa.end(), pb.begin());
    if (!same && dab <= 0.0) {
      report.violations.push_back({AxiomViolation::Kind::Identity, a, b, kInvalidPoint, dab});
    }
    if (dab != dba) {
      report.violations.push_back(
          {AxiomViolation::Kind::Symmetry, a, b, kInvalidPoint, std::abs(dab - dba)});
    }
    double dac = metric(pa, pc), dcb = metric(pc, pb);
    // Allow rounding noise: a genuine violation overshoots by a relative margin.
    double excess = dab - (dac + dcb);
    if (excess > 1e-9 * (dab + dac + dcb)) {
      report.violations.push_back({AxiomViolation::Kind::Triangle, a, b, c, excess});
    }
  }
  return report;
}

}  // namespace grng

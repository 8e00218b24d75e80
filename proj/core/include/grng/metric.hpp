#pragma once

#include <memory>
#include <string>
#include <vector>

#include "grng/common.hpp"
#include "grng/dataset.hpp"

namespace grng {

/// A metric over coordinate vectors. Implementations must satisfy identity,
/// symmetry and the triangle inequality; verify_metric_axioms below spot
/// checks those on sampled tuples.
class Metric {
 public:
  virtual ~Metric() = default;
  virtual double operator()(PointView a, PointView b) const = 0;
  virtual std::string name() const = 0;
};

class L2Metric final : public Metric {
 public:
  double operator()(PointView a, PointView b) const override;
  std::string name() const override { return "l2"; }
};

class L1Metric final : public Metric {
 public:
  double operator()(PointView a, PointView b) const override;
  std::string name() const override { return "l1"; }
};

/// Factory by name ("l2", "l1"); throws InputError for unknown names.
std::shared_ptr<const Metric> make_metric(const std::string& name);

struct AxiomViolation {
  enum class Kind { Identity, Symmetry, Triangle };
  Kind kind;
  PointId a, b, c;  // c unused for identity/symmetry
  double detail;    // offending value (d(a,a), |d(a,b)-d(b,a)|, excess over the bound)
  std::string describe() const;
};

struct AxiomReport {
  std::size_t samples_checked = 0;
  std::vector<AxiomViolation> violations;
  bool clean() const { return violations.empty(); }
};

/// Samples `samples` random tuples from the dataset and checks the metric
/// axioms on them. Identity is checked both ways: d(x,x) == 0 and
/// d(x,y) > 0 for points with distinct coordinates.
AxiomReport verify_metric_axioms(const Metric& metric, const Dataset& data,
                                 std::size_t samples, std::uint64_t seed = 1);

}  // namespace grng

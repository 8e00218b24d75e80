#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace grng {

using PointId = std::uint32_t;
using PointView = std::span<const double>;

inline constexpr PointId kInvalidPoint = std::numeric_limits<PointId>::max();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown for malformed inputs (bad files, dimension mismatches, invalid configs).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a point equal to an existing one is inserted or searched.
class DuplicatePointError : public std::runtime_error {
 public:
  DuplicatePointError(PointId existing, const std::string& what)
      : std::runtime_error(what), existing_id(existing) {}
  PointId existing_id;
};

/// One-sided shrunken-lune radius around `a` for the pair (a, b) at distance
/// d_ab with radii (r_a, r_b). A third point w can only threaten the pair's
/// link if d(w, a) < lune_bound(d_ab, r_a, r_b) and symmetrically for b.
/// At zero radii this degenerates to the plain lune radius d_ab.
inline double lune_bound(double d_ab, double r_a, double r_b) {
  return d_ab - (2.0 * r_a + r_b);
}

/// Relative slack used when comparing against chained (triangle-summed)
/// bounds. Pruning tests must absorb float rounding in the chain; decision
/// tests (the lune comparisons themselves) stay exact.
inline constexpr double kBoundSlack = 1e-9;

/// Conservatively enlarge an upper bound built from sums of distances.
inline double inflate_bound(double v) {
  return v + (v > 0 ? v * kBoundSlack : 0.0);
}

/// True when `a_minus_b` safely clears `threshold` even after rounding;
/// used only to skip work, never to decide a link.
inline double prune_guard(double x, double y) {
  double m = (x < 0 ? -x : x) + (y < 0 ? -y : y);
  return m * kBoundSlack;
}

}  // namespace grng

#include "grng/dataset.hpp"

#include <cstring>
#include <unordered_map>

namespace grng {

PointId Dataset::add(PointView coords) {
  if (dim_ == 0) {
    if (coords.empty()) throw InputError("cannot infer dimension from an empty point");
    dim_ = coords.size();
  }
  if (coords.size() != dim_) {
    throw InputError("point dimension " + std::to_string(coords.size()) +
                     " does not match dataset dimension " + std::to_string(dim_));
  }
  coords_.insert(coords_.end(), coords.begin(), coords.end());
  return static_cast<PointId>(size() - 1);
}

namespace {

struct CoordsHash {
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

Dataset deduplicate(const Dataset& in, DedupReport* report) {
  Dataset out(in.dim() == 0 ? 1 : in.dim());
  if (in.empty()) return Dataset{};
  std::unordered_map<std::vector<double>, PointId, CoordsHash> seen;
  seen.reserve(in.size());
  for (PointId id = 0; id < in.size(); ++id) {
    PointView p = in.point(id);
    std::vector<double> key(p.begin(), p.end());
    auto [it, inserted] = seen.try_emplace(std::move(key), static_cast<PointId>(out.size()));
    if (inserted) {
      out.add(p);
    } else if (report) {
      report->dropped.emplace_back(it->second, id);
    }
  }
  return out;
}

}  // namespace grng

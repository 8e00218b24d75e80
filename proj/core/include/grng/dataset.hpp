#pragma once

#include <cstddef>
#include <vector>

#include "grng/common.hpp"

namespace grng {

/// A dense collection of same-dimension real vectors. Ids are contiguous
/// from 0 in insertion order.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw InputError("dataset dimension must be >= 1");
  }

  PointId add(PointView coords);

  PointView point(PointId id) const {
    return PointView(coords_.data() + static_cast<std::size_t>(id) * dim_, dim_);
  }

  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return coords_.empty(); }

  const std::vector<double>& raw() const { return coords_; }

  bool operator==(const Dataset& other) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

struct DedupReport {
  // (kept id, dropped id) pairs, in dropped-id order.
  std::vector<std::pair<PointId, PointId>> dropped;
  bool clean() const { return dropped.empty(); }
};

/// Remove points whose coordinates exactly equal an earlier point.
/// Exact equality is the right notion here: for the shipped metrics
/// d(x, y) = 0 iff the coordinate vectors match bit for bit.
Dataset deduplicate(const Dataset& in, DedupReport* report = nullptr);

}  // namespace grng

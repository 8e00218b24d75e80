#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace grng {

/// Where a distance evaluation was charged. S1..S7 follow the insertion
/// pipeline: S1 locates parents/coverers (the per-layer localization sweep),
/// S2 validates the candidate coarse adjacency of the query, S3 collects and
/// filters fine candidates, S4 tests coarse pivots as lune occupiers, S5
/// tests nearby fine items, S6 is the exhaustive verification, S7 checks
/// existing links for invalidation. ParentScan covers the bookkeeping that
/// keeps cross-layer adjacency sets current; Oracle is the brute-force layer.
enum class Stage : std::uint8_t {
  S1 = 0, S2, S3, S4, S5, S6, S7, ParentScan, Oracle,
};

inline constexpr std::size_t kStageCount = 9;

const char* stage_name(Stage s);

/// Per-(layer, stage) distance-evaluation counters. Increments are atomic so
/// concurrent search episodes never lose updates; snapshots are plain values.
class StageStats {
 public:
  explicit StageStats(std::size_t layers = 1) : cells_(layers) {}

  StageStats(const StageStats&) = delete;
  StageStats& operator=(const StageStats&) = delete;

  void resize_layers(std::size_t layers);
  std::size_t layers() const { return cells_.size(); }

  void add(std::size_t layer, Stage stage, std::uint64_t n = 1) {
    cells_[layer][static_cast<std::size_t>(stage)].fetch_add(n, std::memory_order_relaxed);
  }

  std::uint64_t cell(std::size_t layer, Stage stage) const {
    return cells_[layer][static_cast<std::size_t>(stage)].load(std::memory_order_relaxed);
  }

  std::uint64_t total() const;

  struct Snapshot {
    std::vector<std::array<std::uint64_t, kStageCount>> cells;
    std::uint64_t cell(std::size_t layer, Stage stage) const {
      return cells[layer][static_cast<std::size_t>(stage)];
    }
    std::uint64_t layer_total(std::size_t layer) const;
    std::uint64_t stage_total(Stage stage) const;
    std::uint64_t total() const;
    /// this - earlier, cellwise. Layers must match or grow.
    Snapshot minus(const Snapshot& earlier) const;
  };

  Snapshot snapshot() const;

 private:
  struct Row : std::array<std::atomic<std::uint64_t>, kStageCount> {
    Row() { for (auto& c : *this) c.store(0, std::memory_order_relaxed); }
  };
  std::deque<Row> cells_;  // atomics are immovable; deque growth never relocates
};

}  // namespace grng

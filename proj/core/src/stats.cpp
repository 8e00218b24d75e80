#include "grng/stats.hpp"

#include <stdexcept>

namespace grng {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::S1: return "S1";
    case Stage::S2: return "S2";
    case Stage::S3: return "S3";
    case Stage::S4: return "S4";
    case Stage::S5: return "S5";
    case Stage::S6: return "S6";
    case Stage::S7: return "S7";
    case Stage::ParentScan: return "parent-scan";
    case Stage::Oracle: return "oracle";
  }
  return "?";
}

void StageStats::resize_layers(std::size_t layers) {
  if (layers < cells_.size()) throw std::logic_error("StageStats cannot shrink");
  cells_.resize(layers);
}

std::uint64_t StageStats::total() const {
  std::uint64_t t = 0;
  for (const auto& row : cells_)
    for (const auto& c : row) t += c.load(std::memory_order_relaxed);
  return t;
}

StageStats::Snapshot StageStats::snapshot() const {
  Snapshot s;
  s.cells.resize(cells_.size());
  for (std::size_t l = 0; l < cells_.size(); ++l)
    for (std::size_t k = 0; k < kStageCount; ++k)
      s.cells[l][k] = cells_[l][k].load(std::memory_order_relaxed);
  return s;
}

std::uint64_t StageStats::Snapshot::layer_total(std::size_t layer) const {
  std::uint64_t t = 0;
  for (auto c : cells[layer]) t += c;
  return t;
}

std::uint64_t StageStats::Snapshot::stage_total(Stage stage) const {
  std::uint64_t t = 0;
  for (const auto& row : cells) t += row[static_cast<std::size_t>(stage)];
  return t;
}

std::uint64_t StageStats::Snapshot::total() const {
  std::uint64_t t = 0;
  for (std::size_t l = 0; l < cells.size(); ++l) t += layer_total(l);
  return t;
}

StageStats::Snapshot StageStats::Snapshot::minus(const Snapshot& earlier) const {
  Snapshot out = *this;
  for (std::size_t l = 0; l < earlier.cells.size(); ++l)
    for (std::size_t k = 0; k < kStageCount; ++k) out.cells[l][k] -= earlier.cells[l][k];
  return out;
}

}  // namespace grng

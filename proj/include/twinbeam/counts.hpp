#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twinbeam/errors.hpp"

namespace twinbeam {

/// Histogram of per-pulse coincidence outcomes: cell (k, l) counts pulses
/// with k signal and l idler detections. total_pulses may exceed the sum of
/// the cells when a file stores only nonzero cells; the deficit is vacuum
/// (0, 0) pulses by convention.
class JointCounts {
 public:
  JointCounts() : JointCounts(0, 0) {}

  JointCounts(int k_max, int l_max)
      : k_max_(k_max), l_max_(l_max),
        cells_(static_cast<std::size_t>(k_max + 1) *
                   static_cast<std::size_t>(l_max + 1),
               0) {
    if (k_max < 0 || l_max < 0)
      throw InvalidArgument("count matrix extents must be >= 0");
  }

  int k_max() const { return k_max_; }
  int l_max() const { return l_max_; }

  std::uint64_t at(int k, int l) const {
    if (k < 0 || k > k_max_ || l < 0 || l > l_max_) return 0;
    return cells_[index(k, l)];
  }

  void set(int k, int l, std::uint64_t count) {
    check_cell(k, l);
    cells_[index(k, l)] = count;
  }

  void add(int k, int l, std::uint64_t count = 1) {
    check_cell(k, l);
    cells_[index(k, l)] += count;
  }

  /// Sum of all recorded cells.
  std::uint64_t total_events() const {
    std::uint64_t t = 0;
    for (std::uint64_t c : cells_) t += c;
    return t;
  }

  std::uint64_t total_pulses() const { return total_pulses_; }

  void set_total_pulses(std::uint64_t pulses) { total_pulses_ = pulses; }

  bool operator==(const JointCounts&) const = default;

  /// Cell-wise sum; extents and pulse totals add up, so merging per-worker
  /// histograms of one run reproduces the single-threaded result.
  void merge(const JointCounts& other) {
    if (other.k_max_ != k_max_ || other.l_max_ != l_max_)
      throw InvalidArgument("cannot merge count matrices of different extents");
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    total_pulses_ += other.total_pulses_;
  }

 private:
  std::size_t index(int k, int l) const {
    return static_cast<std::size_t>(k) * (l_max_ + 1) + l;
  }

  void check_cell(int k, int l) const {
    if (k < 0 || k > k_max_ || l < 0 || l > l_max_)
      throw InvalidArgument("count cell outside matrix extents");
  }

  int k_max_;
  int l_max_;
  std::vector<std::uint64_t> cells_;
  std::uint64_t total_pulses_ = 0;
};

}  // namespace twinbeam

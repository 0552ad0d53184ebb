#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "twinbeam/channels.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/herald.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/parallel.hpp"

namespace twinbeam {

/// Figure-of-merit evaluated over the (efficiency, mean photon number)
/// plane. Heralding is always on outcome 1 of the idler arm; the signal arm
/// stays lossless (the heralded moments would not change anyway).
enum class SweepQuantity {
  heralded_g2_pnr,
  heralded_g2_bucket,
  parity_exact,
  parity_truncated,
  prep_probability,
  mean_heralded,
};

struct SweepGrid {
  std::vector<double> eta_axis;
  std::vector<double> mean_axis;
  SweepQuantity quantity = SweepQuantity::heralded_g2_pnr;
  ModeRegime regime = ModeRegime::multimode;
  /// Series order for parity_truncated; ignored by the other quantities.
  int truncation_order = 2;
  double tail_tolerance = kDefaultTailTolerance;
  unsigned workers = 0;
};

inline std::vector<double> lin_spaced(double lo, double hi, std::size_t n) {
  if (n < 2) throw InvalidArgument("an axis needs >= 2 points");
  if (!(lo < hi)) throw InvalidArgument("axis bounds must be increasing");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = hi;
  return v;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0)) throw InvalidArgument("log axis bounds must be positive");
  std::vector<double> v = lin_spaced(std::log(lo), std::log(hi), n);
  for (double& x : v) x = std::exp(x);
  v.front() = lo;
  v.back() = hi;
  return v;
}

/// 50x50 default plane: linear efficiency in [0.01, 1], log-spaced mean
/// photon number in [0.01, 3].
inline SweepGrid default_grid(SweepQuantity quantity, ModeRegime regime) {
  SweepGrid grid;
  grid.eta_axis = lin_spaced(0.01, 1.0, 50);
  grid.mean_axis = log_spaced(0.01, 3.0, 50);
  grid.quantity = quantity;
  grid.regime = regime;
  return grid;
}

/// Flattened grid values, efficiency as the outer loop; row i*|mean|+j holds
/// (eta_axis[i], mean_axis[j]).
struct SweepResult {
  std::vector<double> eta;
  std::vector<double> mean_n;
  std::vector<double> value;
};

namespace detail {

inline void check_axis(const std::vector<double>& axis, double lo, double hi,
                       const char* what) {
  if (axis.empty()) throw InvalidArgument(std::string(what) + " axis is empty");
  double prev = -1.0;
  for (double v : axis) {
    if (!(v > lo && v <= hi))
      throw InvalidArgument(std::string(what) + " axis value out of range");
    if (!(v > prev))
      throw InvalidArgument(std::string(what) + " axis must be strictly increasing");
    prev = v;
  }
}

inline double sweep_cell(const SweepGrid& grid, double eta, double mean_n) {
  const PdcSource source{grid.regime, mean_n};
  if (grid.quantity == SweepQuantity::prep_probability)
    return preparation_probability(source, eta);
  const JointDistribution joint = pdc_joint_auto(source, grid.tail_tolerance);
  HeraldSpec spec;
  spec.detector.kind = grid.quantity == SweepQuantity::heralded_g2_bucket
                           ? DetectorKind::bucket
                           : DetectorKind::pnr;
  spec.detector.efficiency = eta;
  const PhotonDistribution h = heralded_state(joint, spec);
  switch (grid.quantity) {
    case SweepQuantity::heralded_g2_pnr:
    case SweepQuantity::heralded_g2_bucket:
      return factorial_moment(h, 2);
    case SweepQuantity::parity_exact:
      return parity(h);
    case SweepQuantity::parity_truncated:
      return parity_from_moments(moment_set(h, grid.truncation_order),
                                 grid.truncation_order);
    case SweepQuantity::mean_heralded:
      return mean_photon(h);
    default:
      throw InvalidArgument("unknown sweep quantity");
  }
}

}  // namespace detail

/// Evaluates the grid cell by cell (parallel, deterministic ordering by grid
/// index).
inline SweepResult evaluate_sweep(const SweepGrid& grid) {
  detail::check_axis(grid.eta_axis, 0.0, 1.0, "efficiency");
  detail::check_axis(grid.mean_axis, 0.0,
                     std::numeric_limits<double>::infinity(), "mean photon");
  if (grid.quantity == SweepQuantity::parity_truncated &&
      grid.truncation_order < 1)
    throw InvalidArgument("truncation order must be >= 1");
  const std::size_t rows = grid.eta_axis.size();
  const std::size_t cols = grid.mean_axis.size();
  SweepResult result;
  result.eta.resize(rows * cols);
  result.mean_n.resize(rows * cols);
  result.value.resize(rows * cols);
  parallel_chunks(rows * cols, grid.workers,
                  [&](std::size_t begin, std::size_t end, unsigned) {
                    for (std::size_t c = begin; c < end; ++c) {
                      const double eta = grid.eta_axis[c / cols];
                      const double mean_n = grid.mean_axis[c % cols];
                      result.eta[c] = eta;
                      result.mean_n[c] = mean_n;
                      result.value[c] = detail::sweep_cell(grid, eta, mean_n);
                    }
                  });
  return result;
}

}  // namespace twinbeam

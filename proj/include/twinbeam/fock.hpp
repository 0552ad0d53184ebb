#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "twinbeam/errors.hpp"

namespace twinbeam {

inline constexpr int kDefaultHardCutoff = 256;
inline constexpr double kDefaultTailTolerance = 1e-12;

/// Limiting photon-number weight laws of parametric down-conversion:
/// thermal for single-mode emission, Poissonian for highly multimode
/// emission.
enum class ModeRegime { single_mode, multimode };

enum class Arm { signal, idler };

inline Arm other_arm(Arm a) {
  return a == Arm::signal ? Arm::idler : Arm::signal;
}

namespace detail {

inline void check_probabilities(const std::vector<double>& p) {
  if (p.empty()) throw InvalidArgument("probability vector must not be empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("probabilities must be non-negative and finite");
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw InvalidArgument("probabilities must have a positive finite sum");
}

}  // namespace detail

/// Photon-number distribution p(0..n_max) of a single beam, renormalized to
/// unit sum on construction.
class PhotonDistribution {
 public:
  explicit PhotonDistribution(std::vector<double> probs)
      : probs_(std::move(probs)) {
    detail::check_probabilities(probs_);
    double sum = 0.0;
    for (double v : probs_) sum += v;
    for (double& v : probs_) v /= sum;
  }

  int n_max() const { return static_cast<int>(probs_.size()) - 1; }

  /// p(n); zero outside the truncated support.
  double p(int n) const {
    return (n >= 0 && n <= n_max()) ? probs_[static_cast<std::size_t>(n)] : 0.0;
  }

  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// Joint photon-number distribution P(k, l) over signal (k) and idler (l),
/// renormalized to unit sum on construction. Row-major storage.
class JointDistribution {
 public:
  JointDistribution(std::vector<double> probs, int k_max, int l_max)
      : probs_(std::move(probs)), k_max_(k_max), l_max_(l_max) {
    if (k_max_ < 0 || l_max_ < 0)
      throw InvalidArgument("joint distribution cutoffs must be >= 0");
    if (probs_.size() !=
        static_cast<std::size_t>(k_max_ + 1) * static_cast<std::size_t>(l_max_ + 1))
      throw InvalidArgument("joint probability matrix has the wrong size");
    detail::check_probabilities(probs_);
    double sum = 0.0;
    for (double v : probs_) sum += v;
    for (double& v : probs_) v /= sum;
  }

  int k_max() const { return k_max_; }
  int l_max() const { return l_max_; }

  double p(int k, int l) const {
    if (k < 0 || k > k_max_ || l < 0 || l > l_max_) return 0.0;
    return probs_[static_cast<std::size_t>(k) * (l_max_ + 1) + l];
  }

  const std::vector<double>& probs() const { return probs_; }

  PhotonDistribution marginal(Arm arm) const {
    if (arm == Arm::signal) {
      std::vector<double> m(static_cast<std::size_t>(k_max_) + 1, 0.0);
      for (int k = 0; k <= k_max_; ++k)
        for (int l = 0; l <= l_max_; ++l) m[k] += p(k, l);
      return PhotonDistribution(std::move(m));
    }
    std::vector<double> m(static_cast<std::size_t>(l_max_) + 1, 0.0);
    for (int l = 0; l <= l_max_; ++l)
      for (int k = 0; k <= k_max_; ++k) m[l] += p(k, l);
    return PhotonDistribution(std::move(m));
  }

 private:
  std::vector<double> probs_;
  int k_max_;
  int l_max_;
};

/// Twin-beam source emitting perfectly photon-number-correlated signal/idler
/// pairs with mean photon number mean_n per beam.
struct PdcSource {
  ModeRegime regime = ModeRegime::multimode;
  double mean_n = 0.0;
};

namespace detail {

inline void check_source(const PdcSource& s) {
  if (!(s.mean_n > 0.0) || !std::isfinite(s.mean_n))
    throw InvalidArgument("PDC mean photon number must be positive");
}

/// Weights |lambda_n|^2 for n = 0..n_max by forward recurrence (no
/// factorials, no overflow).
inline std::vector<double> raw_pdc_weights(const PdcSource& s, int n_max) {
  std::vector<double> w(static_cast<std::size_t>(n_max) + 1);
  if (s.regime == ModeRegime::single_mode) {
    const double q = s.mean_n / (1.0 + s.mean_n);
    w[0] = 1.0 / (1.0 + s.mean_n);
    for (int n = 0; n < n_max; ++n) w[n + 1] = w[n] * q;
  } else {
    w[0] = std::exp(-s.mean_n);
    for (int n = 0; n < n_max; ++n) w[n + 1] = w[n] * s.mean_n / (n + 1);
  }
  return w;
}

}  // namespace detail

/// Photon-number weights |lambda_n|^2 of the PDC emission for n = 0..n_max,
/// renormalized over the truncated support. Thermal law
/// mean^n / (1+mean)^(1+n) in the single-mode regime, Poissonian
/// e^-mean mean^n / n! in the multimode regime.
inline PhotonDistribution pdc_weights(const PdcSource& source, int n_max) {
  detail::check_source(source);
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  return PhotonDistribution(detail::raw_pdc_weights(source, n_max));
}

/// Joint statistics of the twin beams: P(k, l) = |lambda_k|^2 on the
/// diagonal and zero elsewhere (photon numbers in the two beams are
/// perfectly correlated).
inline JointDistribution pdc_joint(const PdcSource& source, int n_max) {
  detail::check_source(source);
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  const std::vector<double> w = detail::raw_pdc_weights(source, n_max);
  const std::size_t dim = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> probs(dim * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) probs[n * dim + n] = w[n];
  return JointDistribution(std::move(probs), n_max, n_max);
}

struct CutoffResult {
  int n_max = 0;
  /// The hard cap decided instead of the tail tolerance; the caller chooses
  /// whether a capped truncation is still acceptable.
  bool cap_hit = false;
};

/// Smallest n_max whose truncated tail mass stays below tail_tol, capped at
/// hard_cap.
inline CutoffResult auto_cutoff(const PdcSource& source,
                                double tail_tol = kDefaultTailTolerance,
                                int hard_cap = kDefaultHardCutoff) {
  detail::check_source(source);
  if (!(tail_tol > 0.0 && tail_tol < 1.0))
    throw InvalidArgument("tail_tol must be in (0, 1)");
  if (hard_cap < 0) throw InvalidArgument("hard_cap must be >= 0");
  const std::vector<double> w = detail::raw_pdc_weights(source, hard_cap);
  double total = 0.0;
  for (double v : w) total += v;
  // Tail beyond n, accumulated from the far end for accuracy near zero.
  double tail = std::max(0.0, 1.0 - total);
  if (tail >= tail_tol) return {hard_cap, true};
  for (int n = hard_cap; n > 0; --n) {
    tail += w[static_cast<std::size_t>(n)];
    if (tail >= tail_tol) return {n, false};
  }
  return {0, false};
}

/// Weights truncated at auto_cutoff(source, tail_tol); a capped cutoff is
/// accepted silently (use auto_cutoff directly to detect it).
inline PhotonDistribution pdc_weights_auto(
    const PdcSource& source, double tail_tol = kDefaultTailTolerance) {
  return pdc_weights(source, auto_cutoff(source, tail_tol).n_max);
}

inline JointDistribution pdc_joint_auto(
    const PdcSource& source, double tail_tol = kDefaultTailTolerance) {
  return pdc_joint(source, auto_cutoff(source, tail_tol).n_max);
}

/// Mean photon number sum_n n p(n).
inline double mean_photon(const PhotonDistribution& dist) {
  double m = 0.0;
  for (int n = 1; n <= dist.n_max(); ++n) m += static_cast<double>(n) * dist.p(n);
  return m;
}

}  // namespace twinbeam

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"

namespace twinbeam {

inline constexpr int kDefaultMaxMomentOrder = 8;

namespace detail {

inline void check_order(int m) {
  if (m < 1) throw InvalidArgument("moment order must be >= 1");
}

}  // namespace detail

/// Normalized factorial moment of order m,
/// g(m) = <n (n-1) ... (n-m+1)> / <n>^m. Insensitive to linear loss; g(2) is
/// the usual second-order correlation at zero delay.
inline double factorial_moment(const PhotonDistribution& dist, int m) {
  detail::check_order(m);
  const double mean = mean_photon(dist);
  if (!(mean > 0.0))
    throw ZeroMeanState("factorial moments are undefined for a vacuum state");
  double num = 0.0;
  for (int n = m; n <= dist.n_max(); ++n) {
    double ff = 1.0;
    for (int j = 0; j < m; ++j) ff *= static_cast<double>(n - j);
    num += ff * dist.p(n);
  }
  return num / std::pow(mean, m);
}

/// Normalized factorial moments g(1..max_order) of one distribution together
/// with its mean photon number.
class MomentSet {
 public:
  MomentSet(double mean, std::vector<double> g)
      : mean_(mean), g_(std::move(g)) {}

  double mean() const { return mean_; }
  int max_order() const { return static_cast<int>(g_.size()); }

  double order(int m) const {
    detail::check_order(m);
    if (m > max_order()) throw InvalidArgument("moment order above max_order");
    return g_[static_cast<std::size_t>(m) - 1];
  }

 private:
  double mean_;
  std::vector<double> g_;
};

inline MomentSet moment_set(const PhotonDistribution& dist,
                            int max_order = kDefaultMaxMomentOrder) {
  detail::check_order(max_order);
  const double mean = mean_photon(dist);
  if (!(mean > 0.0))
    throw ZeroMeanState("factorial moments are undefined for a vacuum state");
  std::vector<double> g(static_cast<std::size_t>(max_order), 0.0);
  g[0] = 1.0;
  for (int m = 2; m <= max_order; ++m) {
    double num = 0.0;
    for (int n = m; n <= dist.n_max(); ++n) {
      double ff = 1.0;
      for (int j = 0; j < m; ++j) ff *= static_cast<double>(n - j);
      num += ff * dist.p(n);
    }
    g[static_cast<std::size_t>(m) - 1] = num / std::pow(mean, m);
  }
  return MomentSet(mean, std::move(g));
}

/// Normalized joint factorial moment
/// g(m, r) = <k^(m) l^(r)> / (<k>^m <l>^r) with x^(j) the falling factorial.
/// g(1, 1) is the coincidence-to-accidental ratio of the twin beams.
inline double joint_moment(const JointDistribution& joint, int m, int r) {
  detail::check_order(m);
  detail::check_order(r);
  double mean_k = 0.0, mean_l = 0.0, num = 0.0;
  for (int k = 0; k <= joint.k_max(); ++k)
    for (int l = 0; l <= joint.l_max(); ++l) {
      const double p = joint.p(k, l);
      if (p == 0.0) continue;
      mean_k += k * p;
      mean_l += l * p;
      if (k >= m && l >= r) {
        double ff = 1.0;
        for (int j = 0; j < m; ++j) ff *= static_cast<double>(k - j);
        for (int j = 0; j < r; ++j) ff *= static_cast<double>(l - j);
        num += ff * p;
      }
    }
  if (!(mean_k > 0.0) || !(mean_l > 0.0))
    throw ZeroMeanState("joint moments are undefined when a beam is vacuum");
  return num / (std::pow(mean_k, m) * std::pow(mean_l, r));
}

/// Coincidence-to-accidental ratio <kl> / (<k> <l>) of the twin beams:
/// 2 + 1/mean for a single-mode source, 1 + 1/mean for a multimode one, and
/// invariant under loss on either beam.
inline double car(const JointDistribution& joint) {
  return joint_moment(joint, 1, 1);
}

namespace detail {

inline void check_mgf_argument(double mu) {
  if (!(mu >= 0.0 && mu <= 2.0) || !std::isfinite(mu))
    throw InvalidArgument("MGF argument must be in [0, 2]");
}

}  // namespace detail

/// Moment generating function M(mu) = sum_n (1 - mu)^n p(n) evaluated
/// directly from the distribution. M(1) is the vacuum probability and M(2)
/// the photon-number parity <(-1)^n>.
inline double mgf_exact(const PhotonDistribution& dist, double mu) {
  detail::check_mgf_argument(mu);
  double acc = 0.0;
  double pw = 1.0;
  for (int n = 0; n <= dist.n_max(); ++n) {
    acc += pw * dist.p(n);
    pw *= 1.0 - mu;
  }
  return acc;
}

/// MGF reconstructed from normalized factorial moments up to
/// truncation_order: M(mu) ~= sum_m g(m) (-mu <n>)^m / m!. This is the
/// finite-order estimate available when only low-order moments are measured.
inline double mgf_series(const MomentSet& moments, double mu,
                         int truncation_order) {
  detail::check_mgf_argument(mu);
  if (truncation_order < 0)
    throw InvalidArgument("truncation order must be >= 0");
  if (truncation_order > moments.max_order())
    throw InvalidArgument("truncation order above available moments");
  double acc = 1.0;
  double term = 1.0;
  for (int m = 1; m <= truncation_order; ++m) {
    term *= -mu * moments.mean() / static_cast<double>(m);
    acc += moments.order(m) * term;
  }
  return acc;
}

/// Partial sums of the moment expansion of M(mu) for orders 0..max_order,
/// exposing how the series closes in on the exact value order by order.
inline std::vector<double> mgf_partial_sums(const MomentSet& moments, double mu,
                                            int max_order) {
  detail::check_mgf_argument(mu);
  if (max_order < 0) throw InvalidArgument("max order must be >= 0");
  if (max_order > moments.max_order())
    throw InvalidArgument("max order above available moments");
  std::vector<double> sums(static_cast<std::size_t>(max_order) + 1);
  double acc = 1.0;
  double term = 1.0;
  sums[0] = acc;
  for (int m = 1; m <= max_order; ++m) {
    term *= -mu * moments.mean() / static_cast<double>(m);
    acc += moments.order(m) * term;
    sums[static_cast<std::size_t>(m)] = acc;
  }
  return sums;
}

/// Photon-number parity <(-1)^n> = M(2). Negative parity of a heralded state
/// witnesses its odd (single-photon) character.
inline double parity(const PhotonDistribution& dist) {
  return mgf_exact(dist, 2.0);
}

/// Parity estimated from moments up to truncation_order; order 2 gives
/// 1 - 2<n> + 2<n>^2 g(2).
inline double parity_from_moments(const MomentSet& moments,
                                  int truncation_order) {
  return mgf_series(moments, 2.0, truncation_order);
}

/// Sampled MGF curve. truncation_order < 0 marks an exact evaluation.
struct MgfCurve {
  std::vector<double> mu;
  std::vector<double> value;
  int truncation_order = -1;
};

inline MgfCurve mgf_curve_exact(const PhotonDistribution& dist,
                                std::size_t points = 21) {
  if (points < 2) throw InvalidArgument("an MGF curve needs >= 2 points");
  MgfCurve curve;
  curve.mu.resize(points);
  curve.value.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double mu = 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    curve.mu[i] = mu;
    curve.value[i] = mgf_exact(dist, mu);
  }
  return curve;
}

inline MgfCurve mgf_curve_series(const MomentSet& moments, int truncation_order,
                                 std::size_t points = 21) {
  if (points < 2) throw InvalidArgument("an MGF curve needs >= 2 points");
  MgfCurve curve;
  curve.mu.resize(points);
  curve.value.resize(points);
  curve.truncation_order = truncation_order;
  for (std::size_t i = 0; i < points; ++i) {
    const double mu = 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    curve.mu[i] = mu;
    curve.value[i] = mgf_series(moments, mu, truncation_order);
  }
  return curve;
}

}  // namespace twinbeam

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"

namespace twinbeam {

/// Photon-number-resolving detector vs. binary (click / no-click) bucket
/// detector.
enum class DetectorKind { pnr, bucket };

enum class BucketOutcome : int { no_click = 0, click = 1 };

/// Lossy detector: efficiency eta in (0, 1] folds all optical and intrinsic
/// loss into one binomial thinning stage in front of an ideal detector.
struct DetectorModel {
  DetectorKind kind = DetectorKind::pnr;
  double efficiency = 1.0;
};

namespace detail {

inline void check_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw InvalidArgument("detector efficiency must be in [0, 1]");
}

/// T(n, N) = C(N, n) eta^n (1 - eta)^(N - n): probability that N incident
/// photons yield n detected ones. Row n over N = 0..n_max.
inline std::vector<double> thinning_row(int n, double eta, int n_max) {
  std::vector<double> row(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (n > n_max) return row;
  // Forward recurrence in N:
  // T(n, N+1) = T(n, N) (1 - eta) (N + 1) / (N + 1 - n).
  double t = std::pow(eta, n);
  row[static_cast<std::size_t>(n)] = t;
  for (int N = n; N < n_max; ++N) {
    t *= (1.0 - eta) * static_cast<double>(N + 1) / static_cast<double>(N + 1 - n);
    row[static_cast<std::size_t>(N + 1)] = t;
  }
  return row;
}

}  // namespace detail

/// Diagonal POVM element over incident photon number N = 0..n_max paired
/// with the detector outcome it represents.
struct PovmElement {
  std::vector<double> diag;
  int outcome = 0;
};

/// POVM element of a lossy photon-number-resolving detector registering
/// exactly n counts: diag_N = C(N, n) (1 - eta)^(N - n) eta^n. All-zero at
/// eta = 0 with n >= 1 (a dead detector never reports a photon).
inline PovmElement pnr_povm(double eta, int n, int n_max) {
  detail::check_efficiency(eta);
  if (n < 0 || n > n_max)
    throw InvalidArgument("PNR outcome must be in [0, n_max]");
  return {detail::thinning_row(n, eta, n_max), n};
}

/// POVM element of a lossy bucket detector. The no-click element is
/// diag_N = (1 - eta)^N; the click element is its complement.
inline PovmElement bucket_povm(double eta, BucketOutcome outcome, int n_max) {
  detail::check_efficiency(eta);
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  std::vector<double> diag(static_cast<std::size_t>(n_max) + 1);
  double miss = 1.0;
  for (int N = 0; N <= n_max; ++N) {
    diag[static_cast<std::size_t>(N)] =
        outcome == BucketOutcome::no_click ? miss : 1.0 - miss;
    miss *= 1.0 - eta;
  }
  return {std::move(diag), static_cast<int>(outcome)};
}

/// Outcome probability tr(rho E) for a diagonal state and POVM element.
inline double outcome_probability(const PhotonDistribution& dist,
                                  const PovmElement& element) {
  const int n_max = std::min<int>(dist.n_max(),
                                  static_cast<int>(element.diag.size()) - 1);
  double p = 0.0;
  for (int n = 0; n <= n_max; ++n)
    p += dist.p(n) * element.diag[static_cast<std::size_t>(n)];
  return p;
}

/// Binomial-loss channel on one beam:
/// p'(n) = sum_N C(N, n) eta^n (1 - eta)^(N - n) p(N).
inline PhotonDistribution apply_loss(const PhotonDistribution& dist, double eta) {
  detail::check_efficiency(eta);
  const int n_max = dist.n_max();
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    const std::vector<double> row = detail::thinning_row(n, eta, n_max);
    double acc = 0.0;
    for (int N = n; N <= n_max; ++N)
      acc += row[static_cast<std::size_t>(N)] * dist.p(N);
    out[static_cast<std::size_t>(n)] = acc;
  }
  return PhotonDistribution(std::move(out));
}

/// Independent binomial loss on the two beams of a joint distribution.
inline JointDistribution apply_loss_joint(const JointDistribution& joint,
                                          double eta_signal, double eta_idler) {
  detail::check_efficiency(eta_signal);
  detail::check_efficiency(eta_idler);
  const int k_max = joint.k_max();
  const int l_max = joint.l_max();
  const std::size_t cols = static_cast<std::size_t>(l_max) + 1;
  // Signal arm first (rows), then idler arm (columns).
  std::vector<double> mid(static_cast<std::size_t>(k_max + 1) * cols, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    const std::vector<double> row = detail::thinning_row(k, eta_signal, k_max);
    for (int K = k; K <= k_max; ++K) {
      const double t = row[static_cast<std::size_t>(K)];
      if (t == 0.0) continue;
      for (int l = 0; l <= l_max; ++l)
        mid[static_cast<std::size_t>(k) * cols + l] += t * joint.p(K, l);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(k_max + 1) * cols, 0.0);
  for (int l = 0; l <= l_max; ++l) {
    const std::vector<double> row = detail::thinning_row(l, eta_idler, l_max);
    for (int L = l; L <= l_max; ++L) {
      const double t = row[static_cast<std::size_t>(L)];
      if (t == 0.0) continue;
      for (int k = 0; k <= k_max; ++k)
        out[static_cast<std::size_t>(k) * cols + l] +=
            t * mid[static_cast<std::size_t>(k) * cols + L];
    }
  }
  return JointDistribution(std::move(out), k_max, l_max);
}

}  // namespace twinbeam

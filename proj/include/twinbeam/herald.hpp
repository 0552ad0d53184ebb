#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "twinbeam/channels.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"

namespace twinbeam {

/// Heralding rule: detector on herald_arm fires with outcome condition_n.
/// For a bucket detector any condition_n >= 1 means "click".
struct HeraldSpec {
  DetectorModel detector;
  int condition_n = 1;
  Arm herald_arm = Arm::idler;
};

namespace detail {

inline PovmElement herald_element(const HeraldSpec& spec, int n_max) {
  if (spec.condition_n < 0)
    throw InvalidArgument("herald condition must be >= 0");
  if (spec.detector.kind == DetectorKind::bucket) {
    return bucket_povm(spec.detector.efficiency,
                       spec.condition_n == 0 ? BucketOutcome::no_click
                                             : BucketOutcome::click,
                       n_max);
  }
  if (spec.condition_n > n_max) {
    // Outcome beyond the truncated support: probability 0 by construction.
    check_efficiency(spec.detector.efficiency);
    return {std::vector<double>(static_cast<std::size_t>(n_max) + 1, 0.0),
            spec.condition_n};
  }
  return pnr_povm(spec.detector.efficiency, spec.condition_n, n_max);
}

}  // namespace detail

/// Probability per pulse that the herald detector fires with the requested
/// outcome.
inline double herald_probability(const JointDistribution& joint,
                                 const HeraldSpec& spec) {
  const int axis_max =
      spec.herald_arm == Arm::signal ? joint.k_max() : joint.l_max();
  const PovmElement element = detail::herald_element(spec, axis_max);
  double p = 0.0;
  for (int k = 0; k <= joint.k_max(); ++k)
    for (int l = 0; l <= joint.l_max(); ++l) {
      const int h = spec.herald_arm == Arm::signal ? k : l;
      p += joint.p(k, l) * element.diag[static_cast<std::size_t>(h)];
    }
  return p;
}

/// State of the remaining beam conditioned on the herald outcome:
/// rho_c = tr_herald(E rho) / tr(E rho). For photon-number-diagonal states
/// the partial trace reduces to a weighted marginal.
inline PhotonDistribution heralded_state(const JointDistribution& joint,
                                         const HeraldSpec& spec) {
  const int axis_max =
      spec.herald_arm == Arm::signal ? joint.k_max() : joint.l_max();
  const int keep_max =
      spec.herald_arm == Arm::signal ? joint.l_max() : joint.k_max();
  const PovmElement element = detail::herald_element(spec, axis_max);
  std::vector<double> out(static_cast<std::size_t>(keep_max) + 1, 0.0);
  double norm = 0.0;
  for (int k = 0; k <= joint.k_max(); ++k)
    for (int l = 0; l <= joint.l_max(); ++l) {
      const int h = spec.herald_arm == Arm::signal ? k : l;
      const int keep = spec.herald_arm == Arm::signal ? l : k;
      const double w =
          joint.p(k, l) * element.diag[static_cast<std::size_t>(h)];
      out[static_cast<std::size_t>(keep)] += w;
      norm += w;
    }
  if (!(norm > 0.0))
    throw ZeroHeraldProbability("herald outcome has zero probability");
  return PhotonDistribution(std::move(out));
}

/// Probability per pulse of preparing the heralded single photon:
/// eta |lambda_1|^2, the chance that exactly one pair is emitted and its
/// herald photon is detected.
inline double preparation_probability(const PdcSource& source,
                                      double herald_efficiency) {
  detail::check_source(source);
  detail::check_efficiency(herald_efficiency);
  const double mu = source.mean_n;
  const double lambda1 = source.regime == ModeRegime::single_mode
                             ? mu / ((1.0 + mu) * (1.0 + mu))
                             : mu * std::exp(-mu);
  return herald_efficiency * lambda1;
}

}  // namespace twinbeam

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twinbeam/counts.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/parallel.hpp"
#include "twinbeam/rng.hpp"

namespace twinbeam {

/// Maximum-likelihood joint frequencies P(k, l) = N(k, l) / total_pulses.
/// Pulses not covered by any cell are assigned to the vacuum cell (0, 0).
inline JointDistribution empirical_joint(const JointCounts& counts) {
  if (counts.total_pulses() == 0)
    throw EmptyData("count data covers zero pulses");
  const std::uint64_t events = counts.total_events();
  if (events > counts.total_pulses())
    throw InvalidArgument("recorded events exceed total pulses");
  const std::size_t cols = static_cast<std::size_t>(counts.l_max()) + 1;
  std::vector<double> p(static_cast<std::size_t>(counts.k_max() + 1) * cols);
  for (int k = 0; k <= counts.k_max(); ++k)
    for (int l = 0; l <= counts.l_max(); ++l)
      p[static_cast<std::size_t>(k) * cols + l] =
          static_cast<double>(counts.at(k, l));
  p[0] += static_cast<double>(counts.total_pulses() - events);
  return JointDistribution(std::move(p), counts.k_max(), counts.l_max());
}

/// Per-pulse coincidence rate C = <kl>.
inline double coincidences_per_pulse(const JointDistribution& d) {
  double c = 0.0;
  for (int k = 1; k <= d.k_max(); ++k)
    for (int l = 1; l <= d.l_max(); ++l)
      c += static_cast<double>(k) * static_cast<double>(l) * d.p(k, l);
  return c;
}

/// Per-pulse singles rate S = <k> (signal) or <l> (idler).
inline double singles_per_pulse(const JointDistribution& d, Arm arm) {
  return mean_photon(d.marginal(arm));
}

/// Per-pulse accidental-coincidence rate A = <k><l>, the rate two
/// uncorrelated beams with the same singles would produce.
inline double accidentals_per_pulse(const JointDistribution& d) {
  return singles_per_pulse(d, Arm::signal) * singles_per_pulse(d, Arm::idler);
}

/// Lower limit on the PDC mean photon number per pulse inferred from the
/// coincidence-to-accidental ratio via CAR = 1 + 1/<n> (multimode law; a
/// single-mode source at the same CAR has a smaller mean).
inline double mean_pdc_from_car(double car_value) {
  if (!(car_value > 1.0))
    throw CarNotAboveUnity(
        "CAR <= 1: no pair correlation beyond accidentals to invert");
  return 1.0 / (car_value - 1.0);
}

/// Loss-tolerant mean photon number <n> = (1 - 1/CAR)^-1 of the heralded
/// state; approaches 1 (a pure heralded photon) as CAR grows.
inline double mean_corrected_from_car(double car_value) {
  if (!(car_value > 1.0))
    throw CarNotAboveUnity(
        "CAR <= 1: no pair correlation beyond accidentals to invert");
  return 1.0 / (1.0 - 1.0 / car_value);
}

/// Klyshko efficiency estimate of one arm: coincidences over singles of the
/// other arm. Overestimates the true efficiency by the factor <n^2>/<n> of
/// the unheralded beam; see effective_klyshko for the corrected form.
inline double klyshko(const JointDistribution& d, Arm arm) {
  const double s = singles_per_pulse(d, other_arm(arm));
  if (!(s > 0.0))
    throw ZeroSingles("no singles in the conjugate arm");
  return coincidences_per_pulse(d) / s;
}

/// Effective Klyshko efficiency (C - A)/S: subtracting accidentals removes
/// the multi-pair excess, so for Poissonian twin beams the estimate equals
/// the true arm efficiency at any flux. Negative values signal data with no
/// usable pair correlation and are returned as-is.
inline double effective_klyshko(const JointDistribution& d, Arm arm) {
  const double s = singles_per_pulse(d, other_arm(arm));
  if (!(s > 0.0))
    throw ZeroSingles("no singles in the conjugate arm");
  return (coincidences_per_pulse(d) - accidentals_per_pulse(d)) / s;
}

inline double klyshko(const JointCounts& counts, Arm arm) {
  return klyshko(empirical_joint(counts), arm);
}

inline double effective_klyshko(const JointCounts& counts, Arm arm) {
  return effective_klyshko(empirical_joint(counts), arm);
}

/// Distribution of the kept beam conditioned on the herald axis reading
/// exactly herald_n.
inline PhotonDistribution conditional_distribution(const JointDistribution& d,
                                                   Arm herald_arm,
                                                   int herald_n) {
  if (herald_n < 0) throw InvalidArgument("herald outcome must be >= 0");
  const int keep_max = herald_arm == Arm::signal ? d.l_max() : d.k_max();
  std::vector<double> slice(static_cast<std::size_t>(keep_max) + 1, 0.0);
  double norm = 0.0;
  for (int keep = 0; keep <= keep_max; ++keep) {
    const double p = herald_arm == Arm::signal ? d.p(herald_n, keep)
                                               : d.p(keep, herald_n);
    slice[static_cast<std::size_t>(keep)] = p;
    norm += p;
  }
  if (!(norm > 0.0))
    throw NoHeraldEvents("no pulses with the requested herald outcome");
  return PhotonDistribution(std::move(slice));
}

inline PhotonDistribution conditional_distribution(const JointCounts& counts,
                                                   Arm herald_arm,
                                                   int herald_n) {
  return conditional_distribution(empirical_joint(counts), herald_arm,
                                  herald_n);
}

/// Normalized factorial moment g(m) of the beam conditioned on the herald
/// outcome.
inline double heralded_g(const JointDistribution& d, Arm herald_arm,
                         int herald_n, int m) {
  return factorial_moment(conditional_distribution(d, herald_arm, herald_n), m);
}

inline double heralded_g_from_counts(const JointCounts& counts, Arm herald_arm,
                                     int herald_n, int m) {
  return heralded_g(empirical_joint(counts), herald_arm, herald_n, m);
}

/// Percentile bootstrap interval. `insufficient` marks a statistic that was
/// undefined in more than 1% of resamples; the bounds then cover only the
/// defined draws (NaN bounds when no draw was defined).
struct Interval {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  int resamples = 0;
  int undefined = 0;
  bool insufficient = false;
};

namespace detail {

/// Cell probabilities of the empirical joint, vacuum deficit included,
/// flattened row-major like JointCounts.
inline std::vector<double> cell_probabilities(const JointCounts& counts) {
  if (counts.total_pulses() == 0)
    throw EmptyData("count data covers zero pulses");
  const std::uint64_t events = counts.total_events();
  if (events > counts.total_pulses())
    throw InvalidArgument("recorded events exceed total pulses");
  const double inv = 1.0 / static_cast<double>(counts.total_pulses());
  const std::size_t cols = static_cast<std::size_t>(counts.l_max()) + 1;
  std::vector<double> p(static_cast<std::size_t>(counts.k_max() + 1) * cols);
  for (int k = 0; k <= counts.k_max(); ++k)
    for (int l = 0; l <= counts.l_max(); ++l)
      p[static_cast<std::size_t>(k) * cols + l] =
          static_cast<double>(counts.at(k, l)) * inv;
  p[0] += static_cast<double>(counts.total_pulses() - events) * inv;
  return p;
}

/// Evaluates fn(resampled joint distribution, r) for every resample index.
/// Each resample draws its randomness from an isolated stream keyed by
/// (seed, r), so the parallel decomposition cannot change any result.
template <class Fn>
void for_each_resample(const JointCounts& counts, int resamples,
                       std::uint64_t seed, unsigned workers, Fn&& fn) {
  const std::vector<double> probs = cell_probabilities(counts);
  const std::uint64_t pulses = counts.total_pulses();
  const int k_max = counts.k_max();
  const int l_max = counts.l_max();
  parallel_chunks(
      static_cast<std::size_t>(resamples), workers,
      [&](std::size_t begin, std::size_t end, unsigned) {
        std::vector<std::uint64_t> drawn(probs.size());
        std::vector<double> freq(probs.size());
        for (std::size_t r = begin; r < end; ++r) {
          RngStream rng(seed, r, StreamId::bootstrap);
          multinomial_draw(rng, pulses, probs, drawn);
          for (std::size_t i = 0; i < drawn.size(); ++i)
            freq[i] = static_cast<double>(drawn[i]);
          fn(JointDistribution(freq, k_max, l_max), r);
        }
      });
}

/// Linear-interpolated quantile of an ascending sample.
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

inline Interval interval_from_draws(const std::vector<double>& draws,
                                    double level) {
  Interval iv;
  iv.resamples = static_cast<int>(draws.size());
  std::vector<double> valid;
  valid.reserve(draws.size());
  for (double v : draws)
    if (std::isfinite(v)) valid.push_back(v);
  iv.undefined = iv.resamples - static_cast<int>(valid.size());
  iv.insufficient =
      static_cast<double>(iv.undefined) > 0.01 * static_cast<double>(iv.resamples);
  if (valid.empty()) return iv;
  std::sort(valid.begin(), valid.end());
  const double tail = 0.5 * (1.0 - level);
  iv.lo = percentile_sorted(valid, tail);
  iv.hi = percentile_sorted(valid, 1.0 - tail);
  return iv;
}

inline void check_bootstrap_params(int resamples, double level) {
  if (resamples < 100)
    throw InvalidArgument("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0))
    throw InvalidArgument("confidence level must be in (0, 1)");
}

}  // namespace detail

/// Percentile bootstrap of an arbitrary statistic of the joint distribution
/// under multinomial resampling of the count matrix. Deterministic given
/// seed, independent of worker count.
inline Interval bootstrap_ci(
    const JointCounts& counts,
    const std::function<double(const JointDistribution&)>& statistic,
    int resamples = 1000, double level = 0.68, std::uint64_t seed = 0,
    unsigned workers = 0) {
  detail::check_bootstrap_params(resamples, level);
  std::vector<double> draws(static_cast<std::size_t>(resamples),
                            std::numeric_limits<double>::quiet_NaN());
  detail::for_each_resample(
      counts, resamples, seed, workers,
      [&](const JointDistribution& d, std::size_t r) {
        try {
          draws[r] = statistic(d);
        } catch (const Error&) {
        }
      });
  return detail::interval_from_draws(draws, level);
}

/// Point estimate with its bootstrap interval.
struct ReportValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
};

/// Output of the full reconstruction chain on one count matrix.
struct EstimateReport {
  ReportValue car;
  ReportValue mean_pdc;
  ReportValue klyshko_signal;
  ReportValue klyshko_idler;
  ReportValue eff_klyshko_signal;
  ReportValue eff_klyshko_idler;
  ReportValue mean_corrected;
  /// Series parity estimate; meaningful only together with truncation_order.
  ReportValue parity_truncated;
  /// Conditional g(m) for m = 2..truncation_order.
  std::vector<ReportValue> heralded_g;
  int truncation_order = 2;
  Arm herald_arm = Arm::idler;
  int herald_n = 1;
  std::uint64_t pulses = 0;
  std::uint64_t herald_events = 0;
  std::vector<std::string> warnings;
};

struct PipelineOptions {
  int resamples = 1000;
  double level = 0.68;
  std::uint64_t seed = 0;
  /// A moment order m enters the series only when the herald slice holds at
  /// least this many events with n >= m.
  std::uint64_t min_events_per_order = 100;
  int herald_n = 1;
  unsigned workers = 0;
};

namespace detail {

/// Statistic vector layout shared by the point estimate and the bootstrap:
/// car, mean_pdc, klyshko_s, klyshko_i, eff_s, eff_i, mean_corrected,
/// parity, g(2)..g(order).
inline constexpr std::size_t kPipelineFixedStats = 8;

inline std::vector<std::string> pipeline_stat_names(int order) {
  std::vector<std::string> names = {
      "car",          "mean_pdc",           "klyshko_signal",
      "klyshko_idler", "eff_klyshko_signal", "eff_klyshko_idler",
      "mean_corrected", "parity_truncated"};
  for (int m = 2; m <= order; ++m)
    names.push_back("g" + std::to_string(m));
  return names;
}

/// strict=true lets errors propagate (point estimate); strict=false maps an
/// undefined entry to NaN (bootstrap resample).
inline std::vector<double> pipeline_statistics(const JointDistribution& d,
                                               Arm herald_arm, int herald_n,
                                               int order, bool strict) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> s(kPipelineFixedStats + static_cast<std::size_t>(order) - 1,
                        nan);
  const auto eval = [&](auto&& fn) -> double {
    if (strict) return fn();
    try {
      return fn();
    } catch (const Error&) {
      return nan;
    }
  };
  s[0] = eval([&] { return joint_moment(d, 1, 1); });
  s[1] = eval([&] { return mean_pdc_from_car(s[0]); });
  s[2] = eval([&] { return klyshko(d, Arm::signal); });
  s[3] = eval([&] { return klyshko(d, Arm::idler); });
  s[4] = eval([&] { return effective_klyshko(d, Arm::signal); });
  s[5] = eval([&] { return effective_klyshko(d, Arm::idler); });
  s[6] = eval([&] { return mean_corrected_from_car(s[0]); });
  std::optional<PhotonDistribution> cond;
  if (strict) {
    cond = conditional_distribution(d, herald_arm, herald_n);
  } else {
    try {
      cond = conditional_distribution(d, herald_arm, herald_n);
    } catch (const Error&) {
    }
  }
  if (cond)
    for (int m = 2; m <= order; ++m)
      s[kPipelineFixedStats + m - 2] =
          eval([&] { return factorial_moment(*cond, m); });
  s[7] = eval([&]() -> double {
    std::vector<double> g(static_cast<std::size_t>(order));
    g[0] = 1.0;
    for (int m = 2; m <= order; ++m) {
      const double v = s[kPipelineFixedStats + m - 2];
      if (!std::isfinite(v))
        throw ZeroMeanState("conditional moment undefined");
      g[static_cast<std::size_t>(m) - 1] = v;
    }
    if (!std::isfinite(s[6]))
      throw CarNotAboveUnity("corrected mean undefined");
    return mgf_series(MomentSet(s[6], std::move(g)), 2.0, order);
  });
  return s;
}

}  // namespace detail

/// Full reconstruction chain: CAR and the means it implies, Klyshko
/// efficiencies, conditional factorial moments up to `order`, and the
/// moment-series parity at argument 2, each with a percentile-bootstrap
/// interval from joint multinomial resampling.
///
/// Refuses orders whose conditional statistics are too thin (fewer than
/// min_events_per_order herald-slice events with n >= m).
inline EstimateReport parity_pipeline(const JointCounts& counts,
                                      Arm herald_arm, int order,
                                      const PipelineOptions& opts = {}) {
  if (order < 2) throw InvalidArgument("series order must be >= 2");
  detail::check_bootstrap_params(opts.resamples, opts.level);
  if (counts.total_pulses() == 0)
    throw EmptyData("count data covers zero pulses");

  const int keep_max =
      herald_arm == Arm::signal ? counts.l_max() : counts.k_max();
  std::uint64_t herald_events = 0;
  std::vector<std::uint64_t> events_at_least(
      static_cast<std::size_t>(order) + 1, 0);
  for (int keep = 0; keep <= keep_max; ++keep) {
    const std::uint64_t c = herald_arm == Arm::signal
                                ? counts.at(opts.herald_n, keep)
                                : counts.at(keep, opts.herald_n);
    herald_events += c;
    for (int m = 0; m <= order && m <= keep; ++m)
      events_at_least[static_cast<std::size_t>(m)] += c;
  }
  if (herald_events == 0)
    throw NoHeraldEvents("no pulses with the requested herald outcome");
  for (int m = 2; m <= order; ++m)
    if (events_at_least[static_cast<std::size_t>(m)] < opts.min_events_per_order)
      throw InsufficientData(
          "order " + std::to_string(m) + " has only " +
          std::to_string(events_at_least[static_cast<std::size_t>(m)]) +
          " herald-slice events with n >= " + std::to_string(m) +
          "; need >= " + std::to_string(opts.min_events_per_order));

  const JointDistribution point = empirical_joint(counts);
  const std::vector<double> stats = detail::pipeline_statistics(
      point, herald_arm, opts.herald_n, order, /*strict=*/true);
  const std::size_t n_stats = stats.size();

  std::vector<double> draws(static_cast<std::size_t>(opts.resamples) * n_stats,
                            std::numeric_limits<double>::quiet_NaN());
  detail::for_each_resample(
      counts, opts.resamples, opts.seed, opts.workers,
      [&](const JointDistribution& d, std::size_t r) {
        const std::vector<double> v = detail::pipeline_statistics(
            d, herald_arm, opts.herald_n, order, /*strict=*/false);
        std::copy(v.begin(), v.end(), draws.begin() + r * n_stats);
      });

  EstimateReport report;
  report.truncation_order = order;
  report.herald_arm = herald_arm;
  report.herald_n = opts.herald_n;
  report.pulses = counts.total_pulses();
  report.herald_events = herald_events;

  const std::vector<std::string> names = detail::pipeline_stat_names(order);
  std::vector<ReportValue> values(n_stats);
  std::vector<double> column(static_cast<std::size_t>(opts.resamples));
  for (std::size_t j = 0; j < n_stats; ++j) {
    for (int r = 0; r < opts.resamples; ++r)
      column[static_cast<std::size_t>(r)] =
          draws[static_cast<std::size_t>(r) * n_stats + j];
    const Interval iv = detail::interval_from_draws(column, opts.level);
    values[j] = {stats[j], iv.lo, iv.hi};
    if (iv.insufficient)
      report.warnings.push_back("bootstrap: " + names[j] + " undefined in " +
                                std::to_string(iv.undefined) + " of " +
                                std::to_string(iv.resamples) + " resamples");
  }
  if (order > kDefaultMaxMomentOrder)
    report.warnings.push_back(
        "series order " + std::to_string(order) +
        " is above the supported default " +
        std::to_string(kDefaultMaxMomentOrder) +
        "; high orders are typically noise-dominated");
  report.car = values[0];
  report.mean_pdc = values[1];
  report.klyshko_signal = values[2];
  report.klyshko_idler = values[3];
  report.eff_klyshko_signal = values[4];
  report.eff_klyshko_idler = values[5];
  report.mean_corrected = values[6];
  report.parity_truncated = values[7];
  report.heralded_g.assign(values.begin() + detail::kPipelineFixedStats,
                           values.end());
  if (report.eff_klyshko_signal.value <= 0.0 ||
      report.eff_klyshko_idler.value <= 0.0)
    report.warnings.push_back(
        "coincidences do not exceed accidentals; effective Klyshko "
        "efficiency is not positive");
  return report;
}

}  // namespace twinbeam

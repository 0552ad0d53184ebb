#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "twinbeam/channels.hpp"
#include "twinbeam/counts.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/parallel.hpp"
#include "twinbeam/rng.hpp"

namespace twinbeam {

/// One synthetic run: a pulsed twin-beam source, independent loss on each
/// arm, and a detector per arm.
struct ExperimentConfig {
  PdcSource source;
  double eta_signal = 1.0;
  double eta_idler = 1.0;
  DetectorKind detector_signal = DetectorKind::pnr;
  DetectorKind detector_idler = DetectorKind::pnr;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  double tail_tolerance = kDefaultTailTolerance;
  unsigned workers = 0;
};

namespace detail {

inline void check_config(const ExperimentConfig& config) {
  check_source(config.source);
  check_efficiency(config.eta_signal);
  check_efficiency(config.eta_idler);
  if (config.pulses == 0) throw InvalidArgument("pulse count must be > 0");
  if (!(config.tail_tolerance > 0.0 && config.tail_tolerance < 1.0))
    throw InvalidArgument("tail tolerance must be in (0, 1)");
}

/// CDF of the truncated pair-number law; the last entry is forced to 1 so a
/// uniform draw always lands.
inline std::vector<double> pair_number_cdf(const ExperimentConfig& config) {
  const PhotonDistribution w =
      pdc_weights_auto(config.source, config.tail_tolerance);
  std::vector<double> cdf(w.probs().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += w.probs()[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

/// Samples global pulse indices [begin, end). Every pulse owns the stream
/// keyed by (seed, index), so any decomposition into ranges or workers
/// yields identical counts.
inline JointCounts sample_range(const ExperimentConfig& config,
                                const std::vector<double>& cdf,
                                std::uint64_t begin, std::uint64_t end) {
  const int n_max = static_cast<int>(cdf.size()) - 1;
  const int k_axis = config.detector_signal == DetectorKind::bucket ? 1 : n_max;
  const int l_axis = config.detector_idler == DetectorKind::bucket ? 1 : n_max;
  const std::uint64_t n = end - begin;
  unsigned workers = config.workers ? config.workers : worker_count();
  workers = static_cast<unsigned>(
      std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1)));
  std::vector<JointCounts> local(workers, JointCounts(k_axis, l_axis));
  parallel_chunks(static_cast<std::size_t>(n), workers,
                  [&](std::size_t cb, std::size_t ce, unsigned w) {
                    JointCounts& acc = local[w];
                    for (std::size_t r = cb; r < ce; ++r) {
                      RngStream rng(config.seed, begin + r, StreamId::pulse);
                      const double u = rng.next_double();
                      const std::uint64_t pairs = static_cast<std::uint64_t>(
                          std::upper_bound(cdf.begin(), cdf.end(), u) -
                          cdf.begin());
                      std::uint64_t k =
                          binomial_draw(rng, pairs, config.eta_signal);
                      std::uint64_t l =
                          binomial_draw(rng, pairs, config.eta_idler);
                      if (config.detector_signal == DetectorKind::bucket)
                        k = std::min<std::uint64_t>(k, 1);
                      if (config.detector_idler == DetectorKind::bucket)
                        l = std::min<std::uint64_t>(l, 1);
                      acc.add(static_cast<int>(k), static_cast<int>(l));
                    }
                    acc.set_total_pulses(acc.total_pulses() + (ce - cb));
                  });
  JointCounts result(k_axis, l_axis);
  for (const JointCounts& c : local) result.merge(c);
  return result;
}

}  // namespace detail

/// Simulates config.pulses pulses: draw the pair number from the truncated
/// source law, thin each arm binomially by its efficiency, collapse bucket
/// arms to click / no-click, histogram the outcome pairs. Deterministic
/// given config.seed and independent of worker count.
inline JointCounts sample_run(const ExperimentConfig& config) {
  detail::check_config(config);
  return detail::sample_range(config, detail::pair_number_cdf(config), 0,
                              config.pulses);
}

/// Block-wise variant of sample_run for memory- or latency-bounded
/// consumers: merging all blocks reproduces sample_run exactly because
/// pulse indices are global.
class SampleStream {
 public:
  SampleStream(const ExperimentConfig& config, std::uint64_t block)
      : config_(config), block_(block) {
    detail::check_config(config);
    if (block == 0) throw InvalidArgument("block size must be > 0");
    cdf_ = detail::pair_number_cdf(config);
  }

  bool done() const { return offset_ >= config_.pulses; }

  /// Counts for the next min(block, remaining) pulses.
  JointCounts next_block() {
    if (done()) throw InvalidArgument("sample stream is exhausted");
    const std::uint64_t end =
        std::min(config_.pulses, offset_ + block_);
    JointCounts counts = detail::sample_range(config_, cdf_, offset_, end);
    offset_ = end;
    return counts;
  }

 private:
  ExperimentConfig config_;
  std::uint64_t block_;
  std::vector<double> cdf_;
  std::uint64_t offset_ = 0;
};

}  // namespace twinbeam

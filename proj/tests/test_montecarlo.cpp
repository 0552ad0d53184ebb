#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "twinbeam/channels.hpp"
#include "twinbeam/estimate.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/montecarlo.hpp"
#include "twinbeam/rng.hpp"

using namespace twinbeam;
using Catch::Matchers::WithinAbs;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig config;
  config.source = {ModeRegime::multimode, 0.5};
  config.eta_signal = 0.6;
  config.eta_idler = 0.4;
  config.pulses = 200000;
  config.seed = 7;
  return config;
}

double marginal_mean(const JointCounts& counts, Arm arm) {
  double acc = 0.0;
  for (int k = 0; k <= counts.k_max(); ++k)
    for (int l = 0; l <= counts.l_max(); ++l)
      acc += static_cast<double>(arm == Arm::signal ? k : l) *
             static_cast<double>(counts.at(k, l));
  return acc / static_cast<double>(counts.total_pulses());
}

}  // namespace

TEST_CASE("sampling is deterministic and worker-independent") {
  ExperimentConfig config = base_config();
  config.pulses = 20000;
  const JointCounts a = sample_run(config);
  const JointCounts b = sample_run(config);
  CHECK(a == b);
  config.workers = 1;
  const JointCounts serial = sample_run(config);
  config.workers = 5;
  const JointCounts wide = sample_run(config);
  CHECK(serial == wide);
  CHECK(a == serial);
  config.workers = 0;
  config.seed = 8;
  CHECK(!(sample_run(config) == a));
}

TEST_CASE("blocks concatenate to the full run") {
  ExperimentConfig config = base_config();
  config.pulses = 9973;
  const JointCounts whole = sample_run(config);
  SampleStream stream(config, 1000);
  JointCounts merged(whole.k_max(), whole.l_max());
  int blocks = 0;
  while (!stream.done()) {
    merged.merge(stream.next_block());
    ++blocks;
  }
  CHECK(blocks == 10);
  CHECK(merged == whole);
  CHECK(merged.total_pulses() == 9973);
  CHECK_THROWS_AS(stream.next_block(), InvalidArgument);

  SampleStream oversize(config, 1 << 20);
  CHECK(oversize.next_block() == whole);
  CHECK(oversize.done());
}

TEST_CASE("dead detectors record only empty pulses") {
  ExperimentConfig config = base_config();
  config.pulses = 5000;
  config.eta_signal = 0.0;
  config.eta_idler = 0.0;
  const JointCounts counts = sample_run(config);
  CHECK(counts.at(0, 0) == 5000);
  CHECK(counts.total_events() == 5000);
  CHECK(counts.total_pulses() == 5000);
  for (int k = 0; k <= counts.k_max(); ++k)
    for (int l = 0; l <= counts.l_max(); ++l)
      if (k != 0 || l != 0) CHECK(counts.at(k, l) == 0);
}

TEST_CASE("marginals follow the thinned source law") {
  const ExperimentConfig config = base_config();
  const JointCounts counts = sample_run(config);
  // Poisson pairs thinned by eta stay Poisson with mean eta * mu.
  const double mean_s = 0.6 * 0.5, mean_i = 0.4 * 0.5;
  const double se_s = std::sqrt(mean_s / 200000.0);
  const double se_i = std::sqrt(mean_i / 200000.0);
  CHECK_THAT(marginal_mean(counts, Arm::signal), WithinAbs(mean_s, 3.0 * se_s));
  CHECK_THAT(marginal_mean(counts, Arm::idler), WithinAbs(mean_i, 3.0 * se_i));

  CHECK_THAT(car(empirical_joint(counts)), WithinAbs(3.0, 0.1));
}

TEST_CASE("outcome histogram matches the lossy joint law") {
  const ExperimentConfig config = base_config();
  const JointCounts counts = sample_run(config);
  const int n_max = auto_cutoff(config.source, config.tail_tolerance).n_max;
  REQUIRE(counts.k_max() == n_max);
  const JointDistribution expected = apply_loss_joint(
      pdc_joint(config.source, n_max), config.eta_signal, config.eta_idler);
  const double pulses = static_cast<double>(config.pulses);
  int checked = 0;
  for (int k = 0; k <= n_max; ++k)
    for (int l = 0; l <= n_max; ++l) {
      const double mean = expected.p(k, l) * pulses;
      if (mean < 100.0) continue;
      const double sd = std::sqrt(mean * (1.0 - expected.p(k, l)));
      CHECK_THAT(static_cast<double>(counts.at(k, l)),
                 WithinAbs(mean, 5.0 * sd));
      ++checked;
    }
  CHECK(checked >= 6);
  CHECK(counts.total_events() == config.pulses);
}

TEST_CASE("bucket arms collapse to click / no-click") {
  ExperimentConfig config = base_config();
  config.pulses = 100000;
  config.detector_idler = DetectorKind::bucket;
  const JointCounts counts = sample_run(config);
  CHECK(counts.l_max() == 1);
  CHECK(counts.k_max() > 1);

  double clicks = 0.0;
  for (int k = 0; k <= counts.k_max(); ++k)
    clicks += static_cast<double>(counts.at(k, 1));
  const double p_click = 1.0 - std::exp(-0.5 * 0.4);
  const double se = std::sqrt(p_click * (1.0 - p_click) / 100000.0);
  CHECK_THAT(clicks / 100000.0, WithinAbs(p_click, 4.0 * se));

  // The bucket is the PNR record with l >= 1 merged, pulse for pulse.
  ExperimentConfig pnr = config;
  pnr.detector_idler = DetectorKind::pnr;
  const JointCounts resolved = sample_run(pnr);
  for (int k = 0; k <= counts.k_max(); ++k) {
    std::uint64_t at_least_one = 0;
    for (int l = 1; l <= resolved.l_max(); ++l) at_least_one += resolved.at(k, l);
    CHECK(counts.at(k, 1) == at_least_one);
    CHECK(counts.at(k, 0) == resolved.at(k, 0));
  }

  config.detector_signal = DetectorKind::bucket;
  const JointCounts both = sample_run(config);
  CHECK(both.k_max() == 1);
  CHECK(both.l_max() == 1);
}

TEST_CASE("invalid configurations are rejected up front") {
  ExperimentConfig config = base_config();
  config.pulses = 0;
  CHECK_THROWS_AS(sample_run(config), InvalidArgument);
  config = base_config();
  config.eta_signal = 1.2;
  CHECK_THROWS_AS(sample_run(config), InvalidArgument);
  config = base_config();
  config.source.mean_n = -0.1;
  CHECK_THROWS_AS(sample_run(config), InvalidArgument);
  config = base_config();
  config.tail_tolerance = 0.0;
  CHECK_THROWS_AS(sample_run(config), InvalidArgument);
  CHECK_THROWS_AS(SampleStream(base_config(), 0), InvalidArgument);
}

TEST_CASE("binomial sampler covers all three regimes") {
  struct Regime {
    std::uint64_t n;
    double p;
  };
  // Bernoulli sum; ascending inverse CDF; underflowed floor at the mode scan;
  // large-n mode scan.
  const Regime regimes[] = {{5, 0.3}, {40, 0.5}, {1000, 0.99}, {2000, 0.3}};
  const int draws = 20000;
  for (std::size_t i = 0; i < 4; ++i) {
    RngStream rng(77, i);
    const double n = static_cast<double>(regimes[i].n), p = regimes[i].p;
    double sum = 0.0, sum2 = 0.0;
    for (int d = 0; d < draws; ++d) {
      const auto k = binomial_draw(rng, regimes[i].n, p);
      REQUIRE(k <= regimes[i].n);
      sum += static_cast<double>(k);
      sum2 += static_cast<double>(k) * static_cast<double>(k);
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    const double true_var = n * p * (1.0 - p);
    CHECK_THAT(mean, WithinAbs(n * p, 4.0 * std::sqrt(true_var / draws)));
    CHECK_THAT(var, WithinAbs(true_var, 0.1 * true_var));
  }

  RngStream rng(1, 0);
  CHECK(binomial_draw(rng, 100, 0.0) == 0);
  CHECK(binomial_draw(rng, 100, 1.0) == 100);
  CHECK(binomial_draw(rng, 0, 0.5) == 0);
}

TEST_CASE("multinomial splitter") {
  RngStream rng(55, 0);
  SECTION("counts sum to the total and track the weights") {
    const std::vector<double> weights = {1.0, 2.0, 3.0, 4.0};
    std::vector<std::uint64_t> out(4);
    multinomial_draw(rng, 100000, weights, out);
    std::uint64_t total = 0;
    for (const auto c : out) total += c;
    REQUIRE(total == 100000);
    for (std::size_t i = 0; i < 4; ++i) {
      const double q = weights[i] / 10.0;
      const double sd = std::sqrt(100000.0 * q * (1.0 - q));
      CHECK_THAT(static_cast<double>(out[i]),
                 WithinAbs(100000.0 * q, 4.0 * sd));
    }
  }
  SECTION("zero-weight cells never fire") {
    const std::vector<double> weights = {0.5, 0.0, 0.5};
    std::vector<std::uint64_t> out(3);
    multinomial_draw(rng, 10000, weights, out);
    CHECK(out[1] == 0);
    CHECK(out[0] + out[2] == 10000);
  }
  SECTION("zero total leaves every cell empty") {
    const std::vector<double> weights = {0.3, 0.7};
    std::vector<std::uint64_t> out(2);
    multinomial_draw(rng, 0, weights, out);
    CHECK(out[0] == 0);
    CHECK(out[1] == 0);
  }
}

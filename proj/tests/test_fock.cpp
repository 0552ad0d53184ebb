#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "twinbeam/fock.hpp"
#include "twinbeam/rng.hpp"

using namespace twinbeam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Closed-form weight laws, written independently of the library recurrences.
double thermal_pn(double mu, int n) {
  return std::pow(mu, n) / std::pow(1.0 + mu, n + 1);
}

double poisson_pn(double mu, int n) {
  return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

}  // namespace

TEST_CASE("pdc weights follow the thermal law in the single-mode regime") {
  const PhotonDistribution w = pdc_weights({ModeRegime::single_mode, 1.0}, 80);
  CHECK_THAT(w.p(0), WithinAbs(0.5, 1e-12));
  for (int n = 0; n <= 20; ++n)
    CHECK_THAT(w.p(n), WithinRel(thermal_pn(1.0, n), 1e-12));
}

TEST_CASE("pdc weights follow the Poisson law in the multimode regime") {
  const PhotonDistribution w = pdc_weights({ModeRegime::multimode, 1.0}, 60);
  CHECK_THAT(w.p(0), WithinAbs(std::exp(-1.0), 1e-12));
  for (int n = 0; n <= 20; ++n)
    CHECK_THAT(w.p(n), WithinRel(poisson_pn(1.0, n), 1e-12));
}

TEST_CASE("truncated weights stay normalized and reproduce the mean") {
  for (const ModeRegime regime :
       {ModeRegime::single_mode, ModeRegime::multimode}) {
    for (const double mu : {0.086, 0.5, 1.0, 2.13}) {
      const PhotonDistribution w = pdc_weights_auto({regime, mu});
      double sum = 0.0, mean = 0.0, sq = 0.0;
      for (int n = 0; n <= w.n_max(); ++n) {
        sum += w.p(n);
        mean += n * w.p(n);
        sq += static_cast<double>(n) * n * w.p(n);
      }
      CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
      CHECK_THAT(mean_photon(w), WithinAbs(mu, 1e-9));
      CHECK_THAT(mean, WithinAbs(mean_photon(w), 1e-13));
      // Thermal variance mu + mu^2, Poisson variance mu.
      const double var = sq - mean * mean;
      const double expected =
          regime == ModeRegime::single_mode ? mu + mu * mu : mu;
      CHECK_THAT(var, WithinAbs(expected, 1e-8));
    }
  }
}

TEST_CASE("pdc_joint is diagonal with the weight-law entries") {
  const PdcSource source{ModeRegime::multimode, 1.0};
  const JointDistribution joint = pdc_joint(source, 40);
  for (int k = 0; k <= 40; ++k)
    for (int l = 0; l <= 40; ++l)
      if (k != l) REQUIRE(joint.p(k, l) == 0.0);
  CHECK_THAT(joint.p(1, 1), WithinAbs(std::exp(-1.0), 1e-12));

  const PhotonDistribution w = pdc_weights(source, 40);
  const PhotonDistribution ms = joint.marginal(Arm::signal);
  const PhotonDistribution mi = joint.marginal(Arm::idler);
  for (int n = 0; n <= 40; ++n) {
    CHECK_THAT(ms.p(n), WithinAbs(w.p(n), 1e-12));
    CHECK_THAT(mi.p(n), WithinAbs(w.p(n), 1e-12));
  }
}

TEST_CASE("auto_cutoff keeps the discarded tail below tolerance") {
  SECTION("values against the cumulative tail") {
    const CutoffResult low = auto_cutoff({ModeRegime::multimode, 0.086}, 1e-12);
    CHECK_FALSE(low.cap_hit);
    CHECK(low.n_max <= 12);
    // Tail actually below tolerance, by direct summation of the law.
    double tail = 0.0;
    for (int n = low.n_max + 1; n <= 200; ++n) tail += poisson_pn(0.086, n);
    CHECK(tail < 1e-12);
    // And one step earlier it is not.
    double tail_before = tail + poisson_pn(0.086, low.n_max);
    CHECK(tail_before >= 1e-12);
  }
  SECTION("vacuum-dominated source needs almost no support") {
    CHECK(auto_cutoff({ModeRegime::single_mode, 1e-4}, 1e-3).n_max <= 2);
  }
  SECTION("bright source still fits the hard cap") {
    const CutoffResult r = auto_cutoff({ModeRegime::multimode, 2.13}, 1e-12);
    CHECK_FALSE(r.cap_hit);
    CHECK(r.n_max < 256);
  }
  SECTION("cap-hit is reported, not silently absorbed") {
    const CutoffResult r =
        auto_cutoff({ModeRegime::single_mode, 50.0}, 1e-12, 40);
    CHECK(r.cap_hit);
    CHECK(r.n_max == 40);
  }
  SECTION("smaller tolerance never shrinks the cutoff") {
    for (const double mu : {0.05, 0.5, 1.7}) {
      int prev = 0;
      for (const double tol : {1e-3, 1e-6, 1e-9, 1e-12, 1e-15}) {
        const int n = auto_cutoff({ModeRegime::multimode, mu}, tol).n_max;
        CHECK(n >= prev);
        prev = n;
      }
    }
  }
}

TEST_CASE("distribution constructors validate their input") {
  CHECK_THROWS_AS(PhotonDistribution(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(PhotonDistribution({0.5, -0.1}), InvalidArgument);
  CHECK_THROWS_AS(PhotonDistribution({0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(
      PhotonDistribution({1.0, std::numeric_limits<double>::quiet_NaN()}),
      InvalidArgument);
  CHECK_THROWS_AS(pdc_weights({ModeRegime::multimode, 0.0}, 10),
                  InvalidArgument);
  CHECK_THROWS_AS(pdc_weights({ModeRegime::multimode, -1.0}, 10),
                  InvalidArgument);
  CHECK_THROWS_AS(pdc_weights({ModeRegime::multimode, 1.0}, -1),
                  InvalidArgument);
  CHECK_THROWS_AS(JointDistribution({0.5, 0.5}, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(auto_cutoff({ModeRegime::multimode, 1.0}, 0.0),
                  InvalidArgument);
  CHECK_THROWS_AS(auto_cutoff({ModeRegime::multimode, 1.0}, 1.5),
                  InvalidArgument);
}

TEST_CASE("renormalization makes arbitrary weights a distribution") {
  RngStream rng(41, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(8);
    for (double& v : w) v = rng.next_double() * 3.0;
    w[2] += 0.1;  // guarantee a nonzero sum
    const PhotonDistribution d(w);
    double sum = 0.0;
    for (int n = 0; n <= d.n_max(); ++n) sum += d.p(n);
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("lookups outside the truncated support return zero") {
  const PhotonDistribution d({0.25, 0.75});
  CHECK(d.p(-1) == 0.0);
  CHECK(d.p(2) == 0.0);
  const JointDistribution j({1.0}, 0, 0);
  CHECK(j.p(0, 1) == 0.0);
  CHECK(j.p(1, 0) == 0.0);
}

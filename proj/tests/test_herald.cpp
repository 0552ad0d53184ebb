#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "twinbeam/fock.hpp"
#include "twinbeam/herald.hpp"
#include "twinbeam/moments.hpp"

using namespace twinbeam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

HeraldSpec pnr_herald(double eta, int n = 1, Arm arm = Arm::idler) {
  HeraldSpec spec;
  spec.detector = {DetectorKind::pnr, eta};
  spec.condition_n = n;
  spec.herald_arm = arm;
  return spec;
}

HeraldSpec bucket_herald(double eta, Arm arm = Arm::idler) {
  HeraldSpec spec;
  spec.detector = {DetectorKind::bucket, eta};
  spec.condition_n = 1;
  spec.herald_arm = arm;
  return spec;
}

}  // namespace

TEST_CASE("ideal PNR herald projects the twin beam onto the single photon") {
  const JointDistribution joint = pdc_joint({ModeRegime::single_mode, 0.5}, 60);
  const PhotonDistribution h = heralded_state(joint, pnr_herald(1.0));
  REQUIRE(h.p(1) == 1.0);
  for (int n = 0; n <= h.n_max(); ++n)
    if (n != 1) REQUIRE(h.p(n) == 0.0);
}

TEST_CASE("lossy PNR herald reproduces the explicit conditional sum") {
  // Oracle: conditioned on one detected idler photon out of N incident,
  // p(N) is proportional to |lambda_N|^2 * N * eta * (1-eta)^(N-1).
  const double mu = 0.086, eta = 0.02;
  const PhotonDistribution w = pdc_weights({ModeRegime::multimode, mu}, 30);
  std::vector<double> oracle(31);
  double norm = 0.0;
  for (int N = 1; N <= 30; ++N) {
    oracle[N] = w.p(N) * N * eta * std::pow(1.0 - eta, N - 1);
    norm += oracle[N];
  }
  for (double& v : oracle) v /= norm;

  const JointDistribution joint = pdc_joint({ModeRegime::multimode, mu}, 30);
  const PhotonDistribution h = heralded_state(joint, pnr_herald(eta));
  for (int N = 0; N <= 30; ++N) CHECK_THAT(h.p(N), WithinAbs(oracle[N], 1e-13));

  // At few-percent efficiency the heralded g2 sits close to the eta->0
  // multimode limit (2 mu + mu^2) / (1 + mu)^2.
  const double g2 = factorial_moment(h, 2);
  const double low_eta_limit = (2.0 * mu + mu * mu) / ((1.0 + mu) * (1.0 + mu));
  CHECK_THAT(g2, WithinAbs(low_eta_limit, 0.005));

  // Exact value from the oracle distribution itself.
  double mean = 0.0, ff2 = 0.0;
  for (int N = 1; N <= 30; ++N) {
    mean += N * oracle[N];
    ff2 += static_cast<double>(N) * (N - 1) * oracle[N];
  }
  CHECK_THAT(g2, WithinAbs(ff2 / (mean * mean), 1e-12));
}

TEST_CASE("bucket herald keeps the thermal shape above vacuum") {
  const double mu = 1.0;
  const JointDistribution joint = pdc_joint({ModeRegime::single_mode, mu}, 120);
  SECTION("ideal bucket: thermal weights with the vacuum removed") {
    const PhotonDistribution h = heralded_state(joint, bucket_herald(1.0));
    REQUIRE(h.p(0) == 0.0);
    const PhotonDistribution w = pdc_weights({ModeRegime::single_mode, mu}, 120);
    const double renorm = 1.0 - w.p(0);
    for (int n = 1; n <= 40; ++n)
      CHECK_THAT(h.p(n), WithinRel(w.p(n) / renorm, 1e-12));
  }
  SECTION("lossy bucket against the direct conditional sum") {
    const double eta = 0.37;
    const PhotonDistribution w = pdc_weights({ModeRegime::single_mode, mu}, 120);
    std::vector<double> oracle(121);
    double norm = 0.0;
    for (int n = 0; n <= 120; ++n) {
      oracle[n] = w.p(n) * (1.0 - std::pow(1.0 - eta, n));
      norm += oracle[n];
    }
    for (double& v : oracle) v /= norm;
    const PhotonDistribution h = heralded_state(joint, bucket_herald(eta));
    for (int n = 0; n <= 120; ++n)
      CHECK_THAT(h.p(n), WithinAbs(oracle[n], 1e-13));
  }
}

TEST_CASE("herald probability") {
  SECTION("ideal PNR on thermal twin beams picks out |lambda_1|^2") {
    const JointDistribution joint = pdc_joint({ModeRegime::single_mode, 1.0}, 80);
    CHECK_THAT(herald_probability(joint, pnr_herald(1.0)),
               WithinAbs(0.25, 1e-12));
  }
  SECTION("a dead bucket herald never clicks") {
    const JointDistribution joint = pdc_joint({ModeRegime::multimode, 0.5}, 30);
    CHECK(herald_probability(joint, bucket_herald(0.0)) == 0.0);
  }
  SECTION("direct sum oracle at half efficiency") {
    const double mu = 1.0, eta = 0.5;
    const JointDistribution joint = pdc_joint({ModeRegime::multimode, mu}, 40);
    double oracle = 0.0;
    for (int N = 1; N <= 40; ++N)
      oracle += std::exp(-mu + N * std::log(mu) - std::lgamma(N + 1.0)) * N *
                eta * std::pow(1.0 - eta, N - 1);
    CHECK_THAT(herald_probability(joint, pnr_herald(eta)),
               WithinAbs(oracle, 1e-12));
    // Closed form of the same sum: eta mu exp(-eta mu).
    CHECK_THAT(oracle, WithinAbs(eta * mu * std::exp(-eta * mu), 1e-10));
  }
  SECTION("equals the preparation probability at unit efficiency") {
    for (const ModeRegime regime :
         {ModeRegime::single_mode, ModeRegime::multimode})
      for (const double mu : {0.1, 0.7, 1.5}) {
        const JointDistribution joint = pdc_joint({regime, mu}, 100);
        CHECK_THAT(herald_probability(joint, pnr_herald(1.0)),
                   WithinAbs(preparation_probability({regime, mu}, 1.0), 1e-10));
      }
  }
  SECTION("multiphoton leakage only ever adds events") {
    const JointDistribution joint = pdc_joint({ModeRegime::multimode, 0.8}, 40);
    for (const double eta : {0.05, 0.4, 0.9})
      CHECK(herald_probability(joint, pnr_herald(eta)) >=
            preparation_probability({ModeRegime::multimode, 0.8}, eta));
  }
}

TEST_CASE("preparation probability closed forms") {
  CHECK_THAT(preparation_probability({ModeRegime::multimode, 1.0}, 1.0),
             WithinAbs(std::exp(-1.0), 1e-15));
  CHECK(preparation_probability({ModeRegime::multimode, 1.0}, 0.0) == 0.0);
  CHECK_THAT(preparation_probability({ModeRegime::single_mode, 1.0}, 0.5),
             WithinAbs(0.125, 1e-15));
}

TEST_CASE("either arm can herald") {
  const JointDistribution joint = pdc_joint({ModeRegime::multimode, 0.4}, 25);
  const PhotonDistribution on_idler =
      heralded_state(joint, pnr_herald(0.3, 1, Arm::idler));
  const PhotonDistribution on_signal =
      heralded_state(joint, pnr_herald(0.3, 1, Arm::signal));
  for (int n = 0; n <= 25; ++n)
    CHECK_THAT(on_idler.p(n), WithinAbs(on_signal.p(n), 1e-14));
}

TEST_CASE("impossible herald outcomes raise ZeroHeraldProbability") {
  const JointDistribution joint = pdc_joint({ModeRegime::multimode, 0.5}, 20);
  CHECK_THROWS_AS(heralded_state(joint, pnr_herald(0.0)),
                  ZeroHeraldProbability);
  CHECK_THROWS_AS(heralded_state(joint, pnr_herald(0.5, 25)),
                  ZeroHeraldProbability);
  CHECK(herald_probability(joint, pnr_herald(0.5, 25)) == 0.0);
  CHECK_THROWS_AS(heralded_state(joint, pnr_herald(0.5, -1)), InvalidArgument);
}

TEST_CASE("number resolution beats the bucket at high flux") {
  const JointDistribution joint = pdc_joint({ModeRegime::multimode, 1.0}, 40);
  for (const double eta : {0.7, 0.85, 1.0}) {
    const double g2_pnr =
        factorial_moment(heralded_state(joint, pnr_herald(eta)), 2);
    const double g2_bucket =
        factorial_moment(heralded_state(joint, bucket_herald(eta)), 2);
    CHECK(g2_pnr <= g2_bucket + 1e-12);
  }
}

TEST_CASE("heralded g2 vanishes in the low-power limit") {
  for (const DetectorKind kind : {DetectorKind::pnr, DetectorKind::bucket})
    for (const double eta : {0.1, 0.9}) {
      HeraldSpec spec;
      spec.detector = {kind, eta};
      const JointDistribution joint =
          pdc_joint({ModeRegime::multimode, 1e-3}, 12);
      const double g2 = factorial_moment(heralded_state(joint, spec), 2);
      CHECK(g2 < 0.01);
    }
}

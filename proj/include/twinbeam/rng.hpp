#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace twinbeam {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream identifiers keep independent consumers of the same user seed
/// (pulse sampling, bootstrap resampling, test generators) on disjoint
/// streams.
enum class StreamId : std::uint64_t {
  pulse = 0x706c73ULL,
  bootstrap = 0x62747374ULL,
  generic = 0x67656eULL,
};

/// Counter-based SplitMix64 stream keyed by (seed, index). Any stream can be
/// reconstructed in isolation, so workers may consume indices in any order
/// and still produce results identical to a serial run.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index,
            StreamId id = StreamId::generic)
      : state_(mix64(mix64(seed) ^ mix64(index * 0xd1342543de82ef95ULL + 1) ^
                     static_cast<std::uint64_t>(id) * 0xaf251af3b0f025b5ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

namespace detail {

inline double log_binomial_pmf(std::uint64_t n, std::uint64_t k, double p) {
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  double lp = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
  if (k > 0) lp += kk * std::log(p);
  if (k < n) lp += (nn - kk) * std::log1p(-p);
  return lp;
}

/// Inverse transform over outcomes enumerated from the distribution mode
/// outward; O(sqrt(n p (1-p))) expected steps for large n.
inline std::uint64_t binomial_from_mode(RngStream& rng, std::uint64_t n, double p) {
  const std::uint64_t mode =
      static_cast<std::uint64_t>(std::min<double>(static_cast<double>(n), (static_cast<double>(n) + 1.0) * p));
  const double u = rng.next_double();
  const double pm = std::exp(log_binomial_pmf(n, mode, p));
  double cum = pm;
  if (u < cum) return mode;
  double lo_pmf = pm, hi_pmf = pm;
  std::uint64_t lo = mode, hi = mode;
  std::uint64_t last = mode;
  while (lo > 0 || hi < n) {
    if (lo > 0) {
      // pmf(k-1)/pmf(k) = k (1-p) / ((n-k+1) p)
      lo_pmf *= static_cast<double>(lo) * (1.0 - p) /
                (static_cast<double>(n - lo + 1) * p);
      --lo;
      cum += lo_pmf;
      last = lo;
      if (u < cum) return lo;
    }
    if (hi < n) {
      // pmf(k+1)/pmf(k) = (n-k) p / ((k+1) (1-p))
      hi_pmf *= static_cast<double>(n - hi) * p /
                (static_cast<double>(hi + 1) * (1.0 - p));
      ++hi;
      cum += hi_pmf;
      last = hi;
      if (u < cum) return hi;
    }
  }
  return last;  // rounding left a sliver of mass; clamp to the final outcome
}

}  // namespace detail

/// Binomial(n, p) draw. Per-trial Bernoulli sums below 32 trials (the
/// dominant photon-number regime), inverse-CDF above.
inline std::uint64_t binomial_draw(RngStream& rng, std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n <= 32) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i)
      if (rng.next_double() < p) ++k;
    return k;
  }
  if (n <= 1024) {
    // Ascending inverse CDF with the multiplicative pmf recurrence.
    double pmf = std::pow(1.0 - p, static_cast<double>(n));
    if (pmf > 0.0) {
      const double u = rng.next_double();
      double cum = pmf;
      std::uint64_t k = 0;
      while (u >= cum && k < n) {
        pmf *= static_cast<double>(n - k) * p /
               (static_cast<double>(k + 1) * (1.0 - p));
        ++k;
        cum += pmf;
      }
      return k;
    }
    // (1-p)^n underflowed; fall through to the mode-centered scan.
  }
  return detail::binomial_from_mode(rng, n, p);
}

/// Multinomial draw over `probs` (need not be normalized) via conditional
/// binomials. Writes one count per cell; counts sum to `total`.
inline void multinomial_draw(RngStream& rng, std::uint64_t total,
                             std::span<const double> probs,
                             std::span<std::uint64_t> out) {
  double rem_p = 0.0;
  for (double p : probs) rem_p += p;
  std::uint64_t rem = total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (rem == 0 || rem_p <= 0.0) {
      out[i] = 0;
      continue;
    }
    if (i + 1 == probs.size()) {
      out[i] = rem;
      break;
    }
    const double cond = std::min(1.0, std::max(0.0, probs[i] / rem_p));
    const std::uint64_t c = binomial_draw(rng, rem, cond);
    out[i] = c;
    rem -= c;
    rem_p -= probs[i];
  }
}

}  // namespace twinbeam

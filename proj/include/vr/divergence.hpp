// Copyright 2026 The vr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VR_DIVERGENCE_HPP_
#define VR_DIVERGENCE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "vr/errors.hpp"
#include "vr/numerics.hpp"
#include "vr/params.hpp"

namespace vr {

enum class Direction { kForward, kBackward };

struct EvalOptions {
  // Binomial slices whose total tail weight is below this are skipped; the
  // skipped weight is added to the result so truncation never under-reports.
  double trunc_delta = 1e-18;
  // Worker threads for the slice loop. Chunk boundaries are fixed and chunk
  // results combine in index order, so any thread count produces identical
  // bits.
  int threads = 1;
};

namespace detail {

inline constexpr std::int64_t kReduceChunk = 4096;

// Deterministic parallel sum of f(c) over c in [lo, hi].
template <typename SliceFn>
double chunked_reduce(std::int64_t lo, std::int64_t hi, int threads,
                      const SliceFn& f) {
  if (hi < lo) return 0.0;
  const std::int64_t count = hi - lo + 1;
  const std::int64_t num_chunks = (count + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(static_cast<std::size_t>(num_chunks), 0.0);
  auto run_chunk = [&](std::int64_t chunk) {
    const std::int64_t begin = lo + chunk * kReduceChunk;
    const std::int64_t end = std::min(hi, begin + kReduceChunk - 1);
    StableSum acc;
    for (std::int64_t c = begin; c <= end; ++c) acc.add(f(c));
    partial[static_cast<std::size_t>(chunk)] = acc.value();
  };
  if (threads <= 1 || num_chunks == 1) {
    for (std::int64_t chunk = 0; chunk < num_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
      for (std::int64_t chunk = next.fetch_add(1); chunk < num_chunks;
           chunk = next.fetch_add(1)) {
        run_chunk(chunk);
      }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<std::int64_t>(threads, num_chunks);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  StableSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

inline std::int64_t ceil_index(double x, std::int64_t c) {
  return static_cast<std::int64_t>(
      std::ceil(std::clamp(x, -2.0, static_cast<double>(c) + 2.0)));
}

inline std::int64_t floor_index(double x, std::int64_t c) {
  return static_cast<std::int64_t>(
      std::floor(std::clamp(x, -2.0, static_cast<double>(c) + 2.0)));
}

}  // namespace detail

// Hockey-stick divergence of the symmetric dominating pair, as an expectation
// over the blanket count c ~ Binomial(n_blanket, 2r). Works for any real eps,
// including the negative thresholds the accountant needs. The infinite-p case
// is exact: alpha = 0 and p*alpha = beta are substituted directly, not
// approximated by a large p.
inline double delta_symmetric(double eps, const VariationRatioParams& params,
                              Direction dir, const EvalOptions& opts = {}) {
  if (params.beta == 0.0) return std::max(0.0, -std::expm1(eps));
  const double r = params.r();
  if (r >= 0.5) {
    throw UnsupportedRegimeError(
        "delta: clone probability r = 1/2 is outside the expectation form; "
        "use the brute-force oracle");
  }
  const double alpha = params.alpha();
  const double p_alpha = params.p_alpha();
  const double rest = 1.0 - alpha - p_alpha;
  const double n = static_cast<double>(params.n_blanket) + 1.0;
  const double rr = r / (1.0 - 2.0 * r);
  const double e = std::exp(eps);
  const double e_dir = dir == Direction::kForward ? e : 1.0 / e;
  const double beta = p_alpha - alpha;  // alpha*(p-1)

  // Threshold where the slice's probability ratio crosses e^{+/-eps}.
  auto threshold = [&](double c) {
    return ((e_dir * p_alpha - alpha) * c +
            (e_dir - 1.0) * rest * (n - c) * rr) /
           ((e_dir + 1.0) * beta);
  };
  const double coef_hi = p_alpha - e * alpha;   // (p - e^eps) * alpha
  const double coef_lo = alpha - e * p_alpha;   // (1 - p e^eps) * alpha
  const double coef_rest = (1.0 - e) * rest;

  const std::int64_t nb = params.n_blanket;
  const auto window = binom_central_window(nb, 2.0 * r, opts.trunc_delta / 2.0);

  auto slice = [&](std::int64_t c) {
    const double w = std::exp(log_binom_pmf(nb, 2.0 * r, c));
    if (w == 0.0) return 0.0;
    const double t_next = threshold(static_cast<double>(c) + 1.0);
    const double t_here = threshold(static_cast<double>(c));
    double inner;
    if (dir == Direction::kForward) {
      const std::int64_t k1 = detail::ceil_index(t_next, c);
      const std::int64_t k0 = detail::ceil_index(t_here, c);
      inner = coef_hi * binom_cdf_range(c, 0.5, k1 - 1, c) +
              coef_lo * binom_cdf_range(c, 0.5, k1, c) +
              coef_rest * binom_cdf_range(c, 0.5, k0, c);
    } else {
      const std::int64_t k1 = detail::floor_index(t_next, c);
      const std::int64_t k0 = detail::floor_index(t_here, c);
      inner = coef_lo * binom_cdf_range(c, 0.5, 0, k1 - 1) +
              coef_hi * binom_cdf_range(c, 0.5, 0, k1) +
              coef_rest * binom_cdf_range(c, 0.5, 0, k0);
    }
    return w * inner;
  };

  double total =
      detail::chunked_reduce(window.lo, window.hi, opts.threads, slice);
  if (window.lo > 0 || window.hi < nb) {
    // Skipped slices contribute at most their binomial weight.
    total += 1.0 - binom_cdf_range(nb, 2.0 * r, window.lo, window.hi);
  }
  return std::clamp(total, 0.0, 1.0);
}

inline double delta_forward(double eps, const VariationRatioParams& params,
                            const EvalOptions& opts = {}) {
  return delta_symmetric(eps, params, Direction::kForward, opts);
}

inline double delta_backward(double eps, const VariationRatioParams& params,
                             const EvalOptions& opts = {}) {
  return delta_symmetric(eps, params, Direction::kBackward, opts);
}

// Asymmetric variant: c ~ Binomial(n_blanket, r0+r1) with inner success
// probability r0/(r0+r1). Reduces to delta_symmetric when q0 = q1.
inline double delta_asymmetric(double eps, const AsymmetricParams& params,
                               Direction dir, const EvalOptions& opts = {}) {
  if (params.beta == 0.0) return std::max(0.0, -std::expm1(eps));
  const double r0 = params.r0();
  const double r1 = params.r1();
  if (r0 + r1 >= 1.0) {
    throw UnsupportedRegimeError(
        "delta: r0 + r1 = 1 is outside the expectation form; use the "
        "brute-force oracle");
  }
  const double alpha = params.alpha();
  const double p_alpha = params.p_alpha();
  const double rest = 1.0 - alpha - p_alpha;
  const double n = static_cast<double>(params.n_blanket) + 1.0;
  const double e = std::exp(eps);
  const double e_dir = dir == Direction::kForward ? e : 1.0 / e;

  auto threshold = [&](double c) {
    const double num = (e_dir * p_alpha - alpha) * c / r1 +
                       (e_dir - 1.0) * rest * (n - c) / (1.0 - r0 - r1);
    const double den = (p_alpha / r0 - alpha / r1) +
                       e_dir * (p_alpha / r1 - alpha / r0);
    return num / den;
  };
  const double coef_hi = p_alpha - e * alpha;
  const double coef_lo = alpha - e * p_alpha;
  const double coef_rest = (1.0 - e) * rest;
  const double inner_s = r0 / (r0 + r1);

  const std::int64_t nb = params.n_blanket;
  const auto window =
      binom_central_window(nb, r0 + r1, opts.trunc_delta / 2.0);

  auto slice = [&](std::int64_t c) {
    const double w = std::exp(log_binom_pmf(nb, r0 + r1, c));
    if (w == 0.0) return 0.0;
    const double t_next = threshold(static_cast<double>(c) + 1.0);
    const double t_here = threshold(static_cast<double>(c));
    double inner;
    if (dir == Direction::kForward) {
      const std::int64_t k1 = detail::ceil_index(t_next, c);
      const std::int64_t k0 = detail::ceil_index(t_here, c);
      inner = coef_hi * binom_cdf_range(c, inner_s, k1 - 1, c) +
              coef_lo * binom_cdf_range(c, inner_s, k1, c) +
              coef_rest * binom_cdf_range(c, inner_s, k0, c);
    } else {
      const std::int64_t k1 = detail::floor_index(t_next, c);
      const std::int64_t k0 = detail::floor_index(t_here, c);
      inner = coef_lo * binom_cdf_range(c, inner_s, 0, k1 - 1) +
              coef_hi * binom_cdf_range(c, inner_s, 0, k1) +
              coef_rest * binom_cdf_range(c, inner_s, 0, k0);
    }
    return w * inner;
  };

  double total =
      detail::chunked_reduce(window.lo, window.hi, opts.threads, slice);
  if (window.lo > 0 || window.hi < nb) {
    total += 1.0 - binom_cdf_range(nb, r0 + r1, window.lo, window.hi);
  }
  return std::clamp(total, 0.0, 1.0);
}

// -- Brute-force oracle --------------------------------------------------------

inline constexpr std::int64_t kBruteForceCap = 5000;

// Exact quadratic enumeration of the dominating pair's outcome space from the
// closed-form mixture masses, entirely in log space. Independent of the
// expectation-form paths; accepts r = 1/2.
inline double brute_force_delta(double eps, const AsymmetricParams& params,
                                Direction dir) {
  if (params.n_blanket > kBruteForceCap) {
    throw SizeError("brute_force_delta: n_blanket above the quadratic cap");
  }
  if (params.beta == 0.0) return std::max(0.0, -std::expm1(eps));
  const double alpha = params.alpha();
  const double p_alpha = params.p_alpha();
  const double rest = 1.0 - alpha - p_alpha;
  const double r0 = params.r0();
  const double r1 = params.r1();
  const std::int64_t nb = params.n_blanket;
  const double mix = r0 + r1;
  const double inner_s = mix > 0.0 ? r0 / mix : 0.5;

  // log P[(A, C-A) = (x, y)] for the undecorated pair.
  auto log_kernel = [&](std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x + y > nb) return -kInf;
    return log_binom_pmf(nb, mix, x + y) + log_binom_pmf(x + y, inner_s, x);
  };
  const LogProb c_hi = LogProb::from_prob(std::min(1.0, p_alpha));
  const LogProb c_lo = LogProb::from_prob(alpha);
  const LogProb c_rest = LogProb::from_prob(std::max(0.0, rest));

  StableSum acc;
  for (std::int64_t a = 0; a <= nb + 1; ++a) {
    for (std::int64_t b = 0; a + b <= nb + 1; ++b) {
      const LogProb shift_a = LogProb::from_log(log_kernel(a - 1, b));
      const LogProb shift_b = LogProb::from_log(log_kernel(a, b - 1));
      const LogProb plain = LogProb::from_log(log_kernel(a, b));
      LogProb mass_p = c_hi * shift_a + c_lo * shift_b + c_rest * plain;
      LogProb mass_q = c_lo * shift_a + c_hi * shift_b + c_rest * plain;
      if (dir == Direction::kBackward) std::swap(mass_p, mass_q);
      if (mass_p.is_zero()) continue;
      const double gap = eps + mass_q.log() - mass_p.log();
      if (gap < 0.0) {
        acc.add(std::exp(mass_p.log() + std::log1p(-std::exp(gap))));
      }
    }
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

inline double brute_force_delta(double eps, const VariationRatioParams& params,
                                Direction dir = Direction::kForward) {
  return brute_force_delta(eps, AsymmetricParams::from_symmetric(params), dir);
}

// -- Subsampling ---------------------------------------------------------------

enum class SubsampleDirection { kAdd, kRemove };

// Divergence of the gamma-subsampled pair, reduced to the base pair at a
// shifted threshold. kAdd evaluates D_{e^eps}((1-g)Q + gP || Q); kRemove
// evaluates D_{e^eps}(P || (1-g)P + gQ), which stays finite for the negative
// eps range of the accountant.
inline double subsample_delta(double eps, const VariationRatioParams& params,
                              double gamma, SubsampleDirection dir,
                              const EvalOptions& opts = {}) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("subsample: rate gamma must lie in (0,1]");
  }
  if (gamma == 1.0) return delta_forward(eps, params, opts);
  if (dir == SubsampleDirection::kAdd) {
    const double shifted = std::expm1(eps) + gamma;  // e^eps + gamma - 1
    if (shifted <= 0.0) return -std::expm1(eps);
    return gamma * delta_forward(std::log(shifted) - std::log(gamma), params,
                                 opts);
  }
  const double carrier = gamma - (1.0 - gamma) * std::expm1(eps);
  if (carrier <= 0.0) return 0.0;
  return carrier *
         delta_forward(eps + std::log(gamma) - std::log(carrier), params,
                       opts);
}

}  // namespace vr

#endif  // VR_DIVERGENCE_HPP_

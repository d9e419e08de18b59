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

#ifndef VR_BOUNDS_HPP_
#define VR_BOUNDS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "vr/divergence.hpp"
#include "vr/errors.hpp"
#include "vr/params.hpp"

namespace vr {

struct BoundRequest {
  double delta = 1e-6;
  int iters = 20;
  EvalOptions eval;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ParameterError("bounds: delta must lie in (0,1)");
    }
    if (iters < 1) throw ParameterError("bounds: iters must be >= 1");
  }
};

enum class BoundKind { kUpper, kLower };

struct BoundResult {
  double eps = 0.0;
  BoundKind kind = BoundKind::kUpper;
  double resolution = 0.0;  // final bracket width, cap / 2^T
  int evaluations = 0;      // number of max-divergence evaluations
};

namespace detail {

// exp() overflows past this; divergences are flat to ~1e-300 well before.
inline constexpr double kEpsSearchLimit = 700.0;

struct SearchOutcome {
  double lo = 0.0;
  double hi = 0.0;
  int evaluations = 0;
};

// Bisection of Algorithm-style searches: keeps the invariant that the
// divergence exceeds delta at lo (if anywhere) and is at most delta at hi.
inline SearchOutcome bisect_eps(const std::function<double(double)>& max_delta,
                                double cap_hint, bool cap_is_finite,
                                double delta, int iters) {
  SearchOutcome out;
  double cap = cap_hint;
  if (!cap_is_finite) {
    cap = 1.0;
    bool reached = false;
    for (int step = 0; step < 1024; ++step) {
      ++out.evaluations;
      if (max_delta(cap) <= delta) {
        reached = true;
        break;
      }
      if (cap > kEpsSearchLimit) {
        throw UnsupportedRegimeError(
            "bounds: target delta is below the distinguishing-event mass; no "
            "finite epsilon satisfies it");
      }
      cap *= 2.0;
    }
    if (!reached) {
      throw UnsupportedRegimeError(
          "bounds: doubling limit reached while searching for a cap");
    }
  }
  double lo = 0.0, hi = cap;
  for (int t = 0; t < iters; ++t) {
    const double mid = 0.5 * (lo + hi);
    ++out.evaluations;
    if (max_delta(mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace detail

// Binary search for the smallest eps with
// max(delta_forward, delta_backward) <= delta. Returns the conservative end
// of the final bracket, which upper-bounds the true crossing for any iteration
// count.
inline BoundResult upper_bound(const VariationRatioParams& params,
                               const BoundRequest& req) {
  req.validate();
  if (params.beta == 0.0) {
    return BoundResult{0.0, BoundKind::kUpper, 0.0, 0};
  }
  auto max_delta = [&](double eps) {
    return std::max(delta_forward(eps, params, req.eval),
                    delta_backward(eps, params, req.eval));
  };
  const bool finite = std::isfinite(params.p);
  const auto search = detail::bisect_eps(
      max_delta, finite ? std::log(params.p) : 0.0, finite, req.delta,
      req.iters);
  return BoundResult{search.hi, BoundKind::kUpper, search.hi - search.lo,
                     search.evaluations};
}

enum class LowerBoundMode {
  kLower,      // eps_L: last threshold where the divergence still exceeds delta
  kTightUpper  // eps_H: conservative end, a tight upper bound for the pair
};

// Search over the asymmetric pair. In kLower mode the result lower-bounds any
// valid amplification claim; kTightUpper turns the same search into a precise
// upper bound for randomizers whose worst case matches these parameters.
inline BoundResult lower_bound(const AsymmetricParams& params,
                               const BoundRequest& req,
                               LowerBoundMode mode = LowerBoundMode::kLower) {
  req.validate();
  if (params.beta == 0.0) {
    return BoundResult{0.0,
                       mode == LowerBoundMode::kLower ? BoundKind::kLower
                                                      : BoundKind::kUpper,
                       0.0, 0};
  }
  auto max_delta = [&](double eps) {
    return std::max(delta_asymmetric(eps, params, Direction::kForward,
                                     req.eval),
                    delta_asymmetric(eps, params, Direction::kBackward,
                                     req.eval));
  };
  const bool finite = std::isfinite(params.p);
  const auto search = detail::bisect_eps(
      max_delta, finite ? std::log(params.p) : 0.0, finite, req.delta,
      req.iters);
  if (mode == LowerBoundMode::kLower) {
    return BoundResult{search.lo, BoundKind::kLower, search.hi - search.lo,
                       search.evaluations};
  }
  return BoundResult{search.hi, BoundKind::kUpper, search.hi - search.lo,
                     search.evaluations};
}

// -- Closed forms ---------------------------------------------------------------

// Closed-form bounds answer with either an eps or the name of the violated
// precondition; sweeps over parameter grids treat the failure as data.
struct ClosedFormResult {
  std::optional<double> eps;
  std::string failed_precondition;

  bool ok() const { return eps.has_value(); }
};

// Chernoff/Hoeffding tail-bound form. Tight for moderate clone probabilities;
// preconditions follow the theorem and are reported by name when violated.
inline ClosedFormResult analytic_bound(const VariationRatioParams& params,
                                       double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("bounds: delta must lie in (0,1)");
  }
  if (params.beta == 0.0) return {0.0, ""};
  const double alpha = params.alpha();
  const double p_alpha = params.p_alpha();
  const double beta = params.beta;
  const double rest = 1.0 - alpha - p_alpha;
  const double r = params.r();
  if (r >= 0.5) return {std::nullopt, "r < 1/2"};
  const double rr = r / (1.0 - 2.0 * r);
  const double nb = static_cast<double>(params.n_blanket);
  const double log4d = std::log(4.0 / delta);

  if ((p_alpha + alpha) / 2.0 - rest * rr < 0.0) {
    return {std::nullopt,
            "(p+1)*alpha/2 - (1-alpha-p*alpha)*r/(1-2r) >= 0"};
  }
  const double omega =
      2.0 * r * nb - std::sqrt(std::min(6.0 * r, 0.5) * nb * log4d);
  double omega_threshold;
  if (std::isfinite(params.p)) {
    const double p = params.p;
    const double q = params.q;
    omega_threshold = (2.0 * p * (beta + 1.0 + (beta - 1.0) * p) * nb + beta) /
                      (q + p * (beta - 1.0 + (beta + 1.0) * p) - p * q);
  } else {
    omega_threshold = 2.0 * (beta - 1.0) * nb / (beta + 1.0);
  }
  if (!(omega >= omega_threshold)) {
    return {std::nullopt,
            "Omega >= (2p(beta+1+(beta-1)p)(n-1)+beta)/(q+p(beta-1+(beta+1)p)-pq)"};
  }
  if (!(omega > 0.0)) return {std::nullopt, "Omega > 0"};
  const double spread = std::sqrt(omega * log4d / 2.0);
  const double denom =
      alpha * omega + beta * (omega / 2.0 - spread) + rest * (nb - omega) * rr;
  if (!(denom > 0.0)) {
    return {std::nullopt, "denominator of the ratio bound > 0"};
  }
  return {std::log1p(beta * (2.0 * spread + 1.0) / denom), ""};
}

// Simplified large-n form with r = p*beta/((p-1)*q).
inline ClosedFormResult asymptotic_bound(const VariationRatioParams& params,
                                         double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("bounds: delta must lie in (0,1)");
  }
  if (params.beta == 0.0) return {0.0, ""};
  const double r = params.r();
  const double n = static_cast<double>(params.n_blanket) + 1.0;
  if (params.n_blanket < 1 || n < 8.0 * std::log(2.0 / delta) / r) {
    return {std::nullopt, "n >= 8*log(2/delta)*(p-1)*q/(beta*p)"};
  }
  const double c =
      std::max(0.0, (4.0 / 9.0) * (1.0 - 3.0 * r) / (1.0 - 2.0 * r));
  const double t = params.alpha() + params.p_alpha();  // (1+p)*beta/(p-1)
  const double tail = std::sqrt(32.0 * std::log(4.0 / delta) / (r * (n - 1.0))) +
                      4.0 / (r * n);
  return {std::log1p(params.beta / ((1.0 - c) * t + c) * tail), ""};
}

}  // namespace vr

#endif  // VR_BOUNDS_HPP_

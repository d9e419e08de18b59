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

#ifndef VR_ACCOUNTANT_HPP_
#define VR_ACCOUNTANT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "vr/bounds.hpp"
#include "vr/detail/fft.hpp"
#include "vr/divergence.hpp"
#include "vr/errors.hpp"
#include "vr/params.hpp"

namespace vr {

// A monotone eps -> delta map on a finite grid, one curve per divergence
// direction.
struct PrivacyCurve {
  std::vector<double> grid;
  std::vector<double> forward;
  std::vector<double> backward;

  double max_delta_at(std::size_t i) const {
    return std::max(forward[i], backward[i]);
  }

  // Smallest grid eps whose delta (both directions) is at most target.
  std::optional<double> eps_at_delta(double target) const {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (max_delta_at(i) <= target) return grid[i];
    }
    return std::nullopt;
  }
};

// Probability mass function of a privacy-loss variable on a uniform grid,
// plus the mass of distinguishing events above the grid.
struct DiscretePLD {
  double grid_origin = 0.0;
  double mesh = 0.0;
  std::vector<double> masses;
  double inf_mass = 0.0;

  double total_mass() const {
    StableSum s;
    for (double m : masses) s.add(m);
    s.add(inf_mass);
    return s.value();
  }

  void validate() const {
    if (!(mesh > 0.0)) throw ParameterError("pld: mesh must be positive");
    if (std::abs(total_mass() - 1.0) > 1e-12) {
      throw ParameterError("pld: masses and inf_mass must sum to 1");
    }
  }

  // Implied curve delta(eps) = inf_mass + sum_j m_j max(0, 1 - e^{eps-x_j}).
  double curve_at(double eps) const {
    StableSum s;
    for (std::size_t j = 0; j < masses.size(); ++j) {
      const double x = grid_origin + static_cast<double>(j) * mesh;
      if (eps < x) s.add(masses[j] * -std::expm1(eps - x));
    }
    s.add(inf_mass);
    return std::clamp(s.value(), 0.0, 1.0);
  }

  // Implied curve at every grid point, via the stable backward recurrences
  // T_i = sum_{j>i} m_j and W_i = sum_{j>i} m_j e^{eps_i - eps_j}.
  std::vector<double> curve_on_grid() const {
    const std::size_t n = masses.size();
    std::vector<double> out(n, 0.0);
    const double decay = std::exp(-mesh);
    double tail = 0.0;
    double weighted = 0.0;
    for (std::size_t ii = n; ii-- > 0;) {
      out[ii] = std::clamp(inf_mass + tail - weighted, 0.0, 1.0);
      weighted = decay * (weighted + masses[ii]);
      tail += masses[ii];
    }
    return out;
  }

  PrivacyCurve implied_curve() const {
    PrivacyCurve curve;
    curve.grid.resize(masses.size());
    for (std::size_t j = 0; j < masses.size(); ++j) {
      curve.grid[j] = grid_origin + static_cast<double>(j) * mesh;
    }
    curve.forward = curve_on_grid();
    curve.backward = curve.forward;
    return curve;
  }
};

struct CompositionPlan {
  std::int64_t rounds = 1;  // K
  double eps_error = 1e-2;
  double delta_error = 1e-10;
  std::optional<double> gamma;  // subsampling rate per round
  bool homogeneous = true;
  std::optional<double> mesh;       // overrides the default grid spacing
  std::optional<double> eps_upper;  // overrides the single-round eps bound
  EvalOptions eval;

  void validate() const {
    if (rounds < 1) throw ParameterError("plan: K must be >= 1");
    if (!(eps_error > 0.0) || !(delta_error > 0.0)) {
      throw ParameterError("plan: error tolerances must be positive");
    }
    if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) {
      throw ParameterError("plan: gamma must lie in (0,1]");
    }
  }

  double default_mesh() const {
    if (mesh) return *mesh;
    const double k = static_cast<double>(rounds);
    return eps_error / std::sqrt(k * std::log(1.0 / delta_error));
  }
};

// -- Curve construction ----------------------------------------------------------

// Divergence of both directions on a uniform grid of `points` values over
// [eps_lo, eps_hi].
inline PrivacyCurve build_curve(const VariationRatioParams& params,
                                double eps_lo, double eps_hi,
                                std::size_t points,
                                const EvalOptions& opts = {}) {
  if (!(eps_lo < eps_hi) || points < 2) {
    throw ParameterError("build_curve: need eps_lo < eps_hi and >= 2 points");
  }
  PrivacyCurve curve;
  curve.grid.resize(points);
  curve.forward.resize(points);
  curve.backward.resize(points);
  const double step =
      (eps_hi - eps_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double eps = eps_lo + static_cast<double>(i) * step;
    curve.grid[i] = eps;
    curve.forward[i] = delta_forward(eps, params, opts);
    curve.backward[i] = delta_backward(eps, params, opts);
  }
  return curve;
}

// Same grid, but for the gamma-subsampled mechanism: the mixture divergence
// branches by the sign of eps.
inline PrivacyCurve build_subsampled_curve(const VariationRatioParams& params,
                                           double gamma_rate, double eps_lo,
                                           double eps_hi, std::size_t points,
                                           const EvalOptions& opts = {}) {
  if (!(eps_lo < eps_hi) || points < 2) {
    throw ParameterError("build_curve: need eps_lo < eps_hi and >= 2 points");
  }
  PrivacyCurve curve;
  curve.grid.resize(points);
  curve.forward.resize(points);
  const double step = (eps_hi - eps_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double eps = eps_lo + static_cast<double>(i) * step;
    curve.grid[i] = eps;
    curve.forward[i] = subsample_delta(eps, params, gamma_rate,
                                       eps >= 0.0 ? SubsampleDirection::kAdd
                                                  : SubsampleDirection::kRemove,
                                       opts);
  }
  // The base pair is coordinate-swap symmetric, so both directions coincide.
  curve.backward = curve.forward;
  return curve;
}

// -- Discretization ----------------------------------------------------------------

namespace detail {

inline double uniform_mesh_of(const std::vector<double>& grid) {
  if (grid.size() < 2) throw ParameterError("discretize: need >= 2 grid points");
  const double mesh = grid[1] - grid[0];
  if (!(mesh > 0.0)) throw ParameterError("discretize: grid must increase");
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (std::abs(grid[i + 1] - grid[i] - mesh) > 1e-9 * std::max(1.0, mesh)) {
      throw ParameterError("discretize: grid must be uniform");
    }
  }
  return mesh;
}

}  // namespace detail

// Pessimistic discrete PLD whose implied curve passes through the input curve
// at every grid point. Solving the interpolation system backward gives
//   m_{i+1} = (d_i - d_{i+1})/(1 - e^{-h}) - sum_{j>i+1} m_j e^{eps_{i+1}-eps_j},
// the mass above the grid is the top delta value, and the mass below the grid
// rounds up onto the lowest grid point.
inline DiscretePLD discretize_curve(const std::vector<double>& grid,
                                    const std::vector<double>& deltas) {
  if (grid.size() != deltas.size()) {
    throw ParameterError("discretize: grid/delta size mismatch");
  }
  const double mesh = detail::uniform_mesh_of(grid);
  const std::size_t last = grid.size() - 1;
  for (double d : deltas) {
    if (!(d >= -1e-12 && d <= 1.0 + 1e-12)) {
      throw RangeError("discretize: curve values outside [0,1]");
    }
  }
  DiscretePLD pld;
  pld.grid_origin = grid.front();
  pld.mesh = mesh;
  pld.masses.assign(grid.size(), 0.0);
  pld.inf_mass = std::clamp(deltas[last], 0.0, 1.0);

  const double decay = std::exp(-mesh);
  const double denom = -std::expm1(-mesh);  // 1 - e^{-h}
  double running = 0.0;  // sum_{j>i+1} m_j e^{eps_{i+1} - eps_j}
  for (std::size_t ii = last; ii-- > 0;) {
    double m = (deltas[ii] - deltas[ii + 1]) / denom - running;
    m = std::max(m, 0.0);
    pld.masses[ii + 1] = m;
    running = decay * (running + m);
  }
  StableSum assigned;
  for (std::size_t j = 1; j <= last; ++j) assigned.add(pld.masses[j]);
  assigned.add(pld.inf_mass);
  const double below = 1.0 - assigned.value();
  if (below < -1e-6) {
    throw RangeError(
        "discretize: curve does not cover the loss range of the pair");
  }
  pld.masses[0] = std::max(below, 0.0);
  return pld;
}

inline DiscretePLD discretize_curve(const PrivacyCurve& curve,
                                    Direction dir = Direction::kForward) {
  return discretize_curve(
      curve.grid, dir == Direction::kForward ? curve.forward : curve.backward);
}

// -- Exact enumeration oracle ---------------------------------------------------

inline constexpr std::int64_t kExactPldCap = 4000;

// Quadratic-cost ground truth: enumerates every outcome of the dominating
// pair, computes its exact privacy loss, and rounds the loss up to the next
// grid point.
inline DiscretePLD exact_pld(const VariationRatioParams& params, double mesh,
                             Direction dir = Direction::kForward) {
  if (!(mesh > 0.0)) throw ParameterError("exact_pld: mesh must be positive");
  if (params.n_blanket > kExactPldCap) {
    throw SizeError("exact_pld: n_blanket above the quadratic cap");
  }
  if (params.beta == 0.0) {
    return DiscretePLD{0.0, mesh, {1.0}, 0.0};
  }
  const double alpha = params.alpha();
  const double p_alpha = params.p_alpha();
  const double rest = std::max(0.0, 1.0 - alpha - p_alpha);
  const double r = params.r();
  const std::int64_t nb = params.n_blanket;

  auto log_kernel = [&](std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x + y > nb) return -kInf;
    return log_binom_pmf(nb, 2.0 * r, x + y) + log_binom_pmf(x + y, 0.5, x);
  };
  const LogProb c_hi = LogProb::from_prob(std::min(1.0, p_alpha));
  const LogProb c_lo = LogProb::from_prob(alpha);
  const LogProb c_rest = LogProb::from_prob(rest);

  struct Atom {
    double loss;
    double mass;
  };
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>((nb + 2) * (nb + 3) / 2));
  double inf_mass = 0.0;
  double lo_loss = kInf, hi_loss = -kInf;
  for (std::int64_t a = 0; a <= nb + 1; ++a) {
    for (std::int64_t b = 0; a + b <= nb + 1; ++b) {
      const LogProb shift_a = LogProb::from_log(log_kernel(a - 1, b));
      const LogProb shift_b = LogProb::from_log(log_kernel(a, b - 1));
      const LogProb plain = LogProb::from_log(log_kernel(a, b));
      LogProb mass_p = c_hi * shift_a + c_lo * shift_b + c_rest * plain;
      LogProb mass_q = c_lo * shift_a + c_hi * shift_b + c_rest * plain;
      if (dir == Direction::kBackward) std::swap(mass_p, mass_q);
      if (mass_p.is_zero()) continue;
      if (mass_q.is_zero()) {
        inf_mass += mass_p.prob();
        continue;
      }
      const double loss = mass_p.log() - mass_q.log();
      atoms.push_back({loss, mass_p.prob()});
      lo_loss = std::min(lo_loss, loss);
      hi_loss = std::max(hi_loss, loss);
    }
  }
  DiscretePLD pld;
  pld.mesh = mesh;
  pld.inf_mass = inf_mass;
  if (atoms.empty()) {
    pld.grid_origin = 0.0;
    pld.masses = {0.0};
    return pld;
  }
  // Snap near-integer grid offsets before the pessimistic ceil.
  auto bucket = [&](double loss, double origin) {
    const double t = (loss - origin) / mesh;
    const double nearest = std::round(t);
    if (std::abs(t - nearest) < 1e-9) return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::ceil(t));
  };
  const double origin =
      std::floor(lo_loss / mesh + 1e-9) * mesh;
  pld.grid_origin = origin;
  const std::int64_t top = bucket(hi_loss, origin);
  pld.masses.assign(static_cast<std::size_t>(top + 1), 0.0);
  std::vector<StableSum> bins(static_cast<std::size_t>(top + 1));
  for (const Atom& atom : atoms) {
    const std::int64_t j =
        std::clamp<std::int64_t>(bucket(atom.loss, origin), 0, top);
    bins[static_cast<std::size_t>(j)].add(atom.mass);
  }
  for (std::size_t j = 0; j < bins.size(); ++j) {
    pld.masses[j] = bins[j].value();
  }
  return pld;
}

// -- Composition ------------------------------------------------------------------

namespace detail {

inline std::vector<double> fft_convolve_all(
    const std::vector<const std::vector<double>*>& inputs) {
  std::size_t out_len = 1;
  for (const auto* v : inputs) out_len += v->size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> acc(n, {1.0, 0.0});
  std::vector<std::complex<double>> cur(n);
  for (const auto* v : inputs) {
    std::fill(cur.begin(), cur.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < v->size(); ++i) cur[i] = (*v)[i];
    fft(cur, false);
    for (std::size_t i = 0; i < n; ++i) acc[i] *= cur[i];
  }
  fft(acc, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = std::max(acc[i].real(), 0.0);
  }
  return out;
}

inline std::vector<double> fft_convolve_power(const std::vector<double>& v,
                                              std::uint64_t k) {
  const std::size_t out_len = (v.size() - 1) * k + 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = v[i];
  fft(a, false);
  pointwise_power(a, k);
  fft(a, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = std::max(a[i].real(), 0.0);
  }
  return out;
}

}  // namespace detail

// K-fold convolution of privacy-loss distributions. Homogeneous plans take a
// single PLD and raise its transform to the K-th power; otherwise the list
// supplies one PLD per round. Distinguishing mass composes on survival
// probabilities. The returned curve is the composed PLD's implied curve.
inline PrivacyCurve compose(const std::vector<DiscretePLD>& plds,
                            const CompositionPlan& plan) {
  plan.validate();
  if (plds.empty()) throw ParameterError("compose: no distributions");
  const double mesh = plds.front().mesh;
  const double origin = plds.front().grid_origin;
  for (const auto& pld : plds) {
    if (std::abs(pld.mesh - mesh) > 1e-12 * std::max(1.0, mesh) ||
        std::abs(pld.grid_origin - origin) > 1e-9) {
      throw ParameterError("compose: distributions must share mesh and origin");
    }
  }
  const std::uint64_t k = static_cast<std::uint64_t>(plan.rounds);
  DiscretePLD composed;
  composed.mesh = mesh;
  if (plan.rounds == 1 && plds.size() == 1) {
    composed = plds.front();
    return composed.implied_curve();
  }
  if (plan.homogeneous) {
    if (plds.size() != 1) {
      throw ParameterError("compose: homogeneous plan takes a single PLD");
    }
    composed.grid_origin = origin * static_cast<double>(k);
    composed.masses = detail::fft_convolve_power(plds.front().masses, k);
    composed.inf_mass = -std::expm1(
        static_cast<double>(k) * std::log1p(-plds.front().inf_mass));
  } else {
    if (plds.size() != static_cast<std::size_t>(plan.rounds)) {
      throw ParameterError("compose: need one PLD per round");
    }
    std::vector<const std::vector<double>*> inputs;
    inputs.reserve(plds.size());
    double origin_sum = 0.0;
    double log_survival = 0.0;
    for (const auto& pld : plds) {
      inputs.push_back(&pld.masses);
      origin_sum += pld.grid_origin;
      log_survival += std::log1p(-pld.inf_mass);
    }
    composed.grid_origin = origin_sum;
    composed.masses = detail::fft_convolve_all(inputs);
    composed.inf_mass = -std::expm1(log_survival);
  }
  return composed.implied_curve();
}

namespace detail {

// Symmetric grid reaching at least eps_upper on both sides, with 0 on a node.
inline std::vector<double> symmetric_grid(double eps_upper, double mesh) {
  const auto half = static_cast<std::int64_t>(std::ceil(eps_upper / mesh));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * half + 1));
  for (std::int64_t i = -half; i <= half; ++i) {
    grid.push_back(static_cast<double>(i) * mesh);
  }
  return grid;
}

inline double plan_eps_upper(const VariationRatioParams& params,
                             const CompositionPlan& plan) {
  if (plan.eps_upper) return *plan.eps_upper;
  BoundRequest req;
  req.delta = plan.delta_error / static_cast<double>(plan.rounds);
  req.iters = 20;
  req.eval = plan.eval;
  const double eps = upper_bound(params, req).eps;
  return std::max(eps, plan.default_mesh());
}

}  // namespace detail

// K homogeneous rounds of the mechanism described by params: build the
// single-round curve over [-eps_upper, eps_upper], discretize both
// directions pessimistically, convolve, and merge directions.
inline PrivacyCurve compose_params(const VariationRatioParams& params,
                                   const CompositionPlan& plan) {
  plan.validate();
  if (plan.gamma && *plan.gamma < 1.0) {
    throw ParameterError("compose_params: use compose_subsampled for gamma<1");
  }
  const double mesh = plan.default_mesh();
  const double eps_upper = detail::plan_eps_upper(params, plan);
  const auto grid = detail::symmetric_grid(eps_upper, mesh);
  PrivacyCurve single = build_curve(params, grid.front(), grid.back(),
                                    grid.size(), plan.eval);
  single.grid = grid;  // exact node values, no accumulated stepping error
  const DiscretePLD fwd = discretize_curve(single, Direction::kForward);
  const DiscretePLD bwd = discretize_curve(single, Direction::kBackward);
  CompositionPlan inner = plan;
  inner.homogeneous = true;
  PrivacyCurve cf = compose({fwd}, inner);
  PrivacyCurve cb = compose({bwd}, inner);
  PrivacyCurve out;
  out.grid = cf.grid;
  out.forward = cf.forward;
  out.backward = cb.forward;
  return out;
}

// Subsampled analogue: each round is the gamma-mixture of the dominating
// pair; both branch formulas feed the discretization.
inline PrivacyCurve compose_subsampled(const VariationRatioParams& params,
                                       double gamma_rate,
                                       const CompositionPlan& plan) {
  plan.validate();
  if (!(gamma_rate > 0.0 && gamma_rate <= 1.0)) {
    throw ParameterError("compose_subsampled: gamma must lie in (0,1]");
  }
  if (gamma_rate == 1.0) {
    CompositionPlan unsub = plan;
    unsub.gamma.reset();
    return compose_params(params, unsub);
  }
  const double mesh = plan.default_mesh();
  const double eps_upper = detail::plan_eps_upper(params, plan);
  const auto grid = detail::symmetric_grid(eps_upper, mesh);
  PrivacyCurve single = build_subsampled_curve(
      params, gamma_rate, grid.front(), grid.back(), grid.size(), plan.eval);
  single.grid = grid;
  const DiscretePLD pld = discretize_curve(single, Direction::kForward);
  CompositionPlan inner = plan;
  inner.homogeneous = true;
  PrivacyCurve composed = compose({pld}, inner);
  composed.backward = composed.forward;
  return composed;
}

}  // namespace vr

#endif  // VR_ACCOUNTANT_HPP_

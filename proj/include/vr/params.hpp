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

#ifndef VR_PARAMS_HPP_
#define VR_PARAMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vr/errors.hpp"
#include "vr/numerics.hpp"

namespace vr {

// Parameters of a local randomizer under shuffling: p bounds the pairwise
// probability ratio of the first user's outputs, beta their total variation,
// and q the ratio of the first user's output density to any other user's
// (blanket) density. n_blanket counts blanket messages: n-1 for single-message
// protocols, n'*(m-1) when each of n' users sends m-1 input-independent
// messages.
//
// p = +inf is first-class: alpha degenerates to 0 while p*alpha -> beta, and
// every downstream formula consumes (alpha, p_alpha, r) so the infinite case
// needs no further branching.
struct VariationRatioParams {
  double p = 0.0;
  double beta = 0.0;
  double q = 1.0;
  std::int64_t n_blanket = 0;
  bool degenerate = false;

  static VariationRatioParams create(double p, double beta, double q,
                                     std::int64_t n_blanket = 0,
                                     bool degenerate = false) {
    if (!(p > 1.0)) {
      throw ParameterError("params: ratio bound p must satisfy p > 1");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ParameterError("params: variation bound beta must lie in [0,1]");
    }
    if (std::isfinite(p) && beta > (p - 1.0) / (p + 1.0) * (1.0 + 1e-12)) {
      throw ParameterError(
          "params: beta exceeds (p-1)/(p+1), impossible for a (log p)-LDP "
          "randomizer");
    }
    if (!(q >= 1.0) || std::isinf(q)) {
      throw ParameterError("params: blanket ratio q must lie in [1, +inf)");
    }
    if (n_blanket < 0) {
      throw ParameterError("params: n_blanket must be non-negative");
    }
    VariationRatioParams out{p, beta, q, n_blanket, degenerate};
    if (std::isfinite(p)) out.beta = std::min(beta, (p - 1.0) / (p + 1.0));
    if (out.p_alpha() / q > 0.5 + 1e-15) {
      throw ParameterError(
          "params: clone probability r = beta*p/((p-1)*q) exceeds 1/2");
    }
    return out;
  }

  double alpha() const { return std::isinf(p) ? 0.0 : beta / (p - 1.0); }
  double p_alpha() const { return std::isinf(p) ? beta : beta * p / (p - 1.0); }
  double r() const { return std::min(p_alpha() / q, 0.5); }

  VariationRatioParams with_n_blanket(std::int64_t nb) const {
    VariationRatioParams out = *this;
    if (nb < 0) throw ParameterError("params: n_blanket must be non-negative");
    out.n_blanket = nb;
    return out;
  }
};

// Directional variant used by the amplification lower bounds: the region
// where the first user's two output distributions differ upward or downward
// may mimic other users at different expected ratios q0, q1.
struct AsymmetricParams {
  double p = 0.0;
  double beta = 0.0;
  double q0 = 1.0;
  double q1 = 1.0;
  std::int64_t n_blanket = 0;
  bool degenerate = false;

  static AsymmetricParams create(double p, double beta, double q0, double q1,
                                 std::int64_t n_blanket = 0,
                                 bool degenerate = false) {
    if (!(p > 1.0)) {
      throw ParameterError("params: ratio bound p must satisfy p > 1");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ParameterError("params: variation bound beta must lie in [0,1]");
    }
    if (std::isfinite(p) && beta > (p - 1.0) / (p + 1.0) * (1.0 + 1e-12)) {
      throw ParameterError("params: beta exceeds (p-1)/(p+1)");
    }
    if (!(q0 >= 1.0) || !(q1 >= 1.0) || std::isinf(q0) || std::isinf(q1)) {
      throw ParameterError("params: blanket ratios must lie in [1, +inf)");
    }
    if (std::isfinite(p)) {
      const double ratio = q0 / q1;
      if (ratio < (1.0 / p) * (1.0 - 1e-9) || ratio > p * (1.0 + 1e-9)) {
        throw ParameterError(
            "params: q0/q1 outside [1/p, p]; the expectation form requires a "
            "monotone probability ratio");
      }
    }
    if (n_blanket < 0) {
      throw ParameterError("params: n_blanket must be non-negative");
    }
    AsymmetricParams out{p, beta, q0, q1, n_blanket, degenerate};
    if (std::isfinite(p)) out.beta = std::min(beta, (p - 1.0) / (p + 1.0));
    if (out.p_alpha() / q0 + out.p_alpha() / q1 > 1.0 + 1e-15) {
      throw ParameterError("params: r0 + r1 exceeds 1");
    }
    return out;
  }

  static AsymmetricParams from_symmetric(const VariationRatioParams& s) {
    return create(s.p, s.beta, s.q, s.q, s.n_blanket, s.degenerate);
  }

  double alpha() const { return std::isinf(p) ? 0.0 : beta / (p - 1.0); }
  double p_alpha() const { return std::isinf(p) ? beta : beta * p / (p - 1.0); }
  double r0() const { return std::min(p_alpha() / q0, 1.0); }
  double r1() const { return std::min(p_alpha() / q1, 1.0); }

  AsymmetricParams with_n_blanket(std::int64_t nb) const {
    AsymmetricParams out = *this;
    if (nb < 0) throw ParameterError("params: n_blanket must be non-negative");
    out.n_blanket = nb;
    return out;
  }
};

// An explicit finite local randomizer: one output distribution per input.
// blanket_rows optionally lists other users' output distributions; when
// empty, the matrix rows themselves serve as blanket candidates.
struct MechanismSpec {
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> blanket_rows;

  void validate() const {
    if (rows.empty()) throw ParameterError("mechanism: no rows");
    const std::size_t width = rows.front().size();
    if (width == 0) throw ParameterError("mechanism: empty output domain");
    auto check = [width](const std::vector<double>& row) {
      if (row.size() != width) {
        throw ParameterError("mechanism: inconsistent row widths");
      }
      StableSum sum;
      for (double v : row) {
        if (!(v >= 0.0)) {
          throw ParameterError("mechanism: negative probability entry");
        }
        sum.add(v);
      }
      if (std::abs(sum.value() - 1.0) > 1e-12) {
        throw ParameterError("mechanism: row does not sum to 1");
      }
    };
    for (const auto& row : rows) check(row);
    for (const auto& row : blanket_rows) check(row);
  }
};

namespace detail {

inline double binom_coeff(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  k = std::min(k, n - k);
  if (n <= 60) {
    double v = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) {
      v *= static_cast<double>(n - k + i);
      v /= static_cast<double>(i);
    }
    return v;
  }
  return std::exp(std::lgamma(static_cast<double>(n + 1)) -
                  std::lgamma(static_cast<double>(k + 1)) -
                  std::lgamma(static_cast<double>(n - k + 1)));
}

}  // namespace detail

// -- Mechanism catalog ------------------------------------------------------

using MechanismArgs = std::map<std::string, double>;

namespace detail {

inline double require_arg(const MechanismArgs& args, const std::string& name) {
  auto it = args.find(name);
  if (it == args.end()) {
    throw ParameterError("catalog: missing argument --" + name);
  }
  return it->second;
}

inline std::int64_t require_int(const MechanismArgs& args,
                                const std::string& name) {
  const double v = require_arg(args, name);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw ParameterError("catalog: argument --" + name +
                         " must be an integer");
  }
  return static_cast<std::int64_t>(v);
}

inline double require_positive(const MechanismArgs& args,
                               const std::string& name) {
  const double v = require_arg(args, name);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError("catalog: argument --" + name + " must be positive");
  }
  return v;
}

struct TableRow {
  double p = 0.0;
  double beta = 0.0;
  double q = 1.0;
  bool multi_message = false;
};

inline TableRow catalog_row(const std::string& id, const MechanismArgs& args) {
  const auto ldp = [&](double beta, double eps0) {
    return TableRow{std::exp(eps0), beta, std::exp(eps0), false};
  };
  if (id == "general-ldp" || id == "rr2" || id == "duchi" || id == "harmony") {
    const double e = std::exp(require_positive(args, "eps0"));
    return TableRow{e, (e - 1.0) / (e + 1.0), e, false};
  }
  if (id == "laplace-unit" || id == "piecewise") {
    const double eps0 = require_positive(args, "eps0");
    return ldp(-std::expm1(-eps0 / 2.0), eps0);
  }
  if (id == "krr") {
    const double eps0 = require_positive(args, "eps0");
    const double d = static_cast<double>(require_int(args, "d"));
    if (d < 2) throw ParameterError("catalog: krr requires d >= 2");
    const double e = std::exp(eps0);
    return ldp((e - 1.0) / (e + d - 1.0), eps0);
  }
  if (id == "rappor") {
    const double eps0 = require_positive(args, "eps0");
    if (require_int(args, "d") < 2) {
      throw ParameterError("catalog: rappor requires d >= 2");
    }
    const double eh = std::exp(eps0 / 2.0);
    return ldp((eh - 1.0) / (eh + 1.0), eps0);
  }
  if (id == "k-subset") {
    const double eps0 = require_positive(args, "eps0");
    const std::int64_t d = require_int(args, "d");
    const std::int64_t k = require_int(args, "k");
    if (d < 2 || k < 1 || k > d) {
      throw ParameterError("catalog: k-subset requires d >= 2, 1 <= k <= d");
    }
    const double e = std::exp(eps0);
    const double num =
        (e - 1.0) * (binom_coeff(d - 1, k - 1) - binom_coeff(d - 2, k - 2));
    const double den = e * binom_coeff(d - 1, k - 1) + binom_coeff(d - 1, k);
    return ldp(num / den, eps0);
  }
  if (id == "local-hash") {
    const double eps0 = require_positive(args, "eps0");
    const double l = static_cast<double>(require_int(args, "l"));
    if (l < 2) throw ParameterError("catalog: local-hash requires l >= 2");
    const double e = std::exp(eps0);
    return ldp((e - 1.0) / (e + l - 1.0), eps0);
  }
  if (id == "hadamard" || id == "hadamard-B") {
    const double eps0 = require_positive(args, "eps0");
    const double K = static_cast<double>(require_int(args, "K"));
    const double s = static_cast<double>(require_int(args, "s"));
    if (K < 2 || s < 1 || s > K) {
      throw ParameterError("catalog: hadamard requires K >= 2, 1 <= s <= K");
    }
    const double e = std::exp(eps0);
    const double num =
        id == "hadamard" ? s * (e - 1.0) / 2.0 : s * (e - 1.0);
    return ldp(num / (s * e + K - s), eps0);
  }
  if (id == "sampling-rappor") {
    const double eps0 = require_positive(args, "eps0");
    const double d = static_cast<double>(require_int(args, "d"));
    const double s = static_cast<double>(require_int(args, "s"));
    if (d < 1 || s < 1 || s > d) {
      throw ParameterError(
          "catalog: sampling-rappor requires 1 <= s <= d");
    }
    const double eh = std::exp(eps0 / 2.0);
    return ldp(s * (eh - 1.0) / (d * (eh + 1.0)), eps0);
  }
  if (id == "pckv-grr") {
    const double eps0 = require_positive(args, "eps0");
    const double d = static_cast<double>(require_int(args, "d"));
    const double s = static_cast<double>(require_int(args, "s"));
    if (d < 1 || s < 1 || s > d) {
      throw ParameterError("catalog: pckv-grr requires 1 <= s <= d");
    }
    const double e = std::exp(eps0);
    return ldp(s * (e - 1.0) / (s * e + 2.0 * d - s), eps0);
  }
  if (id == "wheel") {
    const double eps0 = require_positive(args, "eps0");
    const double s = static_cast<double>(require_int(args, "s"));
    const double len = require_positive(args, "p");
    if (s < 1 || !(s * len <= 1.0)) {
      throw ParameterError("catalog: wheel requires s >= 1 and s*p <= 1");
    }
    const double e = std::exp(eps0);
    const double sp = s * len;
    return ldp(sp * (e - 1.0) / (sp * e + 1.0 - sp), eps0);
  }
  if (id == "subset-exp") {
    const double eps0 = require_positive(args, "eps0");
    const std::int64_t d = require_int(args, "d");
    const std::int64_t s = require_int(args, "s");
    const std::int64_t k = require_int(args, "k");
    if (d < 1 || s < 1 || s > d || k < 1 || k > d) {
      throw ParameterError(
          "catalog: subset-exp requires 1 <= s <= d and 1 <= k <= d");
    }
    const double e = std::exp(eps0);
    const double num =
        (e - 1.0) * (binom_coeff(d - s, k) - binom_coeff(d - 2 * s, k));
    const double den = e * (binom_coeff(d, k) - binom_coeff(d - s, k)) +
                       binom_coeff(d - s, k);
    return ldp(num / den, eps0);
  }
  if (id == "collision") {
    const double eps0 = require_positive(args, "eps0");
    const double s = static_cast<double>(require_int(args, "s"));
    const double l = static_cast<double>(require_int(args, "l"));
    if (s < 1 || l < 2 || s > l) {
      throw ParameterError("catalog: collision requires 1 <= s <= l, l >= 2");
    }
    const double e = std::exp(eps0);
    return ldp(std::min(s, l - s) * (e - 1.0) / (s * e + l - s), eps0);
  }
  if (id == "privkv") {
    const double eps1 = require_positive(args, "eps1");
    const double eps2 = require_positive(args, "eps2");
    const double d = static_cast<double>(require_int(args, "d"));
    const double s = static_cast<double>(require_int(args, "s"));
    if (d < 1 || s < 1 || s > d) {
      throw ParameterError("catalog: privkv requires 1 <= s <= d");
    }
    const double e1 = std::exp(eps1);
    const double e2 = std::exp(eps2);
    const double inner = std::max(e1 * (e2 - 1.0) / (e2 + 1.0),
                                  e1 - 1.0 + (e2 - 1.0) / (2.0 * (e2 + 1.0)));
    return ldp(2.0 * s * inner / (d * (e1 + 1.0)), eps1 + eps2);
  }
  if (id == "metric-general" || id == "metric-laplace" ||
      id == "metric-planar-laplace") {
    const double d01 = require_arg(args, "d01");
    const double dmax = require_arg(args, "dmax");
    if (!(d01 >= 0.0) || !(dmax >= d01)) {
      throw ParameterError("catalog: metric rows require 0 <= d01 <= dmax");
    }
    double beta;
    if (id == "metric-general") {
      beta = -std::expm1(-d01) / (1.0 + std::exp(-d01));
    } else if (id == "metric-laplace") {
      beta = -std::expm1(-d01 / 2.0);
    } else {
      beta = planar_laplace_tv(d01);
    }
    if (d01 == 0.0) {
      return TableRow{1.0 + 1e-12, 0.0, std::exp(dmax), false};
    }
    return TableRow{std::exp(d01), beta, std::exp(dmax), false};
  }
  if (id == "witchhat") {
    const double B = require_positive(args, "B");
    const double m = require_positive(args, "m");
    const double F = require_positive(args, "F");
    const double d01 = require_arg(args, "d01");
    const double dmax = require_arg(args, "dmax");
    if (!(d01 >= 0.0) || !(dmax >= d01)) {
      throw ParameterError("catalog: witchhat requires 0 <= d01 <= dmax");
    }
    if (!(d01 / F <= m)) {
      throw ParameterError("catalog: witchhat requires d01/F <= m");
    }
    const double beta = 2.0 * (std::exp(m) - std::exp(d01 / F) + d01 / F - m) /
                        (F * (std::exp(m) - 1.0) + 2.0 * B);
    if (d01 == 0.0) return TableRow{1.0 + 1e-12, 0.0, std::exp(dmax), false};
    return TableRow{std::exp(d01), beta, std::exp(dmax), false};
  }
  if (id == "balcer-coin") {
    const double coin = require_arg(args, "coin");
    if (!(coin > 0.0 && coin < 1.0)) {
      throw ParameterError("catalog: balcer-coin requires coin in (0,1)");
    }
    return TableRow{kInf, 1.0, std::max(1.0 / coin, 1.0 / (1.0 - coin)), true};
  }
  if (id == "balcer-uniform") {
    return TableRow{kInf, 1.0, 2.0, true};
  }
  if (id == "cheu") {
    const double f = require_arg(args, "f");
    if (!(f > 0.0 && f <= 0.5)) {
      throw ParameterError("catalog: cheu requires flip probability in (0,0.5]");
    }
    const double g = (1.0 - f) / f;
    if (f == 0.5) return TableRow{1.0 + 1e-12, 0.0, 1.0, true};
    return TableRow{g * g, 1.0 - 2.0 * f, g, true};
  }
  if (id == "balls-into-bins") {
    const double d = static_cast<double>(require_int(args, "d"));
    const double s = static_cast<double>(require_int(args, "s"));
    if (d < 1 || s < 1 || s > d) {
      throw ParameterError("catalog: balls-into-bins requires 1 <= s <= d");
    }
    return TableRow{kInf, 1.0, d / s, true};
  }
  if (id == "mixdump") {
    const double d = static_cast<double>(require_int(args, "d"));
    const double f = require_arg(args, "f");
    if (d < 2 || !(f > 0.0 && f <= (d - 1.0) / d)) {
      throw ParameterError(
          "catalog: mixdump requires d >= 2 and f in (0,(d-1)/d]");
    }
    const double p = (1.0 - f) * (d - 1.0) / f;
    const double beta = ((1.0 - f) * (d - 1.0) - f) / (d - 1.0);
    if (p <= 1.0) return TableRow{1.0 + 1e-12, 0.0, (1.0 - f) * d, true};
    return TableRow{p, beta, (1.0 - f) * d, true};
  }
  throw ParameterError("catalog: unknown mechanism id '" + id + "'");
}

}  // namespace detail

inline bool catalog_is_multi_message(const std::string& id) {
  return id == "balcer-coin" || id == "balcer-uniform" || id == "cheu" ||
         id == "balls-into-bins" || id == "mixdump";
}

// Looks up a table row and evaluates it at the given arguments. n_blanket is
// filled from optional args "n" (number of users) and, for multi-message
// rows, "m" (messages per user, default 2): single-message rows hide behind
// n-1 blankets, multi-message rows behind n*(m-1).
inline VariationRatioParams catalog(const std::string& id,
                                    const MechanismArgs& args) {
  const detail::TableRow row = detail::catalog_row(id, args);
  std::int64_t n_blanket = 0;
  if (auto it = args.find("n"); it != args.end()) {
    const std::int64_t n = detail::require_int(args, "n");
    if (n < 1) throw ParameterError("catalog: n must be >= 1");
    if (row.multi_message) {
      std::int64_t m = 2;
      if (args.count("m")) m = detail::require_int(args, "m");
      if (m < 2) {
        throw ParameterError("catalog: multi-message rows require m >= 2");
      }
      n_blanket = n * (m - 1);
    } else {
      n_blanket = n - 1;
    }
  }
  return VariationRatioParams::create(row.p, row.beta, row.q, n_blanket,
                                      row.beta == 0.0);
}

// -- First-principles derivation ---------------------------------------------

// Scans an explicit stochastic matrix for the worst-case probability ratio p,
// the worst-case pairwise total variation beta, and the worst-case
// first-user-to-blanket ratio q. Ratios treat 0/0 as 1: outputs outside both
// supports carry no information.
inline VariationRatioParams derive_variation_ratio(const MechanismSpec& spec) {
  spec.validate();
  const auto& rows = spec.rows;
  const auto& blankets =
      spec.blanket_rows.empty() ? spec.rows : spec.blanket_rows;
  const std::size_t width = rows.front().size();

  double p_hat = 1.0;
  double beta_hat = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      StableSum tv;
      for (std::size_t y = 0; y < width; ++y) {
        const double a = rows[i][y];
        const double b = rows[j][y];
        if (a == 0.0 && b == 0.0) continue;
        if (a == 0.0 || b == 0.0) {
          p_hat = kInf;
        } else {
          p_hat = std::max(p_hat, std::max(a / b, b / a));
        }
        tv.add(std::max(0.0, a - b));
      }
      beta_hat = std::max(beta_hat, tv.value());
    }
  }

  double q_hat = 1.0;
  for (const auto& row : rows) {
    for (const auto& blanket : blankets) {
      for (std::size_t y = 0; y < width; ++y) {
        const double a = row[y];
        const double b = blanket[y];
        if (a == 0.0) continue;
        if (b == 0.0) {
          throw UnboundedRatioError(
              "derive: a blanket row assigns zero probability to a supported "
              "output; the ratio bound q is unbounded");
        }
        q_hat = std::max(q_hat, a / b);
      }
    }
  }

  if (beta_hat == 0.0) {
    return VariationRatioParams::create(1.0 + 1e-12, 0.0, q_hat, 0, true);
  }
  if (std::isfinite(p_hat)) {
    beta_hat = std::min(beta_hat, (p_hat - 1.0) / (p_hat + 1.0));
  }
  return VariationRatioParams::create(p_hat, beta_hat, q_hat, 0, false);
}

// Worst-case-input derivation for the lower bound: p and beta come from the
// two challenge distributions; the blanket candidate maximizing the smaller
// of the two region-wise expected ratios supplies (q0, q1).
inline AsymmetricParams derive_lower_params(
    const std::vector<double>& dist0, const std::vector<double>& dist1,
    const std::vector<std::vector<double>>& candidate_blankets) {
  if (candidate_blankets.empty()) {
    throw ParameterError("derive_lower_params: empty candidate set");
  }
  MechanismSpec check{{dist0, dist1}, candidate_blankets};
  check.validate();
  const std::size_t width = dist0.size();

  StableSum up1, up0, down1, down0;
  for (std::size_t y = 0; y < width; ++y) {
    if (dist1[y] > dist0[y]) {
      up1.add(dist1[y]);
      up0.add(dist0[y]);
    } else if (dist1[y] < dist0[y]) {
      down0.add(dist0[y]);
      down1.add(dist1[y]);
    }
  }
  const double beta = up1.value() - up0.value();
  if (beta <= 0.0) {
    return AsymmetricParams::create(1.0 + 1e-12, 0.0, 1.0, 1.0, 0, true);
  }
  const double p = up0.value() > 0.0 ? up1.value() / up0.value() : kInf;

  double best_score = -1.0;
  double best_q1 = kInf, best_q0 = kInf;
  for (const auto& cand : candidate_blankets) {
    StableSum mass_up, mass_down;
    for (std::size_t y = 0; y < width; ++y) {
      if (dist1[y] > dist0[y]) mass_up.add(cand[y]);
      if (dist1[y] < dist0[y]) mass_down.add(cand[y]);
    }
    const double ratio1 =
        mass_up.value() > 0.0 ? up1.value() / mass_up.value() : kInf;
    const double ratio0 =
        mass_down.value() > 0.0 ? down0.value() / mass_down.value() : kInf;
    const double score = std::min(ratio1, ratio0);
    if (score > best_score) {
      best_score = score;
      best_q1 = ratio1;
      best_q0 = ratio0;
    }
  }
  if (std::isinf(best_q0) || std::isinf(best_q1)) {
    throw UnboundedRatioError(
        "derive_lower_params: selected blanket has zero mass on a "
        "distinguishing region");
  }
  return AsymmetricParams::create(p, beta, std::max(1.0, best_q0),
                                  std::max(1.0, best_q1));
}

// -- Parallel composition -----------------------------------------------------

// Sampling-based composite randomizer: each user answers one of K queries,
// chosen with the given weights; the composite's variation bound is the
// weighted average of the base bounds while p and q stay at e^{eps0}.
inline VariationRatioParams parallel_compose(
    const std::vector<VariationRatioParams>& base,
    const std::vector<double>& weights) {
  if (base.empty() || base.size() != weights.size()) {
    throw ParameterError("parallel_compose: need one weight per base");
  }
  const double p = base.front().p;
  const double q = base.front().q;
  const std::int64_t nb = base.front().n_blanket;
  if (!std::isfinite(p) || std::abs(p - q) > 1e-9 * p) {
    throw ParameterError(
        "parallel_compose: theorem requires common finite p = q = e^{eps0}");
  }
  StableSum beta_bar, weight_sum;
  for (std::size_t k = 0; k < base.size(); ++k) {
    if (std::abs(base[k].p - p) > 1e-9 * p ||
        std::abs(base[k].q - q) > 1e-9 * q) {
      throw ParameterError(
          "parallel_compose: heterogeneous p or q across base randomizers");
    }
    if (base[k].n_blanket != nb) {
      throw ParameterError("parallel_compose: heterogeneous n_blanket");
    }
    if (!(weights[k] >= 0.0)) {
      throw ParameterError("parallel_compose: negative weight");
    }
    beta_bar.add(weights[k] * base[k].beta);
    weight_sum.add(weights[k]);
  }
  if (std::abs(weight_sum.value() - 1.0) > 1e-9) {
    throw ParameterError("parallel_compose: weights must sum to 1");
  }
  const double beta = std::min(beta_bar.value(), (p - 1.0) / (p + 1.0));
  return VariationRatioParams::create(p, beta, q, nb, beta == 0.0);
}

}  // namespace vr

#endif  // VR_PARAMS_HPP_

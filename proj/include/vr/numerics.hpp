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

#ifndef VR_NUMERICS_HPP_
#define VR_NUMERICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "vr/errors.hpp"

namespace vr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A probability kept in the natural-log domain. Stays in log space through
// products and mixtures; exponentiated once at the end. The empty event is
// -inf.
class LogProb {
 public:
  LogProb() : log_(-kInf) {}

  static LogProb zero() { return LogProb(); }
  static LogProb one() { return from_log(0.0); }

  static LogProb from_log(double log_value) {
    // Tiny positive values arise from rounding in otherwise-exact sums.
    if (log_value > 1e-9) {
      throw ParameterError("LogProb: log value " + std::to_string(log_value) +
                           " implies a probability above 1");
    }
    LogProb lp;
    lp.log_ = std::min(log_value, 0.0);
    return lp;
  }

  static LogProb from_prob(double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
      throw ParameterError("LogProb: probability " + std::to_string(prob) +
                           " outside [0,1]");
    }
    return from_log(prob == 0.0 ? -kInf : std::log(prob));
  }

  double log() const { return log_; }
  double prob() const { return std::exp(log_); }
  bool is_zero() const { return log_ == -kInf; }

  // Product of probabilities.
  LogProb operator*(LogProb other) const {
    if (is_zero() || other.is_zero()) return zero();
    return from_log(log_ + other.log_);
  }

  // Mixture sum, clamped at one.
  LogProb operator+(LogProb other) const {
    if (is_zero()) return other;
    if (other.is_zero()) return *this;
    double hi = std::max(log_, other.log_);
    double lo = std::min(log_, other.log_);
    return from_log(hi + std::log1p(std::exp(lo - hi)));
  }

 private:
  double log_;
};

// Neumaier-compensated accumulator. Tracks the rounding error of every add so
// that long mixed-magnitude sums keep ~double precision.
class StableSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void add(const StableSum& other) {
    add(other.sum_);
    comp_ += other.comp_;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Compensated sum of a sequence of signed terms.
inline double stable_sum(std::span<const double> terms) {
  StableSum acc;
  for (double t : terms) acc.add(t);
  return acc.value();
}

namespace detail {

// stirlerr(n) = log(n!) - log(sqrt(2*pi*n) * (n/e)^n), after Loader's
// algorithm for exact binomial tails.
inline double stirlerr(std::int64_t n) {
  static constexpr double kS0 = 1.0 / 12.0;
  static constexpr double kS1 = 1.0 / 360.0;
  static constexpr double kS2 = 1.0 / 1260.0;
  static constexpr double kS3 = 1.0 / 1680.0;
  static constexpr double kS4 = 1.0 / 1188.0;
  // Exact values for n < 16.
  static constexpr double kSfe[16] = {
      0.0,
      0.081061466795327258219670264,
      0.041340695955409294093822081,
      0.0276779256849983391487892927,
      0.020790672103765093111522771,
      0.0166446911898211921631948653,
      0.013876128823070747998745727,
      0.0118967099458917700950557241,
      0.010411265261972096497478567,
      0.0092554621827127329177286366,
      0.008330563433362871256469318,
      0.0075736754879518407949720242,
      0.006942840107209529865664152,
      0.0064089941880042070684396310,
      0.005951370112758847735624416,
      0.0055547335519628013710386899};
  if (n < 16) return kSfe[n];
  const double n1 = 1.0 / static_cast<double>(n);
  const double n2 = n1 * n1;
  if (n > 500) return (kS0 - kS1 * n2) * n1;
  if (n > 80) return (kS0 - (kS1 - kS2 * n2) * n2) * n1;
  if (n > 35) return (kS0 - (kS1 - (kS2 - kS3 * n2) * n2) * n2) * n1;
  return (kS0 - (kS1 - (kS2 - (kS3 - kS4 * n2) * n2) * n2) * n2) * n1;
}

// bd0(x, np) = x*log(x/np) + np - x, evaluated by series when x ~ np to avoid
// the log-of-near-one cancellation.
inline double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    const double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1;; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2.0 * j + 1.0);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace detail

// log P[Binomial(c, s) = k]. Loader's saddle-point form; relative error of the
// resulting mass stays ~1e-14 up to c = 1e9, far from the naive lgamma
// cancellation.
inline double log_binom_pmf(std::int64_t c, double s, std::int64_t k) {
  if (c < 0) throw ParameterError("binom_pmf: negative trial count");
  if (!(s >= 0.0 && s <= 1.0)) {
    throw ParameterError("binom_pmf: success probability outside [0,1]");
  }
  if (k < 0 || k > c) return -kInf;
  if (s == 0.0) return k == 0 ? 0.0 : -kInf;
  if (s == 1.0) return k == c ? 0.0 : -kInf;
  if (k == 0) return static_cast<double>(c) * std::log1p(-s);
  if (k == c) return static_cast<double>(c) * std::log(s);
  const double n = static_cast<double>(c);
  const double x = static_cast<double>(k);
  const double lc = detail::stirlerr(c) - detail::stirlerr(k) -
                    detail::stirlerr(c - k) - detail::bd0(x, n * s) -
                    detail::bd0(n - x, n * (1.0 - s));
  const double lf =
      std::log(2.0 * M_PI) + std::log(x) + std::log1p(-x / n);
  return lc - 0.5 * lf;
}

inline double binom_pmf(std::int64_t c, double s, std::int64_t k) {
  return std::exp(log_binom_pmf(c, s, k));
}

namespace detail {

// P[Binomial(c, s) <= k] for 0 <= k < c via the regularized incomplete beta.
inline double binom_cdf(std::int64_t c, double s, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k >= c) return 1.0;
  return boost::math::ibeta(static_cast<double>(c - k),
                            static_cast<double>(k + 1), 1.0 - s);
}

// P[Binomial(c, s) >= k].
inline double binom_sf(std::int64_t c, double s, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (k > c) return 0.0;
  return boost::math::ibeta(static_cast<double>(k),
                            static_cast<double>(c - k + 1), s);
}

}  // namespace detail

// Sum_{i in [max(lo,0), min(hi,c)]} C(c,i) s^i (1-s)^(c-i); 0 on an empty
// clamped range. Two incomplete-beta calls, picking the tail pairing with the
// least cancellation.
inline double binom_cdf_range(std::int64_t c, double s, std::int64_t lo,
                              std::int64_t hi) {
  if (c < 0) throw ParameterError("binom_cdf_range: negative trial count");
  if (!(s >= 0.0 && s <= 1.0)) {
    throw ParameterError("binom_cdf_range: success probability outside [0,1]");
  }
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, c);
  if (lo > hi) return 0.0;
  if (lo == 0 && hi == c) return 1.0;
  if (s == 0.0) return lo == 0 ? 1.0 : 0.0;
  if (s == 1.0) return hi == c ? 1.0 : 0.0;
  if (lo == 0) return detail::binom_cdf(c, s, hi);
  if (hi == c) return detail::binom_sf(c, s, lo);
  const double mean = static_cast<double>(c) * s;
  double v;
  if (static_cast<double>(lo) > mean) {
    v = detail::binom_sf(c, s, lo) - detail::binom_sf(c, s, hi + 1);
  } else {
    v = detail::binom_cdf(c, s, hi) - detail::binom_cdf(c, s, lo - 1);
  }
  return std::clamp(v, 0.0, 1.0);
}

// Central window [lo, hi] of Binomial(c, s) leaving at most tail_mass
// probability on each side. Used to skip negligible slices of the
// expectation loops.
struct BinomialWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

inline BinomialWindow binom_central_window(std::int64_t c, double s,
                                           double tail_mass) {
  BinomialWindow w{0, c};
  if (c == 0 || s <= 0.0 || s >= 1.0 || tail_mass <= 0.0) return w;
  const double mean = static_cast<double>(c) * s;
  // Largest k with P[X <= k-1] <= tail_mass.
  std::int64_t lo = 0, hi = static_cast<std::int64_t>(mean);
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (detail::binom_cdf(c, s, mid - 1) <= tail_mass) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  w.lo = lo;
  // Smallest k with P[X >= k+1] <= tail_mass.
  lo = static_cast<std::int64_t>(mean);
  hi = c;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (detail::binom_sf(c, s, mid + 1) <= tail_mass) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  w.hi = hi;
  return w;
}

// Total variation between two unit-scale planar Laplace densities whose
// centers are d01 apart. The strip integral becomes, in polar coordinates
// around one center,
//   (2/pi) * Int_0^{pi/2} 1 - (1 + h/sin(phi)) * exp(-h/sin(phi)) dphi
// with h = d01/2; the radial part integrates in closed form and the cusp of
// the original integrand disappears.
inline double planar_laplace_tv(double d01) {
  if (!(d01 >= 0.0)) {
    throw ParameterError("planar_laplace_tv: distance must be non-negative");
  }
  if (d01 == 0.0) return 0.0;
  const double h = 0.5 * d01;
  auto integrand = [h](double phi) {
    const double sp = std::sin(phi);
    if (sp <= 0.0) return 1.0;
    const double radius = h / sp;
    if (radius > 700.0) return 1.0;
    // 1 - (1+R)e^{-R} = -expm1(log1p(R) - R), accurate for small R too.
    return -std::expm1(std::log1p(radius) - radius);
  };
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, M_PI / 2.0, 15, 1e-12, &error);
  return std::clamp(v * 2.0 / M_PI, 0.0, 1.0);
}

}  // namespace vr

#endif  // VR_NUMERICS_HPP_

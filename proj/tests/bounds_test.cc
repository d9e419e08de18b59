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

#include "vr/bounds.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace vr {
namespace {

constexpr double kE = 2.718281828459045;

VariationRatioParams general_ldp(double eps0, std::int64_t n_users) {
  const double e = std::exp(eps0);
  return VariationRatioParams::create(e, (e - 1.0) / (e + 1.0), e,
                                      n_users - 1);
}

TEST(UpperBound, GeneralLdpTenThousandUsers) {
  BoundRequest req;
  req.delta = 1e-6;  // 0.01 / n
  req.iters = 20;
  const auto res = upper_bound(general_ldp(1.0, 10000), req);
  const double resolution = 1.0 / (1 << 20);
  EXPECT_NEAR(res.eps, 0.0433, 1e-4 + resolution);
  EXPECT_NEAR(res.resolution, resolution, 1e-12);
  EXPECT_EQ(res.kind, BoundKind::kUpper);

  req.iters = 10;
  const auto coarse = upper_bound(general_ldp(1.0, 10000), req);
  EXPECT_NEAR(coarse.eps, 0.0440, 1e-4 + 1.0 / (1 << 10));
  EXPECT_GE(coarse.eps, res.eps);
}

TEST(UpperBound, DegenerateBetaShortCircuits) {
  const auto params = VariationRatioParams::create(2.0, 0.0, 2.0, 10000);
  const auto res = upper_bound(params, BoundRequest{});
  EXPECT_DOUBLE_EQ(res.eps, 0.0);
  EXPECT_EQ(res.evaluations, 0);
}

TEST(UpperBound, ReturnedEpsSatisfiesDelta) {
  BoundRequest req;
  req.delta = 1e-6;
  for (double eps0 : {0.5, 1.0, 3.0}) {
    const auto params = general_ldp(eps0, 10000);
    const auto res = upper_bound(params, req);
    const double check = std::max(delta_forward(res.eps, params),
                                  delta_backward(res.eps, params));
    EXPECT_LE(check, req.delta) << "eps0=" << eps0;
  }
}

TEST(UpperBound, MonotoneInUsersDeltaAndBeta) {
  BoundRequest req;
  req.delta = 1e-6;
  double prev = kInf;
  for (std::int64_t n : {1000, 10000, 100000}) {
    const double eps = upper_bound(general_ldp(1.0, n), req).eps;
    EXPECT_LE(eps, prev + 1e-12);
    prev = eps;
  }
  prev = kInf;
  for (double delta : {1e-8, 1e-6, 1e-4}) {
    BoundRequest r2;
    r2.delta = delta;
    const double eps = upper_bound(general_ldp(1.0, 10000), r2).eps;
    EXPECT_LE(eps, prev + 1e-12);
    prev = eps;
  }
  prev = 0.0;
  for (double beta : {0.1, 0.25, 0.4}) {
    const auto params = VariationRatioParams::create(kE, beta, kE, 9999);
    const double eps = upper_bound(params, req).eps;
    EXPECT_GE(eps, prev - 1e-12);
    prev = eps;
  }
}

TEST(UpperBound, InfinitePFindsCapByDoubling) {
  BoundRequest req;
  req.delta = 1e-6;
  const auto params =
      VariationRatioParams::create(kInf, 1.0, 8.0, 9999);  // balls-into-bins
  const auto res = upper_bound(params, req);
  EXPECT_GT(res.eps, 0.0);
  const double check = std::max(delta_forward(res.eps, params),
                                delta_backward(res.eps, params));
  EXPECT_LE(check, req.delta);
}

TEST(UpperBound, InfeasibleDeltaReported) {
  // With five blankets and ratio 8 the distinguishing mass stays above 1e-6.
  const auto params = VariationRatioParams::create(kInf, 1.0, 8.0, 5);
  BoundRequest req;
  req.delta = 1e-6;
  EXPECT_THROW(upper_bound(params, req), UnsupportedRegimeError);
}

TEST(UpperBound, ValidatesRequest) {
  BoundRequest bad;
  bad.delta = 0.0;
  EXPECT_THROW(upper_bound(general_ldp(1.0, 100), bad), ParameterError);
  bad.delta = 1.5;
  EXPECT_THROW(upper_bound(general_ldp(1.0, 100), bad), ParameterError);
  bad.delta = 1e-6;
  bad.iters = 0;
  EXPECT_THROW(upper_bound(general_ldp(1.0, 100), bad), ParameterError);
}

TEST(LowerBound, ExtremalDesignBracketsUpperBound) {
  // local hash with l = 3 at eps0 = ln 3 has q0 = q1 = q: the two searches
  // land in the same bracket.
  const double eps0 = std::log(3.0);
  const double e = std::exp(eps0);
  const double beta = (e - 1.0) / (e + 3.0 - 1.0);
  const std::int64_t n = 1000;
  const auto sym = VariationRatioParams::create(e, beta, e, n - 1);
  const auto asym = AsymmetricParams::from_symmetric(sym);
  BoundRequest req;
  req.delta = 1e-6;
  const auto up = upper_bound(sym, req);
  const auto low = lower_bound(asym, req, LowerBoundMode::kLower);
  EXPECT_LE(low.eps, up.eps + 1e-12);
  EXPECT_LE(up.eps - low.eps, 2.0 * up.resolution);
  const auto tight = lower_bound(asym, req, LowerBoundMode::kTightUpper);
  EXPECT_GE(tight.eps, low.eps);
  EXPECT_LE(tight.eps - low.eps, low.resolution * (1.0 + 1e-9));
}

TEST(LowerBound, StrictGapForBinaryRandomizedResponse) {
  // RR on two options is not tight for the symmetric reduction: its
  // worst-case blanket ratios are {1, e^eps0}.
  const double eps0 = 1.0;
  const double e = std::exp(eps0);
  const std::int64_t n = 10000;
  const auto sym = general_ldp(eps0, n);
  const auto asym = AsymmetricParams::create(e, (e - 1.0) / (e + 1.0), 1.0, e,
                                             n - 1);
  BoundRequest req;
  req.delta = 1e-6;
  const auto up = upper_bound(sym, req);
  const auto low = lower_bound(asym, req, LowerBoundMode::kLower);
  EXPECT_LT(low.eps, up.eps - 2.0 * up.resolution);
}

TEST(LowerBound, DegenerateBeta) {
  const auto asym = AsymmetricParams::create(2.0, 0.0, 1.0, 1.0, 100);
  const auto res = lower_bound(asym, BoundRequest{});
  EXPECT_DOUBLE_EQ(res.eps, 0.0);
  EXPECT_EQ(res.kind, BoundKind::kLower);
}

TEST(AnalyticBound, DominatesNumericalUpperBound) {
  std::mt19937_64 rng(41);
  BoundRequest req;
  req.delta = 1e-6;
  int holds = 0;
  for (int draw = 0; draw < 30; ++draw) {
    const double eps0 = std::uniform_real_distribution<double>(0.4, 3.0)(rng);
    const std::int64_t n =
        std::uniform_int_distribution<std::int64_t>(10000, 200000)(rng);
    const auto params = general_ldp(eps0, n);
    const auto closed = analytic_bound(params, req.delta);
    if (!closed.ok()) continue;
    ++holds;
    const auto numeric = upper_bound(params, req);
    EXPECT_GE(*closed.eps, numeric.eps - numeric.resolution)
        << "eps0=" << eps0 << " n=" << n;
  }
  EXPECT_GT(holds, 10);
}

TEST(AnalyticBound, MonotoneInDelta) {
  const auto params = general_ldp(1.0, 100000);
  double prev = kInf;
  for (double delta : {1e-9, 1e-7, 1e-5, 1e-3, 0.9}) {
    const auto res = analytic_bound(params, delta);
    ASSERT_TRUE(res.ok()) << "delta=" << delta;
    EXPECT_LE(*res.eps, prev + 1e-12);
    prev = *res.eps;
  }
}

TEST(AnalyticBound, ReportsPreconditionFailure) {
  // Far too few users for the tail bounds to bite.
  const auto params = general_ldp(1.0, 10);
  const auto res = analytic_bound(params, 1e-6);
  EXPECT_FALSE(res.ok());
  EXPECT_FALSE(res.failed_precondition.empty());
  EXPECT_DOUBLE_EQ(*analytic_bound(
                        VariationRatioParams::create(2.0, 0.0, 2.0, 10), 1e-6)
                        .eps,
                   0.0);
}

TEST(AsymptoticBound, ThresholdAndDomination) {
  const auto tiny = general_ldp(1.0, 10);
  EXPECT_FALSE(asymptotic_bound(tiny, 1e-6).ok());

  std::mt19937_64 rng(43);
  BoundRequest req;
  req.delta = 1e-6;
  for (int draw = 0; draw < 30; ++draw) {
    const double eps0 = std::uniform_real_distribution<double>(0.4, 2.0)(rng);
    const std::int64_t n =
        std::uniform_int_distribution<std::int64_t>(50000, 300000)(rng);
    const auto params = general_ldp(eps0, n);
    const auto closed = asymptotic_bound(params, req.delta);
    ASSERT_TRUE(closed.ok()) << "eps0=" << eps0 << " n=" << n;
    const auto numeric = upper_bound(params, req);
    EXPECT_GE(*closed.eps, numeric.eps - numeric.resolution);
  }
}

TEST(AsymptoticBound, RootNScaling) {
  const double delta = 1e-6;
  const auto small = general_ldp(1.0, 1000000);
  const auto large = general_ldp(1.0, 2000000);
  const auto eps_small = asymptotic_bound(small, delta);
  const auto eps_large = asymptotic_bound(large, delta);
  ASSERT_TRUE(eps_small.ok() && eps_large.ok());
  const double ratio =
      std::expm1(*eps_large.eps) / std::expm1(*eps_small.eps);
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.1 / std::sqrt(2.0));
}

}  // namespace
}  // namespace vr

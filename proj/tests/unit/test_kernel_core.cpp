#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metric_forge/errors.hpp"
#include "metric_forge/kernel_core.hpp"
#include "oracles.hpp"

namespace mf = metric_forge;
using mf::Point;

namespace {

std::vector<Point> reals(std::initializer_list<double> xs) {
  std::vector<Point> out;
  for (double x : xs) out.push_back({x});
  return out;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(QuadraticForm, CollinearSecondDifferenceVanishes) {
  const auto pts = reals({0, 1, 2});
  EXPECT_DOUBLE_EQ(mf::quadratic_form(mf::kernels::squared_difference(), pts,
                                      mf::CoefficientVector({1, -2, 1})),
                   0.0);
}

TEST(QuadraticForm, TwoPointValue) {
  const auto pts = reals({0, 1});
  EXPECT_DOUBLE_EQ(mf::quadratic_form(mf::kernels::squared_difference(), pts,
                                      mf::CoefficientVector({1, -1})),
                   -2.0);
}

TEST(QuadraticForm, ZeroCoefficients) {
  const auto pts = reals({0.3, -1, 7, 2});
  for (const auto& name : mf::kernels::builtin_names()) {
    EXPECT_EQ(mf::quadratic_form(mf::kernels::by_name(name), pts, mf::CoefficientVector::zeros(4)),
              0.0)
        << name;
  }
}

TEST(QuadraticForm, LengthMismatchIsDimensionError) {
  const auto pts = reals({0, 1, 2});
  EXPECT_THROW(mf::quadratic_form(mf::kernels::squared_difference(), pts,
                                  mf::CoefficientVector({1, -1})),
               mf::DimensionError);
}

TEST(QuadraticForm, MatchesBruteForceOracle) {
  oracle::Lcg rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = rng.integer(2, 9);
    const int d = rng.integer(1, 4);
    std::vector<Point> pts(n, Point(d));
    for (auto& p : pts)
      for (double& v : p) v = rng.normal();
    std::vector<double> c(n);
    for (double& v : c) v = rng.normal();
    const mf::CoefficientVector cv(c);
    const std::vector<double> centered(cv.values().begin(), cv.values().end());
    auto k = [](const Point& u, const Point& v) {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
      return s;
    };
    EXPECT_LT(rel_err(mf::quadratic_form(mf::kernels::squared_euclidean(), pts, cv),
                      oracle::brute_quadratic(k, pts, centered)),
              1e-12);
  }
}

TEST(CoefficientVector, MeanIsSubtracted) {
  const mf::CoefficientVector c({3.0, 1.0, 5.0, -0.25});
  const double sum = std::accumulate(c.values().begin(), c.values().end(), 0.0);
  EXPECT_LE(std::abs(sum), 1e-12);
  EXPECT_DOUBLE_EQ(c[0] - c[1], 2.0);
}

TEST(CoefficientVector, RejectsShortAndNonFinite) {
  EXPECT_THROW(mf::CoefficientVector({1.0}), mf::InsufficientDataError);
  EXPECT_THROW(mf::CoefficientVector({1.0, NAN}), mf::PreconditionError);
}

TEST(Kernels, BuiltinsAreExactlySymmetric) {
  const auto pts = reals({-3.5, 0, 0.1, 2, 9});
  for (const auto& name : mf::kernels::builtin_names()) {
    EXPECT_EQ(mf::max_asymmetry(mf::kernels::by_name(name), pts), 0.0) << name;
  }
}

TEST(Kernels, SquaredDistanceRoleVanishesOnDiagonal) {
  const auto pts = reals({-3.5, 0, 0.1, 2, 9});
  for (const auto& name : mf::kernels::builtin_names()) {
    const mf::Kernel k = mf::kernels::by_name(name);
    if (k.role() != mf::KernelRole::kSquaredDistance) continue;
    for (const auto& p : pts) EXPECT_EQ(k(p, p), 0.0) << name;
  }
}

TEST(Kernels, ScalarKernelsRejectVectors) {
  EXPECT_THROW(mf::kernels::squared_difference()({1, 2}, {3, 4}), mf::DimensionError);
  EXPECT_THROW(mf::kernels::squared_euclidean()({1, 2}, {3}), mf::DimensionError);
  EXPECT_THROW(mf::kernels::by_name("cosine"), mf::ValidationError);
}

TEST(QuadraticFormProperty, SquaredEuclideanIdentity) {
  oracle::Lcg rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = rng.integer(2, 12);
    const int d = rng.integer(1, 5);
    std::vector<Point> pts(n, Point(d));
    for (auto& p : pts)
      for (double& v : p) v = rng.uniform(-3, 3);
    std::vector<double> raw(n);
    for (double& v : raw) v = rng.normal();
    const mf::CoefficientVector c(raw);
    std::vector<double> combo(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) combo[k] += c[i] * pts[i][k];
    double norm2 = 0.0;
    for (double v : combo) norm2 += v * v;
    const double form = mf::quadratic_form(mf::kernels::squared_euclidean(), pts, c);
    // Cancellation scale: the form is a difference of terms of size sum |c_i c_j| D_ij.
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        scale += std::abs(c[i] * c[j]) * mf::kernels::squared_euclidean()(pts[i], pts[j]);
    EXPECT_LE(std::abs(form + 2.0 * norm2), 1e-10 * std::max({1.0, 2.0 * norm2, scale}));
  }
}

TEST(QuadraticFormProperty, PermutationInvariance) {
  oracle::Lcg rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = rng.integer(2, 8);
    std::vector<Point> pts(n, Point(2));
    for (auto& p : pts)
      for (double& v : p) v = rng.normal();
    std::vector<double> raw(n);
    for (double& v : raw) v = rng.normal();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.integer(0, i)]);
    std::vector<Point> pp(n);
    std::vector<double> pc(n);
    for (int i = 0; i < n; ++i) {
      pp[i] = pts[perm[i]];
      pc[i] = raw[perm[i]];
    }
    const auto k = mf::kernels::squared_euclidean();
    EXPECT_LT(rel_err(mf::quadratic_form(k, pts, mf::CoefficientVector(raw)),
                      mf::quadratic_form(k, pp, mf::CoefficientVector(pc))),
              1e-12);
  }
}

TEST(QuadraticFormProperty, HomogeneousOfDegreeTwo) {
  const auto pts = reals({-1, 0.5, 2, 3});
  const std::vector<double> raw = {0.3, -1.2, 0.4, 0.5};
  const auto k = mf::kernels::absolute_difference();
  const double base = mf::quadratic_form(k, pts, mf::CoefficientVector(raw));
  for (double t : {-3.0, 0.5, 7.0}) {
    std::vector<double> scaled(raw);
    for (double& v : scaled) v *= t;
    EXPECT_LT(rel_err(mf::quadratic_form(k, pts, mf::CoefficientVector(scaled)), t * t * base),
              1e-12);
  }
}

TEST(CheckNegativeDefinite, SquaredDifferencePassesAndMatchesIdentityPerTrial) {
  const auto pts = reals({-2, -1, 0, 1, 2});
  const mf::NegativeDefiniteOptions opt{1000, 42, 1e-10};
  const auto report = mf::check_negative_definite(mf::kernels::squared_difference(), pts, opt);
  EXPECT_EQ(report.verdict, mf::Verdict::kPass);
  EXPECT_LE(report.worst_value, 0.0 + 1e-12);
  EXPECT_EQ(report.trials, 1000u);
  // Each drawn trial satisfies form = -2 (sum c_i x_i)^2.
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto draw = mf::detail::draw_trial(pts.size(), 42, t);
    const auto sub = mf::detail::gather(pts, draw.indices);
    const mf::CoefficientVector c(draw.coefficients);
    double s = 0.0;
    for (std::size_t i = 0; i < sub.size(); ++i) s += c[i] * sub[i][0];
    EXPECT_NEAR(mf::quadratic_form(mf::kernels::squared_difference(), sub, c), -2.0 * s * s, 1e-12);
  }
}

TEST(CheckNegativeDefinite, ProductKernelFailsWithReproducibleWitness) {
  const auto pts = reals({0, 1});
  const auto k = mf::kernels::product();
  const auto report = mf::check_negative_definite(k, pts, {50, 3, 1e-10});
  ASSERT_EQ(report.verdict, mf::Verdict::kFail);
  EXPECT_GT(report.worst_value, report.tolerance);
  ASSERT_TRUE(report.witness.has_value());
  const double again = mf::quadratic_form(k, report.witness->points,
                                          mf::CoefficientVector(report.witness->coefficients));
  EXPECT_LE(rel_err(again, report.worst_value), 1e-12);
  // On (0, 1) with zero-sum c the form is c_2^2 > 0; (1, -1) gives exactly 1.
  EXPECT_DOUBLE_EQ(mf::quadratic_form(k, pts, mf::CoefficientVector({1, -1})), 1.0);
}

TEST(CheckNegativeDefinite, RepeatedPointIsDegenerate) {
  const auto pts = reals({1.5, 1.5, 1.5, 1.5});
  const auto report =
      mf::check_negative_definite(mf::kernels::squared_difference(), pts, {200, 1, 1e-10});
  EXPECT_EQ(report.verdict, mf::Verdict::kDegenerate);
}

TEST(CheckNegativeDefinite, Preconditions) {
  const auto one = reals({1});
  EXPECT_THROW(mf::check_negative_definite(mf::kernels::squared_difference(), one, {}),
               mf::InsufficientDataError);
  const auto two = reals({0, 1});
  EXPECT_THROW(mf::check_negative_definite(mf::kernels::squared_difference(), two, {10, 0, -1.0}),
               mf::PreconditionError);
}

TEST(CheckNegativeDefinite, DeterministicGivenSeed) {
  const auto pts = reals({-0.7, 0.2, 1.9, 3.3, 4.1, 5});
  const auto k = mf::kernels::absolute_difference();
  const auto a = mf::check_negative_definite(k, pts, {300, 77, 1e-10});
  const auto b = mf::check_negative_definite(k, pts, {300, 77, 1e-10});
  EXPECT_EQ(a.worst_value, b.worst_value);
  EXPECT_EQ(a.witness->coefficients, b.witness->coefficients);
  const auto c = mf::check_negative_definite(k, pts, {300, 78, 1e-10});
  EXPECT_NE(a.worst_value, c.worst_value);
}

TEST(CheckStrict, CollinearSquaredDifferenceAttainsZero) {
  const auto pts = reals({0, 1, 2});
  EXPECT_EQ(mf::quadratic_form(mf::kernels::squared_difference(), pts,
                               mf::CoefficientVector({1, -2, 1})),
            0.0);
  const auto report =
      mf::check_strictly_negative_definite(mf::kernels::squared_difference(), pts, {50, 5, 1e-10});
  ASSERT_EQ(report.verdict, mf::Verdict::kFail);
  EXPECT_EQ(report.failure_kind, "null_attained");
  ASSERT_TRUE(report.witness.has_value());
  EXPECT_LE(std::abs(report.witness->value), 1e-10);
  double maxc = 0.0;
  for (double v : report.witness->coefficients) maxc = std::max(maxc, std::abs(v));
  EXPECT_GT(maxc, std::sqrt(1e-10));
  // Null direction is proportional to (1, -2, 1).
  const auto& c = report.witness->coefficients;
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(c[0], c[2], 1e-9);
  EXPECT_NEAR(c[1], -2.0 * c[0], 1e-9);
}

TEST(CheckStrict, AbsoluteDifferenceOnThreePointsPasses) {
  const auto pts = reals({0, 1, 2});
  // Dense-grid oracle: the form is strictly negative on the unit zero-sum circle.
  EXPECT_LT(oracle::max_abs_difference_form_on_circle(20000), -0.1);
  const auto report =
      mf::check_strictly_negative_definite(mf::kernels::absolute_difference(), pts, {1000, 8, 1e-10});
  EXPECT_EQ(report.verdict, mf::Verdict::kPass);
}

TEST(CheckStrict, TwoPointAbsoluteDifference) {
  const auto pts = reals({0, 1});
  EXPECT_DOUBLE_EQ(mf::quadratic_form(mf::kernels::absolute_difference(), pts,
                                      mf::CoefficientVector({1, -1})),
                   -2.0);
  const auto report =
      mf::check_strictly_negative_definite(mf::kernels::absolute_difference(), pts, {100, 2, 1e-10});
  EXPECT_EQ(report.verdict, mf::Verdict::kPass);
}

TEST(CheckStrict, DuplicatePointsRejected) {
  const auto pts = reals({0, 1, 1});
  EXPECT_THROW(
      mf::check_strictly_negative_definite(mf::kernels::absolute_difference(), pts, {10, 0, 1e-10}),
      mf::PreconditionError);
}

TEST(CheckStrict, ViolationReportedBeforeNull) {
  const auto pts = reals({0.5, 1, 2});
  const auto report =
      mf::check_strictly_negative_definite(mf::kernels::product(), pts, {100, 1, 1e-10});
  EXPECT_EQ(report.verdict, mf::Verdict::kFail);
  EXPECT_EQ(report.failure_kind, "violation");
}

TEST(Detail, ZeroSumBasisIsOrthonormal) {
  for (std::size_t n : {2u, 3u, 7u}) {
    const auto b = mf::detail::zero_sum_basis(n);
    ASSERT_EQ(b.size(), n * (n - 1));
    for (std::size_t a = 0; a + 1 < n; ++a) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += b[a * n + i];
      EXPECT_NEAR(sum, 0.0, 1e-14);
      for (std::size_t c = 0; c + 1 < n; ++c) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += b[a * n + i] * b[c * n + i];
        EXPECT_NEAR(dot, a == c ? 1.0 : 0.0, 1e-14);
      }
    }
  }
}

TEST(Detail, DrawTrialIsCenteredAndSorted) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto d = mf::detail::draw_trial(9, 123, t);
    ASSERT_GE(d.indices.size(), 2u);
    EXPECT_TRUE(std::is_sorted(d.indices.begin(), d.indices.end()));
    EXPECT_EQ(std::adjacent_find(d.indices.begin(), d.indices.end()), d.indices.end());
    EXPECT_NEAR(std::accumulate(d.coefficients.begin(), d.coefficients.end(), 0.0), 0.0, 1e-12);
  }
}

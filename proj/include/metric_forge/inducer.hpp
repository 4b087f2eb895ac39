#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "metric_forge/index_measure.hpp"
#include "metric_forge/kernel_core.hpp"

namespace metric_forge {

struct IntegrationPolicy {
  std::size_t mc_samples = 10000;
  // Every distance evaluation integrates over the same draws, so under a
  // sampler the estimates are exact distances of the empirical measure.
  std::uint64_t seed = 0;
  // Zero-distance probe pairs are identified in reports instead of failing.
  bool quotient = false;
};

struct DistanceEstimate {
  double value = 0.0;          // rho, after clamping the squared estimate at 0
  double squared = 0.0;        // raw integral estimate of rho^2 (may be < 0)
  double squared_stderr = 0.0;
  double std_error = 0.0;      // delta-method stderr of rho
  bool clamped = false;
};

// rho(x1, x2) = sqrt( integral of D^2(f_y(x1), f_y(x2)) over the index measure )
class InducedMetric {
 public:
  InducedMetric(FunctionFamily family, IndexMeasure measure, Kernel base,
                IntegrationPolicy policy);

  DistanceEstimate estimate(const Point& x1, const Point& x2) const;
  double operator()(const Point& x1, const Point& x2) const { return estimate(x1, x2).value; }

  const FunctionFamily& family() const noexcept { return family_; }
  const IndexMeasure& measure() const noexcept { return measure_; }
  const Kernel& base() const noexcept { return base_; }
  const IntegrationPolicy& policy() const noexcept { return policy_; }

 private:
  FunctionFamily family_;
  IndexMeasure measure_;
  Kernel base_;
  IntegrationPolicy policy_;
};

// Requires `base` to have the squared-distance role.
InducedMetric induce_distance(FunctionFamily family, IndexMeasure measure, Kernel base,
                              IntegrationPolicy policy = {});

struct SeparationOptions {
  std::size_t support_count = 100;
  std::uint64_t seed = 0;
  double tolerance = kDefaultFormTolerance;
};

// Looks for distinct probes that no sampled index point separates. The witness
// is the least-separated pair; worst_value is the largest base-kernel value
// observed for it over the support sample.
CheckReport check_separation(const InducedMetric& metric, std::span<const Point> probe_points,
                             const SeparationOptions& options);

struct AxiomOptions {
  std::size_t triple_trials = 200;
  std::uint64_t seed = 0;
  double tolerance = kDefaultFormTolerance;
};

// Nonnegativity, zero self-distance and symmetry on all pairs, then the
// triangle inequality on random triples. worst_value is the smallest triangle
// slack rho(a,c) + rho(c,b) - rho(a,b) seen.
CheckReport verify_metric_axioms(const InducedMetric& metric, std::span<const Point> probe_points,
                                 const AxiomOptions& options);

// Inner product (x1, x2) = integral of <f_y(x1), f_y(x2)> for a linear family.
class InnerProductSpace {
 public:
  InnerProductSpace(FunctionFamily family, IndexMeasure measure, IntegrationPolicy policy = {});

  IntegralEstimate inner_estimate(const Point& x1, const Point& x2) const;
  double inner(const Point& x1, const Point& x2) const { return inner_estimate(x1, x2).value; }
  double norm(const Point& x) const;

  // The induced distance of the same family with the squared Euclidean base;
  // norm(x) == metric()(x, origin).
  InducedMetric metric() const;
  const Point& origin() const noexcept { return family_.domain().origin; }

 private:
  FunctionFamily family_;
  IndexMeasure measure_;
  IntegrationPolicy policy_;
};

namespace detail {
// Axiom checks on a precomputed row-major n x n distance table.
CheckReport axioms_from_table(std::span<const double> table, std::span<const Point> points,
                              const AxiomOptions& options, bool quotient);
}  // namespace detail

double induced_inner_product(const InnerProductSpace& space, const Point& x1, const Point& x2);
double induced_norm(const InnerProductSpace& space, const Point& x);

}  // namespace metric_forge

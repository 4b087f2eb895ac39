#include "metric_forge/inducer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "metric_forge/errors.hpp"

namespace metric_forge {

namespace {

EvaluationError with_context(const Error& e, const Point& x1, const Point& x2) {
  return EvaluationError(std::string(e.what()) + " (x1 = " + format_point(x1) +
                         ", x2 = " + format_point(x2) + ")");
}

}  // namespace

InducedMetric::InducedMetric(FunctionFamily family, IndexMeasure measure, Kernel base,
                             IntegrationPolicy policy)
    : family_(std::move(family)),
      measure_(std::move(measure)),
      base_(std::move(base)),
      policy_(policy) {}

DistanceEstimate InducedMetric::estimate(const Point& x1, const Point& x2) const {
  // Canonical argument order makes rho symmetric bit-for-bit.
  const bool swap = std::lexicographical_compare(x2.begin(), x2.end(), x1.begin(), x1.end());
  const Point& a = swap ? x2 : x1;
  const Point& b = swap ? x1 : x2;

  IntegralEstimate sq;
  try {
    sq = integrate(
        measure_, [&](const Point& y) { return base_(family_(y, a), family_(y, b)); },
        policy_.mc_samples, policy_.seed);
  } catch (const EvaluationError& e) {
    throw with_context(e, a, b);
  } catch (const DomainError& e) {
    throw with_context(e, a, b);
  }

  DistanceEstimate out;
  out.squared = sq.value;
  out.squared_stderr = sq.std_error;
  out.clamped = sq.value < 0.0;
  out.value = std::sqrt(std::max(sq.value, 0.0));
  if (sq.std_error > 0.0) {
    out.std_error = out.value > 0.0 ? sq.std_error / (2.0 * out.value) : std::sqrt(sq.std_error);
  }
  return out;
}

InducedMetric induce_distance(FunctionFamily family, IndexMeasure measure, Kernel base,
                              IntegrationPolicy policy) {
  if (base.role() != KernelRole::kSquaredDistance) {
    throw PreconditionError("base kernel '" + base.label() +
                            "' is not registered in the squared-distance role");
  }
  return InducedMetric(std::move(family), std::move(measure), std::move(base), policy);
}

CheckReport check_separation(const InducedMetric& metric, std::span<const Point> probe_points,
                             const SeparationOptions& options) {
  detail::require_distinct(probe_points, "separation check");
  CheckReport report;
  report.tolerance = options.tolerance;
  if (!metric.measure().deterministic()) {
    report.notes.push_back("support approximated by " + std::to_string(options.support_count) +
                           " sampled index points; the verdict is probabilistic");
  }
  if (probe_points.size() < 2) {
    report.notes.push_back("fewer than two probes: no distinct pairs to separate");
    return report;
  }

  const std::vector<Point> support = support_sample(metric.measure(), options.support_count,
                                                    options.seed);
  const FunctionFamily& f = metric.family();
  const Kernel& base = metric.base();

  // Images of every probe under every support point, computed once.
  std::vector<std::vector<Point>> images(probe_points.size());
  for (std::size_t i = 0; i < probe_points.size(); ++i) {
    images[i].reserve(support.size());
    for (const Point& y : support) images[i].push_back(f(y, probe_points[i]));
  }

  double least = std::numeric_limits<double>::infinity();
  std::size_t least_i = 0, least_j = 1;
  for (std::size_t i = 0; i < probe_points.size(); ++i) {
    for (std::size_t j = i + 1; j < probe_points.size(); ++j) {
      double spread = 0.0;
      for (std::size_t s = 0; s < support.size(); ++s) {
        spread = std::max(spread, base(images[i][s], images[j][s]));
      }
      if (spread <= options.tolerance) report.identified.emplace_back(i, j);
      if (spread < least) {
        least = spread;
        least_i = i;
        least_j = j;
      }
    }
  }
  report.trials = probe_points.size() * (probe_points.size() - 1) / 2;
  report.worst_value = least;
  report.witness = Witness{{probe_points[least_i], probe_points[least_j]}, {}, least, {}};

  if (report.identified.empty()) return report;
  if (metric.policy().quotient) {
    report.notes.push_back("quotient mode: " + std::to_string(report.identified.size()) +
                           " probe pair(s) identified; rho is a metric on the quotient");
  } else {
    report.verdict = Verdict::kFail;
    report.failure_kind = "not_separated";
    report.notes.push_back("rho is only a pseudometric on these probes");
    report.identified.clear();
  }
  return report;
}

CheckReport verify_metric_axioms(const InducedMetric& metric, std::span<const Point> probe_points,
                                 const AxiomOptions& options) {
  const std::size_t n = probe_points.size();
  if (n == 0) throw InsufficientDataError("axiom check needs at least one probe point");

  std::vector<double> d(n * n);
  double stderr_bound = 0.0;
  bool clamped = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const DistanceEstimate e = metric.estimate(probe_points[i], probe_points[j]);
      stderr_bound = std::max(stderr_bound, e.std_error);
      clamped = clamped || e.clamped;
      d[i * n + j] = e.value;
    }
  }
  CheckReport report =
      detail::axioms_from_table(d, probe_points, options, metric.policy().quotient);
  report.stderr_bound = stderr_bound;
  report.clamped = clamped;
  if (clamped) report.notes.push_back("negative rho^2 estimates were clamped to 0");
  if (stderr_bound > 0.0) {
    report.notes.push_back("distances are Monte Carlo estimates; see stderr_bound");
  }
  return report;
}

namespace detail {

CheckReport axioms_from_table(std::span<const double> d, std::span<const Point> probe_points,
                              const AxiomOptions& options, bool quotient) {
  const std::size_t n = probe_points.size();
  if (d.size() != n * n) throw DimensionError("distance table does not match the probe count");
  CheckReport report;
  report.tolerance = options.tolerance;

  auto fail = [&](const char* kind, std::vector<Point> pts, double value) {
    if (report.verdict == Verdict::kFail) return;
    report.verdict = Verdict::kFail;
    report.failure_kind = kind;
    report.witness = Witness{std::move(pts), {}, value, {}};
  };

  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i * n + i] > options.tolerance) fail("A2", {probe_points[i]}, d[i * n + i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d[i * n + j];
      if (v < -options.tolerance) fail("A1", {probe_points[i], probe_points[j]}, v);
      if (std::abs(v - d[j * n + i]) > options.tolerance) {
        fail("A3", {probe_points[i], probe_points[j]}, v - d[j * n + i]);
      }
      if (i < j && probe_points[i] != probe_points[j]) {
        diameter = std::max(diameter, v);
        if (v <= options.tolerance && quotient) report.identified.emplace_back(i, j);
      }
    }
  }
  report.zero_diameter = n >= 2 && diameter <= options.tolerance;
  if (report.zero_diameter) report.notes.push_back("zero diameter: every probe distance vanishes");

  if (n < 3) {
    report.notes.push_back("fewer than three probes: triangle inequality not sampled");
    return report;
  }
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t wa = 0, wb = 1, wc = 2;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t t = 0; t < options.triple_trials; ++t) {
    SplitMix64 rng = stream(options.seed, t, /*salt=*/4);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    std::size_t c = pick(rng);
    while (c == a || c == b) c = pick(rng);
    const double slack = d[a * n + c] + d[c * n + b] - d[a * n + b];
    if (slack < worst_slack) {
      worst_slack = slack;
      wa = a;
      wb = b;
      wc = c;
    }
  }
  report.trials = options.triple_trials;
  if (options.triple_trials > 0) {
    report.worst_value = worst_slack;
    if (worst_slack < -options.tolerance) {
      fail("A4", {probe_points[wa], probe_points[wb], probe_points[wc]}, worst_slack);
    } else if (report.verdict != Verdict::kFail) {
      report.witness = Witness{{probe_points[wa], probe_points[wb], probe_points[wc]}, {},
                               worst_slack, {}};
    }
  }
  return report;
}

}  // namespace detail

InnerProductSpace::InnerProductSpace(FunctionFamily family, IndexMeasure measure,
                                     IntegrationPolicy policy)
    : family_(std::move(family)), measure_(std::move(measure)), policy_(policy) {
  if (!family_.linear()) {
    throw UnsupportedOperationError("family '" + family_.name() +
                                    "' is not linear; no induced inner product");
  }
}

IntegralEstimate InnerProductSpace::inner_estimate(const Point& x1, const Point& x2) const {
  const bool swap = std::lexicographical_compare(x2.begin(), x2.end(), x1.begin(), x1.end());
  const Point& a = swap ? x2 : x1;
  const Point& b = swap ? x1 : x2;
  return integrate(
      measure_,
      [&](const Point& y) {
        const Point fa = family_(y, a);
        const Point fb = family_(y, b);
        double s = 0.0;
        for (std::size_t k = 0; k < fa.size(); ++k) s += fa[k] * fb[k];
        return s;
      },
      policy_.mc_samples, policy_.seed);
}

double InnerProductSpace::norm(const Point& x) const {
  return std::sqrt(std::max(inner(x, x), 0.0));
}

InducedMetric InnerProductSpace::metric() const {
  return induce_distance(family_, measure_, kernels::squared_euclidean(), policy_);
}

double induced_inner_product(const InnerProductSpace& space, const Point& x1, const Point& x2) {
  return space.inner(x1, x2);
}

double induced_norm(const InnerProductSpace& space, const Point& x) { return space.norm(x); }

}  // namespace metric_forge

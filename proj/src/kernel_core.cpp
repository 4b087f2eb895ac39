#include "metric_forge/kernel_core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "metric_forge/errors.hpp"

namespace metric_forge {

std::string format_point(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ')';
  return os.str();
}

Kernel::Kernel(std::string label, EvalFn eval, KernelRole role, bool builtin)
    : label_(std::move(label)), eval_(std::move(eval)), role_(role), builtin_(builtin) {
  if (!eval_) throw PreconditionError("kernel '" + label_ + "' has no evaluator");
}

Kernel Kernel::custom(std::string label, EvalFn eval, KernelRole role) {
  return Kernel(std::move(label), std::move(eval), role, false);
}

namespace kernels {
namespace {

void require_scalar(const Point& u, const Point& v, const char* name) {
  if (u.size() != 1 || v.size() != 1) {
    throw DimensionError(std::string(name) + " is defined on reals; got points of dimension " +
                         std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
}

void require_same_dim(const Point& u, const Point& v, const char* name) {
  if (u.size() != v.size()) {
    throw DimensionError(std::string(name) + ": dimension mismatch " +
                         std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
}

}  // namespace

Kernel squared_difference() {
  return Kernel(
      "squared_difference",
      [](const Point& u, const Point& v) {
        require_scalar(u, v, "squared_difference");
        const double d = u[0] - v[0];
        return d * d;
      },
      KernelRole::kSquaredDistance, true);
}

Kernel squared_euclidean() {
  return Kernel(
      "squared_euclidean",
      [](const Point& u, const Point& v) {
        require_same_dim(u, v, "squared_euclidean");
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          const double d = u[i] - v[i];
          s += d * d;
        }
        return s;
      },
      KernelRole::kSquaredDistance, true);
}

Kernel absolute_difference() {
  return Kernel(
      "absolute_difference",
      [](const Point& u, const Point& v) {
        require_scalar(u, v, "absolute_difference");
        return std::abs(u[0] - v[0]);
      },
      KernelRole::kSquaredDistance, true);
}

Kernel product() {
  return Kernel(
      "product",
      [](const Point& u, const Point& v) {
        require_same_dim(u, v, "product");
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
      },
      KernelRole::kGeneral, true);
}

Kernel by_name(const std::string& name) {
  if (name == "squared_difference") return squared_difference();
  if (name == "squared_euclidean") return squared_euclidean();
  if (name == "absolute_difference") return absolute_difference();
  if (name == "product") return product();
  throw ValidationError("unknown kernel '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"squared_difference", "squared_euclidean", "absolute_difference", "product"};
}

}  // namespace kernels

double max_asymmetry(const Kernel& k, std::span<const Point> points) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      worst = std::max(worst, std::abs(k(points[i], points[j]) - k(points[j], points[i])));
    }
  }
  return worst;
}

CoefficientVector::CoefficientVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InsufficientDataError("coefficient vector needs at least 2 entries");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw PreconditionError("coefficient vector has a non-finite entry");
  }
  CompensatedSum sum;
  for (double v : values_) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values_.size());
  if (mean != 0.0) {
    for (double& v : values_) v -= mean;
  }
}

CoefficientVector CoefficientVector::zeros(std::size_t n) {
  return CoefficientVector(std::vector<double>(n, 0.0));
}

double CoefficientVector::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kDegenerate:
      return "degenerate";
  }
  return "unknown";
}

double quadratic_form(const Kernel& k, std::span<const Point> points,
                      const CoefficientVector& c) {
  if (points.size() != c.size()) {
    throw DimensionError("quadratic_form: " + std::to_string(points.size()) + " points but " +
                         std::to_string(c.size()) + " coefficients");
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      sum.add(k(points[i], points[j]) * c[i] * c[j]);
    }
  }
  return sum.value();
}

namespace detail {

TrialDraw draw_trial(std::size_t sample_size, std::uint64_t seed, std::uint64_t trial) {
  SplitMix64 rng = stream(seed, trial, /*salt=*/1);
  std::uniform_int_distribution<std::size_t> size_dist(2, sample_size);
  const std::size_t n = size_dist(rng);

  std::vector<std::size_t> pool(sample_size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, sample_size - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(n);
  for (double& v : c) v = normal(rng);
  CoefficientVector centered(std::move(c));
  return {std::move(pool), {centered.values().begin(), centered.values().end()}};
}

std::vector<Point> gather(std::span<const Point> points, std::span<const std::size_t> indices) {
  std::vector<Point> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points[i]);
  return out;
}

std::vector<double> zero_sum_basis(std::size_t n) {
  std::vector<double> basis(n * (n - 1), 0.0);
  for (std::size_t col = 0; col + 1 < n; ++col) {
    const double k = static_cast<double>(col + 1);
    const double scale = 1.0 / std::sqrt(k * (k + 1.0));
    double* column = basis.data() + col * n;
    for (std::size_t row = 0; row <= col; ++row) column[row] = scale;
    column[col + 1] = -k * scale;
  }
  return basis;
}

std::vector<double> top_zero_sum_direction(std::span<const double> gram, std::size_t n) {
  using Eigen::MatrixXd;
  const std::vector<double> basis_data = zero_sum_basis(n);
  const Eigen::Map<const MatrixXd> basis(basis_data.data(), static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n - 1));
  MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k(i, j) = gram[i * n + j];
  }
  const MatrixXd restricted = basis.transpose() * (0.5 * (k + k.transpose())) * basis;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(restricted);
  if (solver.info() != Eigen::Success) {
    throw EvaluationError("eigendecomposition of the restricted kernel matrix failed");
  }
  Eigen::VectorXd direction = basis * solver.eigenvectors().col(restricted.cols() - 1);
  // Fix the sign so the probe is reproducible.
  Eigen::Index pivot = 0;
  direction.cwiseAbs().maxCoeff(&pivot);
  if (direction(pivot) < 0) direction = -direction;
  return {direction.data(), direction.data() + direction.size()};
}

void require_distinct(std::span<const Point> points, const char* what) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) {
        throw PreconditionError(std::string(what) + ": points " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide at " + format_point(points[i]));
      }
    }
  }
}

}  // namespace detail

namespace {

void validate_check_inputs(std::span<const Point> sample_points,
                           const NegativeDefiniteOptions& options) {
  if (sample_points.size() < 2) {
    throw InsufficientDataError("negative-definiteness check needs at least 2 sample points, got " +
                                std::to_string(sample_points.size()));
  }
  if (!(options.tolerance >= 0.0)) throw PreconditionError("tolerance must be >= 0");
  if (options.trials == 0) throw PreconditionError("trials must be positive");
}

struct Probe {
  std::vector<Point> points;
  std::vector<double> coefficients;
  double value;
};

// Accumulates trial outcomes into a report with the shared verdict rules.
class Tally {
 public:
  Tally(double tolerance, bool strict) : tolerance_(tolerance), strict_(strict) {}

  void record(Probe probe, double coefficient_scale) {
    const double v = probe.value;
    max_abs_ = std::max(max_abs_, std::abs(v));
    if (!worst_ || v > worst_->value) worst_ = probe;
    if (strict_ && !null_ && std::abs(v) <= tolerance_ &&
        coefficient_scale > std::sqrt(tolerance_)) {
      null_ = std::move(probe);
    }
  }

  CheckReport finish(std::size_t trials) const {
    CheckReport report;
    report.trials = trials;
    report.tolerance = tolerance_;
    report.worst_value = worst_->value;
    report.witness = Witness{worst_->points, worst_->coefficients, worst_->value, {}};
    if (worst_->value > tolerance_) {
      report.verdict = Verdict::kFail;
      report.failure_kind = "violation";
    } else if (null_) {
      report.verdict = Verdict::kFail;
      report.failure_kind = "null_attained";
      report.worst_value = null_->value;
      report.witness = Witness{null_->points, null_->coefficients, null_->value, {}};
    } else if (max_abs_ <= tolerance_) {
      report.verdict = Verdict::kDegenerate;
      report.notes.push_back("every evaluated form vanished; no certificate content");
    } else {
      report.verdict = Verdict::kPass;
    }
    return report;
  }

 private:
  double tolerance_;
  bool strict_;
  double max_abs_ = 0.0;
  std::optional<Probe> worst_;
  std::optional<Probe> null_;
};

CheckReport run_check(const Kernel& k, std::span<const Point> sample_points,
                      const NegativeDefiniteOptions& options, bool strict) {
  validate_check_inputs(sample_points, options);
  Tally tally(options.tolerance, strict);
  for (std::size_t t = 0; t < options.trials; ++t) {
    detail::TrialDraw draw = detail::draw_trial(sample_points.size(), options.seed, t);
    std::vector<Point> subset = detail::gather(sample_points, draw.indices);
    const CoefficientVector c(draw.coefficients);
    const double value = quadratic_form(k, subset, c);
    tally.record({subset, draw.coefficients, value}, c.max_abs());

    if (strict) {
      const std::size_t n = subset.size();
      std::vector<double> gram(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = k(subset[i], subset[j]);
      }
      const CoefficientVector probe(detail::top_zero_sum_direction(gram, n));
      const double probe_value = quadratic_form(k, subset, probe);
      tally.record({std::move(subset), {probe.values().begin(), probe.values().end()}, probe_value},
                   probe.max_abs());
    }
  }
  return tally.finish(options.trials);
}

}  // namespace

CheckReport check_negative_definite(const Kernel& k, std::span<const Point> sample_points,
                                    const NegativeDefiniteOptions& options) {
  return run_check(k, sample_points, options, /*strict=*/false);
}

CheckReport check_strictly_negative_definite(const Kernel& k,
                                             std::span<const Point> sample_points,
                                             const NegativeDefiniteOptions& options) {
  detail::require_distinct(sample_points, "strict negative-definiteness check");
  return run_check(k, sample_points, options, /*strict=*/true);
}

}  // namespace metric_forge

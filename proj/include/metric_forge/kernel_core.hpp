#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metric_forge/numeric.hpp"

namespace metric_forge {

enum class KernelRole {
  kGeneral,
  // eval(u, u) == 0; usable as D^2 for an induced distance.
  kSquaredDistance,
};

// Symmetric real function on Z x Z.
class Kernel {
 public:
  using EvalFn = std::function<double(const Point&, const Point&)>;

  Kernel(std::string label, EvalFn eval, KernelRole role, bool builtin = false);

  // User-supplied kernel; `builtin` is false so symmetry is checked to 1e-12.
  static Kernel custom(std::string label, EvalFn eval,
                       KernelRole role = KernelRole::kGeneral);

  double operator()(const Point& u, const Point& v) const { return eval_(u, v); }

  const std::string& label() const noexcept { return label_; }
  KernelRole role() const noexcept { return role_; }
  bool builtin() const noexcept { return builtin_; }

 private:
  std::string label_;
  EvalFn eval_;
  KernelRole role_;
  bool builtin_;
};

namespace kernels {
// (u - v)^2 on reals.
Kernel squared_difference();
// ||u - v||^2 on R^d.
Kernel squared_euclidean();
// |u - v| on reals.
Kernel absolute_difference();
// <u, v>; positive definite, used as a counterexample fixture.
Kernel product();

// Resolves a builtin by name; throws ValidationError for unknown names.
Kernel by_name(const std::string& name);
std::vector<std::string> builtin_names();
}  // namespace kernels

// Checks eval(u,v) == eval(v,u) over all pairs of `points`: exact for
// builtins, 1e-12 absolute otherwise. Returns the worst asymmetry found.
double max_asymmetry(const Kernel& k, std::span<const Point> points);

// Real coefficients c_1..c_n, n >= 2, re-centered on construction so that
// sum(c) == 0 up to rounding.
class CoefficientVector {
 public:
  explicit CoefficientVector(std::vector<double> values);

  static CoefficientVector zeros(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double max_abs() const noexcept;

 private:
  std::vector<double> values_;
};

enum class Verdict { kPass, kFail, kDegenerate };

std::string to_string(Verdict v);

struct Witness {
  std::vector<Point> points;
  std::vector<double> coefficients;
  double value = 0.0;
  // Base weights q_i when the witness is a weighted (integral) form.
  std::vector<double> weights;
};

// Outcome of a randomized falsification search. `worst_value` is the extremal
// form value over all trials (maximum for negative-definiteness checks); for a
// strict-mode failure it is the value of the near-null witness instead.
struct CheckReport {
  Verdict verdict = Verdict::kPass;
  double worst_value = 0.0;
  std::optional<Witness> witness;
  std::size_t trials = 0;
  double tolerance = 0.0;

  // "violation" when the defining inequality broke, "null_attained" when a
  // strict check found a nontrivial zero.
  std::string failure_kind;

  // Integration standard error bounding the reported values (0 when exact).
  double stderr_bound = 0.0;
  bool zero_diameter = false;
  bool clamped = false;
  // Pairs of probe indices treated as the same point (quotient mode).
  std::vector<std::pair<std::size_t, std::size_t>> identified;
  std::vector<std::string> notes;

  bool passed() const noexcept { return verdict == Verdict::kPass; }
};

constexpr double kDefaultFormTolerance = 1e-10;

// sum_i sum_j k(x_i, x_j) c_i c_j
double quadratic_form(const Kernel& k, std::span<const Point> points,
                      const CoefficientVector& c);

struct NegativeDefiniteOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double tolerance = kDefaultFormTolerance;
};

// Randomized falsification of sum k(x_i,x_j) c_i c_j <= 0 over zero-sum c.
CheckReport check_negative_definite(const Kernel& k,
                                    std::span<const Point> sample_points,
                                    const NegativeDefiniteOptions& options);

// As above, and additionally fails when a nonzero c attains |form| <= tol.
// Each trial also evaluates the zero-sum direction maximizing the form on the
// trial subset, which is where a nontrivial zero of a negative definite form
// lives.
CheckReport check_strictly_negative_definite(
    const Kernel& k, std::span<const Point> sample_points,
    const NegativeDefiniteOptions& options);

namespace detail {

// One falsification trial: a random subset of the sample (size >= 2) and an
// i.i.d. normal coefficient vector, mean-subtracted. Shared by the m-form
// checks so that m = 2 reproduces these draws exactly.
struct TrialDraw {
  std::vector<std::size_t> indices;
  std::vector<double> coefficients;
};

TrialDraw draw_trial(std::size_t sample_size, std::uint64_t seed,
                     std::uint64_t trial);

std::vector<Point> gather(std::span<const Point> points,
                          std::span<const std::size_t> indices);

// Orthonormal basis of the zero-sum hyperplane in R^n (Helmert columns),
// returned column-major as n x (n-1).
std::vector<double> zero_sum_basis(std::size_t n);

// Unit zero-sum direction maximizing c^T K c for a symmetric n x n matrix
// (row-major).
std::vector<double> top_zero_sum_direction(std::span<const double> gram,
                                           std::size_t n);

void require_distinct(std::span<const Point> points, const char* what);

}  // namespace detail

}  // namespace metric_forge

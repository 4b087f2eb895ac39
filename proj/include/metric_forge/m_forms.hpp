#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metric_forge/index_measure.hpp"
#include "metric_forge/inducer.hpp"
#include "metric_forge/kernel_core.hpp"

namespace metric_forge {

// Symmetric real function of m arguments, m even and >= 2.
class MKernel {
 public:
  using EvalFn = std::function<double(std::span<const Point>)>;

  MKernel(std::string label, int m, EvalFn eval);

  double operator()(std::span<const Point> args) const;

  int m() const noexcept { return m_; }
  const std::string& label() const noexcept { return label_; }
  // (-1)^{m/2}
  double sign() const noexcept { return (m_ / 2) % 2 == 0 ? 1.0 : -1.0; }

 private:
  std::string label_;
  int m_;
  EvalFn eval_;
};

namespace mkernels {
// L(u, v) = k(u, v).
MKernel from_kernel(const Kernel& k);
// (1/3) sum over the three pairings {ab|cd} of ||a-b||^2 ||c-d||^2. The signed
// 4-form equals the square of the 2-form of ||u-v||^2, so it is 4-negative
// definite; it vanishes on the diagonal.
MKernel pairing();
MKernel negated(const MKernel& k);
// (-1)^{m/2} sum_k prod_i a_i[k]; signed diagonal value is ||u||_m^m, so the
// induced rho_m is an L^m distance.
MKernel signed_product(int m);

// {"name": "pairing" | "neg_pairing" | "signed_product" | "from_kernel",
//  "m": m, "kernel": name}
MKernel from_json(const nlohmann::json& desc);
}  // namespace mkernels

// Largest |L(args) - L(permuted args)| over random argument permutations.
double max_permutation_asymmetry(const MKernel& k, std::span<const Point> points,
                                 std::size_t trials, std::uint64_t seed);

constexpr std::size_t kDefaultTermBudget = 10'000'000;

// (-1)^{m/2} sum over all n^m index tuples of L(x_i1..x_im) h_i1 ... h_im.
// Throws ResourceError when n^m exceeds `term_budget`.
double m_form(const MKernel& k, std::span<const Point> points, const CoefficientVector& h,
              std::size_t term_budget = kDefaultTermBudget);

// Unbiased estimate of m_form from `samples` uniformly drawn index tuples.
IntegralEstimate m_form_sampled(const MKernel& k, std::span<const Point> points,
                                const CoefficientVector& h, std::size_t samples,
                                std::uint64_t seed);

// Finitely supported Q with a density h normalized to zero Q-mean.
class SignedDiscreteMeasure {
 public:
  SignedDiscreteMeasure(std::vector<Point> points, std::vector<double> q,
                        std::vector<double> h);

  // {"points": [...], "q": [...], "h": [...]}
  static SignedDiscreteMeasure from_json(const nlohmann::json& desc);

  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<double>& q() const noexcept { return q_; }
  const std::vector<double>& h() const noexcept { return h_; }
  std::size_t size() const noexcept { return points_.size(); }
  // max |h(x_i)| over atoms with q_i > 0.
  double essential_sup() const noexcept;

 private:
  std::vector<Point> points_;
  std::vector<double> q_;
  std::vector<double> h_;
};

// (-1)^{m/2} sum L(x_i1..x_im) h(x_i1) q_i1 ... h(x_im) q_im
double weighted_m_form(const MKernel& k, const SignedDiscreteMeasure& measure,
                       std::size_t term_budget = kDefaultTermBudget);

struct MCheckOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double tolerance = kDefaultFormTolerance;
  bool strict = false;
  std::size_t term_budget = kDefaultTermBudget;
};

// Falsification search for the signed m-form >= 0 on zero-sum h, drawing the
// same trials as check_negative_definite. worst_value is the minimum signed
// form. Strict mode also searches each trial subset for a nontrivial zero:
// spectrally for m = 2, by descent on the unit zero-sum sphere otherwise.
CheckReport check_m_negative_definite(const MKernel& k, std::span<const Point> sample_points,
                                      const MCheckOptions& options);

// Strong variant over an ensemble of signed discrete measures: each member is
// evaluated as given, then with `trials` random zero-mean densities on its
// support. A violation is a negative integral or a vanishing one with h not
// Q-a.e. zero.
CheckReport check_strong_m_negative(const MKernel& k,
                                    std::span<const SignedDiscreteMeasure> ensemble,
                                    const MCheckOptions& options);

// R_m(x_1..x_m) = integral of L(f_y(x_1), ..., f_y(x_m)) over the index measure.
class InducedMKernel {
 public:
  InducedMKernel(MKernel source, FunctionFamily family, IndexMeasure measure,
                 IntegrationPolicy policy);

  IntegralEstimate estimate(std::span<const Point> args) const;
  double operator()(std::span<const Point> args) const { return estimate(args).value; }

  // R_m viewed as an MKernel on X.
  MKernel as_mkernel() const;

  int m() const noexcept { return source_.m(); }
  const MKernel& source() const noexcept { return source_; }
  const FunctionFamily& family() const noexcept { return family_; }
  const IndexMeasure& measure() const noexcept { return measure_; }

 private:
  MKernel source_;
  FunctionFamily family_;
  IndexMeasure measure_;
  IntegrationPolicy policy_;
};

InducedMKernel induce_m_kernel(MKernel source, FunctionFamily family, IndexMeasure measure,
                               IntegrationPolicy policy = {});

// Outcome of a deterministic search for a nontrivial zero of the signed m-form
// on the full point set.
struct NullProbe {
  bool strict = true;          // no nontrivial zero found and no negative value
  double value = 0.0;          // signed form at the probe direction
  std::vector<double> direction;
};

NullProbe strict_probe(const MKernel& k, std::span<const Point> points, double tolerance,
                       std::size_t term_budget = kDefaultTermBudget);

struct Assumption1Report {
  std::vector<double> per_atom_forms;   // signed m-form of L at f_y(points), per atom
  std::optional<double> ambient_form;   // signed m-form of L at the raw points
  bool per_y_vanishing = false;
  std::optional<bool> ambient_vanishing;
  // The implication per-y vanishing => ambient vanishing held on this instance.
  bool hypothesis_holds = true;
  bool induced_strict = false;
  std::optional<bool> source_strict;
  // Strict verdict of R_m equals the strict verdict of L on the probes.
  bool strictness_transferred = false;
  std::vector<std::string> notes;
};

// Requires a discrete (or grid) measure for per-atom enumeration. The ambient
// form is only available when L accepts the raw points (same space).
Assumption1Report check_assumption1(const MKernel& k, const FunctionFamily& family,
                                    const IndexMeasure& measure, std::span<const Point> points,
                                    const CoefficientVector& h, double tolerance);

// rho_m(s, t) = ((-1)^{m/2} R_m(s-t, ..., s-t))^{1/m}. Throws CertificateError
// when the signed value is below -tolerance.
double lm_distance(const InducedMKernel& r, const Point& s, const Point& t,
                   double tolerance = kDefaultFormTolerance);

// Triangle inequality of rho_m on random triples plus zero-diameter detection.
CheckReport verify_lm_metric(const InducedMKernel& r, std::span<const Point> points,
                             const AxiomOptions& options);

}  // namespace metric_forge

#include "metric_forge/m_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <set>

#include "metric_forge/errors.hpp"

namespace metric_forge {

MKernel::MKernel(std::string label, int m, EvalFn eval)
    : label_(std::move(label)), m_(m), eval_(std::move(eval)) {
  if (m_ < 2 || m_ % 2 != 0) {
    throw PreconditionError("m-kernel '" + label_ + "': m must be an even integer >= 2, got " +
                            std::to_string(m_));
  }
  if (!eval_) throw PreconditionError("m-kernel '" + label_ + "' has no evaluator");
}

double MKernel::operator()(std::span<const Point> args) const {
  if (args.size() != static_cast<std::size_t>(m_)) {
    throw DimensionError("m-kernel '" + label_ + "' takes " + std::to_string(m_) +
                         " arguments, got " + std::to_string(args.size()));
  }
  return eval_(args);
}

namespace mkernels {
namespace {

double sq_dist(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw DimensionError("m-kernel arguments differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

MKernel from_kernel(const Kernel& k) {
  return MKernel(k.label(), 2, [k](std::span<const Point> a) { return k(a[0], a[1]); });
}

MKernel pairing() {
  return MKernel("pairing", 4, [](std::span<const Point> x) {
    return (sq_dist(x[0], x[1]) * sq_dist(x[2], x[3]) +
            sq_dist(x[0], x[2]) * sq_dist(x[1], x[3]) +
            sq_dist(x[0], x[3]) * sq_dist(x[1], x[2])) /
           3.0;
  });
}

MKernel negated(const MKernel& k) {
  return MKernel("-" + k.label(), k.m(), [k](std::span<const Point> x) { return -k(x); });
}

MKernel signed_product(int m) {
  const double sign = (m / 2) % 2 == 0 ? 1.0 : -1.0;
  return MKernel("signed_product", m, [sign](std::span<const Point> x) {
    const std::size_t dim = x[0].size();
    double total = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double prod = sign;
      for (const Point& p : x) {
        if (p.size() != dim) throw DimensionError("m-kernel arguments differ in dimension");
        prod *= p[k];
      }
      total += prod;
    }
    return total;
  });
}

MKernel from_json(const nlohmann::json& desc) {
  if (!desc.is_object() || !desc.contains("name") || !desc["name"].is_string()) {
    throw ValidationError("m-kernel description needs a string 'name'");
  }
  for (const auto& [key, _] : desc.items()) {
    if (key != "name" && key != "m" && key != "kernel") {
      throw ValidationError("m-kernel description: unknown field '" + key + "'");
    }
  }
  const std::string name = desc["name"].get<std::string>();
  std::optional<int> m;
  if (desc.contains("m")) {
    if (!desc["m"].is_number_integer()) throw ValidationError("m-kernel 'm' must be an integer");
    m = desc["m"].get<int>();
  }
  auto expect_m = [&](int fixed) {
    if (m && *m != fixed) {
      throw ValidationError("m-kernel '" + name + "' has m = " + std::to_string(fixed));
    }
  };
  if (name == "pairing") {
    expect_m(4);
    return pairing();
  }
  if (name == "neg_pairing") {
    expect_m(4);
    return negated(pairing());
  }
  if (name == "signed_product") {
    if (!m) throw ValidationError("m-kernel 'signed_product' needs 'm'");
    if (*m < 2 || *m % 2 != 0) throw ValidationError("m must be an even integer >= 2");
    return signed_product(*m);
  }
  if (name == "from_kernel") {
    expect_m(2);
    if (!desc.contains("kernel") || !desc["kernel"].is_string()) {
      throw ValidationError("m-kernel 'from_kernel' needs a string 'kernel'");
    }
    return from_kernel(kernels::by_name(desc["kernel"].get<std::string>()));
  }
  throw ValidationError("unknown m-kernel '" + name +
                        "' (known: pairing, neg_pairing, signed_product, from_kernel)");
}

}  // namespace mkernels

double max_permutation_asymmetry(const MKernel& k, std::span<const Point> points,
                                 std::size_t trials, std::uint64_t seed) {
  if (points.empty()) return 0.0;
  const auto m = static_cast<std::size_t>(k.m());
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 rng = stream(seed, t, /*salt=*/5);
    std::vector<Point> args(m);
    for (auto& a : args) a = points[pick(rng)];
    const double base = k(args);
    std::shuffle(args.begin(), args.end(), rng);
    const double permuted = k(args);
    worst = std::max(worst, std::abs(base - permuted) / std::max(1.0, std::abs(base)));
  }
  return worst;
}

namespace {

std::size_t checked_term_count(std::size_t n, int m, std::size_t budget) {
  std::size_t terms = 1;
  for (int i = 0; i < m; ++i) {
    if (n != 0 && terms > budget / n) {
      throw ResourceError("m-form needs " + std::to_string(n) + "^" + std::to_string(m) +
                          " terms, above the budget of " + std::to_string(budget) +
                          "; use the sampled estimator (m_form_sampled)");
    }
    terms *= n;
  }
  if (terms > budget) {
    throw ResourceError("m-form term count exceeds the budget of " + std::to_string(budget) +
                        "; use the sampled estimator (m_form_sampled)");
  }
  return terms;
}

// Calls visit(tuple, args) for every index tuple in lexicographic order,
// reusing the argument buffer.
template <typename Visit>
void for_each_tuple(std::span<const Point> points, int m, Visit&& visit) {
  const std::size_t n = points.size();
  const auto mm = static_cast<std::size_t>(m);
  std::vector<std::size_t> idx(mm, 0);
  std::vector<Point> args(mm, points[0]);
  while (true) {
    visit(std::span<const std::size_t>(idx), std::span<const Point>(args));
    std::size_t pos = mm;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < n) {
        args[pos] = points[idx[pos]];
        break;
      }
      idx[pos] = 0;
      args[pos] = points[0];
      if (pos == 0) return;
    }
  }
}

// Unsigned kernel values over all n^m tuples, in for_each_tuple order.
std::vector<double> kernel_tensor(const MKernel& k, std::span<const Point> points,
                                  std::size_t budget) {
  std::vector<double> t;
  t.reserve(checked_term_count(points.size(), k.m(), budget));
  for_each_tuple(points, k.m(),
                 [&](std::span<const std::size_t>, std::span<const Point> args) {
                   t.push_back(k(args));
                 });
  return t;
}

// u_i = sum over the trailing m-1 indices of T[i, ...] h ... h.
std::vector<double> contract_to_vector(std::span<const double> tensor, std::size_t n, int m,
                                       std::span<const double> h) {
  std::vector<double> cur(tensor.begin(), tensor.end());
  for (int level = m; level > 1; --level) {
    std::vector<double> next(cur.size() / n);
    for (std::size_t r = 0; r < next.size(); ++r) {
      CompensatedSum s;
      for (std::size_t i = 0; i < n; ++i) s.add(cur[r * n + i] * h[i]);
      next[r] = s.value();
    }
    cur = std::move(next);
  }
  return cur;
}

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

void center_and_normalize(std::vector<double>& h) {
  const double mean = std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
  for (double& v : h) v -= mean;
  const double norm = std::sqrt(dot(h, h));
  if (norm > 0.0) {
    for (double& v : h) v /= norm;
  }
}

struct DescentResult {
  std::vector<double> h;
  double value;  // signed form
};

// Drives the signed form towards zero on the unit sphere of the zero-sum
// hyperplane, minimizing F^{2/m} (homogeneous of degree 2). Stops early on a
// negative value, which already falsifies m-negative definiteness.
DescentResult descend_to_null(std::span<const double> tensor, std::size_t n, int m, double sign,
                              std::vector<double> h, double tolerance) {
  constexpr int kMaxIterations = 150;
  center_and_normalize(h);
  auto evaluate = [&](const std::vector<double>& v, std::vector<double>* grad) {
    std::vector<double> u = contract_to_vector(tensor, n, m, v);
    const double f = sign * dot(u, v);
    if (grad) {
      grad->resize(n);
      for (std::size_t i = 0; i < n; ++i) (*grad)[i] = sign * static_cast<double>(m) * u[i];
    }
    return f;
  };
  const double exponent = 2.0 / static_cast<double>(m);
  std::vector<double> grad;
  double f = evaluate(h, &grad);
  double step = 1.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    if (f < -tolerance || std::abs(f) <= tolerance) break;
    // Riemannian gradient of F^{2/m}.
    const double scale = exponent * std::pow(f, exponent - 1.0);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = scale * grad[i];
    const double gmean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(n);
    for (double& v : g) v -= gmean;
    const double radial = dot(g, h);
    for (std::size_t i = 0; i < n; ++i) g[i] -= radial * h[i];
    const double gnorm2 = dot(g, g);
    if (gnorm2 < 1e-30) break;

    const double objective = std::pow(f, exponent);
    bool accepted = false;
    step = std::min(step * 2.0, 1.0);
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = h[i] - step * g[i];
      center_and_normalize(trial);
      std::vector<double> trial_grad;
      const double ft = evaluate(trial, &trial_grad);
      if (ft < 0.0 || std::pow(ft, exponent) <= objective - 1e-4 * step * gnorm2) {
        h = std::move(trial);
        f = ft;
        grad = std::move(trial_grad);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {std::move(h), f};
}

struct MProbe {
  std::vector<Point> points;
  std::vector<double> coefficients;
  std::vector<double> weights;
  double value;
  double scale;  // max |coefficient| (essential sup for weighted forms)
};

// Verdict rules for the signed m-form >= 0 convention.
class MTally {
 public:
  MTally(double tolerance, bool strict) : tolerance_(tolerance), strict_(strict) {}

  void record(MProbe probe) {
    max_abs_ = std::max(max_abs_, std::abs(probe.value));
    if (strict_ && !null_ && std::abs(probe.value) <= tolerance_ &&
        probe.scale > std::sqrt(tolerance_)) {
      null_ = probe;
    }
    if (!worst_ || probe.value < worst_->value) worst_ = std::move(probe);
  }

  CheckReport finish(std::size_t trials) const {
    CheckReport report;
    report.trials = trials;
    report.tolerance = tolerance_;
    if (!worst_) {
      report.verdict = Verdict::kDegenerate;
      report.notes.push_back("no forms evaluated");
      return report;
    }
    auto witness = [](const MProbe& p) {
      return Witness{p.points, p.coefficients, p.value, p.weights};
    };
    report.worst_value = worst_->value;
    report.witness = witness(*worst_);
    if (worst_->value < -tolerance_) {
      report.verdict = Verdict::kFail;
      report.failure_kind = "violation";
    } else if (null_) {
      report.verdict = Verdict::kFail;
      report.failure_kind = "null_attained";
      report.worst_value = null_->value;
      report.witness = witness(*null_);
    } else if (max_abs_ <= tolerance_) {
      report.verdict = Verdict::kDegenerate;
      report.notes.push_back("every evaluated form vanished; no certificate content");
    }
    return report;
  }

 private:
  double tolerance_;
  bool strict_;
  double max_abs_ = 0.0;
  std::optional<MProbe> worst_;
  std::optional<MProbe> null_;
};

// Direction probe for strict mode on one point set.
std::vector<double> null_search_direction(const MKernel& k, std::span<const Point> points,
                                          std::vector<double> start, double tolerance,
                                          std::size_t budget) {
  const std::size_t n = points.size();
  if (k.m() == 2) {
    // The signed form is -c^T L c; its zero-sum minimum direction is the top
    // eigenvector of the restricted Gram matrix (same probe as kernel_core).
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Point args[2] = {points[i], points[j]};
        gram[i * n + j] = k(args);
      }
    }
    return detail::top_zero_sum_direction(gram, n);
  }
  // Two points leave a single zero-sum direction.
  if (n == 2) return {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  const std::vector<double> tensor = kernel_tensor(k, points, budget);
  return descend_to_null(tensor, n, k.m(), k.sign(), std::move(start), tolerance).h;
}

}  // namespace

double m_form(const MKernel& k, std::span<const Point> points, const CoefficientVector& h,
              std::size_t term_budget) {
  if (points.size() != h.size()) {
    throw DimensionError("m_form: " + std::to_string(points.size()) + " points but " +
                         std::to_string(h.size()) + " coefficients");
  }
  checked_term_count(points.size(), k.m(), term_budget);
  CompensatedSum sum;
  for_each_tuple(points, k.m(),
                 [&](std::span<const std::size_t> idx, std::span<const Point> args) {
                   double term = k(args);
                   for (std::size_t i : idx) term *= h[i];
                   sum.add(term);
                 });
  return k.sign() * sum.value();
}

IntegralEstimate m_form_sampled(const MKernel& k, std::span<const Point> points,
                                const CoefficientVector& h, std::size_t samples,
                                std::uint64_t seed) {
  if (points.size() != h.size()) throw DimensionError("m_form_sampled: size mismatch");
  if (samples == 0) throw PreconditionError("m_form_sampled needs at least one sample");
  const std::size_t n = points.size();
  const auto m = static_cast<std::size_t>(k.m());
  const double tuples = std::pow(static_cast<double>(n), static_cast<double>(m));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<Point> args(m);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    SplitMix64 rng = stream(seed, s, /*salt=*/6);
    double term = tuples;
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t i = pick(rng);
      args[a] = points[i];
      term *= h[i];
    }
    term *= k(args);
    const double delta = term - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (term - mean);
  }
  const double count = static_cast<double>(samples);
  const double variance = samples > 1 ? m2 / (count - 1.0) : 0.0;
  return {k.sign() * mean, std::sqrt(variance / count), samples};
}

SignedDiscreteMeasure::SignedDiscreteMeasure(std::vector<Point> points, std::vector<double> q,
                                             std::vector<double> h)
    : points_(std::move(points)), q_(std::move(q)), h_(std::move(h)) {
  if (points_.empty()) throw InsufficientDataError("signed discrete measure needs atoms");
  if (q_.size() != points_.size() || h_.size() != points_.size()) {
    throw DimensionError("signed discrete measure: points, q and h must have equal length");
  }
  CompensatedSum total;
  for (double w : q_) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("q weights must be finite and >= 0");
    total.add(w);
  }
  if (!(total.value() > 0.0)) throw ValidationError("q weights sum to zero");
  for (double& w : q_) w /= total.value();
  CompensatedSum mean;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    if (!std::isfinite(h_[i])) throw ValidationError("density h has a non-finite value");
    mean.add(q_[i] * h_[i]);
  }
  if (mean.value() != 0.0) {
    for (double& v : h_) v -= mean.value();
  }
}

SignedDiscreteMeasure SignedDiscreteMeasure::from_json(const nlohmann::json& desc) {
  if (!desc.is_object()) throw ValidationError("signed measure must be an object");
  for (const auto& [key, _] : desc.items()) {
    if (key != "points" && key != "q" && key != "h") {
      throw ValidationError("signed measure: unknown field '" + key + "'");
    }
  }
  auto numbers = [&](const char* key) {
    if (!desc.contains(key) || !desc[key].is_array()) {
      throw ValidationError(std::string("signed measure needs array '") + key + "'");
    }
    std::vector<double> out;
    for (const auto& v : desc[key]) {
      if (!v.is_number()) throw ValidationError(std::string("non-numeric entry in '") + key + "'");
      out.push_back(v.get<double>());
    }
    return out;
  };
  if (!desc.contains("points") || !desc["points"].is_array()) {
    throw ValidationError("signed measure needs array 'points'");
  }
  std::vector<Point> points;
  for (const auto& p : desc["points"]) {
    if (p.is_number()) {
      points.push_back({p.get<double>()});
    } else if (p.is_array()) {
      Point pt;
      for (const auto& v : p) {
        if (!v.is_number()) throw ValidationError("non-numeric coordinate in 'points'");
        pt.push_back(v.get<double>());
      }
      points.push_back(std::move(pt));
    } else {
      throw ValidationError("signed measure points must be numbers or arrays");
    }
  }
  return SignedDiscreteMeasure(std::move(points), numbers("q"), numbers("h"));
}

double SignedDiscreteMeasure::essential_sup() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    if (q_[i] > 0.0) s = std::max(s, std::abs(h_[i]));
  }
  return s;
}

double weighted_m_form(const MKernel& k, const SignedDiscreteMeasure& measure,
                       std::size_t term_budget) {
  const std::vector<Point>& pts = measure.points();
  checked_term_count(pts.size(), k.m(), term_budget);
  std::vector<double> hq(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) hq[i] = measure.h()[i] * measure.q()[i];
  CompensatedSum sum;
  for_each_tuple(pts, k.m(), [&](std::span<const std::size_t> idx, std::span<const Point> args) {
    double term = k(args);
    for (std::size_t i : idx) term *= hq[i];
    sum.add(term);
  });
  return k.sign() * sum.value();
}

CheckReport check_m_negative_definite(const MKernel& k, std::span<const Point> sample_points,
                                      const MCheckOptions& options) {
  if (sample_points.size() < 2) {
    throw InsufficientDataError("m-negative-definiteness check needs at least 2 sample points");
  }
  if (!(options.tolerance >= 0.0)) throw PreconditionError("tolerance must be >= 0");
  if (options.trials == 0) throw PreconditionError("trials must be positive");
  if (options.strict) detail::require_distinct(sample_points, "strict m-negative-definiteness check");

  MTally tally(options.tolerance, options.strict);
  for (std::size_t t = 0; t < options.trials; ++t) {
    detail::TrialDraw draw = detail::draw_trial(sample_points.size(), options.seed, t);
    std::vector<Point> subset = detail::gather(sample_points, draw.indices);
    const CoefficientVector h(draw.coefficients);
    const double value = m_form(k, subset, h, options.term_budget);
    tally.record({subset, draw.coefficients, {}, value, h.max_abs()});

    if (options.strict) {
      const CoefficientVector probe(
          null_search_direction(k, subset, draw.coefficients, options.tolerance,
                                options.term_budget));
      const double probe_value = m_form(k, subset, probe, options.term_budget);
      tally.record({std::move(subset), {probe.values().begin(), probe.values().end()}, {},
                    probe_value, probe.max_abs()});
    }
  }
  return tally.finish(options.trials);
}

CheckReport check_strong_m_negative(const MKernel& k,
                                    std::span<const SignedDiscreteMeasure> ensemble,
                                    const MCheckOptions& options) {
  if (ensemble.empty()) throw InsufficientDataError("strong check needs at least one measure");
  if (!(options.tolerance >= 0.0)) throw PreconditionError("tolerance must be >= 0");

  MTally tally(options.tolerance, /*strict=*/true);
  std::size_t evaluated = 0;
  auto record = [&](const SignedDiscreteMeasure& q) {
    const double value = weighted_m_form(k, q, options.term_budget);
    tally.record({q.points(), q.h(), q.q(), value, q.essential_sup()});
    ++evaluated;
  };
  for (std::size_t e = 0; e < ensemble.size(); ++e) {
    const SignedDiscreteMeasure& member = ensemble[e];
    record(member);
    for (std::size_t t = 0; t < options.trials; ++t) {
      SplitMix64 rng = stream(options.seed, e * options.trials + t, /*salt=*/7);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> h(member.size());
      for (double& v : h) v = normal(rng);
      record(SignedDiscreteMeasure(member.points(), member.q(), std::move(h)));
    }
  }
  return tally.finish(evaluated);
}

InducedMKernel::InducedMKernel(MKernel source, FunctionFamily family, IndexMeasure measure,
                               IntegrationPolicy policy)
    : source_(std::move(source)),
      family_(std::move(family)),
      measure_(std::move(measure)),
      policy_(policy) {}

IntegralEstimate InducedMKernel::estimate(std::span<const Point> args) const {
  if (args.size() != static_cast<std::size_t>(source_.m())) {
    throw DimensionError("induced m-kernel takes " + std::to_string(source_.m()) +
                         " arguments, got " + std::to_string(args.size()));
  }
  std::vector<Point> mapped(args.size());
  try {
    return integrate(
        measure_,
        [&](const Point& y) {
          for (std::size_t i = 0; i < args.size(); ++i) mapped[i] = family_(y, args[i]);
          return source_(mapped);
        },
        policy_.mc_samples, policy_.seed);
  } catch (const DomainError& e) {
    throw EvaluationError(e.what());
  }
}

MKernel InducedMKernel::as_mkernel() const {
  auto self = std::make_shared<InducedMKernel>(*this);
  return MKernel("R[" + source_.label() + "]", source_.m(),
                 [self](std::span<const Point> args) { return self->estimate(args).value; });
}

InducedMKernel induce_m_kernel(MKernel source, FunctionFamily family, IndexMeasure measure,
                               IntegrationPolicy policy) {
  return InducedMKernel(std::move(source), std::move(family), std::move(measure), policy);
}

NullProbe strict_probe(const MKernel& k, std::span<const Point> points, double tolerance,
                       std::size_t term_budget) {
  const std::size_t n = points.size();
  if (n < 2) throw InsufficientDataError("strict probe needs at least 2 points");
  NullProbe best;
  best.value = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<double> direction) {
    const CoefficientVector c(std::move(direction));
    const double v = m_form(k, points, c, term_budget);
    if (std::abs(v) < std::abs(best.value) || v < -tolerance) {
      best.value = v;
      best.direction.assign(c.values().begin(), c.values().end());
    }
    if (v < -tolerance || (std::abs(v) <= tolerance && c.max_abs() > std::sqrt(tolerance))) {
      best.strict = false;
    }
  };
  constexpr std::size_t kStarts = 6;
  for (std::size_t s = 0; s < kStarts && best.strict; ++s) {
    SplitMix64 rng = stream(0, s, /*salt=*/8);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> start(n);
    for (double& v : start) v = normal(rng);
    consider(null_search_direction(k, points, start, tolerance, term_budget));
    if (k.m() == 2 || n == 2) break;  // deterministic probe; restarts add nothing
  }
  return best;
}

Assumption1Report check_assumption1(const MKernel& k, const FunctionFamily& family,
                                    const IndexMeasure& measure, std::span<const Point> points,
                                    const CoefficientVector& h, double tolerance) {
  if (!measure.deterministic()) {
    throw UnsupportedOperationError(
        "Assumption-1 check enumerates index atoms; sampler measures are not supported");
  }
  if (points.size() != h.size()) throw DimensionError("check_assumption1: size mismatch");

  Assumption1Report report;
  report.per_y_vanishing = true;
  for (const auto& atom : measure.atoms()) {
    if (atom.weight <= 0.0) continue;
    std::vector<Point> mapped;
    mapped.reserve(points.size());
    for (const Point& x : points) mapped.push_back(family(atom.y, x));
    const double v = m_form(k, mapped, h);
    report.per_atom_forms.push_back(v);
    if (std::abs(v) > tolerance) report.per_y_vanishing = false;
  }

  try {
    report.ambient_form = m_form(k, points, h);
    report.ambient_vanishing = std::abs(*report.ambient_form) <= tolerance;
  } catch (const DimensionError& e) {
    report.notes.push_back(std::string("kernel does not accept the raw points: ") + e.what());
  } catch (const DomainError& e) {
    report.notes.push_back(std::string("kernel does not accept the raw points: ") + e.what());
  }
  if (report.per_y_vanishing && report.ambient_vanishing.has_value()) {
    report.hypothesis_holds = *report.ambient_vanishing;
  } else if (report.per_y_vanishing) {
    report.notes.push_back("ambient form unavailable; implication not evaluated");
  }

  const InducedMKernel induced(k, family, measure, IntegrationPolicy{});
  report.induced_strict = strict_probe(induced.as_mkernel(), points, tolerance).strict;
  if (report.ambient_form.has_value()) {
    report.source_strict = strict_probe(k, points, tolerance).strict;
    report.strictness_transferred = report.induced_strict == *report.source_strict;
  }
  return report;
}

double lm_distance(const InducedMKernel& r, const Point& s, const Point& t, double tolerance) {
  const DomainDescriptor& domain = r.family().domain();
  if (!domain.vector_space) {
    throw DomainError("L^m distance needs a vector-space domain (s - t is undefined)");
  }
  if (s.size() != domain.dim || t.size() != domain.dim) {
    throw DimensionError("lm_distance: points must have dimension " + std::to_string(domain.dim));
  }
  Point diff(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) diff[i] = s[i] - t[i];
  const std::vector<Point> args(static_cast<std::size_t>(r.m()), diff);
  const double signed_value = r.source().sign() * r(args);
  if (signed_value < -tolerance) {
    throw CertificateError("signed R_m at s - t is " + std::to_string(signed_value) +
                           " < 0: the kernel is not m-negative definite along this direction");
  }
  return std::pow(std::max(signed_value, 0.0), 1.0 / static_cast<double>(r.m()));
}

CheckReport verify_lm_metric(const InducedMKernel& r, std::span<const Point> points,
                             const AxiomOptions& options) {
  const std::size_t n = points.size();
  if (n == 0) throw InsufficientDataError("L^m metric check needs at least one point");
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      d[i * n + j] = lm_distance(r, points[i], points[j], options.tolerance);
    }
  }
  CheckReport report = detail::axioms_from_table(d, points, options, /*quotient=*/false);
  if (report.zero_diameter) {
    report.notes.push_back("rho_m vanishes identically: the kernel is zero on the diagonal");
  }
  return report;
}

}  // namespace metric_forge

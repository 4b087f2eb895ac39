#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "metric_forge/numeric.hpp"

namespace metric_forge {

enum class MeasureKind { kDiscrete, kGrid, kSampler };

std::string to_string(MeasureKind kind);

// Probability measure on the index set Y. Index points are real vectors
// (scalars are 1-vectors).
//
// * discrete: finitely many atoms, weights normalized on construction.
// * grid: quadrature nodes for the uniform probability on [a, b].
// * sampler: a named distribution drawn through a seeded counter-based stream;
//   draw i depends only on (seed, i).
class IndexMeasure {
 public:
  struct Atom {
    Point y;
    double weight;
  };

  static IndexMeasure discrete(std::vector<Atom> atoms);
  // Odd node counts use composite Simpson weights, even counts the
  // trapezoidal rule; both are positive.
  static IndexMeasure grid(double a, double b, std::size_t nodes);
  // Known samplers: "uniform" {low, high, dim}, "normal" {mean, stddev, dim}.
  static IndexMeasure sampler(std::string name, std::map<std::string, double> params,
                              std::optional<std::uint64_t> seed = std::nullopt);

  // {"kind": "discrete", "atoms": [[y, w], ...]} |
  // {"kind": "grid", "interval": [a, b], "nodes": n} |
  // {"kind": "sampler", "name": "...", "params": {...}, "seed": s}
  static IndexMeasure from_json(const nlohmann::json& desc);
  nlohmann::json to_json() const;

  MeasureKind kind() const noexcept { return kind_; }
  bool deterministic() const noexcept { return kind_ != MeasureKind::kSampler; }

  // Atoms for discrete kind, nodes for grid kind. Empty for samplers.
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  const std::string& sampler_name() const noexcept { return sampler_name_; }
  const std::map<std::string, double>& sampler_params() const noexcept { return params_; }
  std::optional<std::uint64_t> sampler_seed() const noexcept { return seed_; }
  void set_sampler_seed(std::uint64_t seed) { seed_ = seed; }

  // Draw `index` of the sampler stream for `seed`.
  Point draw(std::uint64_t seed, std::uint64_t index) const;

 private:
  IndexMeasure() = default;

  MeasureKind kind_ = MeasureKind::kDiscrete;
  std::vector<Atom> atoms_;
  double grid_a_ = 0.0;
  double grid_b_ = 0.0;
  std::string sampler_name_;
  std::map<std::string, double> params_;
  std::optional<std::uint64_t> seed_;
};

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for deterministic kinds
  std::size_t samples_used = 0;
};

using IndexFunction = std::function<double(const Point& y)>;

// Integral of g over the measure. Exact weighted sum for discrete/grid kinds;
// sample mean over `mc_samples` draws with stderr = sd / sqrt(n) for samplers.
IntegralEstimate integrate(const IndexMeasure& measure, const IndexFunction& g,
                           std::size_t mc_samples, std::uint64_t seed);

// Finite proxy for the support: positive-weight atoms/nodes (count ignored),
// or `count` draws for samplers.
std::vector<Point> support_sample(const IndexMeasure& measure, std::size_t count,
                                  std::uint64_t seed);

struct DomainDescriptor {
  std::size_t dim = 1;
  // Subtraction and scaling are meaningful on X.
  bool vector_space = true;
  // Zero element used by norm(x) = rho(x, origin).
  Point origin;
};

// The family y -> f_y, viewed as a map (y, x) -> f_y(x) in Z.
class FunctionFamily {
 public:
  using ApplyFn = std::function<Point(const Point& y, const Point& x)>;

  FunctionFamily(std::string name, ApplyFn apply, DomainDescriptor domain,
                 std::size_t codomain_dim, bool linear);

  // f_y(x) = x[y]; index points are coordinate indices.
  static FunctionFamily coordinate_projection(std::size_t dim);
  // f_y(x) = <y, x>; index points are coefficient vectors in R^dim.
  static FunctionFamily linear_functional(std::size_t dim);
  // f_y(x) = y * x; scalar index, Z = R^dim.
  static FunctionFamily scaled_identity(std::size_t dim);
  // f_y(x) = value for every y and x. Linear only when value == 0.
  static FunctionFamily constant(std::size_t dim, double value);

  // {"name": "...", "dim": d, "params": {...}}
  static FunctionFamily from_json(const nlohmann::json& desc);

  Point operator()(const Point& y, const Point& x) const;

  const std::string& name() const noexcept { return name_; }
  const DomainDescriptor& domain() const noexcept { return domain_; }
  std::size_t codomain_dim() const noexcept { return codomain_dim_; }
  bool linear() const noexcept { return linear_; }

  // t * f_y, for t >= 0.
  FunctionFamily scaled(double t) const;

 private:
  std::string name_;
  ApplyFn apply_;
  DomainDescriptor domain_;
  std::size_t codomain_dim_;
  bool linear_;
};

// Largest relative defect of f_y(a x1 + b x2) = a f_y(x1) + b f_y(x2) over
// random probes and the given index points.
double linearity_defect(const FunctionFamily& family, const std::vector<Point>& index_points,
                        std::size_t probes, std::uint64_t seed);

}  // namespace metric_forge

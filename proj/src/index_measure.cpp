#include "metric_forge/index_measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "metric_forge/errors.hpp"

namespace metric_forge {

namespace {

void reject_unknown_keys(const nlohmann::json& desc, const std::set<std::string>& allowed,
                         const std::string& what) {
  if (!desc.is_object()) throw ValidationError(what + " must be a JSON object");
  for (const auto& [key, _] : desc.items()) {
    if (!allowed.contains(key)) throw ValidationError(what + ": unknown field '" + key + "'");
  }
}

Point json_to_point(const nlohmann::json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array() && !j.empty()) {
    Point p;
    for (const auto& v : j) {
      if (!v.is_number()) throw ValidationError(what + ": non-numeric coordinate");
      p.push_back(v.get<double>());
    }
    return p;
  }
  throw ValidationError(what + ": expected a number or a non-empty array of numbers");
}

nlohmann::json point_to_json(const Point& p) {
  if (p.size() == 1) return p[0];
  return nlohmann::json(p);
}

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void require_dim(const Point& x, std::size_t dim, const std::string& family) {
  if (x.size() != dim) {
    throw DimensionError(family + ": expected a point of dimension " + std::to_string(dim) +
                         ", got " + std::to_string(x.size()));
  }
}

DomainDescriptor vector_domain(std::size_t dim) {
  return DomainDescriptor{dim, true, Point(dim, 0.0)};
}

}  // namespace

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::kDiscrete:
      return "discrete";
    case MeasureKind::kGrid:
      return "grid";
    case MeasureKind::kSampler:
      return "sampler";
  }
  return "unknown";
}

IndexMeasure IndexMeasure::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("discrete measure needs at least one atom");
  CompensatedSum total;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight < 0.0) {
      throw ValidationError("discrete measure weights must be finite and >= 0");
    }
    if (a.y.empty()) throw ValidationError("discrete measure atom has an empty index point");
    total.add(a.weight);
  }
  const double sum = total.value();
  if (!(sum > 0.0)) throw ValidationError("discrete measure has empty support (all weights 0)");
  for (Atom& a : atoms) a.weight /= sum;

  IndexMeasure m;
  m.kind_ = MeasureKind::kDiscrete;
  m.atoms_ = std::move(atoms);
  return m;
}

IndexMeasure IndexMeasure::grid(double a, double b, std::size_t nodes) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
    throw ValidationError("grid measure needs a finite interval with a < b");
  }
  if (nodes < 2) throw ValidationError("grid measure needs at least 2 nodes");

  const std::size_t intervals = nodes - 1;
  const double h = (b - a) / static_cast<double>(intervals);
  std::vector<Atom> atoms(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    atoms[i].y = {i == intervals ? b : a + h * static_cast<double>(i)};
  }
  if (nodes % 2 == 1) {
    // Composite Simpson: 1,4,2,4,...,4,1 times 1/(3 * intervals).
    const double unit = 1.0 / (3.0 * static_cast<double>(intervals));
    for (std::size_t i = 0; i < nodes; ++i) {
      const double mult = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      atoms[i].weight = mult * unit;
    }
  } else {
    const double unit = 1.0 / static_cast<double>(intervals);
    for (std::size_t i = 0; i < nodes; ++i) {
      atoms[i].weight = (i == 0 || i == intervals) ? 0.5 * unit : unit;
    }
  }

  IndexMeasure m;
  m.kind_ = MeasureKind::kGrid;
  m.atoms_ = std::move(atoms);
  m.grid_a_ = a;
  m.grid_b_ = b;
  return m;
}

IndexMeasure IndexMeasure::sampler(std::string name, std::map<std::string, double> params,
                                   std::optional<std::uint64_t> seed) {
  std::set<std::string> allowed;
  if (name == "uniform") {
    allowed = {"low", "high", "dim"};
  } else if (name == "normal") {
    allowed = {"mean", "stddev", "dim"};
  } else {
    throw ValidationError("unknown sampler '" + name + "' (known: uniform, normal)");
  }
  for (const auto& [key, value] : params) {
    if (!allowed.contains(key)) {
      throw ValidationError("sampler '" + name + "': unknown parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw ValidationError("sampler '" + name + "': parameter '" + key + "' is not finite");
    }
  }
  const double dim = param_or(params, "dim", 1.0);
  if (dim < 1.0 || dim != std::floor(dim)) {
    throw ValidationError("sampler dim must be a positive integer");
  }
  if (name == "uniform" && !(param_or(params, "low", 0.0) < param_or(params, "high", 1.0))) {
    throw ValidationError("uniform sampler needs low < high");
  }
  if (name == "normal" && !(param_or(params, "stddev", 1.0) > 0.0)) {
    throw ValidationError("normal sampler needs stddev > 0");
  }

  IndexMeasure m;
  m.kind_ = MeasureKind::kSampler;
  m.sampler_name_ = std::move(name);
  m.params_ = std::move(params);
  m.seed_ = seed;
  return m;
}

Point IndexMeasure::draw(std::uint64_t seed, std::uint64_t index) const {
  if (kind_ != MeasureKind::kSampler) {
    throw UnsupportedOperationError("draw() is only defined for sampler measures");
  }
  SplitMix64 rng = stream(seed, index, /*salt=*/2);
  const auto dim = static_cast<std::size_t>(param_or(params_, "dim", 1.0));
  Point y(dim);
  if (sampler_name_ == "uniform") {
    std::uniform_real_distribution<double> dist(param_or(params_, "low", 0.0),
                                                param_or(params_, "high", 1.0));
    for (double& v : y) v = dist(rng);
  } else {
    std::normal_distribution<double> dist(param_or(params_, "mean", 0.0),
                                          param_or(params_, "stddev", 1.0));
    for (double& v : y) v = dist(rng);
  }
  return y;
}

IndexMeasure IndexMeasure::from_json(const nlohmann::json& desc) {
  if (!desc.is_object() || !desc.contains("kind") || !desc["kind"].is_string()) {
    throw ValidationError("measure description needs a string 'kind'");
  }
  const std::string kind = desc["kind"].get<std::string>();
  if (kind == "discrete") {
    reject_unknown_keys(desc, {"kind", "atoms"}, "discrete measure");
    if (!desc.contains("atoms") || !desc["atoms"].is_array()) {
      throw ValidationError("discrete measure needs an 'atoms' array");
    }
    std::vector<Atom> atoms;
    for (const auto& atom : desc["atoms"]) {
      if (!atom.is_array() || atom.size() != 2 || !atom[1].is_number()) {
        throw ValidationError("discrete measure atoms must be [y, weight] pairs");
      }
      atoms.push_back({json_to_point(atom[0], "atom index point"), atom[1].get<double>()});
    }
    return discrete(std::move(atoms));
  }
  if (kind == "grid") {
    reject_unknown_keys(desc, {"kind", "interval", "nodes"}, "grid measure");
    if (!desc.contains("interval") || !desc["interval"].is_array() ||
        desc["interval"].size() != 2 || !desc["interval"][0].is_number() ||
        !desc["interval"][1].is_number()) {
      throw ValidationError("grid measure needs 'interval': [a, b]");
    }
    if (!desc.contains("nodes") || !desc["nodes"].is_number_unsigned()) {
      throw ValidationError("grid measure needs a positive integer 'nodes'");
    }
    return grid(desc["interval"][0].get<double>(), desc["interval"][1].get<double>(),
                desc["nodes"].get<std::size_t>());
  }
  if (kind == "sampler") {
    reject_unknown_keys(desc, {"kind", "name", "params", "seed"}, "sampler measure");
    if (!desc.contains("name") || !desc["name"].is_string()) {
      throw ValidationError("sampler measure needs a string 'name'");
    }
    std::map<std::string, double> params;
    if (desc.contains("params")) {
      if (!desc["params"].is_object()) throw ValidationError("sampler 'params' must be an object");
      for (const auto& [key, value] : desc["params"].items()) {
        if (!value.is_number()) {
          throw ValidationError("sampler parameter '" + key + "' must be numeric");
        }
        params[key] = value.get<double>();
      }
    }
    std::optional<std::uint64_t> seed;
    if (desc.contains("seed")) {
      if (!desc["seed"].is_number_unsigned()) {
        throw ValidationError("sampler 'seed' must be a non-negative integer");
      }
      seed = desc["seed"].get<std::uint64_t>();
    }
    return sampler(desc["name"].get<std::string>(), std::move(params), seed);
  }
  throw ValidationError("unknown measure kind '" + kind + "'");
}

nlohmann::json IndexMeasure::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  switch (kind_) {
    case MeasureKind::kDiscrete: {
      nlohmann::json atoms = nlohmann::json::array();
      for (const Atom& a : atoms_) atoms.push_back({point_to_json(a.y), a.weight});
      j["atoms"] = std::move(atoms);
      break;
    }
    case MeasureKind::kGrid:
      j["interval"] = {grid_a_, grid_b_};
      j["nodes"] = atoms_.size();
      break;
    case MeasureKind::kSampler:
      j["name"] = sampler_name_;
      j["params"] = params_;
      if (seed_) j["seed"] = *seed_;
      break;
  }
  return j;
}

IntegralEstimate integrate(const IndexMeasure& measure, const IndexFunction& g,
                           std::size_t mc_samples, std::uint64_t seed) {
  auto checked = [&](const Point& y) {
    const double v = g(y);
    if (!std::isfinite(v)) {
      throw EvaluationError("integrand is not finite at y = " + format_point(y));
    }
    return v;
  };

  if (measure.deterministic()) {
    CompensatedSum sum;
    std::size_t used = 0;
    for (const auto& atom : measure.atoms()) {
      if (atom.weight == 0.0) continue;
      sum.add(atom.weight * checked(atom.y));
      ++used;
    }
    return {sum.value(), 0.0, used};
  }

  if (mc_samples == 0) throw PreconditionError("mc_samples must be positive");
  // Welford running moments; draws are visited in index order.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    const double v = checked(measure.draw(seed, i));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(mc_samples);
  const double variance = mc_samples > 1 ? m2 / (n - 1.0) : 0.0;
  return {mean, std::sqrt(variance / n), mc_samples};
}

std::vector<Point> support_sample(const IndexMeasure& measure, std::size_t count,
                                  std::uint64_t seed) {
  if (count == 0) throw PreconditionError("support_sample count must be >= 1");
  std::vector<Point> out;
  if (measure.deterministic()) {
    for (const auto& atom : measure.atoms()) {
      if (atom.weight > 0.0) out.push_back(atom.y);
    }
    return out;
  }
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(measure.draw(seed, i));
  return out;
}

FunctionFamily::FunctionFamily(std::string name, ApplyFn apply, DomainDescriptor domain,
                               std::size_t codomain_dim, bool linear)
    : name_(std::move(name)),
      apply_(std::move(apply)),
      domain_(std::move(domain)),
      codomain_dim_(codomain_dim),
      linear_(linear) {
  if (!apply_) throw PreconditionError("function family '" + name_ + "' has no evaluator");
  if (domain_.origin.empty()) domain_.origin = Point(domain_.dim, 0.0);
}

Point FunctionFamily::operator()(const Point& y, const Point& x) const { return apply_(y, x); }

FunctionFamily FunctionFamily::coordinate_projection(std::size_t dim) {
  return FunctionFamily(
      "coordinate_projection",
      [dim](const Point& y, const Point& x) -> Point {
        require_dim(x, dim, "coordinate_projection");
        if (y.size() != 1 || y[0] < 0.0 || y[0] != std::floor(y[0]) ||
            y[0] >= static_cast<double>(dim)) {
          throw DomainError("coordinate_projection: index point " + format_point(y) +
                            " is not a coordinate index below " + std::to_string(dim));
        }
        return {x[static_cast<std::size_t>(y[0])]};
      },
      vector_domain(dim), 1, true);
}

FunctionFamily FunctionFamily::linear_functional(std::size_t dim) {
  return FunctionFamily(
      "linear_functional",
      [dim](const Point& y, const Point& x) -> Point {
        require_dim(x, dim, "linear_functional");
        if (y.size() != dim) {
          throw DomainError("linear_functional: index point " + format_point(y) +
                            " does not have dimension " + std::to_string(dim));
        }
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += y[i] * x[i];
        return {s};
      },
      vector_domain(dim), 1, true);
}

FunctionFamily FunctionFamily::scaled_identity(std::size_t dim) {
  return FunctionFamily(
      "scaled_identity",
      [dim](const Point& y, const Point& x) -> Point {
        require_dim(x, dim, "scaled_identity");
        if (y.size() != 1) {
          throw DomainError("scaled_identity: index point must be scalar, got " + format_point(y));
        }
        Point out(x);
        for (double& v : out) v *= y[0];
        return out;
      },
      vector_domain(dim), dim, true);
}

FunctionFamily FunctionFamily::constant(std::size_t dim, double value) {
  return FunctionFamily(
      "constant",
      [dim, value](const Point&, const Point& x) -> Point {
        require_dim(x, dim, "constant");
        return {value};
      },
      vector_domain(dim), 1, value == 0.0);
}

FunctionFamily FunctionFamily::from_json(const nlohmann::json& desc) {
  reject_unknown_keys(desc, {"name", "dim", "params"}, "family description");
  if (!desc.contains("name") || !desc["name"].is_string()) {
    throw ValidationError("family description needs a string 'name'");
  }
  if (!desc.contains("dim") || !desc["dim"].is_number_unsigned() || desc["dim"].get<int>() < 1) {
    throw ValidationError("family description needs a positive integer 'dim'");
  }
  const std::string name = desc["name"].get<std::string>();
  const auto dim = desc["dim"].get<std::size_t>();
  const nlohmann::json params = desc.value("params", nlohmann::json::object());
  if (!params.is_object()) throw ValidationError("family 'params' must be an object");

  if (name == "constant") {
    reject_unknown_keys(params, {"value"}, "constant family params");
    const auto value = params.value("value", 0.0);
    return constant(dim, value);
  }
  if (!params.empty()) throw ValidationError("family '" + name + "' takes no params");
  if (name == "coordinate_projection") return coordinate_projection(dim);
  if (name == "linear_functional") return linear_functional(dim);
  if (name == "scaled_identity") return scaled_identity(dim);
  throw ValidationError("unknown family '" + name +
                        "' (known: coordinate_projection, linear_functional, scaled_identity, "
                        "constant)");
}

FunctionFamily FunctionFamily::scaled(double t) const {
  if (!(t >= 0.0)) throw PreconditionError("family scale factor must be >= 0");
  ApplyFn inner = apply_;
  return FunctionFamily(
      name_ + "*" + std::to_string(t),
      [inner, t](const Point& y, const Point& x) {
        Point out = inner(y, x);
        for (double& v : out) v *= t;
        return out;
      },
      domain_, codomain_dim_, linear_);
}

double linearity_defect(const FunctionFamily& family, const std::vector<Point>& index_points,
                        std::size_t probes, std::uint64_t seed) {
  const std::size_t dim = family.domain().dim;
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    SplitMix64 rng = stream(seed, p, /*salt=*/3);
    std::normal_distribution<double> normal(0.0, 1.0);
    Point x1(dim), x2(dim), combo(dim);
    for (double& v : x1) v = normal(rng);
    for (double& v : x2) v = normal(rng);
    const double a = normal(rng);
    const double b = normal(rng);
    for (std::size_t i = 0; i < dim; ++i) combo[i] = a * x1[i] + b * x2[i];
    for (const Point& y : index_points) {
      const Point lhs = family(y, combo);
      const Point f1 = family(y, x1);
      const Point f2 = family(y, x2);
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        const double rhs = a * f1[k] + b * f2[k];
        const double scale = std::max({1.0, std::abs(a * f1[k]), std::abs(b * f2[k])});
        worst = std::max(worst, std::abs(lhs[k] - rhs) / scale);
      }
    }
  }
  return worst;
}

}  // namespace metric_forge

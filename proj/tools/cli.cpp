#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "metric_forge/embedder.hpp"
#include "metric_forge/errors.hpp"
#include "metric_forge/index_measure.hpp"
#include "metric_forge/inducer.hpp"
#include "metric_forge/io.hpp"
#include "metric_forge/kernel_core.hpp"
#include "metric_forge/m_forms.hpp"

namespace metric_forge::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kFormatVersion = 1;

// Every stochastic stage draws from its own seed derived from the top-level one.
enum class Stage : std::uint64_t {
  kIntegration = 0,
  kSeparation = 1,
  kAxioms = 2,
  kPoints = 3,
  kTrials = 4,
  kStrong = 5,
};

std::uint64_t stage_seed(std::uint64_t seed, Stage stage) {
  SplitMix64 rng = stream(seed, static_cast<std::uint64_t>(stage), /*salt=*/9);
  return rng();
}

struct Flags {
  std::string config;
  std::string points;
  std::string matrix;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t trials = 0;
  bool has_trials = false;
  double tolerance = 0.0;
  bool has_tolerance = false;
  int m = 0;
  bool has_m = false;
  bool require_metric = false;
  bool deterministic = true;
};

class Config {
 public:
  Config(json doc, fs::path base_dir, std::string what)
      : doc_(std::move(doc)), base_dir_(std::move(base_dir)), what_(std::move(what)) {
    if (!doc_.is_object()) throw ValidationError(what_ + " must be a JSON object");
  }

  void allow(const std::set<std::string>& keys) const {
    for (const auto& [key, _] : doc_.items()) {
      if (!keys.count(key)) throw ValidationError(what_ + ": unknown field '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& at(const std::string& key) const { return doc_.at(key); }
  const json& doc() const { return doc_; }
  const fs::path& base_dir() const { return base_dir_; }

  std::optional<std::uint64_t> u64(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!doc_[key].is_number_unsigned()) {
      throw ValidationError(what_ + ": '" + key + "' must be a non-negative integer");
    }
    return doc_[key].get<std::uint64_t>();
  }

  std::optional<double> number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!doc_[key].is_number()) throw ValidationError(what_ + ": '" + key + "' must be a number");
    return doc_[key].get<double>();
  }

  std::optional<bool> boolean(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!doc_[key].is_boolean()) throw ValidationError(what_ + ": '" + key + "' must be a boolean");
    return doc_[key].get<bool>();
  }

  std::optional<std::string> string(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!doc_[key].is_string()) throw ValidationError(what_ + ": '" + key + "' must be a string");
    return doc_[key].get<std::string>();
  }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir_ / path;
  }

 private:
  json doc_;
  fs::path base_dir_;
  std::string what_;
};

Config load_config(const Flags& flags, const std::string& command) {
  if (flags.config.empty()) return Config(json::object(), fs::current_path(), command + " config");
  std::ifstream in(flags.config);
  if (!in) throw IoError("cannot open config '" + flags.config + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("config does not parse: " + std::string(e.what()));
  }
  Config cfg(std::move(doc), fs::path(flags.config).parent_path(), command + " config");
  const auto version = cfg.u64("version");
  if (!version) throw ValidationError("config needs \"version\": " + std::to_string(kFormatVersion));
  if (*version != kFormatVersion) {
    throw ValidationError("unsupported config version " + std::to_string(*version));
  }
  return cfg;
}

std::uint64_t require_seed(const Flags& flags, const Config& cfg) {
  if (flags.has_seed) return flags.seed;
  if (const auto s = cfg.u64("seed")) return *s;
  throw ValidationError("a seed is required (config 'seed' or --seed)");
}

std::vector<Point> load_points(const Flags& flags, const Config& cfg) {
  if (!flags.points.empty()) return io::read_points_csv(flags.points);
  if (!cfg.has("points")) throw ValidationError("no probe points given (config 'points' or --points)");
  const json& p = cfg.at("points");
  if (p.is_string()) return io::read_points_csv(cfg.resolve(p.get<std::string>()));
  return io::points_from_json(p);
}

std::size_t resolve_budget(const Config& cfg) {
  std::size_t budget = cfg.u64("term_budget").value_or(kDefaultTermBudget);
  if (const char* env = std::getenv("METRIC_FORGE_BUDGET")) {
    const std::string text(env);
    std::size_t parsed = 0;
    try {
      std::size_t used = 0;
      parsed = std::stoull(text, &used);
      if (used != text.size() || parsed == 0) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ValidationError("METRIC_FORGE_BUDGET must be a positive integer, got '" + text + "'");
    }
    budget = parsed;
  }
  return budget;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return kExitPass;
    case Verdict::kFail:
      return kExitCertificateFailure;
    case Verdict::kDegenerate:
      return kExitDegenerate;
  }
  return kExitUsage;
}

std::string status_for(int exit_code) {
  switch (exit_code) {
    case kExitPass:
      return "pass";
    case kExitCertificateFailure:
      return "fail";
    case kExitDegenerate:
      return "degenerate";
    default:
      return "error";
  }
}

struct Outcome {
  int exit_code = kExitPass;
  json parameters = json::object();
  json result = json::object();
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

// ---------------------------------------------------------------- check-ndk

Outcome cmd_check(const Flags& flags, bool m_engine_only) {
  const std::string command = m_engine_only ? "check-m" : "check-ndk";
  const Config cfg = load_config(flags, command);
  cfg.allow({"version", "seed", "kernel", "m_kernel", "m", "points", "trials", "tolerance",
             "strict", "term_budget", "signed_measures"});

  std::optional<int> m;
  if (flags.has_m) {
    m = flags.m;
  } else if (cfg.has("m")) {
    if (!cfg.at("m").is_number_integer()) throw ValidationError("'m' must be an integer");
    m = cfg.at("m").get<int>();
  }
  if (m && (*m < 2 || *m % 2 != 0)) {
    throw ValidationError("m must be an even integer >= 2, got " + std::to_string(*m));
  }

  const std::vector<Point> points = load_points(flags, cfg);
  const std::uint64_t seed = require_seed(flags, cfg);
  const std::size_t trials = flags.has_trials ? flags.trials : cfg.u64("trials").value_or(1000);
  const double tolerance =
      flags.has_tolerance ? flags.tolerance : cfg.number("tolerance").value_or(kDefaultFormTolerance);
  const bool strict = cfg.boolean("strict").value_or(false);

  Outcome o;
  o.parameters = {{"seed", seed},
                  {"trials", trials},
                  {"tolerance", tolerance},
                  {"strict", strict},
                  {"points", io::points_to_json(points)}};

  const bool use_m_engine = m_engine_only || cfg.has("m_kernel") || (m && *m != 2) ||
                            cfg.has("signed_measures");
  if (!use_m_engine) {
    const auto name = cfg.string("kernel");
    if (!name) throw ValidationError("config needs 'kernel' (one of the builtin kernel names)");
    const Kernel k = kernels::by_name(*name);
    const NegativeDefiniteOptions options{trials, stage_seed(seed, Stage::kTrials), tolerance};
    const CheckReport report = strict ? check_strictly_negative_definite(k, points, options)
                                      : check_negative_definite(k, points, options);
    o.parameters["kernel"] = *name;
    o.parameters["m"] = 2;
    o.result = {{"engine", "kernel_core"},
                {"kernel", k.label()},
                {"mode", strict ? "strict" : "plain"},
                {"value_convention", "quadratic form; pass iff every value <= tolerance"},
                {"check", io::to_json(report)}};
    o.exit_code = exit_for(report.verdict);
    return o;
  }

  MKernel mk = [&] {
    if (cfg.has("m_kernel")) return mkernels::from_json(cfg.at("m_kernel"));
    if (const auto name = cfg.string("kernel")) return mkernels::from_kernel(kernels::by_name(*name));
    throw ValidationError("config needs 'm_kernel' or 'kernel'");
  }();
  if (m && *m != mk.m()) {
    throw ValidationError("--m " + std::to_string(*m) + " does not match m-kernel '" + mk.label() +
                          "' of order " + std::to_string(mk.m()));
  }
  const std::size_t budget = resolve_budget(cfg);
  MCheckOptions options;
  options.trials = trials;
  options.seed = stage_seed(seed, Stage::kTrials);
  options.tolerance = tolerance;
  options.strict = strict;
  options.term_budget = budget;

  const CheckReport report = check_m_negative_definite(mk, points, options);
  if (cfg.has("m_kernel")) o.parameters["m_kernel"] = cfg.at("m_kernel");
  if (cfg.has("kernel")) o.parameters["kernel"] = cfg.at("kernel");
  o.parameters["m"] = mk.m();
  o.parameters["term_budget"] = budget;
  o.result = {{"engine", "m_forms"},
              {"kernel", mk.label()},
              {"mode", strict ? "strict" : "plain"},
              {"value_convention", "signed m-form; pass iff every value >= -tolerance"},
              {"check", io::to_json(report)}};
  Verdict overall = report.verdict;

  if (cfg.has("signed_measures")) {
    const json& desc = cfg.at("signed_measures");
    if (!desc.is_array() || desc.empty()) {
      throw ValidationError("'signed_measures' must be a non-empty array");
    }
    std::vector<SignedDiscreteMeasure> ensemble;
    for (const auto& member : desc) ensemble.push_back(SignedDiscreteMeasure::from_json(member));
    MCheckOptions strong_options = options;
    strong_options.seed = stage_seed(seed, Stage::kStrong);
    const CheckReport strong = check_strong_m_negative(mk, ensemble, strong_options);
    o.parameters["signed_measures"] = desc;
    o.result["strong_check"] = io::to_json(strong);
    if (strong.verdict == Verdict::kFail) overall = Verdict::kFail;
  }
  o.exit_code = exit_for(overall);
  return o;
}

// ------------------------------------------------------------------- induce

const std::set<std::string> kInduceKeys = {
    "version", "seed",          "family",        "measure",   "base",    "points",
    "mc_samples", "support_count", "triple_trials", "tolerance", "quotient", "require_metric"};

struct InduceSetup {
  InducedMetric metric;
  std::vector<Point> points;
  SeparationOptions separation;
  AxiomOptions axioms;
  bool require_metric = false;
  json parameters;
};

InduceSetup build_induce(const Config& cfg, const Flags& flags, std::uint64_t seed) {
  cfg.allow(kInduceKeys);
  if (!cfg.has("family")) throw ValidationError("config needs 'family'");
  if (!cfg.has("measure")) throw ValidationError("config needs 'measure'");
  FunctionFamily family = FunctionFamily::from_json(cfg.at("family"));
  IndexMeasure measure = IndexMeasure::from_json(cfg.at("measure"));
  if (!measure.deterministic() && !measure.sampler_seed()) {
    measure.set_sampler_seed(stage_seed(seed, Stage::kIntegration));
  }
  const std::string base_name = cfg.string("base").value_or("squared_euclidean");
  const Kernel base = kernels::by_name(base_name);

  IntegrationPolicy policy;
  policy.mc_samples = cfg.u64("mc_samples").value_or(policy.mc_samples);
  policy.seed = measure.sampler_seed().value_or(0);
  policy.quotient = cfg.boolean("quotient").value_or(false);

  const double tolerance =
      flags.has_tolerance ? flags.tolerance : cfg.number("tolerance").value_or(kDefaultFormTolerance);
  SeparationOptions separation;
  separation.support_count = cfg.u64("support_count").value_or(separation.support_count);
  separation.seed = stage_seed(seed, Stage::kSeparation);
  separation.tolerance = tolerance;
  AxiomOptions axioms;
  axioms.triple_trials = flags.has_trials ? flags.trials
                                          : cfg.u64("triple_trials").value_or(axioms.triple_trials);
  axioms.seed = stage_seed(seed, Stage::kAxioms);
  axioms.tolerance = tolerance;

  std::vector<Point> points = load_points(flags, cfg);
  if (points.size() < 2) throw InsufficientDataError("induce needs at least two probe points");

  json parameters = {{"seed", seed},
                     {"family", cfg.at("family")},
                     {"measure", measure.to_json()},
                     {"base", base_name},
                     {"mc_samples", policy.mc_samples},
                     {"quotient", policy.quotient},
                     {"support_count", separation.support_count},
                     {"triple_trials", axioms.triple_trials},
                     {"tolerance", tolerance},
                     {"points", io::points_to_json(points)}};
  InducedMetric metric = induce_distance(std::move(family), std::move(measure), base, policy);
  const bool require_metric = flags.require_metric || cfg.boolean("require_metric").value_or(false);
  parameters["require_metric"] = require_metric;
  return {std::move(metric), std::move(points), separation, axioms, require_metric,
          std::move(parameters)};
}

struct InducedMatrix {
  DistanceMatrix matrix;
  double max_stderr;
};

InducedMatrix induced_matrix(const InducedMetric& metric, const std::vector<Point>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  double max_stderr = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const DistanceEstimate e =
          metric.estimate(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      d(i, j) = d(j, i) = e.value;
      max_stderr = std::max(max_stderr, e.std_error);
    }
  }
  return {DistanceMatrix(std::move(d)), max_stderr};
}

Outcome cmd_induce(const Flags& flags) {
  const Config cfg = load_config(flags, "induce");
  const std::uint64_t seed = require_seed(flags, cfg);
  const InduceSetup setup = build_induce(cfg, flags, seed);

  const InducedMatrix im = induced_matrix(setup.metric, setup.points);
  const CheckReport separation = check_separation(setup.metric, setup.points, setup.separation);
  const CheckReport axioms = verify_metric_axioms(setup.metric, setup.points, setup.axioms);

  Outcome o;
  o.parameters = setup.parameters;
  o.result = {{"distance_matrix", io::matrix_to_json(im.matrix)},
              {"max_stderr", im.max_stderr},
              {"separation", io::to_json(separation)},
              {"axioms", io::to_json(axioms)},
              {"metric_kind", separation.passed() ? "metric" : "pseudometric"}};
  std::ostringstream csv;
  io::write_matrix_csv(csv, im.matrix);
  o.files.emplace_back("distances.csv", csv.str());

  if (!axioms.passed() || (setup.require_metric && !separation.passed())) {
    o.exit_code = kExitCertificateFailure;
  } else if (axioms.zero_diameter) {
    o.exit_code = kExitDegenerate;
  }
  return o;
}

// -------------------------------------------------------------------- embed

Outcome cmd_embed(const Flags& flags) {
  const Config cfg = load_config(flags, "embed");
  cfg.allow({"version", "seed", "matrix", "induce", "tol_rel"});
  const double tol_rel = cfg.number("tol_rel").value_or(kDefaultEmbedTolerance);

  Outcome o;
  o.parameters["tol_rel"] = tol_rel;
  std::optional<DistanceMatrix> d;
  if (!flags.matrix.empty()) {
    d = io::read_matrix(flags.matrix);
  } else if (cfg.has("matrix")) {
    const json& m = cfg.at("matrix");
    d = m.is_string() ? io::read_matrix(cfg.resolve(m.get<std::string>())) : io::matrix_from_json(m);
  } else if (cfg.has("induce")) {
    const Config sub(cfg.at("induce"), cfg.base_dir(), "embed induce sub-config");
    std::uint64_t seed = 0;
    if (flags.has_seed) {
      seed = flags.seed;
    } else if (const auto s = sub.u64("seed")) {
      seed = *s;
    } else {
      seed = require_seed(flags, cfg);
    }
    const InduceSetup setup = build_induce(sub, flags, seed);
    InducedMatrix im = induced_matrix(setup.metric, setup.points);
    o.parameters["induce"] = setup.parameters;
    o.result["max_stderr"] = im.max_stderr;
    d = std::move(im.matrix);
  } else {
    throw ValidationError("embed needs --matrix, config 'matrix' or config 'induce'");
  }
  if (d->size() < 2) {
    throw InsufficientDataError("embedding needs at least two points, got " +
                                std::to_string(d->size()));
  }

  const EmbeddingResult e = schoenberg_embed(*d, tol_rel);
  o.parameters["matrix"] = io::matrix_to_json(*d);
  o.result["embedding"] = io::to_json(e);
  o.result["labels"] = d->labels();
  std::ostringstream csv;
  io::write_coordinates_csv(csv, e, d->labels());
  o.files.emplace_back("coordinates.csv", csv.str());
  o.exit_code = e.embeddable() ? kExitPass : kExitCertificateFailure;
  return o;
}

// ------------------------------------------------------------ demo-example1

Point add(const Point& a, const Point& b, double sign) {
  if (a.size() != b.size()) throw DimensionError("probe points have different dimensions");
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + sign * b[i];
  return out;
}

json chain_item(const std::string& name, double value, double bound, bool holds) {
  return {{"name", name}, {"value", value}, {"bound", bound}, {"holds", holds}};
}

Outcome cmd_demo_example1(const Flags& flags) {
  const Config cfg = load_config(flags, "demo-example1");
  cfg.allow({"version", "seed", "family", "measure", "points", "num_points", "mc_samples",
             "support_count", "tolerance", "tol_rel", "inner_product_probes"});
  const std::uint64_t seed = require_seed(flags, cfg);
  if (!cfg.has("family")) throw ValidationError("config needs 'family'");
  if (!cfg.has("measure")) throw ValidationError("config needs 'measure'");
  const FunctionFamily family = FunctionFamily::from_json(cfg.at("family"));
  IndexMeasure measure = IndexMeasure::from_json(cfg.at("measure"));
  if (!measure.deterministic() && !measure.sampler_seed()) {
    measure.set_sampler_seed(stage_seed(seed, Stage::kIntegration));
  }
  const double tolerance =
      flags.has_tolerance ? flags.tolerance : cfg.number("tolerance").value_or(kDefaultFormTolerance);
  const double tol_rel = cfg.number("tol_rel").value_or(kDefaultEmbedTolerance);

  IntegrationPolicy policy;
  policy.mc_samples = cfg.u64("mc_samples").value_or(policy.mc_samples);
  policy.seed = measure.sampler_seed().value_or(0);
  const InnerProductSpace space(family, measure, policy);
  const InducedMetric metric = space.metric();

  std::vector<Point> points;
  if (!flags.points.empty() || cfg.has("points")) {
    points = load_points(flags, cfg);
  } else {
    const std::size_t count = cfg.u64("num_points").value_or(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
      SplitMix64 rng = stream(stage_seed(seed, Stage::kPoints), i);
      Point p(family.domain().dim);
      for (double& v : p) v = normal(rng);
      points.push_back(std::move(p));
    }
  }
  if (points.size() < 2) throw InsufficientDataError("demo needs at least two probe points");
  const std::size_t n = points.size();

  // Gram matrix of induced inner products and the polarization identity.
  json gram = json::array();
  double polarization = 0.0;
  double norm_gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      const double ip = space.inner(points[i], points[j]);
      row.push_back(ip);
      const double plus = space.norm(add(points[i], points[j], 1.0));
      const double minus = space.norm(add(points[i], points[j], -1.0));
      const double polar = 0.25 * (plus * plus - minus * minus);
      polarization = std::max(polarization, std::abs(ip - polar) / (1.0 + std::abs(ip)));
      const double rho = metric(points[i], points[j]);
      norm_gap = std::max(norm_gap, std::abs(rho - minus) / (1.0 + minus));
    }
    gram.push_back(std::move(row));
  }

  SeparationOptions sep_options;
  sep_options.support_count = cfg.u64("support_count").value_or(sep_options.support_count);
  sep_options.seed = stage_seed(seed, Stage::kSeparation);
  sep_options.tolerance = tolerance;
  const CheckReport separation = check_separation(metric, points, sep_options);

  const DistanceMatrix d = distance_matrix(metric, points);
  const EmbeddingResult e = schoenberg_embed(d, tol_rel);
  const double residual_bound = 1e-8 * (1.0 + d.max_entry());

  json probes = json::array();
  if (cfg.has("inner_product_probes")) {
    const json& desc = cfg.at("inner_product_probes");
    if (!desc.is_array()) throw ValidationError("'inner_product_probes' must be an array");
    for (const auto& pair : desc) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ValidationError("each inner product probe must be a pair [a, b]");
      }
      const std::vector<Point> ab = io::points_from_json(pair);
      const IntegralEstimate ip = space.inner_estimate(ab[0], ab[1]);
      probes.push_back({{"a", ab[0]}, {"b", ab[1]}, {"value", ip.value}, {"std_error", ip.std_error}});
    }
  }

  json chain = json::array();
  chain.push_back(chain_item("polarization_identity", polarization, tolerance,
                             polarization <= tolerance));
  chain.push_back(chain_item("distance_equals_norm_of_difference", norm_gap, tolerance,
                             norm_gap <= tolerance));
  chain.push_back(chain_item("separation", separation.worst_value, tolerance, separation.passed()));
  double spectral_scale = 0.0;
  for (double l : e.gram_eigenvalues) spectral_scale = std::max(spectral_scale, std::abs(l));
  chain.push_back(
      chain_item("embeddable", e.min_eigenvalue, -tol_rel * spectral_scale, e.embeddable()));
  chain.push_back(chain_item("isometry_residual", e.residual, residual_bound,
                             e.residual <= residual_bound));
  bool all_hold = true;
  for (const auto& item : chain) all_hold = all_hold && item["holds"].get<bool>();

  Outcome o;
  o.parameters = {{"seed", seed},
                  {"family", cfg.at("family")},
                  {"measure", measure.to_json()},
                  {"mc_samples", policy.mc_samples},
                  {"support_count", sep_options.support_count},
                  {"tolerance", tolerance},
                  {"tol_rel", tol_rel},
                  {"points", io::points_to_json(points)}};
  o.result = {{"polarization_residual", polarization},
              {"inner_product_gram", std::move(gram)},
              {"distance_matrix", io::matrix_to_json(d)},
              {"separation", io::to_json(separation)},
              {"embedding", io::to_json(e)},
              {"inner_product_probes", std::move(probes)},
              {"chain", std::move(chain)}};
  std::ostringstream csv;
  io::write_coordinates_csv(csv, e, d.labels());
  o.files.emplace_back("coordinates.csv", csv.str());
  o.exit_code = all_hold ? kExitPass : kExitCertificateFailure;
  return o;
}

// ------------------------------------------------------------------ driver

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << contents;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

json base_report(const std::string& command, const Flags& flags) {
  json r = {{"format_version", kFormatVersion}, {"command", command}};
  if (!flags.deterministic) r["generated_at"] = utc_timestamp();
  return r;
}

json error_report(const std::string& command, const Flags& flags, const std::string& kind,
                  const std::string& message) {
  json r = base_report(command, flags);
  r["status"] = "error";
  r["exit_code"] = kExitUsage;
  r["error"] = {{"kind", kind}, {"message", message}};
  return r;
}

int emit(const json& report, const Flags& flags, const std::vector<std::pair<std::string, std::string>>& files,
         std::ostream& out, std::ostream& err) {
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (flags.out.empty()) return report["exit_code"].get<int>();
  try {
    const fs::path dir(flags.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    write_file(dir / "report.json", text);
    for (const auto& [name, contents] : files) write_file(dir / name, contents);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return report["exit_code"].get<int>();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags flags;
  CLI::App app{"Certify negative definite kernels, induce distances and embed finite metrics",
               "metric-forge"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration");
    sub->add_option("--points", flags.points, "CSV of probe points, one per row");
    sub->add_option("--matrix", flags.matrix, "distance matrix as CSV or JSON");
    sub->add_option("--out", flags.out, "directory for report.json and CSV outputs");
    sub->add_option("--seed", flags.seed, "top-level seed; overrides the config");
    sub->add_option("--trials", flags.trials, "number of random trials");
    sub->add_option("--tolerance", flags.tolerance, "absolute tolerance on form values");
    sub->add_option("--m", flags.m, "even order of the m-form check");
    sub->add_flag("--require-metric", flags.require_metric,
                  "treat a separation failure as a certificate failure");
    sub->add_flag("--deterministic,!--no-deterministic", flags.deterministic,
                  "omit timestamps so reports are byte-reproducible (default on)");
  };
  CLI::App* check_ndk = app.add_subcommand("check-ndk", "certify (strict) negative definiteness");
  CLI::App* check_m = app.add_subcommand("check-m", "m-form negative definiteness check");
  CLI::App* induce = app.add_subcommand("induce", "induce a distance and check the metric axioms");
  CLI::App* embed = app.add_subcommand("embed", "embed a finite metric into Euclidean space");
  CLI::App* demo = app.add_subcommand("demo-example1",
                                      "inner product pipeline from a linear functional family");
  for (CLI::App* sub : {check_ndk, check_m, induce, embed, demo}) add_common(sub);

  std::string command = "unknown";
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    for (CLI::App* sub : app.get_subcommands()) out << sub->help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
    err << "error: " << e.what() << '\n';
    return emit(error_report(command, flags, "usage", e.what()), flags, {}, out, err);
  }
  CLI::App* chosen = app.get_subcommands().front();
  command = chosen->get_name();
  flags.has_seed = chosen->count("--seed") > 0;
  flags.has_trials = chosen->count("--trials") > 0;
  flags.has_tolerance = chosen->count("--tolerance") > 0;
  flags.has_m = chosen->count("--m") > 0;

  Outcome outcome;
  try {
    if (chosen == check_ndk) {
      outcome = cmd_check(flags, false);
    } else if (chosen == check_m) {
      outcome = cmd_check(flags, true);
    } else if (chosen == induce) {
      outcome = cmd_induce(flags);
    } else if (chosen == embed) {
      outcome = cmd_embed(flags);
    } else {
      outcome = cmd_demo_example1(flags);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return emit(error_report(command, flags, e.kind(), e.what()), flags, {}, out, err);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return emit(error_report(command, flags, "validation", e.what()), flags, {}, out, err);
  }

  json report = base_report(command, flags);
  report["status"] = status_for(outcome.exit_code);
  report["exit_code"] = outcome.exit_code;
  report["parameters"] = std::move(outcome.parameters);
  report["result"] = std::move(outcome.result);
  return emit(report, flags, outcome.files, out, err);
}

}  // namespace metric_forge::cli

#include "metric_forge/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "metric_forge/errors.hpp"

namespace metric_forge::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_row(const std::vector<std::string>& fields, std::vector<double>& out) {
  out.clear();
  for (const auto& f : fields) {
    double v = 0.0;
    if (!parse_double(f, v)) return false;
    out.push_back(v);
  }
  return true;
}

std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(trim(line)));
  }
  return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("failed to format a floating-point value");
  return std::string(buf, ptr);
}

std::vector<Point> parse_points_csv(std::istream& in) {
  const auto rows = read_rows(in);
  std::vector<Point> points;
  std::vector<double> values;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!parse_row(rows[r], values)) {
      if (r == 0) continue;  // header
      throw ValidationError("points CSV row " + std::to_string(r + 1) + " is not numeric");
    }
    if (!points.empty() && values.size() != points.front().size()) {
      throw ValidationError("points CSV row " + std::to_string(r + 1) + " has " +
                            std::to_string(values.size()) + " coordinates, expected " +
                            std::to_string(points.front().size()));
    }
    points.push_back(values);
  }
  if (points.empty()) throw ValidationError("points CSV contains no points");
  return points;
}

std::vector<Point> read_points_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_points_csv(in);
}

DistanceMatrix parse_matrix_csv(std::istream& in) {
  auto rows = read_rows(in);
  if (rows.empty()) throw ValidationError("matrix CSV is empty");
  std::vector<std::string> labels;
  std::vector<double> values;
  std::size_t first_data = 0;
  if (!parse_row(rows[0], values)) {
    labels = rows[0];
    first_data = 1;
  }
  const std::size_t n = rows.size() - first_data;
  if (!labels.empty() && labels.size() != n) {
    throw ValidationError("matrix CSV header has " + std::to_string(labels.size()) +
                          " labels but " + std::to_string(n) + " data rows");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!parse_row(rows[first_data + r], values)) {
      throw ValidationError("matrix CSV row " + std::to_string(first_data + r + 1) +
                            " is not numeric");
    }
    if (values.size() != n) {
      throw ValidationError("matrix CSV is not square: row " + std::to_string(r + 1) + " has " +
                            std::to_string(values.size()) + " entries, expected " +
                            std::to_string(n));
    }
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
    }
  }
  return DistanceMatrix(std::move(m), std::move(labels));
}

void write_matrix_csv(std::ostream& out, const DistanceMatrix& d) {
  const auto& labels = d.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) out << (j ? "," : "") << format_double(d(i, j));
    out << '\n';
  }
}

DistanceMatrix matrix_from_json(const nlohmann::json& j) {
  const nlohmann::json* rows = &j;
  std::vector<std::string> labels;
  if (j.is_object()) {
    for (const auto& [key, _] : j.items()) {
      if (key != "labels" && key != "entries") {
        throw ValidationError("matrix JSON: unknown field '" + key + "'");
      }
    }
    if (!j.contains("entries")) throw ValidationError("matrix JSON needs 'entries'");
    rows = &j["entries"];
    if (j.contains("labels")) {
      if (!j["labels"].is_array()) throw ValidationError("matrix JSON 'labels' must be an array");
      for (const auto& l : j["labels"]) {
        if (!l.is_string()) throw ValidationError("matrix JSON labels must be strings");
        labels.push_back(l.get<std::string>());
      }
    }
  }
  if (!rows->is_array() || rows->empty()) throw ValidationError("matrix JSON has no rows");
  const std::size_t n = rows->size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = (*rows)[r];
    if (!row.is_array() || row.size() != n) {
      throw ValidationError("matrix JSON is not square at row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) throw ValidationError("matrix JSON has a non-numeric entry");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return DistanceMatrix(std::move(m), std::move(labels));
}

nlohmann::json matrix_to_json(const DistanceMatrix& d) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < d.size(); ++j) row.push_back(d(i, j));
    entries.push_back(std::move(row));
  }
  return {{"labels", d.labels()}, {"entries", std::move(entries)}};
}

DistanceMatrix read_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("matrix JSON does not parse: " + std::string(e.what()));
    }
    return matrix_from_json(j);
  }
  return parse_matrix_csv(in);
}

void write_coordinates_csv(std::ostream& out, const EmbeddingResult& result,
                           const std::vector<std::string>& labels) {
  const Eigen::MatrixXd& x = result.coordinates;
  out << "label";
  for (Eigen::Index c = 0; c < x.cols(); ++c) out << ",x" << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out << labels.at(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << format_double(x(r, c));
    out << '\n';
  }
}

nlohmann::json point_to_json(const Point& p) { return nlohmann::json(p); }

nlohmann::json points_to_json(const std::vector<Point>& points) {
  nlohmann::json out = nlohmann::json::array();
  for (const Point& p : points) out.push_back(point_to_json(p));
  return out;
}

std::vector<Point> points_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("points must be an array");
  std::vector<Point> points;
  for (const auto& p : j) {
    if (p.is_number()) {
      points.push_back({p.get<double>()});
      continue;
    }
    if (!p.is_array() || p.empty()) throw ValidationError("each point must be a number or array");
    Point pt;
    for (const auto& v : p) {
      if (!v.is_number()) throw ValidationError("non-numeric point coordinate");
      pt.push_back(v.get<double>());
    }
    if (!points.empty() && pt.size() != points.front().size()) {
      throw ValidationError("points have inconsistent dimensions");
    }
    points.push_back(std::move(pt));
  }
  if (points.empty()) throw ValidationError("no points given");
  return points;
}

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j;
  j["verdict"] = to_string(report.verdict);
  j["worst_value"] = report.worst_value;
  j["trials"] = report.trials;
  j["tolerance"] = report.tolerance;
  if (!report.failure_kind.empty()) j["failure_kind"] = report.failure_kind;
  if (report.witness) {
    nlohmann::json w;
    w["points"] = points_to_json(report.witness->points);
    w["coefficients"] = report.witness->coefficients;
    w["value"] = report.witness->value;
    if (!report.witness->weights.empty()) w["weights"] = report.witness->weights;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  j["stderr_bound"] = report.stderr_bound;
  j["zero_diameter"] = report.zero_diameter;
  j["clamped"] = report.clamped;
  nlohmann::json identified = nlohmann::json::array();
  for (const auto& [a, b] : report.identified) identified.push_back({a, b});
  j["identified"] = std::move(identified);
  j["notes"] = report.notes;
  return j;
}

nlohmann::json to_json(const EmbeddingResult& result) {
  nlohmann::json coords = nlohmann::json::array();
  for (Eigen::Index r = 0; r < result.coordinates.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < result.coordinates.cols(); ++c) {
      row.push_back(result.coordinates(r, c));
    }
    coords.push_back(std::move(row));
  }
  return {{"verdict", to_string(result.verdict)},
          {"eigenvalues", result.gram_eigenvalues},
          {"min_eigenvalue", result.min_eigenvalue},
          {"rank", result.coordinates.cols()},
          {"residual", result.residual},
          {"eigenpair_residual", result.eigenpair_residual},
          {"coordinates", std::move(coords)}};
}

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const Assumption1Report& report) {
  nlohmann::json j;
  j["per_atom_forms"] = report.per_atom_forms;
  j["ambient_form"] = optional_json(report.ambient_form);
  j["per_y_vanishing"] = report.per_y_vanishing;
  j["ambient_vanishing"] = optional_json(report.ambient_vanishing);
  j["hypothesis_holds"] = report.hypothesis_holds;
  j["induced_strict"] = report.induced_strict;
  j["source_strict"] = optional_json(report.source_strict);
  j["strictness_transferred"] = report.strictness_transferred;
  j["notes"] = report.notes;
  return j;
}

}  // namespace metric_forge::io

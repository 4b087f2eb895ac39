#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metric_forge/embedder.hpp"
#include "metric_forge/kernel_core.hpp"
#include "metric_forge/m_forms.hpp"

namespace metric_forge::io {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// One point per row, comma separated. A leading non-numeric row is a header.
std::vector<Point> parse_points_csv(std::istream& in);
std::vector<Point> read_points_csv(const std::filesystem::path& path);

// Square matrix with a header row of labels.
DistanceMatrix parse_matrix_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const DistanceMatrix& d);

// {"labels": [...], "entries": [[...], ...]}; a bare array of rows is also
// accepted on input.
DistanceMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const DistanceMatrix& d);

// Dispatches on extension: .json, otherwise CSV.
DistanceMatrix read_matrix(const std::filesystem::path& path);

// Header "label,x1,...,xk" then one row per point.
void write_coordinates_csv(std::ostream& out, const EmbeddingResult& result,
                           const std::vector<std::string>& labels);

nlohmann::json point_to_json(const Point& p);
nlohmann::json points_to_json(const std::vector<Point>& points);
std::vector<Point> points_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(const EmbeddingResult& result);
nlohmann::json to_json(const Assumption1Report& report);

}  // namespace metric_forge::io

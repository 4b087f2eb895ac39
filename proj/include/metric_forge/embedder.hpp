#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metric_forge/inducer.hpp"
#include "metric_forge/numeric.hpp"

namespace metric_forge {

// Finite metric: symmetric, zero diagonal, nonnegative entries.
class DistanceMatrix {
 public:
  // Validates the invariants. Asymmetry up to `symmetry_rel_tol` relative to
  // the largest entry is averaged away; anything beyond it is rejected.
  explicit DistanceMatrix(Eigen::MatrixXd entries, std::vector<std::string> labels = {},
                          double symmetry_rel_tol = 1e-9);

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double max_entry() const { return entries_.size() ? entries_.maxCoeff() : 0.0; }

 private:
  Eigen::MatrixXd entries_;
  std::vector<std::string> labels_;
};

using DistanceFn = std::function<double(const Point&, const Point&)>;

// One evaluation per unordered pair; diagonal set to exactly 0.
DistanceMatrix distance_matrix(const InducedMetric& metric, std::span<const Point> points);
DistanceMatrix distance_matrix(const DistanceFn& dist, std::span<const Point> points);

enum class Embeddability { kEmbeddable, kNotEmbeddable };

std::string to_string(Embeddability e);

struct EmbeddingResult {
  Eigen::MatrixXd coordinates;               // n x k, k = numerical rank
  std::vector<double> gram_eigenvalues;      // descending
  double min_eigenvalue = 0.0;
  double residual = 0.0;                     // max |coordinate distance - input distance|
  Embeddability verdict = Embeddability::kEmbeddable;
  Eigen::MatrixXd gram;                      // -1/2 J (D o D) J
  // max over eigenpairs of ||G v - lambda v||, and the bound it is held to.
  double eigenpair_residual = 0.0;
  double eigenpair_bound = 0.0;

  bool embeddable() const noexcept { return verdict == Embeddability::kEmbeddable; }
};

constexpr double kDefaultEmbedTolerance = 1e-9;

// G = -1/2 J (D o D) J, J = I - 11^T / n. Embeddable iff
// min eigenvalue >= -tol_rel * max|eigenvalue|. Coordinates are the
// eigenvectors of the eigenvalues above tol_rel * max eigenvalue, scaled by
// sqrt(eigenvalue); when D is not embeddable this is the best PSD
// approximation.
EmbeddingResult schoenberg_embed(const DistanceMatrix& d, double tol_rel = kDefaultEmbedTolerance);

double isometry_residual(const EmbeddingResult& result, const DistanceMatrix& d);

// Double-centered Gram matrix, exposed for verification paths.
Eigen::MatrixXd double_centered_gram(const DistanceMatrix& d);

}  // namespace metric_forge

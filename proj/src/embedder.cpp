#include "metric_forge/embedder.hpp"

#include <algorithm>
#include <cmath>

#include "metric_forge/errors.hpp"

namespace metric_forge {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd entries, std::vector<std::string> labels,
                               double symmetry_rel_tol)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
  const Eigen::Index n = entries_.rows();
  if (entries_.cols() != n) {
    throw DimensionError("distance matrix must be square, got " + std::to_string(n) + "x" +
                         std::to_string(entries_.cols()));
  }
  if (!entries_.allFinite()) throw ValidationError("distance matrix has non-finite entries");
  if (labels_.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) labels_.push_back("p" + std::to_string(i));
  }
  if (static_cast<Eigen::Index>(labels_.size()) != n) {
    throw DimensionError("distance matrix has " + std::to_string(n) + " rows but " +
                         std::to_string(labels_.size()) + " labels");
  }
  const double scale = n ? std::max(1.0, entries_.cwiseAbs().maxCoeff()) : 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (entries_(i, i) != 0.0) {
      throw ValidationError("distance matrix diagonal entry " + std::to_string(i) +
                            " is nonzero");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (entries_(i, j) < 0.0) {
        throw ValidationError("distance matrix entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") is negative");
      }
      if (j > i) {
        const double gap = std::abs(entries_(i, j) - entries_(j, i));
        if (gap > symmetry_rel_tol * scale) {
          throw ValidationError("distance matrix is asymmetric at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
        }
        if (gap != 0.0) {
          const double mid = 0.5 * (entries_(i, j) + entries_(j, i));
          entries_(i, j) = entries_(j, i) = mid;
        }
      }
    }
  }
}

DistanceMatrix distance_matrix(const DistanceFn& dist, std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 2) throw InsufficientDataError("distance matrix needs at least 2 points");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.0;
      try {
        v = dist(points[i], points[j]);
      } catch (const Error& e) {
        throw EvaluationError(std::string(e.what()) + " [pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")]");
      }
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      m(a, b) = m(b, a) = v;
    }
  }
  return DistanceMatrix(std::move(m));
}

DistanceMatrix distance_matrix(const InducedMetric& metric, std::span<const Point> points) {
  return distance_matrix([&metric](const Point& a, const Point& b) { return metric(a, b); },
                         points);
}

std::string to_string(Embeddability e) {
  return e == Embeddability::kEmbeddable ? "embeddable" : "not-embeddable";
}

Eigen::MatrixXd double_centered_gram(const DistanceMatrix& d) {
  const Eigen::MatrixXd sq = d.entries().array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const double grand_mean = row_mean.mean();
  Eigen::MatrixXd g(sq.rows(), sq.cols());
  for (Eigen::Index i = 0; i < sq.rows(); ++i) {
    for (Eigen::Index j = 0; j < sq.cols(); ++j) {
      g(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand_mean);
    }
  }
  return g;
}

EmbeddingResult schoenberg_embed(const DistanceMatrix& d, double tol_rel) {
  const auto n = static_cast<Eigen::Index>(d.size());
  if (n < 2) throw InsufficientDataError("embedding needs at least 2 points");
  if (!(tol_rel >= 0.0)) throw PreconditionError("tol_rel must be >= 0");

  EmbeddingResult result;
  result.gram = double_centered_gram(d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(result.gram);
  if (solver.info() != Eigen::Success) {
    throw EvaluationError("symmetric eigendecomposition of the Gram matrix did not converge");
  }
  // Eigen returns ascending order.
  const Eigen::VectorXd evals = solver.eigenvalues().reverse();
  Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index pivot = 0;
    evecs.col(c).cwiseAbs().maxCoeff(&pivot);
    if (evecs(pivot, c) < 0) evecs.col(c) *= -1.0;
  }

  result.gram_eigenvalues.assign(evals.data(), evals.data() + n);
  result.min_eigenvalue = evals(n - 1);
  const double max_abs = evals.cwiseAbs().maxCoeff();
  result.verdict = result.min_eigenvalue >= -tol_rel * max_abs ? Embeddability::kEmbeddable
                                                               : Embeddability::kNotEmbeddable;

  const double gram_norm = result.gram.norm();
  result.eigenpair_bound = 1e-9 * gram_norm;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double r = (result.gram * evecs.col(c) - evals(c) * evecs.col(c)).norm();
    result.eigenpair_residual = std::max(result.eigenpair_residual, r);
  }
  if (result.eigenpair_residual > result.eigenpair_bound && gram_norm > 0.0) {
    throw EvaluationError("eigenpair verification failed: residual " +
                          std::to_string(result.eigenpair_residual) + " exceeds " +
                          std::to_string(result.eigenpair_bound));
  }

  const double cutoff = tol_rel * evals(0);
  Eigen::Index rank = 0;
  while (rank < n && evals(rank) > cutoff && evals(rank) > 0.0) ++rank;
  result.coordinates.resize(n, rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    result.coordinates.col(c) = evecs.col(c) * std::sqrt(evals(c));
  }
  result.residual = isometry_residual(result, d);
  return result;
}

double isometry_residual(const EmbeddingResult& result, const DistanceMatrix& d) {
  const Eigen::Index n = result.coordinates.rows();
  if (static_cast<std::size_t>(n) != d.size()) {
    throw DimensionError("embedding has " + std::to_string(n) + " points but the matrix has " +
                         std::to_string(d.size()));
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double embedded = (result.coordinates.row(i) - result.coordinates.row(j)).norm();
      worst = std::max(worst, std::abs(embedded - d.entries()(i, j)));
    }
  }
  return worst;
}

}  // namespace metric_forge

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

Vec jacobi_eigenvalues(Mat a, double tol, int max_sweeps) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    long double off = 0.0L, scale = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        scale += static_cast<long double>(a[i][j]) * a[i][j];
        if (i != j) off += static_cast<long double>(a[i][j]) * a[i][j];
      }
    }
    if (off <= tol * tol * std::max(scale, 1e-300L)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

Mat double_center(const Mat& d) {
  const std::size_t n = d.size();
  Vec row(n, 0.0);
  long double grand = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < n; ++j) s += static_cast<long double>(d[i][j]) * d[i][j];
    row[i] = static_cast<double>(s / n);
    grand += s;
  }
  const double g = static_cast<double>(grand / (n * n));
  Mat out(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = -0.5 * (d[i][j] * d[i][j] - row[i] - row[j] + g);
  }
  return out;
}

Mat euclidean_distances(const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  Mat d(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const long double diff = static_cast<long double>(points[i][k]) - points[j][k];
        s += diff * diff;
      }
      d[i][j] = static_cast<double>(std::sqrt(s));
    }
  }
  return d;
}

Mat star_metric(int leaves) {
  const std::size_t n = static_cast<std::size_t>(leaves) + 1;
  Mat d(n, Vec(n, 2.0));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    if (i > 0) d[0][i] = d[i][0] = 1.0;
  }
  return d;
}

double brute_quadratic(const std::function<double(const Vec&, const Vec&)>& k,
                       const std::vector<Vec>& points, const Vec& c) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      s += static_cast<long double>(k(points[i], points[j])) * c[i] * c[j];
    }
  }
  return static_cast<double>(s);
}

namespace {

void recurse(const std::function<double(const std::vector<Vec>&)>& l,
             const std::vector<Vec>& points, const Vec& h, int m, std::vector<Vec>& args,
             long double weight, long double& total) {
  if (static_cast<int>(args.size()) == m) {
    total += weight * l(args);
    return;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    args.push_back(points[i]);
    recurse(l, points, h, m, args, weight * h[i], total);
    args.pop_back();
  }
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

double brute_m_form(const std::function<double(const std::vector<Vec>&)>& l,
                    const std::vector<Vec>& points, const Vec& h, int m) {
  long double total = 0.0L;
  std::vector<Vec> args;
  recurse(l, points, h, m, args, 1.0L, total);
  const double sign = (m / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * static_cast<double>(total);
}

double pairing_kernel(const std::vector<Vec>& a) {
  const double p1 = sq_dist(a[0], a[1]) * sq_dist(a[2], a[3]);
  const double p2 = sq_dist(a[0], a[2]) * sq_dist(a[1], a[3]);
  const double p3 = sq_dist(a[0], a[3]) * sq_dist(a[1], a[2]);
  return (p1 + p2 + p3) / 3.0;
}

double max_abs_difference_form_on_circle(int steps) {
  // Orthonormal basis of the zero-sum plane in R^3.
  const Vec e1 = {1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0)};
  const Vec e2 = {1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0)};
  const std::vector<Vec> pts = {{0.0}, {1.0}, {2.0}};
  auto k = [](const Vec& u, const Vec& v) { return std::abs(u[0] - v[0]); };
  double worst = -INFINITY;
  for (int s = 0; s < steps; ++s) {
    const double t = 2.0 * std::numbers::pi * s / steps;
    Vec c(3);
    for (int i = 0; i < 3; ++i) c[i] = std::cos(t) * e1[i] + std::sin(t) * e2[i];
    worst = std::max(worst, brute_quadratic(k, pts, c));
  }
  return worst;
}

double Lcg::uniform() {
  state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
  return static_cast<double>(state_ >> 11) * 0x1.0p-53;
}

double Lcg::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Lcg::integer(int lo, int hi) {
  return lo + static_cast<int>(uniform() * (hi - lo + 1));
}

}  // namespace oracle

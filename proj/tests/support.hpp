#pragma once

// Shared test helpers. Eigen's ComplexEigenSolver is the independent
// exact-diagonalization oracle; it is never used by the library itself.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ep3/linalg.hpp"
#include "ep3/models.hpp"

namespace ep3::test {

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd e(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) e(i, j) = m(i, j);
  return e;
}

struct OracleEig {
  std::vector<Complex> values;
  std::vector<ComplexVector> vectors;
};

inline OracleEig oracle_eig(const ComplexMatrix& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m));
  OracleEig out;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    out.values.push_back(solver.eigenvalues()(k));
    ComplexVector v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), k);
    out.vectors.push_back(v);
  }
  return out;
}

/// Permutation of `b` minimizing sum |a[i] - b[p[i]]|.
inline std::vector<std::size_t> nearest_assignment(const std::vector<Complex>& a,
                                                   const std::vector<Complex>& b) {
  std::vector<std::size_t> p(a.size());
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::size_t> best = p;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[p[i]]);
    if (cost < best_cost) {
      best_cost = cost;
      best = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

/// Largest |a[i] - b[p[i]]| under the nearest assignment.
inline double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  const auto p = nearest_assignment(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[p[i]]));
  return worst;
}

inline ComplexMatrix random_symmetric(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const Complex z{u(rng), u(rng)};
      m(i, j) = z;
      m(j, i) = z;
    }
  m.certify_symmetric();
  return m;
}

/// Sine of the Hermitian angle between two vectors.
inline double angle_sin(const ComplexVector& a, const ComplexVector& b) {
  const double c = std::abs(h_dot(a, b)) / (a.norm() * b.norm());
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

inline ComplexMatrix waveguide_ep3() { return waveguide({1.0, 1.0, 0.0, 0.0}); }

inline ComplexMatrix ep2_matrix() {
  const Complex i{0.0, 1.0};
  return ComplexMatrix{{i, 1.0}, {1.0, -i}};
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
  }
  return sxy / sxx;
}

}  // namespace ep3::test

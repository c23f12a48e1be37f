// One-sided (Hestenes) Jacobi SVD for small complex matrices. Small
// singular values come out with absolute accuracy ~ eps * largest, which is
// what the rank decisions near exceptional points need.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ep3/linalg.hpp"

namespace ep3 {

SingularValueDecomposition svd(const ComplexMatrix& m) {
  validate_matrix(m);
  const std::size_t n = m.size();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  // Column-major working copies: cols[j] is column j of A V, v[j] column j of V.
  std::vector<std::vector<Complex>> cols(n, std::vector<Complex>(n));
  std::vector<std::vector<Complex>> v(n, std::vector<Complex>(n, Complex{0.0}));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = m(i, j);
    v[j][j] = 1.0;
  }

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0;
        Complex gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += std::norm(cols[p][i]);
          beta += std::norm(cols[q][i]);
          gamma += std::conj(cols[p][i]) * cols[q][i];
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        // Rotate column q onto a real overlap, then apply a real Jacobi rotation.
        const Complex phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Complex unphase = std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {
          const Complex ap = cols[p][i];
          const Complex aq = cols[q][i] * unphase;
          cols[p][i] = c * ap - s * aq;
          cols[q][i] = s * ap + c * aq;
          const Complex vp = v[p][i];
          const Complex vq = v[q][i] * unphase;
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (const auto& x : cols[j]) sum += std::norm(x);
    sigma[j] = std::sqrt(sum);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SingularValueDecomposition out;
  for (auto j : order) {
    out.singular_values.push_back(sigma[j]);
    out.right_vectors.emplace_back(v[j]);
    out.left_images.emplace_back(cols[j]);
  }
  return out;
}

std::vector<ComplexVector> null_space(const ComplexMatrix& m, double rank_tol) {
  const auto dec = svd(m);
  const double top = dec.singular_values.front();
  std::vector<ComplexVector> basis;
  for (std::size_t k = 0; k < dec.singular_values.size(); ++k)
    if (dec.singular_values[k] <= rank_tol * top) basis.push_back(dec.right_vectors[k]);
  // Zero matrix: every direction is in the kernel.
  if (top == 0.0 && basis.empty()) basis = dec.right_vectors;
  return basis;
}

int numerical_rank(const ComplexMatrix& m, double rank_tol) {
  return static_cast<int>(m.size() - null_space(m, rank_tol).size());
}

ComplexVector min_norm_solve(const ComplexMatrix& m, const ComplexVector& b, double rank_tol) {
  require(b.size() == m.size(), ErrorCode::LengthMismatch, "min_norm_solve: size mismatch");
  const auto dec = svd(m);
  const double top = dec.singular_values.front();
  ComplexVector x(m.size());
  for (std::size_t k = 0; k < dec.singular_values.size(); ++k) {
    const double s = dec.singular_values[k];
    if (s == 0.0 || s <= rank_tol * top) continue;
    // left_images[k] = s * (left singular vector)
    x += (h_dot(dec.left_images[k], b) / (s * s)) * dec.right_vectors[k];
  }
  return x;
}

}  // namespace ep3

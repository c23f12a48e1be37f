#pragma once

// Dense complex linear algebra for small matrices (n <= 16).
//
// Eigenvalues come from the characteristic polynomial and a simultaneous
// (Aberth-Ehrlich) root iteration rather than a QR sweep: near an
// exceptional point the polynomial route makes multiplicities explicit, and
// clusters of nearly equal roots are collapsed to their (well-conditioned)
// mean before eigenvectors are extracted.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "ep3/error.hpp"

namespace ep3 {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxDimension = 16;

class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t n) : data_(n) {}
  ComplexVector(std::initializer_list<Complex> values) : data_(values) {}
  explicit ComplexVector(std::vector<Complex> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<const Complex> values() const { return data_; }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  /// Hermitian (conjugating) 2-norm.
  double norm() const;

  ComplexVector& operator+=(const ComplexVector& other);
  ComplexVector& operator-=(const ComplexVector& other);
  ComplexVector& operator*=(Complex s);

  friend ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
  friend ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
  friend ComplexVector operator*(Complex s, ComplexVector a) { return a *= s; }
  friend ComplexVector operator*(ComplexVector a, Complex s) { return a *= s; }
  friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

 private:
  std::vector<Complex> data_;
};

/// Square complex matrix, row-major. The symmetry flag is a certificate:
/// when set, entries(i, j) == entries(j, i) exactly as stored. Mutable
/// element access clears it; call certify_symmetric() after editing.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {}
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const Complex> diag);
  static ComplexMatrix diagonal(std::initializer_list<Complex> diag);

  std::size_t size() const { return n_; }

  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  Complex& operator()(std::size_t i, std::size_t j) {
    symmetric_ = false;
    return data_[i * n_ + j];
  }

  bool is_symmetric() const { return symmetric_; }
  /// Checks exact symmetry and sets the flag accordingly.
  bool certify_symmetric();

  bool all_finite() const;
  /// Frobenius norm; the scale used by every relative tolerance.
  double norm() const;
  Complex trace() const;
  ComplexMatrix transpose() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x);

  /// Entries compare equal; the symmetry certificate is not compared.
  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.n_ == b.n_ && a.data_ == b.data_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
  bool symmetric_ = false;
};

/// a b^T (no conjugation).
ComplexMatrix outer(const ComplexVector& a, const ComplexVector& b);

/// Throws InvalidInput unless m is non-empty, within kMaxDimension and finite.
void validate_matrix(const ComplexMatrix& m);

/// Coefficients in ascending order; leading coefficient nonzero.
class Polynomial {
 public:
  explicit Polynomial(std::vector<Complex> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  Complex operator()(Complex z) const;
  /// p(z), p'(z), ..., p^(count-1)(z).
  std::vector<Complex> derivatives_at(Complex z, int count) const;
  /// sum_k |c_k| |z|^k, the natural size of rounding in p(z).
  double scale_at(Complex z) const;

 private:
  std::vector<Complex> coeffs_;
};

/// det(lambda I - m), monic.
Polynomial char_poly(const ComplexMatrix& m);

struct RootOptions {
  double tol = 1e-12;
  int max_iterations = 200;
};

/// All roots with multiplicity. Output is sorted by (real, imag) and is a
/// deterministic function of the coefficients.
std::vector<Complex> poly_roots(const Polynomial& p, RootOptions options = {});

/// Bilinear product a^T b.
Complex c_dot(const ComplexVector& a, const ComplexVector& b);
/// Hermitian product a^H b.
Complex h_dot(const ComplexVector& a, const ComplexVector& b);

struct SingularValueDecomposition {
  std::vector<double> singular_values;      // descending
  std::vector<ComplexVector> right_vectors;  // orthonormal, paired with singular_values
  std::vector<ComplexVector> left_images;    // m * right_vectors[k] (norm = singular value)
};

SingularValueDecomposition svd(const ComplexMatrix& m);

/// Orthonormal basis of the numerical kernel: right singular vectors whose
/// singular value is at most rank_tol * largest singular value.
std::vector<ComplexVector> null_space(const ComplexMatrix& m, double rank_tol = 1e-8);
int numerical_rank(const ComplexMatrix& m, double rank_tol = 1e-8);

/// Minimum-norm least-squares solution of m x = b, singular directions below
/// rank_tol * largest singular value dropped.
ComplexVector min_norm_solve(const ComplexMatrix& m, const ComplexVector& b,
                             double rank_tol = 1e-8);

struct LinearSolution {
  ComplexVector x;
  double condition = 0.0;  // 1-norm condition number of m
};

/// LU with partial pivoting; throws Singular when a pivot falls below
/// 1e-13 times the largest entry.
LinearSolution solve_linear(const ComplexMatrix& m, const ComplexVector& b);

struct EigenCluster {
  std::vector<std::size_t> members;  // indices into Spectrum::values, ascending
  Complex mean;
  int kernel_dimension = 0;
  bool defective = false;  // kernel_dimension < members.size()
};

struct Spectrum {
  std::vector<Complex> values;  // clustered values replaced by their mean
  std::vector<std::optional<ComplexVector>> vectors;
  std::vector<bool> self_orthogonal;  // vector Hermitian-normalized, u^T u ~ 0
  std::vector<double> residuals;      // ||m u - lambda u|| / ||u||, NaN if no vector
  std::vector<EigenCluster> clusters;
  std::vector<std::size_t> cluster_of;  // value index -> cluster index

  bool any_defective() const;
  /// Smallest distance between values in different clusters (infinity for n = 1).
  double min_gap() const;
};

struct EigOptions {
  double cluster_tol = 1e-6;  // relative to 1 + ||m||
  double rank_tol = 1e-8;
  double self_orthogonal_tol = 1e-10;
};

Spectrum eig(const ComplexMatrix& m, EigOptions options = {});

/// Deterministic sign gauge shared by eigenvectors and Jordan chains: the
/// first entry above 1e-12 of the max modulus gets Re > 0, or Im > 0 when its
/// real part is negligible (below 1e-8 of its modulus).
bool gauge_wants_flip(const ComplexVector& u);

}  // namespace ep3

#include "ep3/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ep3 {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool lex_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::AmbiguousStructure: return "AmbiguousStructure";
    case ErrorCode::ChainBreaks: return "ChainBreaks";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::InconsistentCycles: return "InconsistentCycles";
    case ErrorCode::EPOnPath: return "EPOnPath";
    case ErrorCode::MatchingAmbiguous: return "MatchingAmbiguous";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::WrongOrder: return "WrongOrder";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSymmetricFile: return "NonSymmetricFile";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Vectors and matrices

double ComplexVector::norm() const {
  double sum = 0.0;
  for (const auto& v : data_) sum += std::norm(v);
  return std::sqrt(sum);
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& other) {
  require(other.size() == size(), ErrorCode::LengthMismatch, "vector sizes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& other) {
  require(other.size() == size(), ErrorCode::LengthMismatch, "vector sizes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexVector& ComplexVector::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : n_(rows.size()), data_(rows.size() * rows.size()) {
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == n_, ErrorCode::InvalidInput, "matrix must be square");
    std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * n_));
    ++i;
  }
  certify_symmetric();
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
  m.symmetric_ = true;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.data_[i * diag.size() + i] = diag[i];
  m.symmetric_ = true;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::initializer_list<Complex> diag) {
  return diagonal(std::span<const Complex>(diag.begin(), diag.size()));
}

bool ComplexMatrix::certify_symmetric() {
  symmetric_ = true;
  for (std::size_t i = 0; i < n_ && symmetric_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (data_[i * n_ + j] != data_[j * n_ + i]) {
        symmetric_ = false;
        break;
      }
  return symmetric_;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double ComplexMatrix::norm() const {
  double sum = 0.0;
  for (const auto& v : data_) sum += std::norm(v);
  return std::sqrt(sum);
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
  return t;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t.data_[j * n_ + i] = data_[i * n_ + j];
  t.symmetric_ = symmetric_;
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require(other.n_ == n_, ErrorCode::LengthMismatch, "matrix sizes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  symmetric_ = symmetric_ && other.symmetric_;
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require(other.n_ == n_, ErrorCode::LengthMismatch, "matrix sizes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  symmetric_ = symmetric_ && other.symmetric_;
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.n_ == b.n_, ErrorCode::LengthMismatch, "matrix sizes differ");
  const std::size_t n = a.n_;
  ComplexMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a.data_[i * n + k];
      for (std::size_t j = 0; j < n; ++j) c.data_[i * n + j] += aik * b.data_[k * n + j];
    }
  return c;
}

ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x) {
  require(a.n_ == x.size(), ErrorCode::LengthMismatch, "matrix/vector sizes differ");
  ComplexVector y(a.n_);
  for (std::size_t i = 0; i < a.n_; ++i) {
    Complex sum = 0.0;
    for (std::size_t j = 0; j < a.n_; ++j) sum += a.data_[i * a.n_ + j] * x[j];
    y[i] = sum;
  }
  return y;
}

ComplexMatrix outer(const ComplexVector& a, const ComplexVector& b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "vector sizes differ");
  ComplexMatrix m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

void validate_matrix(const ComplexMatrix& m) {
  require(m.size() > 0, ErrorCode::InvalidInput, "empty matrix");
  require(m.size() <= kMaxDimension, ErrorCode::InvalidInput,
          "matrix dimension " + std::to_string(m.size()) + " exceeds " +
              std::to_string(kMaxDimension));
  require(m.all_finite(), ErrorCode::InvalidInput, "matrix has non-finite entries");
}

Complex c_dot(const ComplexVector& a, const ComplexVector& b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "c_dot: vector sizes differ");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Complex h_dot(const ComplexVector& a, const ComplexVector& b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "h_dot: vector sizes differ");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Polynomials

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  require(!coeffs_.empty(), ErrorCode::InvalidInput, "polynomial needs coefficients");
  require(std::abs(coeffs_.back()) > 0.0, ErrorCode::InvalidInput,
          "leading coefficient must be nonzero");
}

Complex Polynomial::operator()(Complex z) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::vector<Complex> Polynomial::derivatives_at(Complex z, int count) const {
  // Repeated synthetic division yields Taylor coefficients p^(k)(z)/k!.
  std::vector<Complex> work(coeffs_.begin(), coeffs_.end());
  std::vector<Complex> out(static_cast<std::size_t>(std::max(count, 0)), Complex{0.0});
  double factorial = 1.0;
  const int n = degree();
  for (int k = 0; k < count && k <= n; ++k) {
    for (int i = n - 1; i >= k; --i) work[static_cast<std::size_t>(i)] += z * work[static_cast<std::size_t>(i) + 1];
    if (k > 0) factorial *= k;
    out[static_cast<std::size_t>(k)] = work[static_cast<std::size_t>(k)] * factorial;
  }
  return out;
}

double Polynomial::scale_at(Complex z) const {
  const double r = std::abs(z);
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial char_poly(const ComplexMatrix& m) {
  validate_matrix(m);
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k.
  // Carried in extended precision; the low coefficients near a multiple
  // eigenvalue are differences of O(1) terms.
  using LComplex = std::complex<long double>;
  const std::size_t n = m.size();
  std::vector<LComplex> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = LComplex(m(i, j).real(), m(i, j).imag());

  std::vector<LComplex> c(n + 1);
  c[n] = 1.0L;
  std::vector<LComplex> mk(n * n, LComplex{0.0L}), next(n * n);
  for (std::size_t k = 1; k <= n; ++k) {
    // next = A * mk + c_{n-k+1} I
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        LComplex sum = 0.0L;
        for (std::size_t l = 0; l < n; ++l) sum += a[i * n + l] * mk[l * n + j];
        next[i * n + j] = sum;
      }
    for (std::size_t i = 0; i < n; ++i) next[i * n + i] += c[n - k + 1];
    mk.swap(next);
    LComplex tr = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += a[i * n + l] * mk[l * n + i];
    c[n - k] = -tr / static_cast<long double>(k);
  }

  std::vector<Complex> coeffs(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    coeffs[k] = Complex(static_cast<double>(c[k].real()), static_cast<double>(c[k].imag()));
  return Polynomial(std::move(coeffs));
}

std::vector<Complex> poly_roots(const Polynomial& p, RootOptions options) {
  require(p.degree() >= 1, ErrorCode::InvalidInput, "poly_roots needs degree >= 1");
  const auto all = p.coeffs();

  // Exact zero roots are split off; the iteration below assumes c_0 != 0 is
  // not required, but it keeps lambda^k factors exact.
  std::size_t zeros = 0;
  while (zeros < all.size() - 1 && all[zeros] == Complex{0.0}) ++zeros;
  std::vector<Complex> roots(zeros, Complex{0.0});

  const Polynomial q(std::vector<Complex>(all.begin() + static_cast<std::ptrdiff_t>(zeros), all.end()));
  const int m = q.degree();
  if (m == 1) {
    roots.push_back(-q.coeffs()[0] / q.coeffs()[1]);
  } else if (m > 1) {
    const auto qc = q.coeffs();
    const Complex center = -qc[static_cast<std::size_t>(m - 1)] / (static_cast<double>(m) * qc[static_cast<std::size_t>(m)]);
    const auto shifted = q.derivatives_at(center, m + 1);  // k! * Taylor coefficient
    double radius = 0.0;
    double factorial = 1.0;
    std::vector<double> factorials(static_cast<std::size_t>(m) + 1, 1.0);
    for (int k = 1; k <= m; ++k) {
      factorial *= k;
      factorials[static_cast<std::size_t>(k)] = factorial;
    }
    const double lead = std::abs(shifted[static_cast<std::size_t>(m)]) / factorials[static_cast<std::size_t>(m)];
    for (int k = 0; k < m; ++k) {
      const double ck = std::abs(shifted[static_cast<std::size_t>(k)]) / factorials[static_cast<std::size_t>(k)];
      if (ck > 0.0) radius = std::max(radius, std::pow(ck / lead, 1.0 / (m - k)));
    }

    std::vector<Complex> z(static_cast<std::size_t>(m), center);
    if (radius > 0.0) {
      for (int j = 0; j < m; ++j)
        z[static_cast<std::size_t>(j)] =
            center + std::polar(radius, 2.0 * M_PI * j / m + 0.4);
      std::vector<bool> done(static_cast<std::size_t>(m), false);
      int iteration = 0;
      for (; iteration < options.max_iterations; ++iteration) {
        bool all_done = true;
        for (std::size_t i = 0; i < z.size(); ++i) {
          if (done[i]) continue;
          const auto d = q.derivatives_at(z[i], 2);
          const double noise = 4.0 * kEps * m * q.scale_at(z[i]);
          if (std::abs(d[0]) <= noise) {
            done[i] = true;
            continue;
          }
          Complex s = 0.0;
          for (std::size_t j = 0; j < z.size(); ++j)
            if (j != i) s += 1.0 / (z[i] - z[j]);
          Complex denom = d[1] - d[0] * s;
          if (denom == Complex{0.0}) denom = Complex(kEps, kEps);
          const Complex w = d[0] / denom;
          z[i] -= w;
          if (std::abs(w) <= 2.0 * kEps * std::abs(z[i])) done[i] = true;
          else all_done = false;
        }
        if (all_done) break;
      }
      // One Newton polish step per root, kept only if it lowers |p|.
      for (auto& r : z) {
        const auto d = q.derivatives_at(r, 2);
        if (d[1] == Complex{0.0}) continue;
        const Complex polished = r - d[0] / d[1];
        if (std::abs(q(polished)) < std::abs(d[0])) r = polished;
      }
    }
    for (const auto& r : z) {
      const double residual = std::abs(q(r));
      if (!(residual <= options.tol * q.scale_at(r)))
        throw Error(ErrorCode::NonConvergence,
                    "Aberth iteration did not converge; rescale the polynomial");
    }
    roots.insert(roots.end(), z.begin(), z.end());
  }
  std::sort(roots.begin(), roots.end(), lex_less);
  return roots;
}

// ---------------------------------------------------------------------------
// Linear solves

LinearSolution solve_linear(const ComplexMatrix& m, const ComplexVector& b) {
  validate_matrix(m);
  require(b.size() == m.size(), ErrorCode::LengthMismatch, "solve_linear: size mismatch");
  const std::size_t n = m.size();
  std::vector<Complex> lu(n * n);
  double max_entry = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      lu[i * n + j] = m(i, j);
      max_entry = std::max(max_entry, std::abs(m(i, j)));
    }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const double threshold = 1e-13 * max_entry;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu[i * n + k]) > std::abs(lu[pivot * n + k])) pivot = i;
    if (!(std::abs(lu[pivot * n + k]) > threshold))
      throw Error(ErrorCode::Singular, "matrix is singular to working precision");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[pivot * n + j]);
      std::swap(perm[k], perm[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu[i * n + k] / lu[k * n + k];
      lu[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
    }
  }
  auto substitute = [&](const ComplexVector& rhs) {
    ComplexVector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      Complex sum = rhs[perm[i]];
      for (std::size_t j = 0; j < i; ++j) sum -= lu[i * n + j] * x[j];
      x[i] = sum;
    }
    for (std::size_t i = n; i-- > 0;) {
      Complex sum = x[i];
      for (std::size_t j = i + 1; j < n; ++j) sum -= lu[i * n + j] * x[j];
      x[i] = sum / lu[i * n + i];
    }
    return x;
  };

  LinearSolution out;
  out.x = substitute(b);

  double norm_m = 0.0, norm_inv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += std::abs(m(i, j));
    norm_m = std::max(norm_m, col);
    ComplexVector e(n);
    e[j] = 1.0;
    const auto inv_col = substitute(e);
    double inv = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv += std::abs(inv_col[i]);
    norm_inv = std::max(norm_inv, inv);
  }
  out.condition = norm_m * norm_inv;
  return out;
}

// ---------------------------------------------------------------------------
// Eigendecomposition

bool gauge_wants_flip(const ComplexVector& u) {
  double max_mod = 0.0;
  for (const auto& v : u) max_mod = std::max(max_mod, std::abs(v));
  for (const auto& v : u) {
    const double mod = std::abs(v);
    if (mod <= 1e-12 * max_mod) continue;
    if (std::abs(v.real()) > 1e-8 * mod) return v.real() < 0.0;
    return v.imag() < 0.0;
  }
  return false;
}

bool Spectrum::any_defective() const {
  return std::any_of(clusters.begin(), clusters.end(),
                     [](const EigenCluster& c) { return c.defective; });
}

double Spectrum::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      gap = std::min(gap, std::abs(clusters[i].mean - clusters[j].mean));
  return gap;
}

Spectrum eig(const ComplexMatrix& m, EigOptions options) {
  validate_matrix(m);
  const std::size_t n = m.size();
  const double scale = 1.0 + m.norm();
  const auto roots = poly_roots(char_poly(m));

  // Union-find over the proximity graph; the root of each set is its
  // smallest member.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= options.cluster_tol * scale) {
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }

  Spectrum s;
  s.values = roots;
  s.vectors.assign(n, std::nullopt);
  s.self_orthogonal.assign(n, false);
  s.residuals.assign(n, std::numeric_limits<double>::quiet_NaN());
  s.cluster_of.assign(n, 0);

  std::vector<long> index_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (index_of_root[r] < 0) {
      index_of_root[r] = static_cast<long>(s.clusters.size());
      s.clusters.push_back({});
    }
    auto& cluster = s.clusters[static_cast<std::size_t>(index_of_root[r])];
    cluster.members.push_back(i);
    s.cluster_of[i] = static_cast<std::size_t>(index_of_root[r]);
  }

  for (auto& cluster : s.clusters) {
    Complex mean = 0.0;
    for (auto i : cluster.members) mean += roots[i];
    mean /= static_cast<double>(cluster.members.size());
    cluster.mean = mean;
    for (auto i : cluster.members) s.values[i] = mean;

    ComplexMatrix shifted = m;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= mean;
    const auto dec = svd(shifted);
    const double top = dec.singular_values.front();
    // Singular values at the scale of the cluster's own split also count:
    // a slightly split diabolic point has all of them there, while a split
    // EP keeps one far below and the rest O(1).
    double spread = 0.0;
    for (auto i : cluster.members) spread = std::max(spread, std::abs(roots[i] - mean));
    const double threshold = std::max(options.rank_tol * top, 2.0 * spread);
    int kernel = 0;
    for (double sv : dec.singular_values)
      if (sv <= threshold) ++kernel;
    // An eigenvalue always has at least one eigenvector; a kernel wider than
    // the cluster means the tolerance caught neighbouring directions.
    kernel = std::clamp(kernel, 1, static_cast<int>(cluster.members.size()));
    cluster.kernel_dimension = kernel;
    cluster.defective = kernel < static_cast<int>(cluster.members.size());

    for (int t = 0; t < kernel; ++t) {
      ComplexVector u = dec.right_vectors[n - 1 - static_cast<std::size_t>(t)];
      const auto idx = cluster.members[static_cast<std::size_t>(t)];
      if (cluster.members.size() == 1) {
        const Complex self = c_dot(u, u);
        const double herm = std::real(h_dot(u, u));
        if (std::abs(self) < options.self_orthogonal_tol * herm) {
          s.self_orthogonal[idx] = true;
        } else {
          u *= 1.0 / std::sqrt(self);
        }
      }
      if (gauge_wants_flip(u)) u *= -1.0;
      const auto r = m * u - mean * u;
      s.residuals[idx] = r.norm() / u.norm();
      s.vectors[idx] = std::move(u);
    }
  }
  return s;
}

}  // namespace ep3

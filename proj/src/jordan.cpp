#include "ep3/jordan.hpp"

#include <algorithm>
#include <cmath>

namespace ep3 {

std::vector<EPRecord> detect_ep(const ComplexMatrix& m, EigOptions options) {
  require(m.is_symmetric(), ErrorCode::InvalidInput, "detect_ep requires a symmetric matrix");
  const auto spectrum = eig(m, options);
  std::vector<EPRecord> records;
  for (const auto& cluster : spectrum.clusters) {
    EPRecord r;
    r.lambda0 = cluster.mean;
    r.algebraic_multiplicity = static_cast<int>(cluster.members.size());
    r.geometric_multiplicity = cluster.kernel_dimension;
    if (r.geometric_multiplicity != 1 && r.geometric_multiplicity != r.algebraic_multiplicity)
      throw Error(ErrorCode::AmbiguousStructure,
                  "eigenvalue cluster of size " + std::to_string(r.algebraic_multiplicity) +
                      " has geometric multiplicity " + std::to_string(r.geometric_multiplicity));
    records.push_back(r);
  }
  return records;
}

RawChain build_chain(const ComplexMatrix& m, Complex lambda0, int length, double rank_tol) {
  validate_matrix(m);
  require(length == 2 || length == 3, ErrorCode::InvalidInput, "chain length must be 2 or 3");
  const std::size_t n = m.size();
  ComplexMatrix shifted = m;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda0;

  RawChain raw;
  raw.lambda0 = lambda0;
  raw.matrix_scale = 1.0 + m.norm();

  const auto dec = svd(shifted);
  // u0: direction of the smallest singular value (the kernel for a genuine EP).
  raw.vectors.push_back(dec.right_vectors.back());

  for (int j = 1; j < length; ++j) {
    const auto& rhs = raw.vectors.back();
    auto x = min_norm_solve(shifted, rhs, rank_tol);
    const double residual = (shifted * x - rhs).norm() / rhs.norm();
    if (!(residual <= kChainTolerance * raw.matrix_scale))
      throw Error(ErrorCode::ChainBreaks,
                  "(H - lambda0) x = u" + std::to_string(j - 1) + " is insoluble (residual " +
                      std::to_string(residual) + "); chain shorter than " + std::to_string(length));
    raw.residuals.push_back(residual);
    raw.vectors.push_back(std::move(x));
  }
  return raw;
}

double JordanChain::max_residual() const {
  double worst = 0.0;
  for (const auto& [key, value] : residuals) worst = std::max(worst, value);
  return worst;
}

JordanChain normalize_chain(const RawChain& raw) {
  const int length = static_cast<int>(raw.vectors.size());
  require(length == 2 || length == 3, ErrorCode::InvalidInput, "chain length must be 2 or 3");
  for (double r : raw.residuals)
    require(r <= kChainTolerance * raw.matrix_scale, ErrorCode::ChainBreaks,
            "raw chain residual above tolerance");

  const auto& v = raw.vectors;
  auto g = [&](int i, int j) { return c_dot(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]); };
  const double unit = v[0].norm() * v[static_cast<std::size_t>(length - 1)].norm();

  Complex s, c1, c2 = 0.0;
  if (length == 2) {
    const Complex g01 = g(0, 1);
    if (!(std::abs(g01) > 1e-10 * unit))
      throw Error(ErrorCode::DegenerateNormalization, "u0.u1 vanishes; cannot impose u0.u1 = 1");
    s = std::sqrt(1.0 / g01);
    c1 = -s * g(1, 1) / (2.0 * g01);
  } else {
    const Complex g02 = g(0, 2);
    if (!(std::abs(g02) > 1e-10 * unit))
      throw Error(ErrorCode::DegenerateNormalization, "u0.u2 vanishes; cannot impose u0.u2 = 1");
    s = std::sqrt(1.0 / g02);
    const Complex g11 = g(1, 1), g12 = g(1, 2), g22 = g(2, 2);
    c1 = -s * g12 / (2.0 * g02);
    c2 = -(s * s * g22 + c1 * c1 * g11 + 2.0 * s * c1 * g12) / (2.0 * s * g02);
  }

  JordanChain chain;
  chain.lambda0 = raw.lambda0;
  chain.matrix_scale = raw.matrix_scale;
  chain.vectors.push_back(s * v[0]);
  chain.vectors.push_back(s * v[1] + c1 * v[0]);
  if (length == 3) chain.vectors.push_back(s * v[2] + c1 * v[1] + c2 * v[0]);
  if (gauge_wants_flip(chain.vectors[0]))
    for (auto& u : chain.vectors) u *= -1.0;

  const auto& u = chain.vectors;
  auto dot = [&](int i, int j) { return c_dot(u[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(j)]); };
  chain.residuals["u0.u0"] = std::abs(dot(0, 0));
  if (length == 2) {
    chain.residuals["u0.u1-1"] = std::abs(dot(0, 1) - 1.0);
    chain.residuals["u1.u1"] = std::abs(dot(1, 1));
  } else {
    chain.residuals["u0.u1"] = std::abs(dot(0, 1));
    chain.residuals["u0.u2-u1.u1"] = std::abs(dot(0, 2) - dot(1, 1));
    chain.residuals["u0.u2-1"] = std::abs(dot(0, 2) - 1.0);
    chain.residuals["u2.u1"] = std::abs(dot(2, 1));
    chain.residuals["u2.u2"] = std::abs(dot(2, 2));
  }
  return chain;
}

namespace {

// Chain-equation residuals need the matrix, so they are attached here rather
// than in normalize_chain.
void record_chain_residuals(const ComplexMatrix& m, JordanChain& chain) {
  ComplexMatrix shifted = m;
  for (std::size_t i = 0; i < m.size(); ++i) shifted(i, i) -= chain.lambda0;
  const auto& u = chain.vectors;
  chain.residuals["chain0"] = (shifted * u[0]).norm();
  for (std::size_t j = 1; j < u.size(); ++j)
    chain.residuals["chain" + std::to_string(j)] = (shifted * u[j] - u[j - 1]).norm();
}

}  // namespace

JordanChain jordan_chain_at(const ComplexMatrix& m, const EPRecord& ep) {
  require(ep.is_exceptional(), ErrorCode::InvalidInput, "record is not an exceptional point");
  require(ep.algebraic_multiplicity <= 3, ErrorCode::InvalidInput,
          "chain normalization is defined for EP2 and EP3 only");
  auto chain = normalize_chain(build_chain(m, ep.lambda0, ep.algebraic_multiplicity));
  record_chain_residuals(m, chain);
  return chain;
}

}  // namespace ep3

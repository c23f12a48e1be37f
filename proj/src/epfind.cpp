#include "ep3/epfind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ep3/jordan.hpp"

namespace ep3 {

Complex tightest_cluster_mean(const ComplexMatrix& m, int order) {
  const auto roots = poly_roots(char_poly(m));
  const std::size_t n = roots.size();
  const auto k = static_cast<std::size_t>(order);
  require(k >= 1 && k <= n, ErrorCode::InvalidInput, "order exceeds the matrix dimension");
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  double best = std::numeric_limits<double>::infinity();
  Complex mean;
  // prev_permutation over a sorted mask enumerates subsets in a fixed order.
  do {
    double spread = 0.0;
    Complex sum;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pick[i]) continue;
      sum += roots[i];
      for (std::size_t j = i + 1; j < n; ++j)
        if (pick[j]) spread = std::max(spread, std::abs(roots[i] - roots[j]));
    }
    if (spread < best) {
      best = spread;
      mean = sum / static_cast<double>(k);
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return mean;
}

namespace {

class Residual {
 public:
  Residual(const EPSearchProblem& problem) : problem_(problem) {}

  /// x = [lambda, params...]
  std::vector<Complex> operator()(const std::vector<Complex>& x, double* scale = nullptr) const {
    const ComplexMatrix h = problem_.family(std::span<const Complex>(x).subspan(1));
    const double s = std::pow(1.0 + h.norm(), static_cast<double>(h.size()));
    if (scale) *scale = s;
    auto f = char_poly(h).derivatives_at(x[0], problem_.order);
    for (auto& v : f) v /= s;
    return f;
  }

 private:
  const EPSearchProblem& problem_;
};

double norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex c : v) s += std::norm(c);
  return std::sqrt(s);
}

std::vector<Complex> newton_step(const Residual& residual, const std::vector<Complex>& x,
                                 const std::vector<Complex>& f) {
  const std::size_t unknowns = x.size();
  const std::size_t equations = f.size();
  const std::size_t dim = std::max(unknowns, equations);
  ComplexMatrix jac(dim);
  for (std::size_t k = 0; k < unknowns; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
    auto plus = x;
    auto minus = x;
    plus[k] += h;
    minus[k] -= h;
    const auto fp = residual(plus);
    const auto fm = residual(minus);
    for (std::size_t e = 0; e < equations; ++e) jac(e, k) = (fp[e] - fm[e]) / (2.0 * h);
  }
  ComplexVector rhs(dim);
  for (std::size_t e = 0; e < equations; ++e) rhs[e] = -f[e];
  const auto dx = min_norm_solve(jac, rhs, 1e-12);
  std::vector<Complex> out(unknowns);
  for (std::size_t k = 0; k < unknowns; ++k) out[k] = dx[k];
  return out;
}

}  // namespace

EPSearchResult find_ep(const EPSearchProblem& problem, EPSearchOptions options) {
  require(problem.order == 2 || problem.order == 3, ErrorCode::InvalidInput, "order must be 2 or 3");
  require(static_cast<bool>(problem.family.map), ErrorCode::InvalidInput, "search family is empty");
  require(problem.params_guess.size() == problem.family.parameter_count, ErrorCode::DimensionMismatch,
          "params guess does not match the family parameter count");
  require(static_cast<std::size_t>(problem.order - 1) <= problem.family.parameter_count,
          ErrorCode::InvalidInput,
          "an EP" + std::to_string(problem.order) + " needs at least " +
              std::to_string(problem.order - 1) + " parameter(s); the family has " +
              std::to_string(problem.family.parameter_count));
  require(options.tol > 0.0 && options.max_iterations > 0, ErrorCode::InvalidInput,
          "tol and max_iterations must be positive");

  std::vector<Complex> x;
  x.push_back(problem.lambda_guess ? *problem.lambda_guess
                                   : tightest_cluster_mean(problem.family(problem.params_guess),
                                                           problem.order));
  x.insert(x.end(), problem.params_guess.begin(), problem.params_guess.end());

  const Residual residual(problem);
  auto f = residual(x);
  double fnorm = norm(f);
  int iterations = 0;
  bool converged = fnorm <= options.tol;
  while (!converged && iterations < options.max_iterations) {
    ++iterations;
    const auto dx = newton_step(residual, x, f);
    double damping = 1.0;
    std::vector<Complex> trial;
    std::vector<Complex> ftrial;
    for (int halving = 0; halving <= 20; ++halving, damping *= 0.5) {
      trial = x;
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] += damping * dx[k];
      ftrial = residual(trial);
      if (norm(ftrial) < fnorm) break;
    }
    x = std::move(trial);
    f = std::move(ftrial);
    fnorm = norm(f);
    converged = fnorm <= options.tol;
  }
  if (!converged)
    throw Error(ErrorCode::NoConvergence,
                "EP search did not converge in " + std::to_string(options.max_iterations) +
                    " iterations (||F|| = " + std::to_string(fnorm) + ")");

  // One polishing step, kept only if it does not make things worse.
  {
    const auto dx = newton_step(residual, x, f);
    auto trial = x;
    for (std::size_t k = 0; k < x.size(); ++k) trial[k] += dx[k];
    const auto ftrial = residual(trial);
    if (norm(ftrial) <= fnorm) {
      x = std::move(trial);
      f = ftrial;
      fnorm = norm(f);
    }
  }

  EPSearchResult result;
  result.lambda0 = x[0];
  result.params.assign(x.begin() + 1, x.end());
  result.residual = fnorm;
  result.iterations = iterations;

  ComplexMatrix h = problem.family(result.params);
  const double scale = std::pow(1.0 + h.norm(), static_cast<double>(h.size()));
  const auto derivs = char_poly(h).derivatives_at(result.lambda0, problem.order + 1);
  result.next_derivative = std::abs(derivs.back()) / scale;

  h.certify_symmetric();
  EigOptions verify;
  verify.cluster_tol = 1e-4;
  const auto records = detect_ep(h, verify);
  const EPRecord* nearest = &records.front();
  for (const auto& r : records)
    if (std::abs(r.lambda0 - result.lambda0) < std::abs(nearest->lambda0 - result.lambda0)) nearest = &r;
  result.verified_order = nearest->is_exceptional() ? nearest->algebraic_multiplicity : 1;
  if (result.verified_order < problem.order)
    throw Error(ErrorCode::WrongOrder,
                "converged point is an EP of order " + std::to_string(result.verified_order) +
                    ", not " + std::to_string(problem.order));
  return result;
}

}  // namespace ep3

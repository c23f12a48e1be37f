#pragma once

// Locating EPs as simultaneous roots of the characteristic polynomial and its
// first order - 1 derivatives: F(lambda, params) = [p, p', (p'')] = 0.
// Defectiveness is not implied by a multiple root (a diabolic point also has
// one), so every solution is checked with detect_ep.

#include <optional>
#include <vector>

#include "ep3/linalg.hpp"
#include "ep3/models.hpp"

namespace ep3 {

struct EPSearchProblem {
  ParameterFamily family;
  int order = 2;  // 2 or 3; needs order - 1 <= family.parameter_count
  std::optional<Complex> lambda_guess;  // default: mean of the tightest order-subset of eigenvalues
  std::vector<Complex> params_guess;
};

struct EPSearchOptions {
  double tol = 1e-12;  // on ||F||, relative to (1 + ||H||)^n
  int max_iterations = 100;
};

struct EPSearchResult {
  Complex lambda0;
  std::vector<Complex> params;
  double residual = 0.0;  // ||F|| / (1 + ||H||)^n at the solution
  int verified_order = 1;
  int iterations = 0;
  /// |p^(order)(lambda0)| / (1 + ||H||)^n; bounded away from 0 at a genuine EP of that order.
  double next_derivative = 0.0;
};

/// Damped Newton with central-difference Jacobian and minimum-norm SVD steps.
/// Throws NoConvergence, WrongOrder (verified order below the requested one)
/// or InvalidInput (codimension: order - 1 > parameter count).
EPSearchResult find_ep(const EPSearchProblem& problem, EPSearchOptions options = {});

/// Mean of the `order` eigenvalues of m with the smallest spread.
Complex tightest_cluster_mean(const ComplexMatrix& m, int order);

}  // namespace ep3

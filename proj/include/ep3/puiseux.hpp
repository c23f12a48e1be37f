#pragma once

// Leading-order Puiseux expansions for H(z) = H0 + z H1 at an EP2 or EP3.
//
// EP3, with c = u0^T H1 u0 and d = 2 u1^T H1 u0:
//   c != 0            lambda = lambda0 + c^(1/3) w^k z^(1/3),   k = 0, 1, 2
//                     u      = u0 + c^(1/3) w^k z^(1/3) u1
//   c == 0, d != 0    lambda = lambda0 +- d^(1/2) z^(1/2)
//                     lambda = lambda0 + mu z,  mu = u0^T H1 x / d
//                     u      = u0 + (mu u1 - x) z
//   where x = G^-1 H1 u0 and G = H0 - lambda0 - u2 u2^T. Solving G x = H1 u0
//   forces u2^T x = 0, so x is a particular solution of (H0 - lambda0) x = H1 u0.
// EP2: lambda = lambda0 +- c^(1/2) z^(1/2), u = u0 +- c^(1/2) z^(1/2) u1.
//
// Roots are principal (log branch cut on the negative real axis) and branches
// are enumerated principal first, counterclockwise.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ep3/jordan.hpp"
#include "ep3/linalg.hpp"

namespace ep3 {

struct LinearFamily {
  ComplexMatrix h0;
  ComplexMatrix h1;
};

/// Validates equal dimensions and symmetry of both matrices.
LinearFamily make_linear_family(ComplexMatrix h0, ComplexMatrix h1);

enum class PuiseuxKind {
  ThirdRoot,
  SquareRootPlusTaylor,
  SquareRoot,  // EP2, generic
  TaylorOnly,  // EP2 with u0^T H1 u0 = 0; coefficients not computed
  DegenerateOther,
};

std::string_view to_string(PuiseuxKind kind);

struct PuiseuxClass {
  PuiseuxKind kind = PuiseuxKind::DegenerateOther;
  int ep_order = 3;
  Complex lambda0;
  Complex first_scalar;   // u0^T H1 u0
  Complex second_scalar;  // 2 u1^T H1 u0 (EP3 only)
  /// ThirdRoot: c^(1/3); SquareRootPlusTaylor: d^(1/2); SquareRoot: c^(1/2).
  Complex lambda1;
  Complex lambda1_taylor;  // SquareRootPlusTaylor: mu
  /// Unit factors multiplying lambda1 on each fractional branch.
  std::vector<Complex> branch_phases;
  /// SquareRootPlusTaylor: x = G^-1 H1 u0.
  std::optional<ComplexVector> correction;
};

/// Relative vanishing threshold: |c| <= tol (1 + ||H1||) ||u0||^2 and
/// |d| <= tol (1 + ||H1||) ||u0|| ||u1||.
inline constexpr double kVanishingTolerance = 1e-8;

PuiseuxClass classify_ep3(const LinearFamily& family, const JordanChain& chain,
                          double tol = kVanishingTolerance);
PuiseuxClass classify_ep2(const LinearFamily& family, const JordanChain& chain,
                          double tol = kVanishingTolerance);

/// exp(log(z) / n); 0 for z == 0.
Complex principal_root(Complex z, int n);

/// Leading-order eigenvalues. Branch order: fractional branches in the order
/// of branch_phases, then the Taylor branch.
std::vector<Complex> predict_eigenvalues(const PuiseuxClass& cls, Complex z);
/// Unnormalized leading-order eigenvectors in the same branch order.
std::vector<ComplexVector> predict_eigenvectors(const PuiseuxClass& cls, const JordanChain& chain,
                                                Complex z);

/// Deviations below kResolutionFloor (1 + ||H0||) are rounding noise and are
/// left out of exponent fits.
inline constexpr double kResolutionFloor = 1e-10;

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
  /// Fewer than two points above the floor: the quantity is zero to working
  /// precision and slope is +infinity.
  bool constant = false;
};

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y, double floor);

struct ExponentGroup {
  int branch_count = 0;
  LogLogFit fit;
  std::vector<double> mean_deviation;  // per radius, mean |lambda - lambda0|
};

struct ExponentFit {
  std::vector<double> radii;
  std::vector<ExponentGroup> groups;  // largest cycle first
};

/// Tracks a circle of each radius around z = 0, groups the branches that
/// meet at lambda0 by monodromy cycle, and fits log(mean |lambda - lambda0|)
/// against log(radius). Radii must be positive, strictly descending, >= 1e-8.
/// Throws InconsistentCycles when the cycle structure differs between radii.
ExponentFit fit_exponents(const LinearFamily& family, Complex lambda0,
                          std::span<const double> radii, int phases_per_circle = 64);

}  // namespace ep3

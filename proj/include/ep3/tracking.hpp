#pragma once

// Eigenvalue / eigenvector continuation around closed parameter loops.
//
// Branches are matched between consecutive samples by the assignment that
// minimizes the total eigenvalue displacement (exhaustive over permutations,
// n <= 6). Eigenvectors are c-normalized (u^T u = 1), which leaves a sign
// that is chained from sample to sample by requiring Re(u_prev^T u_next) > 0.
// After one parameter cycle each branch lands on some initial branch with a
// sign factor; products of those factors around an orbit are the geometric
// phases (0 or pi).

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ep3/linalg.hpp"
#include "ep3/models.hpp"

namespace ep3 {

inline constexpr std::size_t kMaxTrackingDimension = 6;

/// z = center + radius * exp(i phi) for one-parameter families.
struct ComplexCircle {
  Complex center = 0.0;
  double radius = 0.1;
};

/// (a, b) = radius * (cos phi, sin phi), real, for two-parameter families.
struct RealEllipse {
  double radius = 0.5;
};

using LoopPath = std::variant<ComplexCircle, RealEllipse>;

struct LoopSpec {
  ParameterFamily family;
  LoopPath path = ComplexCircle{};
  int steps_per_cycle = 512;
  int cycles = 1;
  /// Traverse the path clockwise (phi -> -phi).
  bool reversed = false;
  /// Eigenvector continuation and phases; forced off for RealEllipse paths.
  bool track_vectors = true;
};

struct LoopSample {
  double phi = 0.0;  // unwrapped, 2 pi * index / steps_per_cycle
  std::vector<Complex> values;                      // by branch label
  std::vector<std::optional<ComplexVector>> vectors;  // absent near self-orthogonality
};

struct Crossing {
  int branch = 0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  Complex point;
};

struct LoopReport {
  int steps_per_cycle = 0;
  int cycles = 0;
  bool has_vectors = false;
  std::vector<LoopSample> samples;  // steps_per_cycle * cycles + 1
  /// permutation[k][b]: initial label whose eigenvalue branch b reaches after
  /// k + 1 cycles. permutation[0] is the one-cycle monodromy.
  std::vector<std::vector<int>> permutation;
  /// signs[k][b] = sign of Re(u_b(after k+1 cycles)^T u_{permutation[k][b]}(0)).
  std::vector<std::vector<int>> signs;
  /// Smallest m with permutation[0]^m = identity.
  int cycles_to_return = 1;
  /// Smallest m after which every branch is back with sign +1.
  int cycles_to_return_with_phase = 1;
  /// Per branch: phase in (-pi, pi] picked up when the branch first returns
  /// to itself (gauge independent). Empty without vectors.
  std::vector<double> phases;
  /// Per branch: sum of arg(u_prev^T u_next) over all tracked steps. Zero up
  /// to discretization when c-normalization enforces parallel transport.
  std::vector<double> transport_phases;
  std::vector<Crossing> crossings;
  int refinements = 0;  // bisection steps taken by the matcher

  std::size_t branch_count() const { return samples.empty() ? 0 : samples.front().values.size(); }
};

/// Throws EPOnPath when a sample is defective or has two eigenvalues closer
/// than the eig cluster tolerance (or 1e-9 (1 + ||H||)), MatchingAmbiguous
/// when bisection (depth 12) cannot separate the assignment, InvalidInput on
/// an invalid LoopSpec.
LoopReport track_loop(const LoopSpec& spec);

/// Transversal intersections between non-adjacent segments of a polyline.
/// For a closed polyline (last point == first) the first and last segments
/// count as adjacent.
struct PolylineCrossing {
  std::size_t segment1 = 0;
  std::size_t segment2 = 0;
  double t1 = 0.0;  // position along segment1 in [0, 1)
  double t2 = 0.0;
  Complex point;
};
std::vector<PolylineCrossing> polyline_self_crossings(std::span<const Complex> points);

/// Self-crossings of each branch trajectory over its orbit (orbit length
/// cycles, limited by the cycles actually tracked).
std::vector<Crossing> detect_self_crossings(const LoopReport& report);

struct MonodromySummary {
  std::vector<std::vector<int>> orbits;  // longest first, ties by smallest label
  std::vector<int> cycle_structure;
  std::vector<double> phase_per_orbit;  // empty without vectors
};

MonodromySummary monodromy_summary(const LoopReport& report);

/// Assignment of next-sample values to branches minimizing total |delta
/// lambda| (exhaustive, n <= kMaxTrackingDimension): result[b] indexes next.
std::vector<std::size_t> match_branches(const std::vector<Complex>& prev,
                                        const std::vector<Complex>& next);

/// Disjoint cycles of a permutation, longest first.
std::vector<std::vector<int>> permutation_orbits(const std::vector<int>& perm);

/// Maps an angle to (-pi, pi].
double wrap_phase(double phase);
/// |wrap_phase(a - b)|.
double phase_distance(double a, double b);

}  // namespace ep3

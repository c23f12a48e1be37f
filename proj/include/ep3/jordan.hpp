#pragma once

// Jordan chains at defective eigenvalues of complex symmetric matrices.
//
// For symmetric H the left chain is the entrywise conjugate of the right
// chain, so every normalization condition is a bilinear (c-product)
// identity between right chain vectors:
//
//   length 2:  u0.u0 = 0,  u0.u1 = 1,  u1.u1 = 0
//   length 3:  u0.u0 = 0,  u0.u1 = 0,  u0.u2 = u1.u1   (automatic)
//              u0.u2 = 1,  u2.u1 = 0,  u2.u2 = 0       (imposed)
//
// The imposed conditions fix the chain up to an overall sign; the sign is
// fixed by gauge_wants_flip() applied to u0.

#include <map>
#include <string>
#include <vector>

#include "ep3/linalg.hpp"

namespace ep3 {

struct EPRecord {
  Complex lambda0;
  int algebraic_multiplicity = 1;
  int geometric_multiplicity = 1;

  bool is_exceptional() const {
    return algebraic_multiplicity >= 2 && geometric_multiplicity == 1;
  }
};

/// One record per eigenvalue cluster of eig(m). Throws AmbiguousStructure for
/// a cluster whose geometric multiplicity is neither 1 nor its size.
std::vector<EPRecord> detect_ep(const ComplexMatrix& m, EigOptions options = {});

struct RawChain {
  Complex lambda0;
  std::vector<ComplexVector> vectors;
  std::vector<double> residuals;  // ||(H - lambda0) u_j - u_{j-1}|| / ||u_{j-1}||, j >= 1
  double matrix_scale = 1.0;      // 1 + ||H||
};

/// Minimum-norm chain: u0 spans the kernel of H - lambda0, each further
/// vector is the minimum-norm solution of (H - lambda0) x = u_{j-1}.
/// Throws ChainBreaks when a step is insoluble before `length` is reached.
RawChain build_chain(const ComplexMatrix& m, Complex lambda0, int length,
                     double rank_tol = 1e-8);

struct JordanChain {
  Complex lambda0;
  std::vector<ComplexVector> vectors;  // u0, u1(, u2)
  /// Achieved residuals keyed by condition, e.g. "u0.u2-1", "chain1".
  std::map<std::string, double> residuals;
  double matrix_scale = 1.0;

  int length() const { return static_cast<int>(vectors.size()); }
  /// Largest recorded residual.
  double max_residual() const;
};

inline constexpr double kChainTolerance = 1e-8;  // relative to 1 + ||H||

/// Applies u0 -> s u0, u1 -> s u1 + c1 u0, u2 -> s u2 + c1 u1 + c2 u0 with
/// (s, c1, c2) solved in that order from the imposed conditions.
/// Throws DegenerateNormalization when the pivot bilinear scalar vanishes and
/// ChainBreaks when the raw chain residuals exceed kChainTolerance.
JordanChain normalize_chain(const RawChain& raw);

/// build_chain + normalize_chain for a detect_ep record, with the chain
/// equation residuals ("chain0", "chain1", ...) added to the report.
JordanChain jordan_chain_at(const ComplexMatrix& m, const EPRecord& ep);

}  // namespace ep3

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ep3/linalg.hpp"

namespace ep3 {

/// Three coupled waveguides with balanced gain/loss on the outer guides:
///
///   [ a - 2i gamma   sqrt2 v        0          ]
///   [ sqrt2 v        0              sqrt2 v    ]
///   [ 0              sqrt2 v        b + 2i gamma ]
///
/// EP3 at gamma = v, a = b = 0 with lambda0 = 0.
struct WaveguideParams {
  double gamma = 1.0;
  double v = 1.0;
  Complex a = 0.0;
  Complex b = 0.0;
};

ComplexMatrix waveguide(const WaveguideParams& p);

enum class FamilyKind {
  WaveguideABEqual,     // a = b = z
  WaveguideABOpposite,  // a = -b = z
  WaveguideReal2Param,  // (a, b) independent
  FilePolynomial,       // H(z) = sum_k z^k H_k
};

struct FamilyDef {
  std::string name;
  FamilyKind kind = FamilyKind::FilePolynomial;
  double gamma = 1.0;  // waveguide kinds
  double v = 1.0;
  std::vector<ComplexMatrix> matrices;  // FilePolynomial: H_0 ... H_d

  std::size_t parameter_count() const;
  std::size_t dimension() const;
};

FamilyDef waveguide_family(FamilyKind kind, double gamma = 1.0, double v = 1.0);

/// Validates d >= 1, equal square dimensions and exact symmetry.
FamilyDef polynomial_family(std::string name, std::vector<ComplexMatrix> matrices);

/// [[i, 1], [1, -i]] + z diag(1, -1): symmetric EP2 at z = 0, lambda0 = 0.
FamilyDef symmetric_ep2_family();

/// Family file: {"name": str, "degree": d, "matrices": [H_0, ..., H_d]} with
/// each matrix a list of rows of [re, im] pairs.
FamilyDef parse_family_json(std::string_view text);
FamilyDef load_family_file(const std::filesystem::path& path);

/// Built-in name (waveguide-ab-equal, waveguide-ab-opposite,
/// waveguide-2param, ep2-symmetric) or "file:<path>".
FamilyDef resolve_family(std::string_view selector);
std::vector<std::string> builtin_family_names();

ComplexMatrix evaluate(const FamilyDef& def, std::span<const Complex> params);
ComplexMatrix evaluate(const FamilyDef& def, Complex z);

/// dH/dz at z for one-parameter families.
ComplexMatrix derivative_at(const FamilyDef& def, Complex z);
inline ComplexMatrix derivative_at_zero(const FamilyDef& def) { return derivative_at(def, 0.0); }

/// Type-erased parameter-to-matrix map consumed by tracking and epfind.
struct ParameterFamily {
  std::size_t parameter_count = 1;
  std::function<ComplexMatrix(std::span<const Complex>)> map;

  ComplexMatrix operator()(std::span<const Complex> params) const;
  ComplexMatrix operator()(Complex z) const;
};

ParameterFamily as_parameter_family(FamilyDef def);

}  // namespace ep3

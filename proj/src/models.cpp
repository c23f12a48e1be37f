#include "ep3/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ep3 {

using nlohmann::json;

ComplexMatrix waveguide(const WaveguideParams& p) {
  require(std::isfinite(p.gamma) && std::isfinite(p.v), ErrorCode::InvalidInput,
          "waveguide: gamma and v must be finite");
  const Complex i{0.0, 1.0};
  const Complex c = std::sqrt(2.0) * p.v;
  ComplexMatrix m{{p.a - 2.0 * i * p.gamma, c, 0.0},
                  {c, 0.0, c},
                  {0.0, c, p.b + 2.0 * i * p.gamma}};
  validate_matrix(m);
  return m;
}

std::size_t FamilyDef::parameter_count() const {
  return kind == FamilyKind::WaveguideReal2Param ? 2 : 1;
}

std::size_t FamilyDef::dimension() const {
  return kind == FamilyKind::FilePolynomial ? matrices.front().size() : 3;
}

FamilyDef waveguide_family(FamilyKind kind, double gamma, double v) {
  require(kind != FamilyKind::FilePolynomial, ErrorCode::InvalidInput, "not a waveguide kind");
  FamilyDef def;
  def.kind = kind;
  def.gamma = gamma;
  def.v = v;
  switch (kind) {
    case FamilyKind::WaveguideABEqual: def.name = "waveguide-ab-equal"; break;
    case FamilyKind::WaveguideABOpposite: def.name = "waveguide-ab-opposite"; break;
    default: def.name = "waveguide-2param"; break;
  }
  return def;
}

FamilyDef polynomial_family(std::string name, std::vector<ComplexMatrix> matrices) {
  require(matrices.size() >= 2, ErrorCode::InvalidInput,
          "polynomial family needs degree >= 1 (at least two matrices)");
  const std::size_t n = matrices.front().size();
  for (auto& m : matrices) {
    if (m.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "family matrices have different dimensions");
    validate_matrix(m);
    if (!m.certify_symmetric())
      throw Error(ErrorCode::NonSymmetricFile, "family matrix is not symmetric");
  }
  FamilyDef def;
  def.name = std::move(name);
  def.kind = FamilyKind::FilePolynomial;
  def.matrices = std::move(matrices);
  return def;
}

FamilyDef symmetric_ep2_family() {
  const Complex i{0.0, 1.0};
  return polynomial_family("ep2-symmetric", {ComplexMatrix{{i, 1.0}, {1.0, -i}},
                                             ComplexMatrix::diagonal({1.0, -1.0})});
}

namespace {

Complex parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::InvalidInput, "complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

ComplexMatrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidInput, "matrix must be a list of rows");
  const std::size_t n = j.size();
  ComplexMatrix m(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n)
      throw Error(ErrorCode::DimensionMismatch, "family matrix is not square");
    for (std::size_t c = 0; c < n; ++c) m(r, c) = parse_complex(j[r][c]);
  }
  return m;
}

}  // namespace

FamilyDef parse_family_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("family file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("matrices") || !doc["matrices"].is_array())
    throw Error(ErrorCode::InvalidInput, "family file needs a \"matrices\" array");
  std::vector<ComplexMatrix> matrices;
  for (const auto& m : doc["matrices"]) matrices.push_back(parse_matrix(m));
  if (doc.contains("degree")) {
    if (!doc["degree"].is_number_integer() ||
        doc["degree"].get<long>() != static_cast<long>(matrices.size()) - 1)
      throw Error(ErrorCode::InvalidInput, "\"degree\" must equal len(matrices) - 1");
  }
  const std::string name = doc.value("name", std::string("file"));
  return polynomial_family(name, std::move(matrices));
}

FamilyDef load_family_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open family file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_family_json(buffer.str());
}

std::vector<std::string> builtin_family_names() {
  return {"waveguide-ab-equal", "waveguide-ab-opposite", "waveguide-2param", "ep2-symmetric"};
}

FamilyDef resolve_family(std::string_view selector) {
  if (selector.starts_with("file:")) return load_family_file(std::string(selector.substr(5)));
  if (selector == "waveguide-ab-equal") return waveguide_family(FamilyKind::WaveguideABEqual);
  if (selector == "waveguide-ab-opposite") return waveguide_family(FamilyKind::WaveguideABOpposite);
  if (selector == "waveguide-2param") return waveguide_family(FamilyKind::WaveguideReal2Param);
  if (selector == "ep2-symmetric") return symmetric_ep2_family();
  throw Error(ErrorCode::InvalidInput, "unknown family '" + std::string(selector) + "'");
}

ComplexMatrix evaluate(const FamilyDef& def, std::span<const Complex> params) {
  if (params.size() != def.parameter_count())
    throw Error(ErrorCode::DimensionMismatch,
                def.name + " takes " + std::to_string(def.parameter_count()) + " parameter(s)");
  switch (def.kind) {
    case FamilyKind::WaveguideABEqual:
      return waveguide({def.gamma, def.v, params[0], params[0]});
    case FamilyKind::WaveguideABOpposite:
      return waveguide({def.gamma, def.v, params[0], -params[0]});
    case FamilyKind::WaveguideReal2Param:
      return waveguide({def.gamma, def.v, params[0], params[1]});
    case FamilyKind::FilePolynomial: {
      const Complex z = params[0];
      ComplexMatrix h = def.matrices.back();
      for (std::size_t k = def.matrices.size() - 1; k-- > 0;) {
        h *= z;
        h += def.matrices[k];
      }
      h.certify_symmetric();
      return h;
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown family kind");
}

ComplexMatrix evaluate(const FamilyDef& def, Complex z) {
  return evaluate(def, std::span<const Complex>(&z, 1));
}

ComplexMatrix derivative_at(const FamilyDef& def, Complex z) {
  switch (def.kind) {
    case FamilyKind::WaveguideABEqual:
      return ComplexMatrix::diagonal({1.0, 0.0, 1.0});
    case FamilyKind::WaveguideABOpposite:
      return ComplexMatrix::diagonal({1.0, 0.0, -1.0});
    case FamilyKind::WaveguideReal2Param:
      throw Error(ErrorCode::DimensionMismatch,
                  "derivative along one complex parameter needs a one-parameter family");
    case FamilyKind::FilePolynomial: {
      const std::size_t d = def.matrices.size() - 1;
      ComplexMatrix h = static_cast<double>(d) * def.matrices[d];
      for (std::size_t k = d; k-- > 1;) {
        h *= z;
        h += static_cast<double>(k) * def.matrices[k];
      }
      h.certify_symmetric();
      return h;
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown family kind");
}

ComplexMatrix ParameterFamily::operator()(std::span<const Complex> params) const {
  require(params.size() == parameter_count, ErrorCode::DimensionMismatch,
          "wrong number of family parameters");
  return map(params);
}

ComplexMatrix ParameterFamily::operator()(Complex z) const {
  return (*this)(std::span<const Complex>(&z, 1));
}

ParameterFamily as_parameter_family(FamilyDef def) {
  ParameterFamily f;
  f.parameter_count = def.parameter_count();
  f.map = [def = std::move(def)](std::span<const Complex> params) { return evaluate(def, params); };
  return f;
}

}  // namespace ep3

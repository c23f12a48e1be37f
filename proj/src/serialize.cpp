#include "ep3/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace ep3 {

namespace {

/// Non-finite doubles become null; JSON has no representation for them.
Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json complex_json(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }

Json vector_json(const ComplexVector& v) {
  Json out = Json::array();
  for (const Complex z : v) out.push_back(complex_json(z));
  return out;
}

Json to_json(const JordanChain& chain) {
  Json out;
  out["lambda0"] = complex_json(chain.lambda0);
  out["length"] = chain.length();
  Json vectors = Json::array();
  for (const auto& v : chain.vectors) vectors.push_back(vector_json(v));
  out["vectors"] = std::move(vectors);
  Json residuals = Json::object();
  for (const auto& [key, value] : chain.residuals) residuals[key] = number(value);
  out["residuals"] = std::move(residuals);
  out["max_residual"] = number(chain.max_residual());
  return out;
}

Json to_json(const PuiseuxClass& cls) {
  Json out;
  out["kind"] = std::string(to_string(cls.kind));
  out["ep_order"] = cls.ep_order;
  out["lambda0"] = complex_json(cls.lambda0);
  out["u0_H1_u0"] = complex_json(cls.first_scalar);
  if (cls.ep_order == 3) out["two_u1_H1_u0"] = complex_json(cls.second_scalar);
  switch (cls.kind) {
    case PuiseuxKind::ThirdRoot:
    case PuiseuxKind::SquareRoot:
      out["lambda1"] = complex_json(cls.lambda1);
      break;
    case PuiseuxKind::SquareRootPlusTaylor:
      out["lambda1_sqrt"] = complex_json(cls.lambda1);
      out["lambda1_taylor"] = complex_json(cls.lambda1_taylor);
      break;
    default:
      break;
  }
  Json phases = Json::array();
  for (const Complex w : cls.branch_phases) phases.push_back(complex_json(w));
  out["branch_phases"] = std::move(phases);
  if (cls.correction) out["G_inv_H1_u0"] = vector_json(*cls.correction);
  return out;
}

Json to_json(const LoopReport& report) {
  const MonodromySummary summary = monodromy_summary(report);
  Json out;
  out["steps_per_cycle"] = report.steps_per_cycle;
  out["cycles"] = report.cycles;
  out["branches"] = report.branch_count();
  out["permutation"] = report.permutation.front();
  out["permutation_per_cycle"] = report.permutation;
  out["cycle_structure"] = summary.cycle_structure;
  out["orbits"] = summary.orbits;
  out["cycles_to_return"] = report.cycles_to_return;
  out["has_vectors"] = report.has_vectors;
  if (report.has_vectors) {
    out["signs"] = report.signs.front();
    out["signs_per_cycle"] = report.signs;
    out["cycles_to_return_with_phase"] = report.cycles_to_return_with_phase;
    out["phases"] = report.phases;
    out["phase_per_orbit"] = summary.phase_per_orbit;
    out["transport_phases"] = report.transport_phases;
  }
  Json crossings = Json::array();
  for (const auto& c : report.crossings) {
    Json j;
    j["branch"] = c.branch;
    j["phi1"] = c.phi1;
    j["phi2"] = c.phi2;
    j["point"] = complex_json(c.point);
    crossings.push_back(std::move(j));
  }
  out["crossings"] = std::move(crossings);
  out["refinements"] = report.refinements;
  return out;
}

Json to_json(const ExponentFit& fit) {
  Json out;
  out["radii"] = fit.radii;
  Json groups = Json::array();
  for (const auto& g : fit.groups) {
    Json j;
    j["branch_count"] = g.branch_count;
    j["slope"] = number(g.fit.slope);
    j["constant"] = g.fit.constant;
    j["points_used"] = g.fit.points_used;
    j["mean_deviation"] = g.mean_deviation;
    groups.push_back(std::move(j));
  }
  out["groups"] = std::move(groups);
  return out;
}

Json to_json(const EPSearchResult& result) {
  Json out;
  out["lambda0"] = complex_json(result.lambda0);
  Json params = Json::array();
  for (const Complex p : result.params) params.push_back(complex_json(p));
  out["params"] = std::move(params);
  out["residual"] = number(result.residual);
  out["verified_order"] = result.verified_order;
  out["iterations"] = result.iterations;
  out["next_derivative"] = number(result.next_derivative);
  return out;
}

Json error_json(const Error& error) {
  Json out;
  out["error"] = std::string(to_string(error.code()));
  out["message"] = error.what();
  return out;
}

void write_loop_csv(std::ostream& out, const LoopReport& report) {
  out << "cycle,step,phi,branch,re_lambda,im_lambda\n";
  for (std::size_t s = 0; s < report.samples.size(); ++s) {
    const auto& sample = report.samples[s];
    const std::size_t cycle = s / static_cast<std::size_t>(report.steps_per_cycle);
    const std::size_t step = s % static_cast<std::size_t>(report.steps_per_cycle);
    for (std::size_t b = 0; b < sample.values.size(); ++b)
      out << cycle << ',' << step << ',' << format_double(sample.phi) << ',' << b << ','
          << format_double(sample.values[b].real()) << ',' << format_double(sample.values[b].imag())
          << '\n';
  }
}

}  // namespace ep3

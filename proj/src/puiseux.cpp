#include "ep3/puiseux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ep3/parallel.hpp"
#include "ep3/tracking.hpp"

namespace ep3 {

namespace {

Complex bilinear(const ComplexVector& a, const ComplexMatrix& m, const ComplexVector& b) {
  return c_dot(a, m * b);
}

std::vector<Complex> unit_roots(int n) {
  std::vector<Complex> out;
  for (int k = 0; k < n; ++k)
    out.push_back(2 * k == n ? Complex{-1.0, 0.0} : std::polar(1.0, 2.0 * std::numbers::pi * k / n));
  return out;
}

void check_pair(const LinearFamily& family, const JordanChain& chain, int length) {
  require(chain.length() == length, ErrorCode::InvalidInput,
          "classification needs a chain of length " + std::to_string(length));
  require(family.h0.size() == family.h1.size() && chain.vectors.front().size() == family.h1.size(),
          ErrorCode::DimensionMismatch, "chain and family dimensions differ");
  require(family.h1.is_symmetric(), ErrorCode::InvalidInput, "H1 must be symmetric");
}

}  // namespace

LinearFamily make_linear_family(ComplexMatrix h0, ComplexMatrix h1) {
  validate_matrix(h0);
  validate_matrix(h1);
  if (h0.size() != h1.size()) throw Error(ErrorCode::DimensionMismatch, "H0 and H1 differ in size");
  require(h0.certify_symmetric() && h1.certify_symmetric(), ErrorCode::InvalidInput,
          "H0 and H1 must be symmetric");
  return {std::move(h0), std::move(h1)};
}

std::string_view to_string(PuiseuxKind kind) {
  switch (kind) {
    case PuiseuxKind::ThirdRoot: return "ThirdRoot";
    case PuiseuxKind::SquareRootPlusTaylor: return "SquareRootPlusTaylor";
    case PuiseuxKind::SquareRoot: return "SquareRoot";
    case PuiseuxKind::TaylorOnly: return "TaylorOnly";
    case PuiseuxKind::DegenerateOther: return "DegenerateOther";
  }
  return "unknown";
}

Complex principal_root(Complex z, int n) {
  if (z == Complex{}) return {};
  return std::exp(std::log(z) / static_cast<double>(n));
}

PuiseuxClass classify_ep3(const LinearFamily& family, const JordanChain& chain, double tol) {
  check_pair(family, chain, 3);
  const auto& u0 = chain.vectors[0];
  const auto& u1 = chain.vectors[1];
  const auto& u2 = chain.vectors[2];
  const double h1_scale = 1.0 + family.h1.norm();

  PuiseuxClass out;
  out.ep_order = 3;
  out.lambda0 = chain.lambda0;
  out.first_scalar = bilinear(u0, family.h1, u0);
  out.second_scalar = 2.0 * bilinear(u1, family.h1, u0);

  if (std::abs(out.first_scalar) > tol * h1_scale * u0.norm() * u0.norm()) {
    out.kind = PuiseuxKind::ThirdRoot;
    out.lambda1 = principal_root(out.first_scalar, 3);
    out.branch_phases = unit_roots(3);
    return out;
  }
  if (std::abs(out.second_scalar) <= tol * h1_scale * u0.norm() * u1.norm()) {
    out.kind = PuiseuxKind::DegenerateOther;
    return out;
  }

  out.kind = PuiseuxKind::SquareRootPlusTaylor;
  out.lambda1 = principal_root(out.second_scalar, 2);
  out.branch_phases = unit_roots(2);

  ComplexMatrix g = family.h0 - chain.lambda0 * ComplexMatrix::identity(u0.size()) - outer(u2, u2);
  const ComplexVector rhs = family.h1 * u0;
  LinearSolution sol;
  try {
    sol = solve_linear(g, rhs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Singular) throw;
    throw Error(ErrorCode::Singular, "G = H0 - lambda0 - u2 u2^T is singular: inconsistent chain");
  }
  out.lambda1_taylor = bilinear(u0, family.h1, sol.x) / out.second_scalar;
  out.correction = std::move(sol.x);
  return out;
}

PuiseuxClass classify_ep2(const LinearFamily& family, const JordanChain& chain, double tol) {
  check_pair(family, chain, 2);
  const auto& u0 = chain.vectors[0];
  PuiseuxClass out;
  out.ep_order = 2;
  out.lambda0 = chain.lambda0;
  out.first_scalar = bilinear(u0, family.h1, u0);
  if (std::abs(out.first_scalar) <= tol * (1.0 + family.h1.norm()) * u0.norm() * u0.norm()) {
    out.kind = PuiseuxKind::TaylorOnly;
    return out;
  }
  out.kind = PuiseuxKind::SquareRoot;
  out.lambda1 = principal_root(out.first_scalar, 2);
  out.branch_phases = unit_roots(2);
  return out;
}

namespace {

void require_predictable(const PuiseuxClass& cls) {
  require(cls.kind != PuiseuxKind::DegenerateOther && cls.kind != PuiseuxKind::TaylorOnly,
          ErrorCode::InvalidInput,
          std::string("no leading-order coefficients for ") + std::string(to_string(cls.kind)));
}

int fractional_order(const PuiseuxClass& cls) {
  return cls.kind == PuiseuxKind::ThirdRoot ? 3 : 2;
}

}  // namespace

std::vector<Complex> predict_eigenvalues(const PuiseuxClass& cls, Complex z) {
  require_predictable(cls);
  const Complex root = principal_root(z, fractional_order(cls));
  std::vector<Complex> out;
  for (const Complex w : cls.branch_phases) out.push_back(cls.lambda0 + cls.lambda1 * w * root);
  if (cls.kind == PuiseuxKind::SquareRootPlusTaylor)
    out.push_back(cls.lambda0 + cls.lambda1_taylor * z);
  return out;
}

std::vector<ComplexVector> predict_eigenvectors(const PuiseuxClass& cls, const JordanChain& chain,
                                                Complex z) {
  require_predictable(cls);
  require(chain.length() == cls.ep_order, ErrorCode::InvalidInput, "chain length does not match class");
  const auto& u0 = chain.vectors[0];
  const auto& u1 = chain.vectors[1];
  const Complex root = principal_root(z, fractional_order(cls));
  std::vector<ComplexVector> out;
  for (const Complex w : cls.branch_phases) out.push_back(u0 + (cls.lambda1 * w * root) * u1);
  if (cls.kind == PuiseuxKind::SquareRootPlusTaylor) {
    require(cls.correction.has_value(), ErrorCode::InvalidInput, "class lacks the G^-1 H1 u0 vector");
    out.push_back(u0 + z * (cls.lambda1_taylor * u1 - *cls.correction));
  }
  return out;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y, double floor) {
  require(x.size() == y.size(), ErrorCode::LengthMismatch, "fit_loglog: x and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > floor) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  LogLogFit fit;
  fit.points_used = static_cast<int>(pts.size());
  if (pts.size() < 2) {
    fit.constant = true;
    fit.slope = std::numeric_limits<double>::infinity();
    return fit;
  }
  double mx = 0, my = 0;
  for (auto [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0, sxy = 0;
  for (auto [a, b] : pts) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  require(sxx > 0.0, ErrorCode::InvalidInput, "fit_loglog: abscissae must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

namespace {

struct CircleGroups {
  std::vector<std::vector<int>> orbits;
  std::vector<double> mean_deviation;
};

CircleGroups circle_groups(const LinearFamily& family, Complex lambda0, std::size_t multiplicity,
                           double radius, int steps) {
  LoopSpec spec;
  spec.family.parameter_count = 1;
  spec.family.map = [&family](std::span<const Complex> p) {
    ComplexMatrix h = family.h0 + p[0] * family.h1;
    h.certify_symmetric();
    return h;
  };
  spec.path = ComplexCircle{0.0, radius};
  spec.steps_per_cycle = steps;
  spec.cycles = 1;
  spec.track_vectors = false;
  const LoopReport report = track_loop(spec);

  // Branches meeting at lambda0: the `multiplicity` labels closest to it.
  const auto& start = report.samples.front().values;
  std::vector<int> labels(start.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i);
  std::stable_sort(labels.begin(), labels.end(), [&](int a, int b) {
    return std::abs(start[a] - lambda0) < std::abs(start[b] - lambda0);
  });
  labels.resize(multiplicity);
  std::vector<bool> selected(start.size(), false);
  for (int b : labels) selected[b] = true;

  CircleGroups out;
  for (const auto& orbit : permutation_orbits(report.permutation.front())) {
    if (!selected[orbit.front()]) continue;
    for (int b : orbit)
      if (!selected[b])
        throw Error(ErrorCode::InconsistentCycles,
                    "a monodromy cycle mixes branches from lambda0 with distant ones; "
                    "radius " + std::to_string(radius) + " is too large");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s + 1 < report.samples.size(); ++s)
      for (int b : orbit) {
        sum += std::abs(report.samples[s].values[b] - lambda0);
        ++count;
      }
    out.orbits.push_back(orbit);
    out.mean_deviation.push_back(sum / static_cast<double>(count));
  }
  // Largest cycle first, then larger deviation first.
  std::vector<std::size_t> order(out.orbits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.orbits[a].size() != out.orbits[b].size()) return out.orbits[a].size() > out.orbits[b].size();
    return out.mean_deviation[a] > out.mean_deviation[b];
  });
  CircleGroups sorted;
  for (std::size_t i : order) {
    sorted.orbits.push_back(out.orbits[i]);
    sorted.mean_deviation.push_back(out.mean_deviation[i]);
  }
  return sorted;
}

}  // namespace

ExponentFit fit_exponents(const LinearFamily& family, Complex lambda0,
                          std::span<const double> radii, int phases_per_circle) {
  require(!radii.empty(), ErrorCode::InvalidInput, "fit_exponents needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(std::isfinite(radii[i]) && radii[i] >= 1e-8, ErrorCode::InvalidInput,
            "radii must be finite and >= 1e-8");
    require(i == 0 || radii[i] < radii[i - 1], ErrorCode::InvalidInput,
            "radii must be strictly descending");
  }
  require(family.h0.size() == family.h1.size(), ErrorCode::DimensionMismatch,
          "H0 and H1 differ in size");

  const Spectrum s0 = eig(family.h0);
  std::size_t nearest = 0;
  for (std::size_t c = 1; c < s0.clusters.size(); ++c)
    if (std::abs(s0.clusters[c].mean - lambda0) < std::abs(s0.clusters[nearest].mean - lambda0))
      nearest = c;
  const std::size_t multiplicity = s0.clusters[nearest].members.size();

  std::vector<CircleGroups> per_radius(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    per_radius[i] = circle_groups(family, lambda0, multiplicity, radii[i], phases_per_circle);
  });

  const auto structure = [](const CircleGroups& g) {
    std::vector<std::size_t> sizes;
    for (const auto& o : g.orbits) sizes.push_back(o.size());
    return sizes;
  };
  for (std::size_t i = 1; i < per_radius.size(); ++i)
    if (structure(per_radius[i]) != structure(per_radius[0]))
      throw Error(ErrorCode::InconsistentCycles,
                  "cycle structure changes between radius " + std::to_string(radii[0]) +
                      " and " + std::to_string(radii[i]));

  ExponentFit out;
  out.radii.assign(radii.begin(), radii.end());
  const double floor = kResolutionFloor * (1.0 + family.h0.norm());
  for (std::size_t g = 0; g < per_radius[0].orbits.size(); ++g) {
    ExponentGroup group;
    group.branch_count = static_cast<int>(per_radius[0].orbits[g].size());
    for (const auto& r : per_radius) group.mean_deviation.push_back(r.mean_deviation[g]);
    group.fit = fit_loglog(radii, group.mean_deviation, floor);
    out.groups.push_back(std::move(group));
  }
  return out;
}

}  // namespace ep3

#include "ep3/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace ep3 {

double wrap_phase(double phase) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phase, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  if (w > std::numbers::pi) w -= two_pi;
  return w;
}

double phase_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

std::vector<std::vector<int>> permutation_orbits(const std::vector<int>& perm) {
  std::vector<std::vector<int>> orbits;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t start = 0; start < perm.size(); ++start) {
    if (seen[start]) continue;
    std::vector<int> orbit;
    for (int b = static_cast<int>(start); !seen[static_cast<std::size_t>(b)]; b = perm[static_cast<std::size_t>(b)]) {
      seen[static_cast<std::size_t>(b)] = true;
      orbit.push_back(b);
    }
    orbits.push_back(std::move(orbit));
  }
  std::stable_sort(orbits.begin(), orbits.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return orbits;
}

namespace {

constexpr int kMaxRefinementDepth = 12;

struct Frame {
  std::vector<Complex> values;
  std::vector<std::optional<ComplexVector>> vectors;
};

struct Assignment {
  std::vector<std::size_t> order;  // order[b] = index in the new frame
  double cost = 0.0;
  double runner_up = std::numeric_limits<double>::infinity();
  double motion = 0.0;
};

Assignment best_assignment(const std::vector<Complex>& prev, const std::vector<Complex>& next) {
  const std::size_t n = prev.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  Assignment a;
  a.cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t b = 0; b < n; ++b) cost += std::abs(next[p[b]] - prev[b]);
    if (cost < a.cost) {
      a.runner_up = a.cost;
      a.cost = cost;
      a.order = p;
    } else if (cost < a.runner_up) {
      a.runner_up = cost;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  for (std::size_t b = 0; b < n; ++b) a.motion = std::max(a.motion, std::abs(next[a.order[b]] - prev[b]));
  return a;
}

/// exp(i 2 pi t / steps), exact at quarter turns so that loops whose
/// geometry puts the EP on a quarter-turn sample really hit it.
Complex unit_phase(double t, int steps) {
  const double r = std::fmod(t, static_cast<double>(steps));
  const double reduced = r < 0 ? r + steps : r;
  const double quarter = reduced * 4.0 / steps;
  if (quarter == std::floor(quarter)) {
    switch (static_cast<int>(quarter)) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
      default: break;
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * reduced / steps);
}

class Tracker {
 public:
  explicit Tracker(const LoopSpec& spec) : spec_(spec) {
    vectors_ = spec.track_vectors && std::holds_alternative<ComplexCircle>(spec.path);
  }

  bool tracks_vectors() const { return vectors_; }
  int refinements() const { return refinements_; }
  const std::vector<double>& transport() const { return transport_; }

  ComplexMatrix matrix_at(double t) const {
    const Complex w = unit_phase(spec_.reversed ? -t : t, spec_.steps_per_cycle);
    if (const auto* c = std::get_if<ComplexCircle>(&spec_.path)) {
      const Complex z = c->center + c->radius * w;
      return spec_.family(z);
    }
    const double r = std::get<RealEllipse>(spec_.path).radius;
    const Complex params[2] = {r * w.real(), r * w.imag()};
    return spec_.family(std::span<const Complex>(params, 2));
  }

  Frame diagonalize(double t) const {
    const ComplexMatrix h = matrix_at(t);
    const Spectrum s = eig(h);
    const double scale = 1.0 + h.norm();
    bool merged = false;
    for (const auto& c : s.clusters) merged = merged || c.members.size() > 1;
    if (s.any_defective() || merged || s.min_gap() < 1e-9 * scale)
      throw Error(ErrorCode::EPOnPath,
                  "loop passes through a degeneracy at phi = " +
                      std::to_string(2.0 * std::numbers::pi * t / spec_.steps_per_cycle));
    Frame f;
    f.values = s.values;
    f.vectors.resize(s.values.size());
    if (vectors_)
      for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.vectors[i] && !s.self_orthogonal[i]) f.vectors[i] = s.vectors[i];
    return f;
  }

  Frame start() {
    Frame f = diagonalize(0.0);
    const std::size_t n = f.values.size();
    require(n <= kMaxTrackingDimension, ErrorCode::InvalidInput,
            "tracking is limited to dimension " + std::to_string(kMaxTrackingDimension));
    last_.assign(n, std::nullopt);
    absent_.assign(n, 0);
    transport_.assign(n, 0.0);
    if (vectors_)
      for (std::size_t b = 0; b < n; ++b) {
        if (!f.vectors[b])
          throw Error(ErrorCode::MatchingAmbiguous, "eigenvector self-orthogonal at the loop start");
        last_[b] = f.vectors[b];
      }
    return f;
  }

  Frame advance(const Frame& prev, double ta, double tb, int depth = 0) {
    Frame raw = diagonalize(tb);
    const Assignment a = best_assignment(prev.values, raw.values);
    if (a.runner_up - a.cost < 2.0 * a.motion) {
      if (depth >= kMaxRefinementDepth)
        throw Error(ErrorCode::MatchingAmbiguous,
                    "branch assignment still ambiguous after " + std::to_string(depth) +
                        " bisections near phi = " +
                        std::to_string(2.0 * std::numbers::pi * tb / spec_.steps_per_cycle));
      ++refinements_;
      const double mid = 0.5 * (ta + tb);
      const Frame half = advance(prev, ta, mid, depth + 1);
      return advance(half, mid, tb, depth + 1);
    }
    Frame next;
    for (std::size_t b = 0; b < a.order.size(); ++b) {
      next.values.push_back(raw.values[a.order[b]]);
      next.vectors.push_back(std::move(raw.vectors[a.order[b]]));
    }
    if (vectors_) align(next);
    return next;
  }

 private:
  void align(Frame& f) {
    for (std::size_t b = 0; b < f.vectors.size(); ++b) {
      auto& v = f.vectors[b];
      if (!v) {
        if (++absent_[b] > 2)
          throw Error(ErrorCode::MatchingAmbiguous,
                      "eigenvector of branch " + std::to_string(b) +
                          " self-orthogonal on more than 2 consecutive samples");
        continue;
      }
      Complex overlap = c_dot(*last_[b], *v);
      if (overlap.real() < 0.0) {
        *v *= -1.0;
        overlap = -overlap;
      }
      if (absent_[b] == 0) transport_[b] += std::arg(overlap);
      absent_[b] = 0;
      last_[b] = v;
    }
  }

  const LoopSpec& spec_;
  bool vectors_ = false;
  int refinements_ = 0;
  std::vector<std::optional<ComplexVector>> last_;
  std::vector<int> absent_;
  std::vector<double> transport_;
};

int lcm_all(const std::vector<int>& values) {
  int out = 1;
  for (int v : values) out = std::lcm(out, v);
  return out;
}

}  // namespace

std::vector<std::size_t> match_branches(const std::vector<Complex>& prev,
                                        const std::vector<Complex>& next) {
  require(prev.size() == next.size(), ErrorCode::LengthMismatch, "branch counts differ");
  require(prev.size() <= kMaxTrackingDimension, ErrorCode::InvalidInput,
          "branch matching is limited to dimension " + std::to_string(kMaxTrackingDimension));
  return best_assignment(prev, next).order;
}

LoopReport track_loop(const LoopSpec& spec) {
  require(static_cast<bool>(spec.family.map), ErrorCode::InvalidInput, "loop family is empty");
  require(spec.steps_per_cycle >= 64 && spec.steps_per_cycle % 2 == 0, ErrorCode::InvalidInput,
          "steps_per_cycle must be even and >= 64");
  require(spec.cycles >= 1, ErrorCode::InvalidInput, "cycles must be >= 1");
  if (const auto* c = std::get_if<ComplexCircle>(&spec.path)) {
    require(std::isfinite(c->radius) && c->radius > 0.0, ErrorCode::InvalidInput,
            "loop radius must be positive");
    require(spec.family.parameter_count == 1, ErrorCode::DimensionMismatch,
            "a complex circle needs a one-parameter family");
  } else {
    const double r = std::get<RealEllipse>(spec.path).radius;
    require(std::isfinite(r) && r > 0.0, ErrorCode::InvalidInput, "loop radius must be positive");
    require(spec.family.parameter_count == 2, ErrorCode::DimensionMismatch,
            "a real (a, b) loop needs a two-parameter family");
  }

  Tracker tracker(spec);
  LoopReport report;
  report.steps_per_cycle = spec.steps_per_cycle;
  report.cycles = spec.cycles;
  report.has_vectors = tracker.tracks_vectors();

  const int total = spec.steps_per_cycle * spec.cycles;
  report.samples.reserve(static_cast<std::size_t>(total) + 1);
  Frame frame = tracker.start();
  const double dphi = 2.0 * std::numbers::pi / spec.steps_per_cycle;
  report.samples.push_back({0.0, frame.values, frame.vectors});
  for (int j = 1; j <= total; ++j) {
    frame = tracker.advance(frame, j - 1, j);
    report.samples.push_back({j * dphi, frame.values, frame.vectors});
  }
  report.refinements = tracker.refinements();

  const auto& first = report.samples.front();
  const std::size_t n = first.values.size();
  for (int k = 1; k <= spec.cycles; ++k) {
    const auto& s = report.samples[static_cast<std::size_t>(k * spec.steps_per_cycle)];
    const Assignment a = best_assignment(s.values, first.values);
    std::vector<int> perm(n);
    std::vector<int> signs(n, 1);
    for (std::size_t b = 0; b < n; ++b) {
      perm[b] = static_cast<int>(a.order[b]);
      if (report.has_vectors) {
        const auto& u = s.vectors[b];
        const auto& u0 = first.vectors[a.order[b]];
        if (!u || !u0)
          throw Error(ErrorCode::MatchingAmbiguous, "eigenvector absent at a cycle boundary");
        signs[b] = c_dot(*u, *u0).real() >= 0.0 ? 1 : -1;
      }
    }
    report.permutation.push_back(std::move(perm));
    report.signs.push_back(std::move(signs));
  }

  const auto orbits = permutation_orbits(report.permutation.front());
  std::vector<int> lengths;
  std::vector<int> phased_lengths;
  if (report.has_vectors) {
    const auto& end = report.samples[static_cast<std::size_t>(spec.steps_per_cycle)];
    report.phases.assign(n, 0.0);
    for (const auto& orbit : orbits) {
      Complex product = 1.0;
      int sign = 1;
      for (int b : orbit) {
        const auto bi = static_cast<std::size_t>(b);
        product *= c_dot(*end.vectors[bi], *first.vectors[static_cast<std::size_t>(report.permutation[0][bi])]);
        sign *= report.signs[0][bi];
      }
      for (int b : orbit) report.phases[static_cast<std::size_t>(b)] = wrap_phase(std::arg(product));
      lengths.push_back(static_cast<int>(orbit.size()));
      phased_lengths.push_back(static_cast<int>(orbit.size()) * (sign > 0 ? 1 : 2));
    }
    report.transport_phases = tracker.transport();
  } else {
    for (const auto& orbit : orbits) lengths.push_back(static_cast<int>(orbit.size()));
    phased_lengths = lengths;
  }
  report.cycles_to_return = lcm_all(lengths);
  report.cycles_to_return_with_phase = lcm_all(phased_lengths);
  report.crossings = detect_self_crossings(report);
  return report;
}

namespace {

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

}  // namespace

std::vector<PolylineCrossing> polyline_self_crossings(std::span<const Complex> points) {
  std::vector<PolylineCrossing> out;
  if (points.size() < 4) return out;
  double extent = 0.0;
  for (const Complex p : points) extent = std::max(extent, std::abs(p));
  const double tiny = 1e-12 * (1.0 + extent);
  const bool closed = std::abs(points.back() - points.front()) <= tiny;
  const std::size_t segments = points.size() - 1;

  for (std::size_t i = 0; i < segments; ++i) {
    const Complex p = points[i];
    const Complex r = points[i + 1] - p;
    if (std::abs(r) <= tiny) continue;
    for (std::size_t j = i + 2; j < segments; ++j) {
      if (closed && i == 0 && j == segments - 1) continue;
      const Complex q = points[j];
      const Complex s = points[j + 1] - q;
      if (std::abs(s) <= tiny) continue;
      const double denom = cross(r, s);
      if (std::abs(denom) <= 1e-14 * std::abs(r) * std::abs(s)) continue;
      const double t = cross(q - p, s) / denom;
      const double u = cross(q - p, r) / denom;
      if (t >= 0.0 && t < 1.0 && u >= 0.0 && u < 1.0) out.push_back({i, j, t, u, p + t * r});
    }
  }
  return out;
}

std::vector<Crossing> detect_self_crossings(const LoopReport& report) {
  std::vector<Crossing> out;
  if (report.samples.empty() || report.permutation.empty()) return out;
  const auto& perm = report.permutation.front();
  const double dphi = 2.0 * std::numbers::pi / report.steps_per_cycle;
  for (const auto& orbit : permutation_orbits(perm)) {
    const int cycles = std::min(static_cast<int>(orbit.size()), report.cycles);
    const std::size_t count = static_cast<std::size_t>(cycles * report.steps_per_cycle) + 1;
    for (int b : orbit) {
      std::vector<Complex> line;
      line.reserve(count);
      for (std::size_t s = 0; s < count; ++s) line.push_back(report.samples[s].values[static_cast<std::size_t>(b)]);
      for (const auto& c : polyline_self_crossings(line))
        out.push_back({b, (static_cast<double>(c.segment1) + c.t1) * dphi,
                       (static_cast<double>(c.segment2) + c.t2) * dphi, c.point});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) {
    return a.branch != b.branch ? a.branch < b.branch : a.phi1 < b.phi1;
  });
  return out;
}

MonodromySummary monodromy_summary(const LoopReport& report) {
  MonodromySummary out;
  require(!report.permutation.empty(), ErrorCode::InvalidInput, "loop report has no cycles");
  out.orbits = permutation_orbits(report.permutation.front());
  for (const auto& orbit : out.orbits) {
    out.cycle_structure.push_back(static_cast<int>(orbit.size()));
    if (!report.phases.empty()) out.phase_per_orbit.push_back(report.phases[static_cast<std::size_t>(orbit.front())]);
  }
  return out;
}

}  // namespace ep3

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ep3/linalg.hpp"
#include "ep3/models.hpp"
#include "support.hpp"

using namespace ep3;
using ep3::test::oracle_eig;
using ep3::test::random_symmetric;

namespace {

const Complex I{0.0, 1.0};

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("char_poly examples") {
  SUBCASE("identity") {
    const auto p = char_poly(ComplexMatrix::identity(2));
    REQUIRE(p.degree() == 2);
    CHECK(close(p.coeffs()[0], 1.0, 1e-15));
    CHECK(close(p.coeffs()[1], -2.0, 1e-15));
    CHECK(close(p.coeffs()[2], 1.0, 0.0));
  }
  SUBCASE("waveguide at the EP3 is lambda^3") {
    // Cofactor expansion by hand:
    // (lambda + 2i)(lambda^2 - 2i lambda - 2) - 2 (lambda - 2i) = lambda^3.
    const auto p = char_poly(test::waveguide_ep3());
    REQUIRE(p.degree() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(p.coeffs()[k]) <= 1e-12);
    CHECK(p.coeffs()[3] == Complex{1.0});
  }
  SUBCASE("nilpotent") {
    ComplexMatrix m(2);
    m(0, 1) = 1.0;
    const auto p = char_poly(m);
    CHECK(std::abs(p.coeffs()[0]) == 0.0);
    CHECK(std::abs(p.coeffs()[1]) == 0.0);
  }
}

TEST_CASE("char_poly rejects invalid matrices") {
  ComplexMatrix m(2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(char_poly(m), Error);
  CHECK_THROWS_AS(char_poly(ComplexMatrix(kMaxDimension + 1)), Error);
}

TEST_CASE("poly_roots examples") {
  SUBCASE("lambda^2 - 1") {
    const auto r = poly_roots(Polynomial({-1.0, 0.0, 1.0}));
    REQUIRE(r.size() == 2);
    CHECK(close(r[0], -1.0, 1e-14));
    CHECK(close(r[1], 1.0, 1e-14));
  }
  SUBCASE("triple root at zero") {
    const auto r = poly_roots(Polynomial({0.0, 0.0, 0.0, 1.0}));
    REQUIRE(r.size() == 3);
    for (auto x : r) CHECK(x == Complex{});
  }
  SUBCASE("cube roots of 1e-3") {
    const auto r = poly_roots(Polynomial({-1e-3, 0.0, 0.0, 1.0}));
    REQUIRE(r.size() == 3);
    for (auto x : r) CHECK(std::abs(std::abs(x) - 0.1) <= 1e-14);
    for (auto x : r) CHECK(std::abs(x * x * x - 1e-3) <= 1e-15);
    CHECK(std::abs(r[0] - r[1]) > 0.1);
    CHECK(std::abs(r[1] - r[2]) > 0.1);
    CHECK(std::abs(r[0] - r[2]) > 0.1);
  }
  SUBCASE("deterministic") {
    const Polynomial p({Complex{0.3, -1.0}, 2.0, Complex{0.0, 1.5}, -0.7, 1.0});
    CHECK(poly_roots(p) == poly_roots(p));
  }
}

TEST_CASE("null_space examples") {
  SUBCASE("nilpotent 2x2") {
    ComplexMatrix m(2);
    m(0, 1) = 1.0;
    const auto k = null_space(m);
    REQUIRE(k.size() == 1);
    CHECK(std::abs(std::abs(k[0][0]) - 1.0) <= 1e-14);
    CHECK(std::abs(k[0][1]) <= 1e-14);
  }
  SUBCASE("zero matrix") { CHECK(null_space(ComplexMatrix(3)).size() == 3); }
  SUBCASE("waveguide EP3 kernel") {
    // Elimination by hand: row 1 gives u2 = i sqrt2 u1, row 3 gives u3 = -u1.
    const auto k = null_space(test::waveguide_ep3());
    REQUIRE(k.size() == 1);
    const ComplexVector expected{1.0, I * std::sqrt(2.0), -1.0};
    CHECK(test::angle_sin(k[0], expected) <= 1e-7);
  }
}

TEST_CASE("solve_linear examples") {
  const ComplexVector b{Complex{1.0, 2.0}, -3.0};
  CHECK(solve_linear(ComplexMatrix::identity(2), b).x == b);
  const auto sol = solve_linear(ComplexMatrix::diagonal({2.0, I}), ComplexVector{2.0, I});
  CHECK(close(sol.x[0], 1.0, 1e-15));
  CHECK(close(sol.x[1], 1.0, 1e-15));
  CHECK(sol.condition >= 1.0);
  ComplexMatrix singular(2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(solve_linear(singular, b), Error);
}

TEST_CASE("c_dot examples") {
  CHECK(c_dot(ComplexVector{1.0, I}, ComplexVector{1.0, I}) == Complex{});
  CHECK(c_dot(ComplexVector{1.0, 0.0}, ComplexVector{0.0, 1.0}) == Complex{});
  const ComplexVector u0{1.0, I * std::sqrt(2.0), -1.0};
  CHECK(std::abs(c_dot(u0, u0)) <= 1e-15);
  CHECK(h_dot(ComplexVector{1.0, I}, ComplexVector{1.0, I}) == Complex{2.0});
  CHECK_THROWS_AS(c_dot(ComplexVector{1.0}, ComplexVector{1.0, 2.0}), Error);
}

TEST_CASE("eig examples") {
  SUBCASE("diag(1,2,3)") {
    const auto s = eig(ComplexMatrix::diagonal({1.0, 2.0, 3.0}));
    REQUIRE(s.values.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(close(s.values[k], k + 1.0, 1e-13));
      REQUIRE(s.vectors[k].has_value());
      CHECK(std::abs(std::abs((*s.vectors[k])[k]) - 1.0) <= 1e-13);
    }
    CHECK_FALSE(s.any_defective());
  }
  SUBCASE("waveguide EP3") {
    const auto s = eig(test::waveguide_ep3());
    REQUIRE(s.clusters.size() == 1);
    CHECK(s.clusters[0].members.size() == 3);
    CHECK(s.clusters[0].kernel_dimension == 1);
    CHECK(s.clusters[0].defective);
  }
  SUBCASE("symmetric EP2") {
    const auto s = eig(test::ep2_matrix());
    REQUIRE(s.clusters.size() == 1);
    CHECK(s.clusters[0].members.size() == 2);
    CHECK(s.clusters[0].kernel_dimension == 1);
    CHECK(std::abs(s.clusters[0].mean) <= 1e-8);
  }
}

TEST_CASE("eig properties on random symmetric matrices") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> dim(2, 6);
  int c_orthogonality_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(dim(rng));
    const ComplexMatrix m = random_symmetric(rng, n);
    const double scale = 1.0 + m.norm();
    const auto s = eig(m);

    Complex sum;
    for (auto v : s.values) sum += v;
    CHECK(std::abs(sum - m.trace()) <= 1e-9 * scale);

    for (std::size_t k = 0; k < n; ++k) {
      REQUIRE(s.vectors[k].has_value());
      const auto& u = *s.vectors[k];
      CHECK((m * u - s.values[k] * u).norm() <= 1e-8 * scale * u.norm());
    }

    // Independent oracle.
    CHECK(test::multiset_distance(s.values, oracle_eig(m).values) <= 1e-8 * scale);
    // poly_roots o char_poly versus eig.
    CHECK(test::multiset_distance(s.values, poly_roots(char_poly(m))) <= 1e-8 * scale);

    if (s.min_gap() > 1e-3) {
      ++c_orthogonality_checked;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (s.self_orthogonal[i] || s.self_orthogonal[j]) continue;
          const Complex g = c_dot(*s.vectors[i], *s.vectors[j]);
          CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-6);
        }
    }
    CHECK(null_space(m).size() + static_cast<std::size_t>(numerical_rank(m)) == n);
  }
  CHECK(c_orthogonality_checked > 900);
}

TEST_CASE("null_space and rank on rank-deficient products") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const ComplexMatrix a = random_symmetric(rng, 4);
    // Zero out a random number of columns to force a kernel.
    ComplexMatrix m = a;
    const int zeros = trial % 4;
    for (int c = 0; c < zeros; ++c)
      for (std::size_t r = 0; r < 4; ++r) m(r, static_cast<std::size_t>(c)) = 0.0;
    const auto k = null_space(m);
    CHECK(static_cast<int>(k.size()) >= zeros);
    CHECK(k.size() + static_cast<std::size_t>(numerical_rank(m)) == 4);
    for (const auto& v : k) CHECK((m * v).norm() <= 1e-10 * (1.0 + m.norm()));
  }
}

TEST_CASE("eig is bitwise deterministic") {
  std::mt19937_64 rng(99);
  const ComplexMatrix m = random_symmetric(rng, 5);
  const auto a = eig(m);
  const auto b = eig(m);
  CHECK(a.values == b.values);
  for (std::size_t k = 0; k < a.vectors.size(); ++k) CHECK(*a.vectors[k] == *b.vectors[k]);
}

TEST_CASE("min_norm_solve returns the minimum-norm solution") {
  ComplexMatrix m(2);
  m(0, 0) = 1.0;
  m(0, 1) = 1.0;
  const auto x = min_norm_solve(m, ComplexVector{2.0, 0.0});
  CHECK(close(x[0], 1.0, 1e-14));
  CHECK(close(x[1], 1.0, 1e-14));
}

TEST_CASE("a slightly split diabolic pair is not defective") {
  // Clustered at 1e-4 but (H - mean) has both singular values at the split.
  auto m = ComplexMatrix::diagonal({3e-7, -3e-7});
  m.certify_symmetric();
  EigOptions loose;
  loose.cluster_tol = 1e-4;
  const auto s = eig(m, loose);
  REQUIRE(s.clusters.size() == 1);
  CHECK(s.clusters[0].kernel_dimension == 2);
  CHECK_FALSE(s.clusters[0].defective);
  // A split EP2 stays defective: [[i, 1], [1, -i]] + 1e-10 diag(1, -1).
  auto ep = test::ep2_matrix() + 1e-10 * ComplexMatrix::diagonal({1.0, -1.0});
  ep.certify_symmetric();
  const auto t = eig(ep, loose);
  REQUIRE(t.clusters.size() == 1);
  CHECK(t.clusters[0].defective);
}

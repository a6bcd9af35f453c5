#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rmtk/ensemble.hpp"
#include "rmtk/errors.hpp"
#include "rmtk/linalg.hpp"

using namespace rmtk;

namespace {

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(SeedSpec{seed, 0});
  ComplexMatrix a(rows, cols);
  for (auto& z : a.entries()) z = draw(ComplexGaussian{1.0}, rng);
  return a;
}

// Product of n Householder reflectors I - 2 w w^dagger / |w|^2 with Gaussian w.
ComplexMatrix random_unitary(std::size_t n, std::uint64_t seed) {
  ComplexMatrix u = ComplexMatrix::identity(n);
  Rng rng(SeedSpec{seed, 1});
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<cplx> w(n);
    for (auto& z : w) z = draw(ComplexGaussian{1.0}, rng);
    const double w2 = norm2_squared(w);
    ComplexMatrix h = ComplexMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) -= 2.0 * w[i] * std::conj(w[j]) / w2;
    u = u * h;
  }
  return u;
}

bool lex_less(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

std::vector<cplx> sorted_eigs(const ComplexMatrix& a) {
  auto v = eigenvalues(a).values;
  std::sort(v.begin(), v.end(), lex_less);
  return v;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("singular values of simple matrices") {
    auto sv = [](const ComplexMatrix& a) { return singular_values(a).real_values(); };
    for (double s : sv(ComplexMatrix::identity(3))) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    const std::vector<cplx> d{3.0, 2.0, 1.0};
    const auto s = sv(ComplexMatrix::diagonal(d));
    CHECK(s[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s[2] == doctest::Approx(1.0).epsilon(1e-14));
    const auto j = sv(ComplexMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}));
    CHECK(j[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(j[1] == doctest::Approx(0.0));
  }

  TEST_CASE("smallest singular value") {
    CHECK(smallest_singular_value(ComplexMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-14));
    ComplexMatrix a = ginibre(6, 6, 2);
    for (std::size_t j = 0; j < 6; ++j) a(2, j) = 0.0;
    CHECK(smallest_singular_value(a) <= 1e-12 * largest_singular_value(a));
  }

  TEST_CASE("5x5 four-point matrix against the characteristic polynomial oracle") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
      const ComplexMatrix a = sample_matrix(iid_ensemble(5, FourPointUniform{}), SeedSpec{seed, 0});
      const auto want = oracle::charpoly_singular_values(a);
      const auto got = singular_values(a).real_values();
      REQUIRE(got.size() == 5);
      for (std::size_t k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-8));
      CHECK(smallest_singular_value(a) == doctest::Approx(want.back()).epsilon(1e-8));
    }
  }

  TEST_CASE("rectangular inputs") {
    const ComplexMatrix a = ginibre(3, 5, 4);
    const auto s_wide = singular_values(a).real_values();
    const auto s_tall = singular_values(a.adjoint()).real_values();
    REQUIRE(s_wide.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s_wide[k] == doctest::Approx(s_tall[k]).epsilon(1e-12));
  }

  TEST_CASE("unitary invariance of singular values") {
    for (std::size_t n : {2u, 5u, 9u, 16u}) {
      const ComplexMatrix a = ginibre(n, n, 10 + n);
      const ComplexMatrix b = random_unitary(n, 20 + n) * a * random_unitary(n, 30 + n);
      const auto sa = singular_values(a).real_values();
      const auto sb = singular_values(b).real_values();
      for (std::size_t k = 0; k < n; ++k) CHECK(sb[k] == doctest::Approx(sa[k]).epsilon(1e-8));
    }
  }

  TEST_CASE("sum of squared singular values equals the Hilbert-Schmidt norm squared") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed;
      const ComplexMatrix a = ginibre(n, n + seed % 3, 40 + seed);
      double s2 = 0.0;
      for (double s : singular_values(a).real_values()) s2 += s * s;
      CHECK(s2 == doctest::Approx(norm2_squared(a.entries())).epsilon(1e-8));
      const Norms nm = operator_and_hs_norms(a);
      CHECK(nm.hs * nm.hs == doctest::Approx(s2).epsilon(1e-8));
    }
  }

  TEST_CASE("operator and HS norms") {
    const Norms id = operator_and_hs_norms(ComplexMatrix::identity(4));
    CHECK(id.s1 == doctest::Approx(1.0));
    CHECK(id.hs == doctest::Approx(2.0));
    std::vector<cplx> u{cplx(0.6, 0), cplx(0, 0.8)}, v{cplx(0.5, 0.5), cplx(0.5, -0.5)};
    ComplexMatrix r(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) r(i, j) = u[i] * std::conj(v[j]);
    const Norms nr = operator_and_hs_norms(r);
    CHECK(nr.s1 == doctest::Approx(1.0));
    CHECK(nr.hs == doctest::Approx(1.0));
  }

  TEST_CASE("Hermitian eigenvalues") {
    const ComplexMatrix g = ginibre(6, 6, 5);
    const ComplexMatrix h = g * g.adjoint();
    const auto ev = hermitian_eigenvalues(h);
    const auto sv = singular_values(g).real_values();
    for (std::size_t k = 0; k < 6; ++k) CHECK(ev[k] == doctest::Approx(sv[5 - k] * sv[5 - k]).epsilon(1e-10));

    const auto t = tridiagonal_eigenvalues({2.0, 2.0, 2.0}, {-1.0, -1.0});
    const double r = std::sqrt(2.0);
    CHECK(t[0] == doctest::Approx(2.0 - r));
    CHECK(t[1] == doctest::Approx(2.0));
    CHECK(t[2] == doctest::Approx(2.0 + r));
    CHECK_THROWS_AS(tridiagonal_eigenvalues({1.0, 2.0}, {}), ValidationError);
  }

  TEST_CASE("general eigenvalues") {
    SUBCASE("upper triangular") {
      const ComplexMatrix a = ComplexMatrix::from_rows({{2.0, 5.0, cplx(1, 1)}, {0.0, cplx(1, 1), 3.0}, {0.0, 0.0, -3.0}});
      const auto e = sorted_eigs(a);
      CHECK(std::abs(e[0] - cplx(-3, 0)) < 1e-12);
      CHECK(std::abs(e[1] - cplx(1, 1)) < 1e-12);
      CHECK(std::abs(e[2] - cplx(2, 0)) < 1e-12);
    }
    SUBCASE("identity") {
      for (const auto& z : eigenvalues(ComplexMatrix::identity(5)).values) CHECK(std::abs(z - 1.0) < 1e-14);
    }
    SUBCASE("companion matrix of x^3 - 1") {
      const ComplexMatrix c = ComplexMatrix::from_rows({{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
      const auto e = eigenvalues(c).values;
      REQUIRE(e.size() == 3);
      for (int k = 0; k < 3; ++k) {
        const cplx root = std::polar(1.0, 2.0 * std::numbers::pi * k / 3.0);
        const bool found = std::any_of(e.begin(), e.end(), [&](cplx z) { return std::abs(z - root) < 1e-12; });
        CHECK(found);
      }
    }
    SUBCASE("trace and determinant") {
      const ComplexMatrix a = ginibre(12, 12, 6);
      cplx tr = 0.0, sum = 0.0;
      double logdet = 0.0;
      for (std::size_t i = 0; i < 12; ++i) tr += a(i, i);
      for (const auto& z : eigenvalues(a).values) {
        sum += z;
        logdet += std::log(std::abs(z));
      }
      CHECK(std::abs(sum - tr) < 1e-10);
      CHECK(logdet == doctest::Approx(log_abs_det(a)).epsilon(1e-10));
    }
  }

  TEST_CASE("eigenvalues are invariant under permutation similarity") {
    const std::size_t n = 10;
    const ComplexMatrix a = ginibre(n, n, 8);
    std::vector<std::size_t> perm{3, 7, 0, 9, 1, 5, 2, 8, 6, 4};
    ComplexMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
    const auto e1 = sorted_eigs(a);
    const auto e2 = sorted_eigs(p * a * p.transpose());
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(e1[k] - e2[k]) < 1e-8);
  }

  TEST_CASE("distance to a subspace") {
    const std::vector<cplx> e1{1.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0};
    CHECK(dist_to_subspace(e2, std::vector<std::vector<cplx>>{e1}) == doctest::Approx(1.0));
    const std::vector<cplx> in_span{cplx(2, 1), cplx(0, -3), 0.0};
    CHECK(dist_to_subspace(in_span, std::vector<std::vector<cplx>>{e1, e2}) <= 1e-10 * norm2(in_span));

    const ComplexMatrix g = ginibre(5, 6, 12);
    std::vector<std::vector<cplx>> span;
    for (std::size_t k = 0; k < 4; ++k) span.emplace_back(g.row(k).begin(), g.row(k).end());
    const std::vector<cplx> x(g.row(4).begin(), g.row(4).end());
    CHECK(dist_to_subspace(x, span) == doctest::Approx(oracle::normal_equations_distance(x, span)).epsilon(1e-8));
  }

  TEST_CASE("distance is nonincreasing as the span grows") {
    const ComplexMatrix g = ginibre(9, 8, 13);
    const std::vector<cplx> x(g.row(8).begin(), g.row(8).end());
    std::vector<std::vector<cplx>> span;
    double prev = dist_to_subspace(x, span);
    CHECK(prev == doctest::Approx(norm2(x)));
    IncrementalBasis basis(8);
    for (std::size_t k = 0; k < 8; ++k) {
      span.emplace_back(g.row(k).begin(), g.row(k).end());
      basis.add(g.row(k));
      const double d = dist_to_subspace(x, span);
      CHECK(d <= prev + 1e-12);
      CHECK(basis.distance(x) == doctest::Approx(d).epsilon(1e-9).scale(1.0));
      prev = d;
    }
    CHECK(prev < 1e-10 * norm2(x));
  }

  TEST_CASE("log |det|") {
    CHECK(log_abs_det(ComplexMatrix::identity(5)) == 0.0);
    const std::vector<cplx> d{2.0, 0.5};
    CHECK(log_abs_det(ComplexMatrix::diagonal(d)) == doctest::Approx(0.0).epsilon(1e-15));
    const ComplexMatrix a = ginibre(6, 6, 14);
    double s = 0.0;
    for (double v : singular_values(a).real_values()) s += std::log(v);
    CHECK(std::abs(log_abs_det(a) - s) <= 1e-6);
    ComplexMatrix z = a;
    for (std::size_t j = 0; j < 6; ++j) z(3, j) = 0.0;
    CHECK(log_abs_det(z) == -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("negative second moment identity") {
    const SecondMomentIdentity id = negative_second_moment_check(ComplexMatrix::identity(4));
    CHECK(id.lhs == doctest::Approx(4.0));
    CHECK(id.rhs == doctest::Approx(4.0));
    const std::vector<cplx> d{1.0, 2.0};
    const SecondMomentIdentity dd = negative_second_moment_check(ComplexMatrix::diagonal(d));
    CHECK(dd.lhs == doctest::Approx(1.25));
    CHECK(dd.rhs == doctest::Approx(1.25));
    CHECK(negative_second_moment_check(ginibre(8, 8, 15)).rel_err <= 1e-8);

    ComplexMatrix sing = ginibre(5, 5, 16);
    for (std::size_t j = 0; j < 5; ++j) sing(4, j) = sing(0, j);
    CHECK_THROWS_AS(negative_second_moment_check(sing), NearSingularError);
    CHECK_THROWS_AS(negative_second_moment_check(ginibre(3, 4, 1)), ValidationError);
  }

  TEST_CASE("non-finite input is rejected") {
    ComplexMatrix a = ComplexMatrix::identity(3);
    a(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(singular_values(a), ValidationError);
    CHECK_THROWS_AS(eigenvalues(a), ValidationError);
  }
}

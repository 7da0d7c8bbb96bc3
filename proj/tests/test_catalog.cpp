#include <doctest.h>

#include <cmath>
#include <random>

#include "dualext/catalog.hpp"
#include "formulas.hpp"

using namespace dualext;
using namespace testing_formulas;

namespace {

GridPtr unit() { return make_grid(DomainKind::interval, 1.0, 256); }
GridPtr half() { return make_grid(DomainKind::halfline, 40.0, 640); }

}  // namespace

TEST_CASE("scenario names and aliases") {
  CHECK(scenario_from_string("shirley") == Scenario::inverse_square_interval);
  CHECK(scenario_from_string("potsdam") == Scenario::halfline_laplacian);
  CHECK(scenario_from_string("konzert") == Scenario::first_order_interval);
  CHECK(scenario_from_string(to_string(Scenario::halfline_schrodinger)) == Scenario::halfline_schrodinger);
  CHECK_FALSE(scenario_from_string("nowhere").has_value());
}

TEST_CASE("xi_rho boundary values") {
  const double g = std::sqrt(3.0);
  const Complex rho(0.5, 0.375);
  const Formula xi = inverse_square_vector(g, rho);
  CHECK(std::abs(xi.value(1.0) - rho) < 1e-13);
  CHECK(std::abs(xi.first(1.0) - 1.0) < 1e-13);
  CHECK(std::abs(xi.value(1e-12)) < 1e-15);
  CHECK(std::abs(xi.first(1e-12)) < 1e-5);

  const Formula xinf = inverse_square_vector(g, ExtendedComplex::infinity());
  CHECK(std::abs(xinf.value(1.0) - 1.0) < 1e-13);
  CHECK(std::abs(xinf.first(1.0)) < 1e-13);
}

TEST_CASE("adjoint action on xi_rho matches the differential expression") {
  const double g = 2.5;
  const auto p = build_inverse_square_interval(unit(), g, Complex(0.3, -1.1));
  const Formula xi = inverse_square_vector(g, Complex(0.3, -1.1));
  for (double x : {0.05, 0.2, 0.5, 0.9, 1.0}) {
    const Complex direct = Complex(0.0, -1.0) * xi.second(x) - g * xi.value(x) / (x * x);
    CHECK(std::abs(p.adjoint_v.formula()->value(x) - direct) < 1e-10 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("projection of xi_rho onto the kernel is rho x") {
  const Complex rho(0.5, 0.375);
  const auto p = build_inverse_square_interval(unit(), std::sqrt(3.0), rho);
  const GridFunction pv = projection_P(p.spec, p.v);
  for (std::size_t i = 0; i < pv.size(); ++i) CHECK(std::abs(pv[i] - rho * p.grid->nodes[i]) < 1e-12);
}

TEST_CASE("inverse-square reference margins") {
  const Complex rho(0.5, 0.375);
  const auto with_phi = build_inverse_square_interval(unit(), std::sqrt(3.0), rho, quadratic(0.0, -1.0, 1.0));
  CHECK(with_phi.reference.margin == doctest::Approx(35.0 / 192.0).epsilon(1e-12));
  const auto without = build_inverse_square_interval(unit(), std::sqrt(3.0), rho);
  CHECK(without.reference.margin == doctest::Approx(-7.0 / 64.0).epsilon(1e-12));
  const auto inf = build_inverse_square_interval(unit(), std::sqrt(3.0), ExtendedComplex::infinity());
  CHECK(inf.reference.margin == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(build_inverse_square_interval(unit(), 1.5, rho), Error);
  CHECK_THROWS_AS(build_inverse_square_interval(unit(), std::sqrt(3.0), rho, quadratic(1.0, 0.0, 0.0)), Error);
}

TEST_CASE("boundary identity agrees with the quadrature of Im <v, A~* v>") {
  const auto p = build_inverse_square_interval(unit(), 2.0, Complex(0.7, 0.2));
  CHECK(integrate(p.v, p.adjoint_v).imag() == doctest::Approx(p.im_adjoint).epsilon(1e-6));
  const auto q = build_halfline_laplacian(half(), Complex(-0.4, 2.0));
  CHECK(integrate(q.v, q.adjoint_v).imag() == doctest::Approx(q.im_adjoint).epsilon(1e-9));
  const auto r = build_first_order_interval(unit(), 0.25);
  CHECK(integrate(r.v, r.adjoint_v).imag() == doctest::Approx(r.im_adjoint).epsilon(1e-9));
}

TEST_CASE("half-line boundary vectors") {
  for (Complex h : {Complex(0.0), Complex(1.0, 2.0), Complex(-3.0, 0.5)}) {
    const Formula eta = halfline_boundary_vector(h);
    CHECK(std::abs(eta.value(0.0) - 1.0) < 1e-14);
    CHECK(std::abs(eta.first(0.0) - h) < 1e-14);
  }
  const Formula inf = halfline_boundary_vector(ExtendedComplex::infinity());
  CHECK(std::abs(inf.value(0.0)) < 1e-14);
  CHECK(std::abs(inf.first(0.0) - 1.0) < 1e-14);

  const Complex h(0.2, 0.7);
  const auto p = build_halfline_schrodinger(half(), h, RankOnePerturbation{1.0, x_exp(1.0), 0.0});
  CHECK(integrate(p.v, *p.symmetric_adjoint_v).imag() == doctest::Approx(h.imag()).epsilon(1e-9));
  CHECK(*p.im_symmetric == doctest::Approx(h.imag()).epsilon(1e-14));
}

TEST_CASE("half-line Laplacian reference margins") {
  const auto basic = build_halfline_laplacian(half(), 1.0);
  CHECK(basic.reference.margin == doctest::Approx(1.0).epsilon(1e-12));

  // threshold Re rho = -15/16 for phi = i x e^{-x}
  for (double re : {-15.0 / 16.0, -0.5, -1.2}) {
    const auto p = build_halfline_laplacian(half(), Complex(re, 0.3), x_exp(kI));
    CHECK(p.reference.margin == doctest::Approx(re + 15.0 / 16.0).epsilon(1e-10));
  }
  const auto inf = build_halfline_laplacian(half(), ExtendedComplex::infinity(), x_exp(kI));
  CHECK(inf.reference.margin < 0.0);
}

TEST_CASE("first-order interval reference margins") {
  const auto zero = build_first_order_interval(unit(), 0.25);
  CHECK(zero.reference.margin == doctest::Approx(0.5).epsilon(1e-12));
  const auto edge = build_first_order_interval(unit(), 0.25, Formula::constant(1.0));
  CHECK(std::abs(edge.reference.margin) < 1e-12);
  // int x l^2 = 2 gamma + 0.01 with l constant
  const double c = std::sqrt(2.0 * (0.5 + 0.01));
  const auto over = build_first_order_interval(unit(), 0.25, Formula::constant(c));
  CHECK(over.reference.margin < 0.0);

  const auto sing = build_first_order_interval(unit(), 0.25, {}, FirstOrderVector::singular);
  CHECK(sing.im_adjoint == 0.0);
  CHECK(std::isinf(sing.reference.margin));
  CHECK_THROWS_AS(build_first_order_interval(unit(), 0.5), Error);
}

TEST_CASE("Schrodinger reference margins") {
  const Complex h(0.0, 0.5);
  const auto r1 = build_halfline_schrodinger(half(), h, RankOnePerturbation{2.0, x_exp(3.0), Complex(1.0, 1.0)});
  CHECK(r1.reference.margin == doctest::Approx(0.5 - 2.0 / 8.0).epsilon(1e-12));
  CHECK(norm_sq(*r1.spec.phi) == doctest::Approx(1.0).epsilon(1e-12));

  MultiplicationPerturbation mp{[](double x) { return std::exp(-x); }, x_exp(1.0)};
  const auto mul = build_halfline_schrodinger(half(), h, mp);
  // int x^2 e^{-2x} / e^{-x} = int x^2 e^{-x} = 2
  CHECK(mul.reference.margin == doctest::Approx(0.5 - 0.5).epsilon(1e-9));

  try {
    build_halfline_schrodinger(half(), Complex(0.0, -0.1), mp);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_dissipative_input);
  }
  CHECK_NOTHROW(build_halfline_schrodinger_unchecked(half(), Complex(0.0, -0.1), mp));
}

TEST_CASE("discrete dual pairs split into S and V >= 0") {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  const int n = 6;
  CMatrix s(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s(i, j) = Complex(nd(rng), nd(rng));
      b(i, j) = Complex(nd(rng), nd(rng));
    }
  s = 0.5 * (s + s.adjoint()).eval();
  const CMatrix v = b * b.adjoint();
  const CMatrix gram = CMatrix::Identity(n, n);
  const CMatrix m = s + kI * v;
  const SplitPair split = split_dual_pair({m, m.adjoint(), gram});
  CHECK((split.s - s).norm() < 1e-12);
  CHECK((split.v - v).norm() < 1e-12);

  CHECK_THROWS_AS(split_dual_pair({m, m, gram}), Error);
  const CMatrix bad = s - kI * v;
  CHECK_THROWS_AS(split_dual_pair({bad, bad.adjoint(), gram}), Error);
}

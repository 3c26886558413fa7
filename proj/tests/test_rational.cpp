#include <cmath>

#include "cmc/rational.hpp"
#include "doctest.h"

using namespace cmc;

TEST_CASE("polynomial roots") {
  // (x - 1)(x + 2)(x - 3i)
  Poly p = poly_mul(poly_mul(Poly{-1.0, 1.0}, Poly{2.0, 1.0}), Poly{cplx(0, -3), 1.0});
  auto r = poly_roots(p);
  REQUIRE(r.size() == 3);
  for (cplx want : {cplx(1.0), cplx(-2.0), cplx(0, 3)}) {
    double best = 1e9;
    for (cplx z : r) best = std::min(best, std::abs(z - want));
    CHECK(best < 1e-13);
  }
  auto z0 = poly_roots(Poly{0.0, 0.0, 1.0});
  CHECK(z0.size() == 2);
  CHECK(std::abs(z0[0]) == 0.0);
}

TEST_CASE("rational arithmetic") {
  const cplx pts[] = {cplx(0.3, 0.1), cplx(-1.2, 0.7), cplx(2.0, -0.5)};
  RationalFn a = RationalFn::linear(0.25) / (RationalFn::linear(4.0) * RationalFn::monomial(2.0, 1));
  RationalFn b = pow(RationalFn::linear(cplx(0.1, 0.2)), 2);
  for (cplx x : pts) {
    CHECK(std::abs(a.eval(x) - (x - 0.25) / ((x - 4.0) * 2.0 * x)) < 1e-14);
    CHECK(std::abs((a * b).eval(x) - a.eval(x) * b.eval(x)) < 1e-13);
    CHECK(std::abs(add(a, b).eval(x) - (a.eval(x) + b.eval(x))) < 1e-11);
  }
  CHECK(a.order_at(0.0) == -1);
  CHECK(a.order_at(4.0) == -1);
  CHECK(a.order_at(0.25) == 1);
  // cancellation
  auto c = (RationalFn::linear(0.5) * RationalFn::linear(2.0)) / RationalFn::linear(0.5);
  CHECK(c.zeros.size() == 1);
  CHECK(c.poles.empty());
}

TEST_CASE("star involution") {
  RationalFn f = scale(RationalFn::linear(cplx(0.3, 0.4)) / RationalFn::linear(cplx(-2.0, 1.0)), cplx(1.0, -2.0));
  f = f * RationalFn::monomial(1.0, -2);
  auto s = star(f);
  for (cplx x : {cplx(0.3, 0.1), cplx(-1.2, 0.7), std::polar(1.0, 0.4)}) {
    CHECK(std::abs(s.eval(x) - std::conj(f.eval(1.0 / std::conj(x)))) < 1e-12);
    CHECK(std::abs(star(s).eval(x) - f.eval(x)) < 1e-12);
  }
}

TEST_CASE("laurent polynomials and the genus-one example") {
  // a^2 = -(1/4) nu / ((nu - 1/4)(nu - 4)); 1 - a^2 = (nu^2 - 4 nu + 1)/((nu - 1/4)(nu - 4))
  RationalFn a2 = scale(RationalFn::monomial(1.0, 1) / (RationalFn::linear(0.25) * RationalFn::linear(4.0)), -0.25);
  auto one_minus = add(RationalFn::constant(1.0), scale(a2, -1.0));
  REQUIRE(one_minus.zeros.size() == 2);
  const double r1 = 2.0 - std::sqrt(3.0), r2 = 2.0 + std::sqrt(3.0);
  CHECK(std::abs(one_minus.zeros[0].z - r1) < 1e-12);
  CHECK(std::abs(one_minus.zeros[1].z - r2) < 1e-12);
  CHECK(one_minus.poles.size() == 2);

  auto l = RationalFn::from_laurent({{-1, 1.0}, {1, -1.0}});  // 1/nu - nu
  for (cplx x : {cplx(0.5), cplx(0.2, 1.3)}) CHECK(std::abs(l.eval(x) - (1.0 / x - x)) < 1e-13);
  CHECK(l.nu_power == -1);
}

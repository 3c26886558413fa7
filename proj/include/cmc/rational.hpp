#pragma once

#include <map>
#include <vector>

#include "cmc/types.hpp"

namespace cmc {

using Poly = std::vector<cplx>;  // coefficients, low degree first

cplx poly_eval(const Poly& p, cplx x);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, cplx s);
Poly poly_trim(Poly p, double rel_tol = 0.0);
// Roots via companion-matrix eigenvalues, polished by Newton on the original polynomial.
std::vector<cplx> poly_roots(const Poly& p);

struct Root {
  cplx z;
  int mult = 1;
};

// gain * nu^nu_power * prod (nu - z)^m / prod (nu - p)^m, all roots nonzero.
struct RationalFn {
  cplx gain = 1.0;
  int nu_power = 0;
  std::vector<Root> zeros;
  std::vector<Root> poles;

  cplx eval(cplx nu) const;
  // Expanded numerator / denominator (nu_power folded into whichever side it belongs).
  Poly numerator() const;
  Poly denominator() const;
  // Order of vanishing at z (negative for poles); z = 0 handled through nu_power.
  int order_at(cplx z, double tol = 1e-9) const;
  bool is_zero() const { return gain == cplx(0.0); }

  static RationalFn constant(cplx c);
  static RationalFn monomial(cplx c, int n);
  static RationalFn linear(cplx root);  // nu - root
  static RationalFn from_laurent(const std::map<int, cplx>& coeffs);
  static RationalFn from_polys(const Poly& num, const Poly& den);
};

RationalFn operator*(const RationalFn& a, const RationalFn& b);
RationalFn operator/(const RationalFn& a, const RationalFn& b);
RationalFn pow(const RationalFn& a, int n);
RationalFn scale(const RationalFn& a, cplx s);
// Sum through expanded polynomials and re-factorization.
RationalFn add(const RationalFn& a, const RationalFn& b);
// f*(nu) = conj(f(1/conj(nu)))
RationalFn star(const RationalFn& f);
// Merge roots closer than tol and cancel common zero/pole factors.
RationalFn simplify(const RationalFn& f, double tol = 1e-10);

}  // namespace cmc

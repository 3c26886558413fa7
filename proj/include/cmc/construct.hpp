#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "cmc/periods.hpp"
#include "cmc/symmetry.hpp"

namespace cmc {

struct FamilyParams {
  CurveSpec curve;
  cplx q = 0.0;
  std::map<int, cplx> f_tilde = {{0, 1.0}};  // Laurent coefficients in nu
  std::optional<cplx> nu0;                   // even genus only; defaults to 1
  std::optional<double> scale;               // absent: 0.99 / sup_{S^1} f~^2 a0^2
};

struct A0Result {
  RationalFn ahat2;
  RationalFn a0sq;
  int epsilon = 1;
};
A0Result build_a0sq(const CurveSpec& s, std::optional<cplx> nu0);

// Validates reality on S^1 and the pole-order bound; throws InadmissibleFTilde.
RationalFn f_tilde_function(const std::map<int, cplx>& coeffs, int genus);

struct A2Result {
  RationalFn a2;
  A0Result a0;
  double scale = 1.0;
  double sup = 0.0;  // sup_{S^1} f~^2 a0^2
};
A2Result build_a2(const FamilyParams& fp);

// sup over S^1 of a real-valued rational function (512 samples plus local refinement)
double sup_on_circle(const RationalFn& f);

struct BCResult {
  RationalFn b2, c2, b2_tilde;
  double delta = 0.0;
  std::vector<cplx> inner_zeros;  // zeros of 1 - a^2 inside the unit disk
  int K = 0;                      // cuts where a^2 has poles
  double identity_gap = 0.0;      // sup |b^2 c^2 - (1 - a^2)^2| at test points
};
BCResult build_b2_c2(const CurveSpec& s, const RationalFn& a2);

// x(lambda) = sign * lambda^e * Y(nu) / mu(P(lambda)) with Y^2 = x^2 mu^2 / nu^e rational.
struct CurveSqrt {
  RationalFn Y = RationalFn::constant(0.0);
  int e = 0;
  cplx sign = 1.0;
  cplx at(cplx lambda, cplx mu) const;           // mu over nu = lambda^2 on the matching sheet
  cplx on_disk(const CurveSpec& s, cplx lambda) const;  // near P0, |lambda| < r0
  cplx over_mu(cplx lambda) const;               // sign * lambda^e * Y(lambda^2), to be divided by mu
};
CurveSqrt curve_sqrt(const CurveSpec& s, const RationalFn& x2);

// p = int omega from the branch point over nu_1, normalized so that p = q/lambda - conj(q) lambda + f_+ near P0.
class PFunction {
 public:
  PFunction(const CurveSpec& s, const SecondKindDifferential& omega, cplx q, int n_terms = 200);
  cplx series(cplx lambda) const;  // |lambda| < r0
  cplx f_plus(cplx lambda) const;
  // p at a point over nu reached by a path from nu_1; mu_out receives the point's mu
  cplx at(cplx nu, cplx* mu_out) const;
  // p at the finite branch point with index k of finite_branch_points()
  cplx at_branch(int k) const;
  cplx constant() const { return C_; }
  double r0() const { return r0_; }
  const std::vector<cplx>& f_plus_coeffs() const { return fplus_; }  // f_1, f_3, ...

 private:
  cplx path_integral(cplx nu, cplx* mu_out) const;
  CurveSpec s_;
  SecondKindDifferential w_;
  cplx q_;
  double rho_, r0_;
  std::vector<cplx> G_;      // scaled coefficients of D(nu) R(nu), index m + 1
  std::vector<cplx> fplus_;  // unscaled odd Taylor coefficients of f_+
  cplx C_ = 0.0;
};

struct ConstructedData {
  FamilyParams params;
  A2Result a;
  BCResult bc;
  RationalFn a2, b2, c2;
  CycleSet cycles;
  SecondKindDifferential omega1, omega2, omega;
  PeriodReport periods;
  SymCheck sym;
  double r0 = 0.0, r_final = 0.0;
  CurveSqrt ya, yb, yc;
  std::shared_ptr<PFunction> p;
  SymmetryData sd;
  HPlus hplus;
  double omega_period_gap = 0.0;  // max |exp(period of omega) - 1| over all a- and b-cycles
  double beta_at_branch = 0.0;    // max |beta| over the finite branch points
};

ConstructedData assemble_family(const FamilyParams& fp);

struct FamilyCheck {
  double translation_residual = 0.0;
  double u_variation = 0.0;  // max |u(z + q) - u(z)|
  double chi_unitarity = 0.0;
  bool validated = false;
};
FamilyCheck check_family(const ConstructedData& cd, const std::vector<cplx>& zs, const DressOptions& opt = {});

}  // namespace cmc

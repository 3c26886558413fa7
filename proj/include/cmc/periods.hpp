#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmc/curve.hpp"

namespace cmc {

// (sum_{k=-1}^{g} c_k nu^k) dnu / mu
struct SecondKindDifferential {
  int genus = 0;
  std::vector<cplx> c;  // c[k + 1]
  std::string label;

  cplx coeff(int k) const { return c[size_t(k + 1)]; }
  cplx numerator(cplx nu) const;  // sum c_k nu^k
  cplx density(cplx nu, cplx mu) const { return numerator(nu) / mu; }
  bool is_zero() const;
};

SecondKindDifferential linear_combination(cplx a, const SecondKindDifferential& x, cplx b,
                                          const SecondKindDifferential& y, std::string label);

// a-periods of nu^k dnu/mu, k in [-1, g]: rows = cycles
std::vector<std::vector<cplx>> a_moment_table(const CurveSpec& s, const CycleSet& cs, int refine = 1);

// Principal part -(lambda^{-1})^{-2} d(lambda^{-1}) at P_inf, no pole at P0, vanishing a-periods.
SecondKindDifferential build_omega1(const CurveSpec& s, const CycleSet& cs, int refine = 1);
// Principal part -lambda^{-2} d lambda at P0, holomorphic at P_inf, vanishing a-periods.
SecondKindDifferential build_omega2(const CurveSpec& s, const CycleSet& cs, int refine = 1);
// conj(sigma-hat^* Omega)
SecondKindDifferential sigma_conjugate(const CurveSpec& s, const SecondKindDifferential& w);
// omega = -conj(q) Omega1 + q Omega2
SecondKindDifferential build_omega_q(const SecondKindDifferential& omega1, const SecondKindDifferential& omega2,
                                     cplx q);

std::vector<cplx> cycle_periods(const CurveSpec& s, const CycleSet& cs, const std::vector<CyclePath>& cycles,
                                const SecondKindDifferential& w, int refine = 1);

// Laurent coefficient of lambda^{-2} and the residue in the local coordinate at P0 (lambda^2 = nu,
// mu ~ c0 lambda) or at P_inf (t = 1/lambda, mu ~ t^{-(2g+1)}).
struct PrincipalPart {
  cplx second;
  cplx residue;
};
PrincipalPart principal_part(const CurveSpec& s, const SecondKindDifferential& w, bool at_infinity,
                             double radius = 0.0);

struct PeriodReport {
  std::vector<cplx> U, V;
  double uv_gap = 0.0;  // max |V_k - conj(U_k)|
  std::optional<double> delaunay_phi;
};

PeriodReport periods_U(const CurveSpec& s, const CycleSet& cs, const SecondKindDifferential& omega1,
                       const SecondKindDifferential& omega2, int refine = 1);

struct SymCheck {
  std::vector<int> m;
  std::vector<double> deviation;  // Im(q conj U_k)/pi - m_k
  bool pass = false;
};
SymCheck check_sym_condition(const std::vector<cplx>& U, cplx q, double tol = 1e-6);

// Solve Im(q conj U_k) = pi m_k for q. free_dir is set when the system leaves a real direction open;
// a zero particular solution is then replaced by free_dir.
struct QSolution {
  cplx q = 0.0;
  std::optional<cplx> free_dir;
  double residual = 0.0;
};
QSolution solve_q(const std::vector<cplx>& U, const std::vector<int>& m, double tol = 1e-6);

// (1/2pi) [[X1, Y1], [X2, Y2]] [[2c1, alpha_k], [-2c2, -beta_k]] with q_j = (Y_j + i X_j)/2
std::vector<std::vector<double>> torus_matrix(cplx q1, cplx q2, cplx c, const std::vector<cplx>& U);

struct TorusVerdict {
  std::string verdict;  // "torus-conditions-met", "no-torus", "inconclusive"
  std::vector<std::vector<double>> matrix;
  double integer_deviation = 0.0;
  double omega1_value = 0.0;  // |sum c_k nu0^k| / max |c_k|
  std::optional<cplx> lambda0;
  cplx c = 0.0;  // c1 + i c2
};
TorusVerdict check_torus(const CurveSpec& s, const SecondKindDifferential& omega1, const std::vector<cplx>& U,
                         cplx q1, cplx q2, std::optional<cplx> lambda0, double int_tol = 1e-4,
                         double zero_tol = 1e-6);
// Classification of an already assembled matrix and Omega1 value.
std::string torus_classify(const std::vector<std::vector<double>>& matrix, double omega1_value, double int_tol,
                           double zero_tol, double* deviation = nullptr);
// int of w from the sheet-1 point over nu0 to the best-separated finite branch point; throws PathBlocked.
cplx integral_to_branch(const CurveSpec& s, const SecondKindDifferential& w, cplx nu0, int sheet = 1);

std::optional<double> delaunay_phi(const std::vector<cplx>& U, double tol = 1e-8);

// Complete elliptic integrals K(k), E(k) by the arithmetic-geometric mean.
std::pair<double, double> elliptic_KE(double k);
// Genus-one closed form of the Omega1 coefficient c_0 for nu_1 = r e^{i phi}.
cplx genus1_omega1_c0(cplx nu1);

}  // namespace cmc

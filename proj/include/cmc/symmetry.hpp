#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cmc/dpw.hpp"
#include "cmc/rational.hpp"

namespace cmc {

// Values of alpha, beta^2, beta a, beta b, beta c at one lambda in C*.
struct TwoSided {
  cplx alpha = 1.0, beta2 = 0.0, beta_a = 0.0, beta_b = 0.0, beta_c = 0.0;
};

using ScalarFn = std::function<cplx(cplx)>;

struct SymmetryData {
  cplx q = 0.0;
  RationalFn a2 = RationalFn::constant(0.0), b2 = RationalFn::constant(1.0), c2 = RationalFn::constant(1.0);
  double r = 0.5;         // working radius of the disk functions
  ScalarFn a, b, c;       // square roots on |lambda| < r0
  ScalarFn f_plus;        // odd, on the disk
  std::function<TwoSided(cplx)> two_sided;  // valid on all of C*
};

// a = 0, b = c = 1, f_+ = 0
SymmetryData cylinder_symmetry(cplx q, double r = 0.5);

// S = [[a, b], [c, -a]] on the disk
Mat2 s_matrix(const SymmetryData& sd, cplx lambda);
// chi = alpha I + beta S from the two-sided data
Mat2 chi_value(const TwoSided& t);

struct HPlus {
  std::function<Mat2(cplx)> fn;  // c^{-1/2} [[1, a], [0, c]]
  LoopMatrix loop;               // Taylor coefficients read off C_r
  double r = 0.5;
  double conj_residual = 0.0;    // sup |h A h^{-1} - [[a, b], [c, -a]]| on C_r
  double negative_tail = 0.0;    // largest dropped negative-degree term on C_r
};

HPlus build_hplus(const ScalarFn& a, const ScalarFn& b, const ScalarFn& c, double r, int n_samples = 512);

struct ChiMatrix {
  cplx q = 0.0;
  std::function<Mat2(cplx)> eval;
  LoopMatrix laurent;         // from samples on S^1
  double unitarity = 0.0;     // sup_{S^1} |chi^* chi - I|
  double trace_gap = 0.0;     // sup |tr(chi)/2 - alpha|
  double tail_minus = 0.0, tail_plus = 0.0;  // relative size of the outer quarter of each Laurent tail
};

ChiMatrix build_chi(const SymmetryData& sd, int M = 128, double tol = 1e-8);

struct ConditionResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string note;
};

struct NecessaryReport {
  std::vector<ConditionResult> conditions;
  bool all_pass = true;
  const ConditionResult* find(const std::string& name) const;
};

NecessaryReport validate_necessary(const SymmetryData& sd, double tol = 1e-8);

struct TranslationCheck {
  double residual = 0.0;
  double snap_error = 0.0;
  int pairs = 0;
};

// F(z + q) against chi F(z) at the given base points, evaluating F(z + q) directly.
TranslationCheck verify_translation(const Dresser& d, cplx q, const ChiMatrix& chi, const std::vector<cplx>& zs,
                                    int n_lambda = 16);
// Grid version: q snapped to the lattice; throws GridTooSmall when no pair fits.
TranslationCheck verify_translation(const FrameGrid& fg, cplx q, const ChiMatrix& chi, int n_lambda = 16);

struct ClosingResult {
  std::string verdict;  // not_closed, chi_is_pm_I, fully_closed
  int order = 0;
  cplx value = 0.0;
  std::vector<double> coeff_abs;  // |fit coefficients| in the normalized arc variable
};

ClosingResult closing_test(const ScalarFn& beta2, cplx lambda0, double half_width = 0.05);

// Approximate zeros of beta^2 on S^1 (local minima below rel_tol * max), sorted by angle.
std::vector<double> beta2_zeros_on_circle(const ScalarFn& beta2, int n = 4096, double rel_tol = 1e-6);

}  // namespace cmc

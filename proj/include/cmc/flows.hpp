#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmc/curve.hpp"
#include "cmc/dpw.hpp"
#include "cmc/factor.hpp"
#include "cmc/symmetry.hpp"

namespace cmc {

// zeta = phi_hat(lambda) A with phi_hat odd, meromorphic on the disk, pole only at 0.
struct FlowGenerator {
  std::function<cplx(cplx)> phi_hat;
  int pole_order = 1;
};

// phi_hat = sum c_k lambda^k over odd k
FlowGenerator laurent_generator(const std::map<int, cplx>& coeffs);
FlowGenerator add(const FlowGenerator& x, const FlowGenerator& y);

struct FlowResult {
  LoopMatrix hplus;       // h_+ # (t zeta)
  double residual = 0.0;  // sup |h_+ e^{t zeta} - U (h_+ # t zeta)| on C_r
  double negative_tail = 0.0;
};

// Iwasawa split of h_+ e^{t zeta} on C_r; M = 0 picks 512 nodes.
FlowResult apply_flow(const LoopMatrix& hplus, const FlowGenerator& zeta, double t, int M = 0,
                      const FactorOptions& opt = {});

struct TrivialityResult {
  bool trivial = false;
  Mat2 U0 = Mat2::Identity();
  double phase = 0.0;     // U0 = diag(e^{i phase}, e^{-i phase}) when the diagonal fit applies
  double residual = 0.0;  // max |F_t - U0 F U0^{-1}| over points and lambda samples
  std::string method;     // "diagonal" or "su2"
};

// Fit F_t = U0 F U0^{-1} with lambda-independent unitary U0.
TrivialityResult is_trivial(const std::vector<LoopMatrix>& F0, const std::vector<LoopMatrix>& Ft, double tol = 1e-6,
                            int n_lambda = 16);
TrivialityResult is_trivial(const FrameGrid& fg0, const FrameGrid& fgt, double tol = 1e-6, int n_lambda = 16);

struct FiniteTypeGenerator {
  FlowGenerator zeta;
  int N = 0;
  int kappa = 0;
  int pole_order = 0;
  RationalFn phi_tilde = RationalFn::constant(1.0);  // clears the poles of a^2, b^2, c^2 on C*
  RationalFn phi = RationalFn::constant(1.0);        // phi_tilde phi_tilde^*
  RationalFn f2 = RationalFn::constant(1.0);         // phi_N = f2(nu) mu
  // phi_hat S on C*, from the rational forms
  std::function<Mat2(cplx)> phi_hat_S;
  double measured_pole_order = 0.0;
  double reality = 0.0;  // sup_{S^1} |(phi_hat S)^* + phi_hat S|
  double tail = 0.0;     // relative size of the Laurent tails of phi_hat S on S^1
  double disk_gap = 0.0; // sup_{C_r} |phi_hat S - phi_hat h_+ A h_+^{-1}| / sup |phi_hat S|
};

// Generator of a trivial flow for N >= g + 1. Throws CorrectionPolynomialNotFound.
FiniteTypeGenerator finite_type_generators(const CurveSpec& s, const SymmetryData& sd, int N);

struct FiniteTypeCertificate {
  int N = 0, kappa = 0, pole_order = 0;
  double t = 0.0;
  double flow_residual = 0.0;    // triviality fit of the frames
  double metric_residual = 0.0;  // max |u_t - u_0|
  double hplus_gap = 0.0;        // sup_{C_r} |(h_+ # t zeta) - U0 h_+|
  bool trivial = false;
  TrivialityResult fit;
};

FiniteTypeCertificate certify_finite_type(const CurveSpec& s, const SymmetryData& sd, const LoopMatrix& hplus, int N,
                                          const std::vector<cplx>& zs, double t_scale = 0.5,
                                          const DressOptions& opt = {});

}  // namespace cmc

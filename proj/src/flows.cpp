#include "cmc/flows.hpp"

#include <algorithm>
#include <cmath>

#include "cmc/construct.hpp"
#include "cmc/fourier.hpp"
#include "cmc/parallel.hpp"

namespace cmc {

namespace {

Mat2 exp_A(cplx p) {
  Mat2 m;
  m << std::cosh(p), std::sinh(p), std::sinh(p), std::cosh(p);
  return m;
}

// Plus loop from samples on C_r; negative degrees are aliasing noise and get dropped.
LoopMatrix plus_loop(const Samples& s, double r, double* neg_tail) {
  const int M = int(s.size());
  LoopMatrix g = loop_from_samples(s, r, r, M / 2 - 1, 1e-16, true);
  double neg = 0.0;
  for (auto it = g.coeffs.begin(); it != g.coeffs.end();) {
    if (it->first < 0) {
      neg = std::max(neg, maxabs(it->second) * std::pow(r, it->first));
      it = g.coeffs.erase(it);
    } else {
      ++it;
    }
  }
  if (neg_tail) *neg_tail = neg;
  return g;
}

}  // namespace

FlowGenerator laurent_generator(const std::map<int, cplx>& coeffs) {
  FlowGenerator z;
  int po = 0;
  for (auto [n, c] : coeffs) {
    if (n % 2 == 0) throw Error("BadInput", "flow generator must be odd in lambda");
    if (n < 0 && c != cplx(0.0)) po = std::max(po, -n);
  }
  z.pole_order = po;
  z.phi_hat = [coeffs](cplx l) {
    cplx s = 0.0;
    for (auto [n, c] : coeffs) s += c * std::pow(l, n);
    return s;
  };
  return z;
}

FlowGenerator add(const FlowGenerator& x, const FlowGenerator& y) {
  FlowGenerator z;
  z.pole_order = std::max(x.pole_order, y.pole_order);
  z.phi_hat = [fx = x.phi_hat, fy = y.phi_hat](cplx l) { return fx(l) + fy(l); };
  return z;
}

FlowResult apply_flow(const LoopMatrix& hplus, const FlowGenerator& zeta, double t, int M, const FactorOptions& opt) {
  if (!zeta.phi_hat) throw Error("BadInput", "empty flow generator");
  FlowResult res;
  if (t == 0.0) {
    res.hplus = hplus;
    return res;
  }
  if (M <= 0) M = 512;
  const double r = hplus.r;
  const auto nodes = circle_nodes(M, r);
  Samples g(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) g[j] = hplus.eval(nodes[j]) * exp_A(t * zeta.phi_hat(nodes[j]));
  auto iw = iwasawa_samples(g, r, opt);
  if (!iw.ok) throw Error("NotInBigCell", "Iwasawa split of h_+ exp(t zeta) failed");
  res.hplus = plus_loop(iw.gplus, r, &res.negative_tail);
  res.hplus.N = std::max(res.hplus.N, hplus.N);
  for (int j = 0; j < M; ++j) res.residual = std::max(res.residual, maxabs(g[j] - iw.F_inner[j] * iw.gplus[j]));
  return res;
}

TrivialityResult is_trivial(const std::vector<LoopMatrix>& F0, const std::vector<LoopMatrix>& Ft, double tol,
                            int n_lambda) {
  if (F0.size() != Ft.size() || F0.empty()) throw Error("BadInput", "frame sets must be nonempty and of equal size");
  std::vector<Mat2> A, B;
  for (size_t i = 0; i < F0.size(); ++i)
    for (int k = 0; k < n_lambda; ++k) {
      const cplx l = std::polar(1.0, 2 * kPi * (k + 0.37) / n_lambda);
      A.push_back(F0[i].eval(l));
      B.push_back(Ft[i].eval(l));
    }
  auto residual = [&](const Mat2& U) {
    const Mat2 Ui = U.adjoint();
    double r = 0.0;
    for (size_t i = 0; i < A.size(); ++i) r = std::max(r, maxabs(B[i] - U * A[i] * Ui));
    return r;
  };

  TrivialityResult tr;
  // diagonal: B12 = w A12, B21 = conj(w) A21 with w = e^{2 i phase}
  cplx num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < A.size(); ++i) {
    num += std::conj(A[i](0, 1)) * B[i](0, 1) + A[i](1, 0) * std::conj(B[i](1, 0));
    den += std::norm(A[i](0, 1)) + std::norm(A[i](1, 0));
  }
  const double ph = (den > 0.0 && std::abs(num) > 0.0) ? 0.5 * std::arg(num) : 0.0;
  Mat2 D = Mat2::Zero();
  D(0, 0) = std::polar(1.0, ph);
  D(1, 1) = std::polar(1.0, -ph);
  tr.U0 = D;
  tr.phase = ph;
  tr.residual = residual(D);
  tr.method = "diagonal";
  if (tr.residual < tol) {
    tr.trivial = true;
    return tr;
  }

  // full fit: B U - U A = 0, vec(U) column-major
  Eigen::MatrixXcd L(4 * A.size(), 4);
  for (size_t i = 0; i < A.size(); ++i) {
    Eigen::Matrix4cd blk = Eigen::Matrix4cd::Zero();
    for (int c = 0; c < 2; ++c)
      for (int rr = 0; rr < 2; ++rr)
        for (int k = 0; k < 2; ++k) {
          // (B U)_{rr,c} = sum_k B_{rr,k} U_{k,c};  (U A)_{rr,c} = sum_k U_{rr,k} A_{k,c}
          blk(rr + 2 * c, k + 2 * c) += B[i](rr, k);
          blk(rr + 2 * c, rr + 2 * k) -= A[i](k, c);
        }
    L.block(4 * Eigen::Index(i), 0, 4, 4) = blk;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(L, Eigen::ComputeThinV);
  Eigen::Vector4cd v = svd.matrixV().col(3);
  Mat2 U;
  U << v(0), v(2), v(1), v(3);
  Eigen::JacobiSVD<Mat2> pol(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
  U = pol.matrixU() * pol.matrixV().adjoint();
  U /= std::sqrt(U.determinant());
  const double rs = residual(U);
  if (rs < tr.residual) {
    tr.U0 = U;
    tr.residual = rs;
    tr.method = "su2";
    tr.phase = 0.0;
  }
  tr.trivial = tr.residual < tol;
  return tr;
}

TrivialityResult is_trivial(const FrameGrid& fg0, const FrameGrid& fgt, double tol, int n_lambda) {
  if (fg0.grid.nx != fgt.grid.nx || fg0.grid.ny != fgt.grid.ny || fg0.frames.size() != fgt.frames.size())
    throw Error("BadInput", "frame grids differ in shape");
  return is_trivial(fg0.frames, fgt.frames, tol, n_lambda);
}

FiniteTypeGenerator finite_type_generators(const CurveSpec& s, const SymmetryData& sd, int N) {
  const int g = s.genus();
  if (N < g + 1) throw Error("BadInput", "N must be at least g + 1");
  FiniteTypeGenerator ft;
  ft.N = N;

  // poles of a^2, b^2, c^2 on C*, merged by location
  std::vector<Root> poles;
  for (const RationalFn* f : {&sd.a2, &sd.b2, &sd.c2}) {
    const RationalFn fs = simplify(*f, 1e-10);
    for (const auto& p : fs.poles) {
      bool merged = false;
      for (auto& q : poles)
        if (std::abs(q.z - p.z) < 1e-9 * std::max(1.0, std::abs(p.z))) {
          q.mult = std::max(q.mult, p.mult);
          merged = true;
        }
      if (!merged) poles.push_back(p);
    }
  }
  RationalFn pt = RationalFn::constant(1.0);
  for (const auto& p : poles) pt.zeros.push_back({p.z, (p.mult + 1) / 2});
  ft.kappa = 0;
  for (const auto& z : pt.zeros) ft.kappa += z.mult;
  constexpr int kBudget = 64;
  if (ft.kappa > kBudget) throw Error("CorrectionPolynomialNotFound", "pole-clearing degree exceeds the budget");
  for (const RationalFn* f : {&sd.a2, &sd.b2, &sd.c2}) {
    const RationalFn cleared = simplify(pt * pt * *f, 1e-9);
    if (!cleared.poles.empty())
      throw Error("CorrectionPolynomialNotFound", "a pole of a^2, b^2 or c^2 survives the correction polynomial");
  }
  ft.phi_tilde = pt;
  ft.phi = pt * star(pt);
  // phi_N = (nu^{-N} - conj(c0) nu^{N-g-1}) mu
  ft.f2 = add(RationalFn::monomial(1.0, -N), RationalFn::monomial(-std::conj(s.c0), N - g - 1));
  ft.pole_order = 2 * (ft.kappa + N) - 1;

  const RationalFn pf = ft.phi * ft.f2;
  ft.zeta.pole_order = ft.pole_order;
  ft.zeta.phi_hat = [s, pf](cplx l) { return pf.eval(l * l) * mu_near_p0(s, l); };

  // rational forms of phi_hat a, b, c; signs matched against the disk functions
  CurveSqrt ya = curve_sqrt(s, sd.a2), yb = curve_sqrt(s, sd.b2), yc = curve_sqrt(s, sd.c2);
  const cplx lt = std::polar(0.3 * sd.r, 0.7);
  auto fix = [&](CurveSqrt& y, const ScalarFn& f) {
    if (!f) return;
    const cplx v = y.on_disk(s, lt), w = f(lt);
    if (std::abs(v + w) < std::abs(v - w)) y.sign = -y.sign;
  };
  fix(ya, sd.a);
  fix(yb, sd.b);
  fix(yc, sd.c);
  ft.phi_hat_S = [pf, ya, yb, yc](cplx l) {
    const cplx p = pf.eval(l * l);
    const cplx a = p * ya.over_mu(l), b = p * yb.over_mu(l), c = p * yc.over_mu(l);
    Mat2 m;
    m << a, b, c, -a;
    return m;
  };

  // measured pole order from two small radii
  {
    const double e1 = 1e-2 * sd.r, e2 = 0.5 * e1;
    const cplx d = std::polar(1.0, 0.3);
    ft.measured_pole_order =
        std::log(std::abs(ft.zeta.phi_hat(e2 * d)) / std::abs(ft.zeta.phi_hat(e1 * d))) / std::log(e1 / e2);
  }

  // (phi_hat S)^* = -phi_hat S on S^1, and Laurent tails
  const int M = 256;
  const auto nodes = circle_nodes(M, 1.0);
  Samples vals(static_cast<size_t>(M));
  double big = 0.0;
  for (int j = 0; j < M; ++j) {
    vals[j] = ft.phi_hat_S(nodes[j]);
    big = std::max(big, maxabs(vals[j]));
    ft.reality = std::max(ft.reality, maxabs(vals[j].adjoint() + vals[j]));
  }
  const Samples c = dft(vals);
  double tail = 0.0;
  for (int k = 0; k < M; ++k)
    if (std::abs(bin_degree(k, M)) > 3 * M / 8) tail = std::max(tail, maxabs(c[k]));
  ft.reality /= std::max(big, 1e-300);
  ft.tail = tail / std::max(big, 1e-300);

  // agreement with phi_hat h_+ A h_+^{-1} = phi_hat S on the disk
  if (sd.a && sd.b && sd.c) {
    double gap = 0.0, ref = 0.0;
    for (int j = 0; j < 32; ++j) {
      const cplx l = std::polar(sd.r, 2 * kPi * (j + 0.5) / 32);
      const cplx p = ft.zeta.phi_hat(l);
      Mat2 S;
      S << sd.a(l), sd.b(l), sd.c(l), -sd.a(l);
      const Mat2 want = ft.phi_hat_S(l);
      gap = std::max(gap, maxabs(p * S - want));
      ref = std::max(ref, maxabs(want));
    }
    ft.disk_gap = gap / std::max(ref, 1e-300);
  }
  return ft;
}

FiniteTypeCertificate certify_finite_type(const CurveSpec& s, const SymmetryData& sd, const LoopMatrix& hplus, int N,
                                          const std::vector<cplx>& zs, double t_scale, const DressOptions& opt) {
  auto ft = finite_type_generators(s, sd, N);
  FiniteTypeCertificate cert;
  cert.N = N;
  cert.kappa = ft.kappa;
  cert.pole_order = ft.pole_order;
  double pmax = 0.0;
  for (int j = 0; j < 64; ++j) pmax = std::max(pmax, std::abs(ft.zeta.phi_hat(std::polar(hplus.r, 2 * kPi * j / 64))));
  cert.t = t_scale / std::max(pmax, 1e-300);
  auto fr = apply_flow(hplus, ft.zeta, cert.t, 0, opt.factor);

  // h_+ # t zeta against U0 h_+ with U0 = (h#)(0) h(0)^{-1}
  const Mat2 U0 = fr.hplus.eval(0.0) * inv2(hplus.eval(0.0));
  for (int j = 0; j < 64; ++j) {
    const cplx l = std::polar(hplus.r, 2 * kPi * (j + 0.5) / 64);
    cert.hplus_gap = std::max(cert.hplus_gap, maxabs(fr.hplus.eval(l) - U0 * hplus.eval(l)));
  }

  Dresser d0(hplus, opt), dt(fr.hplus, opt);
  std::vector<LoopMatrix> F0(zs.size()), Ft(zs.size());
  std::vector<double> u0(zs.size()), ut(zs.size());
  parallel_for(zs.size(), [&](size_t i) {
    F0[i] = d0.frame_loop(zs[i]);
    Ft[i] = dt.frame_loop(zs[i]);
    u0[i] = metric_u_at(d0, zs[i], opt.H);
    ut[i] = metric_u_at(dt, zs[i], opt.H);
  });
  cert.fit = is_trivial(F0, Ft);
  cert.flow_residual = cert.fit.residual;
  for (size_t i = 0; i < zs.size(); ++i) cert.metric_residual = std::max(cert.metric_residual, std::abs(ut[i] - u0[i]));
  cert.trivial = cert.fit.trivial && cert.metric_residual < 1e-6;
  return cert;
}

}  // namespace cmc

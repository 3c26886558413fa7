#include "cmc/factor.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmc {

Mat2 cylinder_value(cplx z, cplx lambda) {
  const cplx p = z / lambda - lambda * std::conj(z);
  Mat2 e = std::cosh(p) * Mat2::Identity() + std::sinh(p) * mat_A();
  return e;
}

namespace {

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

Mat2 upper_half(const Mat2& r0) {
  Mat2 y = Mat2::Zero();
  y(0, 0) = 0.5 * r0(0, 0).real();
  y(1, 1) = 0.5 * r0(1, 1).real();
  y(0, 1) = r0(0, 1);
  return y;
}

// Phi0 = R^* R with R upper triangular, positive diagonal.
Mat2 upper_cholesky(const Mat2& phi0) {
  Mat2 h = 0.5 * (phi0 + phi0.adjoint());
  Eigen::LLT<Mat2> llt(h);
  if (llt.info() != Eigen::Success) throw Error("IllConditioned", "symbol is not positive definite");
  Mat2 L = llt.matrixL();
  return L.adjoint();
}

void keep_plus(Samples& coeffs) {
  const int M = int(coeffs.size());
  for (int k = M / 2; k < M; ++k) coeffs[k].setZero();
}

SpectralFactor wilson(const Samples& Phi, const FactorOptions& opt) {
  const int M = int(Phi.size());
  SpectralFactor out;
  out.method = "newton";
  Mat2 phi0 = Mat2::Zero();
  for (const auto& m : Phi) phi0 += m;
  phi0 /= double(M);
  const Mat2 R = upper_cholesky(phi0);
  Samples coeffs(M, Mat2::Zero());
  coeffs[0] = R;
  if (opt.seed != 0) {
    // a different outer start: (I + s lambda A) R, invertible on the closed disk
    const double s = 0.25 + 0.05 * (opt.seed % 5);
    coeffs[1] = s * mat_A() * R;
  }
  Samples P = idft(coeffs);
  double prev = 1e300;
  Samples Rs(M), best;
  double best_res = 1e300;
  for (int it = 0; it < opt.max_iter; ++it) {
    double res = 0.0, floor = 0.0;
    for (int j = 0; j < M; ++j) {
      const Mat2 Pi = inv2(P[j]);
      Rs[j] = Pi.adjoint() * Phi[j] * Pi - Mat2::Identity();
      res = std::max(res, maxabs(Rs[j]));
      floor = std::max(floor, Pi.squaredNorm() * Phi[j].norm());
    }
    floor *= 64.0 * std::numeric_limits<double>::epsilon();  // rounding level of the residual
    out.iterations = it;
    if (!std::isfinite(res)) break;
    if (res < best_res) {
      best_res = res;
      best = P;
    }
    const bool stalled = it >= 3 && res > 0.5 * prev;
    if (res < std::max(opt.tol, floor) || (stalled && res < std::max(1e-9, 10.0 * floor))) {
      out.converged = true;
      break;
    }
    // past the quadratic phase a growing residual means rounding has taken over
    if (stalled && (it >= 12 || res > 2.0 * best_res)) break;
    prev = res;
    Samples Rc = dft(Rs);
    Samples Y(M, Mat2::Zero());
    for (int k = 1; k < M / 2; ++k) Y[k] = Rc[k];
    Y[0] = upper_half(Rc[0]);
    Samples Ys = idft(Y);
    for (int j = 0; j < M; ++j) P[j] = (Mat2::Identity() + Ys[j]) * P[j];
    coeffs = dft(P);
    keep_plus(coeffs);
    P = idft(coeffs);
  }
  if (!best.empty()) P = std::move(best);
  out.residual = best_res;
  out.P = P;
  out.coeffs = dft(P);
  return out;
}

SpectralFactor toeplitz_factor(const Samples& Phi, const FactorOptions& opt) {
  // Phi = M_- M_+ on S^1; then P = R M_-^* with R^* R = (M_-^{-1} Phi)_0.
  SpectralFactor out;
  out.method = "toeplitz";
  auto B = birkhoff_samples(Phi, 1.0, opt);
  if (!B.ok) return out;
  const int M = int(Phi.size());
  Mat2 x0 = Mat2::Zero();
  for (int j = 0; j < M; ++j) x0 += inv2(B.gminus[j]) * Phi[j];
  x0 /= double(M);
  const Mat2 R = upper_cholesky(x0);
  out.P.resize(M);
  double res = 0.0;
  for (int j = 0; j < M; ++j) {
    out.P[j] = R * B.gminus[j].adjoint();
    res = std::max(res, maxabs(out.P[j].adjoint() * out.P[j] - Phi[j]));
  }
  out.coeffs = dft(out.P);
  out.residual = res;
  out.converged = true;
  return out;
}

}  // namespace

BirkhoffSamples birkhoff_samples(const Samples& g, double rho, const FactorOptions& opt) {
  const int M = int(g.size());
  BirkhoffSamples out;
  Samples h(M);
  for (int j = 0; j < M; ++j) h[j] = inv2(g[j]);
  Samples eta = dft(h);
  double scale = 0.0, noise = 0.0;
  for (const auto& m : eta) scale = std::max(scale, maxabs(m));
  // the band around M/2 measures the sampling noise (or aliasing, if it is large)
  for (int k = 3 * M / 8; k < 5 * M / 8; ++k) noise = std::max(noise, maxabs(eta[k]));
  const double thresh = std::max(1e-16 * scale, 4.0 * noise);
  if (noise > 1e-10 * scale) out.aliased = true;
  int Keta = 0;
  for (int n = 1; n < M / 2; ++n)
    if (maxabs(eta[degree_bin(-n, M)]) > thresh) Keta = n;
  int K = Keta == 0 ? 0 : Keta + 6;
  if (K > M / 4) {
    out.aliased = true;
    K = M / 4;
  }
  out.K = K;
  auto at = [&](int n) -> const Mat2& { return eta[degree_bin(n, M)]; };
  out.y.assign(K, Mat2::Zero());
  if (K > 0) {
    Eigen::MatrixXcd T(2 * K, 2 * K);
    Eigen::MatrixXcd rhs(2 * K, 2);
    for (int i = 1; i <= K; ++i) {
      for (int k = 1; k <= K; ++k) T.block<2, 2>(2 * (i - 1), 2 * (k - 1)) = at(k - i);
      rhs.block<2, 2>(2 * (i - 1), 0) = -at(-i);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
    out.rcond = lu.rcond();
    Eigen::MatrixXcd sol = lu.solve(rhs);
    for (int k = 1; k <= K; ++k) out.y[k - 1] = sol.block<2, 2>(2 * (k - 1), 0);
    if (!(out.rcond > opt.rcond_min) || !sol.allFinite()) out.ok = false;
  }
  Samples c(M, Mat2::Zero());
  c[0] = Mat2::Identity();
  for (int k = 1; k <= K; ++k) c[degree_bin(-k, M)] = out.y[k - 1];
  out.gminus = idft(c);
  out.gplus.resize(M);
  for (int j = 0; j < M; ++j) out.gplus[j] = inv2(out.gminus[j]) * g[j];
  (void)rho;
  return out;
}

SpectralFactor spectral_factor(const Samples& Phi, const FactorOptions& opt) {
  SpectralFactor sf;
  try {
    sf = wilson(Phi, opt);
  } catch (const Error&) {
    sf.converged = false;
  }
  if (sf.converged) return sf;
  auto tf = toeplitz_factor(Phi, opt);
  if (tf.converged) {
    tf.iterations = sf.iterations;
    return tf;
  }
  throw Error("NoConvergence", "spectral factorization did not converge");
}

namespace {

IwasawaSamples iwasawa_core(const Samples& g, double rho, const FactorOptions& opt) {
  const int M = int(g.size());
  IwasawaSamples out;
  Samples gm, gm_inner, gpB;
  if (rho >= 1.0 - 1e-15) {
    gm = g;
  } else {
    auto B = birkhoff_samples(g, rho, opt);
    out.rcond = B.rcond;
    if (!B.ok) {
      out.ok = false;
      return out;
    }
    Samples c(M, Mat2::Zero());
    c[0] = Mat2::Identity();
    for (int k = 1; k <= B.K; ++k) c[degree_bin(-k, M)] = B.y[k - 1] * std::pow(rho, k);
    gm = idft(c);
    gm_inner = std::move(B.gminus);
    gpB = std::move(B.gplus);
  }
  Samples Phi(M);
  for (int j = 0; j < M; ++j) Phi[j] = gm[j].adjoint() * gm[j];
  SpectralFactor sf = spectral_factor(Phi, opt);
  out.iterations = sf.iterations;
  out.method = sf.method;
  out.F.resize(M);
  for (int j = 0; j < M; ++j) out.F[j] = gm[j] * inv2(sf.P[j]);
  if (gpB.empty()) {
    out.F_inner = out.F;
    out.gplus = sf.P;
    out.gplus0 = sf.coeffs[0];
    return out;
  }
  Samples pc(M, Mat2::Zero());
  for (int k = 0; k < M / 2; ++k) pc[k] = sf.coeffs[k] * std::pow(rho, k);
  Samples Pr = idft(pc);
  out.gplus.resize(M);
  out.F_inner.resize(M);
  Mat2 mean = Mat2::Zero();
  for (int j = 0; j < M; ++j) {
    out.gplus[j] = Pr[j] * gpB[j];
    out.F_inner[j] = gm_inner[j] * inv2(Pr[j]);
    mean += out.gplus[j];
  }
  mean /= double(M);
  // move the constant term into B: mean = U B0 with U unitary
  const Mat2 B0 = upper_cholesky(mean.adjoint() * mean);
  const Mat2 U = mean * inv2(B0);
  const Mat2 Ui = U.adjoint();
  for (int j = 0; j < M; ++j) {
    out.F[j] = out.F[j] * U;
    out.F_inner[j] = out.F_inner[j] * U;
    out.gplus[j] = Ui * out.gplus[j];
  }
  out.gplus0 = B0;
  return out;
}

}  // namespace

IwasawaSamples iwasawa_samples(const Samples& g, double rho, const FactorOptions& opt) {
  auto res = iwasawa_core(g, rho, opt);
  if (res.ok) return res;
  // Outside the big cell on C_rho: shift by a cylinder frame (unitary on S^1) and undo.
  const cplx shifts[] = {cplx(0.3, 0.2), cplx(-0.4, 0.1), cplx(0.0, 0.5), cplx(0.7, -0.3)};
  const int M = int(g.size());
  auto zr = circle_nodes(M, rho);
  auto zs = circle_nodes(M, 1.0);
  for (cplx s : shifts) {
    Samples gs(M);
    for (int j = 0; j < M; ++j) gs[j] = cylinder_value(s, zr[j]) * g[j];
    auto r2 = iwasawa_core(gs, rho, opt);
    if (!r2.ok) continue;
    for (int j = 0; j < M; ++j) {
      r2.F[j] = cylinder_value(-s, zs[j]) * r2.F[j];
      r2.F_inner[j] = cylinder_value(-s, zr[j]) * r2.F_inner[j];
    }
    r2.method += "+shift";
    return r2;
  }
  throw Error("NoConvergence", "no big-cell shift found for the Birkhoff stage");
}

namespace {

int auto_M(const LoopMatrix& g, const FactorOptions& opt) {
  if (opt.M > 0) return opt.M;
  int span = 0;
  for (const auto& kv : g.coeffs) span = std::max(span, std::abs(kv.first));
  return std::max(256, next_pow2(8 * span + 64));
}

double min_abs_det(const Samples& s) {
  double m = 1e300;
  for (const auto& x : s) m = std::min(m, std::abs(x.determinant()));
  return m;
}

// Nonnegative degrees from S^1, negative degrees from C_rho: each side is the
// numerically stable source for evaluation on the annulus between them.
LoopMatrix combine_unitary(const IwasawaSamples& is, double rho, int M, const FactorOptions& opt, bool twisted) {
  LoopMatrix outer = loop_from_samples(is.F, 1.0, rho, M / 2 - 1, opt.coeff_tol, twisted);
  if (rho >= 1.0 - 1e-15) return outer;
  LoopMatrix inner = loop_from_samples(is.F_inner, rho, rho, M / 2 - 1, opt.coeff_tol, twisted);
  LoopMatrix F;
  F.r = rho;
  F.twisted = twisted;
  F.tail = std::max(outer.tail, inner.tail);
  int span = 1;
  for (const auto& [n, c] : outer.coeffs)
    if (n >= 0) F.coeffs.emplace(n, c), span = std::max(span, n);
  for (const auto& [n, c] : inner.coeffs)
    if (n < 0) F.coeffs.emplace(n, c), span = std::max(span, -n);
  F.N = span;
  return F;
}

double offnode_residual(const LoopMatrix& g, const LoopMatrix& a, const LoopMatrix& b, double rho) {
  double r = 0.0;
  const int P = 61;
  for (int j = 0; j < P; ++j) {
    const cplx lam = std::polar(rho, 2.0 * kPi * (j + 0.37) / P);
    r = std::max(r, maxabs(g.eval(lam) - a.eval(lam) * b.eval(lam)));
  }
  return r;
}

}  // namespace

IwasawaResult iwasawa(const LoopMatrix& g, const FactorOptions& opt) {
  int M = auto_M(g, opt);
  const double rho = g.r;
  for (int attempt = 0; attempt < 4; ++attempt, M *= 2) {
    Samples s = sample_loop(g, M, rho);
    if (min_abs_det(s) < 1e-12) throw Error("IllConditioned", "loop is (nearly) singular on the circle");
    auto is = iwasawa_samples(s, rho, opt);
    IwasawaResult out;
    out.unitary_part = combine_unitary(is, rho, M, opt, g.twisted);
    // F must be resolved inside the window; otherwise retry with more samples
    Samples fc = dft(is.F);
    double fmax = 0.0, fedge = 0.0;
    for (int k = 0; k < M; ++k) {
      fmax = std::max(fmax, maxabs(fc[k]));
      if (std::abs(bin_degree(k, M)) > M / 2 - 8) fedge = std::max(fedge, maxabs(fc[k]));
    }
    if (fedge > 1e-15 * fmax && attempt < 3) continue;
    LoopMatrix gp = loop_from_samples(is.gplus, rho, rho, M / 2 - 1, opt.coeff_tol, g.twisted);
    for (auto it = gp.coeffs.begin(); it != gp.coeffs.end();) {
      if (it->first < 0) {
        gp.tail = std::max(gp.tail, maxabs(it->second) * std::pow(rho, it->first));
        it = gp.coeffs.erase(it);
      } else {
        ++it;
      }
    }
    out.plus_part = gp;
    out.iterations = is.iterations;
    out.method = is.method;
    double u = 0.0;
    for (const auto& F : is.F) u = std::max(u, maxabs(F.adjoint() * F - Mat2::Identity()));
    out.unitarity = u;
    out.residual = offnode_residual(g, out.unitary_part, out.plus_part, rho);
    return out;
  }
  throw Error("NoConvergence", "unitary factor not resolved within sample budget");
}

BirkhoffResult birkhoff(const LoopMatrix& g, const FactorOptions& opt) {
  const int M = auto_M(g, opt);
  const double rho = g.r;
  Samples s = sample_loop(g, M, rho);
  if (min_abs_det(s) < 1e-12) throw Error("IllConditioned", "loop is (nearly) singular on the circle");
  auto B = birkhoff_samples(s, rho, opt);
  BirkhoffResult out;
  out.in_big_cell = B.ok;
  out.rcond = B.rcond;
  LoopMatrix gm;
  gm.r = rho;
  gm.twisted = g.twisted;
  gm.coeffs[0] = Mat2::Identity();
  for (int k = 1; k <= B.K; ++k) {
    Mat2 c = B.y[k - 1] * std::pow(rho, k);
    if (g.twisted) {
      if (k % 2 == 0) c(0, 1) = c(1, 0) = 0.0;
      else c(0, 0) = c(1, 1) = 0.0;
    }
    if (maxabs(c) > 0.0) gm.coeffs[-k] = c;
  }
  gm.N = std::max(1, B.K);
  LoopMatrix gp = loop_from_samples(B.gplus, rho, rho, M / 2 - 1, opt.coeff_tol, g.twisted);
  for (auto it = gp.coeffs.begin(); it != gp.coeffs.end();) {
    if (it->first < 0) {
      gp.tail = std::max(gp.tail, maxabs(it->second) * std::pow(rho, it->first));
      it = gp.coeffs.erase(it);
    } else {
      ++it;
    }
  }
  out.minus_part = gm;
  out.plus_part = gp;
  out.residual = out.in_big_cell ? offnode_residual(g, gm, gp, rho) : INFINITY;
  return out;
}

}  // namespace cmc

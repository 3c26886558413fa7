#include "cmc/dpw.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmc/fourier.hpp"
#include "cmc/parallel.hpp"

namespace cmc {

namespace {

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

std::string zstr(cplx z) {
  std::ostringstream os;
  os.precision(6);
  os << "z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

Samples subsample(const Samples& s, int Ms) {
  const int M = int(s.size());
  if (M % Ms != 0) throw Error("BadGrid", "node counts must divide each other");
  const int step = M / Ms;
  Samples out(Ms);
  for (int j = 0; j < Ms; ++j) out[j] = s[j * step];
  return out;
}

Samples axpy(const Samples& a, cplx s, const Samples& b) {  // a + s b
  Samples r(a.size());
  for (size_t j = 0; j < a.size(); ++j) r[j] = a[j] + s * b[j];
  return r;
}

double u_from_block(const Mat2& am1, double H) { return 2.0 * std::log(std::abs(2.0 * am1(0, 1) / H)); }

}  // namespace

ZGrid ZGrid::square(int nx, int ny, double extent) {
  if (nx < 1 || ny < 1) throw Error("BadGrid", "grid must be nonempty");
  ZGrid g;
  g.nx = nx;
  g.ny = ny;
  g.x0 = -extent;
  g.y0 = -extent;
  g.dx = nx > 1 ? 2.0 * extent / (nx - 1) : 0.0;
  g.dy = ny > 1 ? 2.0 * extent / (ny - 1) : 0.0;
  return g;
}

LoopMatrix cylinder_frame(cplx z, double r, int N) {
  // e^{pA} = D^{-1} diag(e^p, e^{-p}) D, p = z/lambda - conj(z) lambda.
  // Laurent coefficient n of e^p: sum_k z^k (-conj z)^{n+k} / (k! (n+k)!).
  const cplx zb = -std::conj(z);
  const int kmax = 40 + int(6.0 * std::abs(z));
  auto coeff = [&](int n) {
    cplx s = 0.0;
    const int k0 = std::max(0, -n);
    // first term z^k0 zb^{n+k0} / (k0! (n+k0)!), built by ratios to avoid overflow
    cplx t = 1.0;
    for (int i = 1; i <= k0; ++i) t *= z / double(i);
    for (int i = 1; i <= n + k0; ++i) t *= zb / double(i);
    for (int k = k0; k <= k0 + kmax; ++k) {
      s += t;
      t *= z * zb / (double(k + 1) * double(n + k + 1));
    }
    return s;
  };
  std::map<int, Mat2> c;
  double tail = 0.0;
  const int span = N + 40 + int(6.0 * std::abs(z));
  for (int n = -span; n <= span; ++n) {
    const cplx ep = coeff(n);
    const cplx em = (n % 2 == 0) ? ep : -ep;  // e^{-p}: z -> -z flips the sign of odd degrees
    // D^{-1} diag(ep, em) D = (ep + em)/2 I + (ep - em)/2 A
    const Mat2 m = 0.5 * (ep + em) * Mat2::Identity() + 0.5 * (ep - em) * mat_A();
    if (std::abs(n) > N) {
      tail = std::max(tail, maxabs(m));
      continue;
    }
    if (maxabs(m) == 0.0) continue;
    c[n] = m;
  }
  LoopMatrix g;
  g.coeffs = std::move(c);
  g.r = r;
  g.N = N;
  g.twisted = true;
  g.tail = tail;
  return g;
}

// ---------------------------------------------------------------- Dresser

Dresser::Dresser(const LoopMatrix& hplus, const DressOptions& opt)
    : hloop_(hplus), from_loop_(true), r_(hplus.r), twisted_(hplus.twisted), opt_(opt) {
  if (hplus.min_degree() < 0) throw Error("NotPlusLoop", "seed has negative degrees");
  const Mat2 h0 = hplus.coeff(0);
  if (std::abs(h0.determinant()) < 1e-14) throw Error("NotInvertibleAtZero", "seed is singular at lambda = 0");
  const int deg = std::max(0, hplus.max_degree());
  M_base_ = opt.M > 0 ? opt.M : std::max(256, next_pow2(2 * deg + 128));
  M_base_ = std::max(M_base_, opt_.Ms);
  F0_ = to_loop(raw_frame(0.0).F);
}

Dresser::Dresser(std::function<Mat2(cplx)> hplus_fn, double r, bool twisted, const DressOptions& opt)
    : hfn_(std::move(hplus_fn)), r_(r), twisted_(twisted), opt_(opt) {
  if (!(r > 0.0 && r <= 1.0)) throw Error("BadRadius", "radius must lie in (0, 1]");
  M_base_ = std::max(opt.M > 0 ? opt.M : 512, opt_.Ms);
  F0_ = to_loop(raw_frame(0.0).F);
}

int Dresser::nodes_for(cplx z) const {
  // negative part of E(z) on C_r decays after about e|z|/r terms
  const int K = int(std::ceil(std::exp(1.0) * std::abs(z) / r_)) + 30;
  return std::max(M_base_, next_pow2(4 * K));
}

const Samples& Dresser::h_samples(int M) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = hcache_.find(M);
  if (it != hcache_.end()) return *it->second;
  auto s = std::make_shared<Samples>();
  if (from_loop_) {
    *s = sample_loop(hloop_, M, r_);
  } else {
    auto lam = circle_nodes(M, r_);
    s->resize(M);
    for (int j = 0; j < M; ++j) (*s)[j] = hfn_(lam[j]);
  }
  return *(hcache_[M] = s);
}

Dresser::Point Dresser::raw_frame(cplx z) const {
  const int M = nodes_for(z);
  const Samples& h = h_samples(M);
  auto lam = circle_nodes(M, r_);
  Samples g(M);
  for (int j = 0; j < M; ++j) g[j] = h[j] * cylinder_value(z, lam[j]);
  IwasawaSamples res;
  try {
    res = iwasawa_samples(g, r_, opt_.factor);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " at " + zstr(z));
  }
  if (!res.ok) throw Error("IllConditioned", "Iwasawa split failed at " + zstr(z));
  return {std::move(res.F), res.gplus0, res.method};
}

Dresser::Point Dresser::frame(cplx z) const {
  Point p = raw_frame(z);
  const Mat2 F0i = F0_.coeff(0).adjoint();
  for (auto& f : p.F) f = F0i * f;
  return p;
}

Samples Dresser::frame_std(cplx z, Mat2* p0) const {
  Point p = frame(z);
  if (p0) *p0 = p.p0;
  return subsample(p.F, opt_.Ms);
}

LoopMatrix Dresser::to_loop(const Samples& F) const {
  const int M = int(F.size());
  LoopMatrix g = loop_from_samples(F, 1.0, 1.0, M / 2 - 1, opt_.coeff_tol, twisted_);
  return g;
}

LoopMatrix Dresser::frame_loop(cplx z) const { return to_loop(frame(z).F); }

// ---------------------------------------------------------------- dressing

FrameGrid dress_with(const Dresser& d, const LoopMatrix& seed, const ZGrid& grid) {
  FrameGrid fg;
  fg.grid = grid;
  fg.seed = seed;
  fg.H = d.options().H;
  const int n = grid.size();
  fg.frames.resize(n);
  std::vector<double> unit(n, 0.0);
  parallel_for(size_t(n), [&](size_t idx) {
    const int i = int(idx) % grid.nx, j = int(idx) / grid.nx;
    auto p = d.frame(grid.at(i, j));
    double u = 0.0;
    for (const auto& f : p.F) u = std::max(u, maxabs(f.adjoint() * f - Mat2::Identity()));
    unit[idx] = u;
    fg.frames[idx] = d.to_loop(p.F);
  });
  for (double u : unit) fg.max_unitarity = std::max(fg.max_unitarity, u);
  auto p0 = d.frame(0.0);
  for (const auto& f : p0.F) fg.initial_error = std::max(fg.initial_error, maxabs(f - Mat2::Identity()));
  return fg;
}

FrameGrid dress(const LoopMatrix& hplus, const ZGrid& grid, const DressOptions& opt) {
  Dresser d(hplus, opt);
  return dress_with(d, hplus, grid);
}

// ---------------------------------------------------------------- Sym

std::array<double, 3> sym_point(const Mat2& F, const Mat2& Ft, double H, double* imag_residue) {
  if (H == 0.0) throw Error("ZeroMeanCurvature", "H must be nonzero");
  if (maxabs(F.adjoint() * F - Mat2::Identity()) > 1e-6)
    throw Error("NonUnitaryFrame", "frame is not unitary at the evaluation point");
  const Mat2 Fi = inv2(F);
  const Mat2 psi = -(1.0 / (2.0 * H)) * (Ft * Fi + 0.5 * kI * F * sigma3() * Fi);
  const Mat2 s[3] = {sigma1(), sigma2(), sigma3()};
  std::array<double, 3> x{};
  double im = 0.0;
  for (int k = 0; k < 3; ++k) {
    const cplx v = kI * (s[k] * psi).trace();
    x[k] = v.real();
    im = std::max(im, std::abs(v.imag()));
  }
  if (imag_residue) *imag_residue = im;
  return x;
}

std::array<double, 3> sym_point(const LoopMatrix& F, cplx lambda0, double H, double* imag_residue) {
  if (std::abs(std::abs(lambda0) - 1.0) > 1e-12) throw Error("BadLambda", "lambda0 must lie on the unit circle");
  return sym_point(F.eval(lambda0), F.deriv_theta(lambda0), H, imag_residue);
}

std::array<double, 3> frame_normal(const Mat2& F) {
  const Mat2 m = F * sigma3() * inv2(F);
  const Mat2 s[3] = {sigma1(), sigma2(), sigma3()};
  std::array<double, 3> n{};
  for (int k = 0; k < 3; ++k) n[k] = 0.5 * (s[k] * m).trace().real();
  return n;
}

SurfaceMesh surface_mesh(const FrameGrid& fg, cplx lambda0) {
  SurfaceMesh m;
  m.lambda = lambda0;
  const int n = fg.grid.size();
  m.vertices.resize(n);
  m.normals.resize(n);
  std::vector<double> im(n, 0.0);
  parallel_for(size_t(n), [&](size_t i) {
    const Mat2 F = fg.frames[i].eval(lambda0);
    m.vertices[i] = sym_point(F, fg.frames[i].deriv_theta(lambda0), fg.H, &im[i]);
    m.normals[i] = frame_normal(F);
  });
  for (double v : im) m.imag_residue = std::max(m.imag_residue, v);
  for (int j = 0; j + 1 < fg.grid.ny; ++j)
    for (int i = 0; i + 1 < fg.grid.nx; ++i) {
      const int a = fg.grid.index(i, j), b = fg.grid.index(i + 1, j);
      const int c = fg.grid.index(i + 1, j + 1), d = fg.grid.index(i, j + 1);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  return m;
}

void write_obj(const SurfaceMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("IOError", "cannot write " + path);
  out.precision(12);
  out << "# lambda " << m.lambda.real() << " " << m.lambda.imag() << "\n";
  for (const auto& v : m.vertices) out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& v : m.normals) out << "vn " << v[0] << " " << v[1] << " " << v[2] << "\n";
  const bool with_n = m.normals.size() == m.vertices.size();
  for (const auto& f : m.faces) {
    out << "f";
    for (int k : f) {
      out << " " << k + 1;
      if (with_n) out << "//" << k + 1;
    }
    out << "\n";
  }
}

std::vector<double> mesh_mean_curvature(const SurfaceMesh& m, const ZGrid& g) {
  using V = Eigen::Vector3d;
  auto X = [&](int i, int j) {
    const auto& p = m.vertices[g.index(i, j)];
    return V(p[0], p[1], p[2]);
  };
  std::vector<double> H(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      const V xu = (X(i + 1, j) - X(i - 1, j)) / (2 * g.dx);
      const V xv = (X(i, j + 1) - X(i, j - 1)) / (2 * g.dy);
      const V xuu = (X(i + 1, j) - 2 * X(i, j) + X(i - 1, j)) / (g.dx * g.dx);
      const V xvv = (X(i, j + 1) - 2 * X(i, j) + X(i, j - 1)) / (g.dy * g.dy);
      const V xuv = (X(i + 1, j + 1) - X(i + 1, j - 1) - X(i - 1, j + 1) + X(i - 1, j - 1)) / (4 * g.dx * g.dy);
      const V nn = xu.cross(xv).normalized();
      const double E = xu.dot(xu), F = xu.dot(xv), G = xv.dot(xv);
      const double L = xuu.dot(nn), M = xuv.dot(nn), N = xvv.dot(nn);
      H[g.index(i, j)] = (E * N - 2 * F * M + G * L) / (2 * (E * G - F * F));
    }
  return H;
}

// ---------------------------------------------------------------- extraction

std::pair<Samples, Samples> fd_partials(const std::function<Samples(cplx)>& f, cplx z, double h) {
  auto central = [&](cplx dir, double s) {
    const Samples a = f(z + s * dir), b = f(z - s * dir);
    return axpy(a, -1.0, b);  // scaled below
  };
  auto partial = [&](cplx dir) {
    // D(s) = (f(z+s) - f(z-s)) / 2s; two Richardson levels over s = h, h/2, h/4
    Samples d1 = central(dir, h), d2 = central(dir, h / 2), d4 = central(dir, h / 4);
    const size_t M = d1.size();
    Samples out(M);
    for (size_t j = 0; j < M; ++j) {
      const Mat2 D1 = d1[j] / (2 * h), D2 = d2[j] / h, D4 = d4[j] / (h / 2);
      const Mat2 R1 = (4.0 * D2 - D1) / 3.0, R2 = (4.0 * D4 - D2) / 3.0;
      out[j] = (16.0 * R2 - R1) / 15.0;
    }
    return out;
  };
  return {partial(1.0), partial(kI)};
}

namespace {

struct MCData {
  Mat2 am1, a1;       // lambda^{-1} block of F^{-1}F_z, lambda^{1} block of F^{-1}F_zbar
  double off_band;
  double u_exact;
};

MCData maurer_cartan_at(const Dresser& d, cplx z, double H) {
  Mat2 p0;
  const Samples F = d.frame_std(z, &p0);
  auto f = [&](cplx w) { return d.frame_std(w); };
  auto [Fx, Fy] = fd_partials(f, z, d.options().fd_h);
  const int M = int(F.size());
  Samples az(M), azb(M);
  for (int j = 0; j < M; ++j) {
    const Mat2 Fi = inv2(F[j]);
    az[j] = Fi * (0.5 * (Fx[j] - kI * Fy[j]));
    azb[j] = Fi * (0.5 * (Fx[j] + kI * Fy[j]));
  }
  const Samples cz = dft(az), czb = dft(azb);
  MCData out;
  out.am1 = cz[degree_bin(-1, M)];
  out.a1 = czb[degree_bin(1, M)];
  out.off_band = 0.0;
  for (int k = 0; k < M; ++k) {
    const int n = bin_degree(k, M);
    if (n != -1 && n != 0) out.off_band = std::max(out.off_band, maxabs(cz[k]));
    if (n != 1 && n != 0) out.off_band = std::max(out.off_band, maxabs(czb[k]));
  }
  out.u_exact = u_from_block(p0 * mat_A() * inv2(p0), H);
  return out;
}

}  // namespace

double metric_u_at(const Dresser& d, cplx z, double H) {
  const auto p = d.frame(z);
  return u_from_block(p.p0 * mat_A() * inv2(p.p0), H);
}

PotentialSample extract_potential(const FrameGrid& fg, const DressOptions& opt0) {
  DressOptions opt = opt0;
  opt.H = fg.H;
  Dresser d(fg.seed, opt);
  const int n = fg.grid.size();
  PotentialSample ps;
  ps.f.assign(n, 0.0);
  ps.E.assign(n, 0.0);
  ps.off_band.assign(n, 0.0);
  ps.valid.assign(n, false);
  FactorOptions fo = opt.factor;
  auto gminus = [&](cplx w) {
    auto b = birkhoff_samples(d.frame_std(w), 1.0, fo);
    if (!b.ok) throw Error("NotInBigCell", "Birkhoff split failed");
    return b.gminus;
  };
  parallel_for(size_t(n), [&](size_t idx) {
    const cplx z = fg.grid.at(int(idx) % fg.grid.nx, int(idx) / fg.grid.nx);
    try {
      const Samples G = gminus(z);
      auto [Gx, Gy] = fd_partials(gminus, z, opt.fd_h);
      const int M = int(G.size());
      Samples xi(M);
      for (int j = 0; j < M; ++j) xi[j] = inv2(G[j]) * (0.5 * (Gx[j] - kI * Gy[j]));
      const Samples c = dft(xi);
      const Mat2 x1 = c[degree_bin(-1, M)];
      double off = 0.0;
      for (int k = 0; k < M; ++k)
        if (bin_degree(k, M) != -1) off = std::max(off, maxabs(c[k]));
      off = std::max({off, std::abs(x1(0, 0)), std::abs(x1(1, 1))});
      ps.f[idx] = x1(0, 1);
      ps.E[idx] = x1(0, 1) * x1(1, 0);
      ps.off_band[idx] = off;
      ps.valid[idx] = true;
    } catch (const Error&) {
      ps.valid[idx] = false;
    }
  });
  for (int i = 0; i < n; ++i)
    if (!ps.valid[i]) ps.poles.push_back(fg.grid.at(i % fg.grid.nx, i / fg.grid.nx));
  return ps;
}

MetricSample extract_metric(const FrameGrid& fg, const PotentialSample* pot, const DressOptions& opt0) {
  const ZGrid& g = fg.grid;
  if (g.nx < 3 || g.ny < 3) throw Error("BoundarySample", "grid has no interior nodes");
  DressOptions opt = opt0;
  opt.H = fg.H;
  Dresser d(fg.seed, opt);
  const double H = fg.H;
  const int n = g.size();
  MetricSample ms;
  ms.u.assign(n, 0.0);
  ms.E.assign(n, 0.0);
  ms.u_exact_gap.assign(n, 0.0);
  ms.residual.assign(n, std::numeric_limits<double>::quiet_NaN());
  ms.off_band.assign(n, 0.0);
  ms.reality_gap.assign(n, 0.0);
  const double h = opt.fd_h;
  parallel_for(size_t(n), [&](size_t idx) {
    const int i = int(idx) % g.nx, j = int(idx) / g.nx;
    const cplx z = g.at(i, j);
    const MCData mc = maurer_cartan_at(d, z, H);
    const double u = u_from_block(mc.am1, H);
    ms.u[idx] = u;
    ms.E[idx] = -(2.0 / H) * mc.am1(0, 1) * mc.am1(1, 0);
    ms.u_exact_gap[idx] = std::abs(u - mc.u_exact);
    ms.off_band[idx] = std::max({mc.off_band, std::abs(mc.am1(0, 0)), std::abs(mc.am1(1, 1))});
    ms.reality_gap[idx] = maxabs(mc.a1 + mc.am1.adjoint());
    if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) return;
    // Laplacian of the p_+(0) form of u on a local 5-point stencil, one Richardson level
    auto lap = [&](double s) {
      double acc = -4.0 * mc.u_exact;
      for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) acc += metric_u_at(d, z + s * dir, H);
      return acc / (s * s);
    };
    const double L = (4.0 * lap(h / 2) - lap(h)) / 3.0;
    const cplx E = pot ? pot->E[idx] : ms.E[idx];
    ms.residual[idx] = std::abs(0.25 * L + 0.5 * std::exp(mc.u_exact) * H * H - 2.0 * std::exp(-mc.u_exact) * std::norm(E));
  });
  for (double r : ms.residual)
    if (!std::isnan(r)) ms.max_residual = std::max(ms.max_residual, r);
  return ms;
}

}  // namespace cmc

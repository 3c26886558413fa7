#include "cmc/curve.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

namespace cmc {

namespace {

constexpr int kGauss = 16;

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, kGauss>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (size_t i = 0; i < a.size(); ++i) {
      x.push_back(a[i]);
      w.push_back(wt[i]);
      if (a[i] != 0.0) {
        x.push_back(-a[i]);
        w.push_back(wt[i]);
      }
    }
  }
};

const GaussRule& gauss_rule() {
  static const GaussRule g;
  return g;
}

double seg_dist(cplx e, cplx a, cplx b) {
  const cplx d = b - a;
  const double L2 = std::norm(d);
  if (L2 == 0.0) return std::abs(e - a);
  const double t = std::clamp(((e - a) * std::conj(d)).real() / L2, 0.0, 1.0);
  return std::abs(e - (a + t * d));
}

double interval_dist(cplx z, double s0, double s1) {
  const double x = std::clamp(z.real(), s0, s1);
  return std::abs(z - cplx(x, 0.0));
}

// Recursive panel split of [t0, t1] until length <= dist / refine.
template <class Dist>
void split_panels(double t0, double t1, const Dist& dist, double refine, int depth,
                  std::vector<std::pair<double, double>>& out) {
  const double d = dist(t0, t1);
  if ((t1 - t0) * refine > d) {
    if (depth > 60) throw Error("QuadratureFail", "integration path runs into a branch point");
    const double tm = 0.5 * (t0 + t1);
    split_panels(t0, tm, dist, refine, depth + 1, out);
    split_panels(tm, t1, dist, refine, depth + 1, out);
    return;
  }
  out.emplace_back(t0, t1);
}

// prod over the finite branch set except index skip of sqrt((nu - e)/(base - e))
cplx ratio_product(const std::vector<cplx>& E, int skip, cplx nu, cplx base) {
  cplx p = 1.0;
  for (int i = 0; i < int(E.size()); ++i)
    if (i != skip) p *= std::sqrt((nu - E[size_t(i)]) / (base - E[size_t(i)]));
  return p;
}

cplx G_at(const std::vector<cplx>& E, int idx) {
  cplx g = 1.0;
  for (int i = 0; i < int(E.size()); ++i)
    if (i != idx) g *= E[size_t(idx)] - E[size_t(i)];
  return g;
}

void regular_segment(const std::vector<cplx>& E, cplx A, cplx muA, cplx B, double refine,
                     std::vector<QuadNode>& out) {
  const cplx d = B - A;
  const double L = std::abs(d);
  if (L == 0.0) return;
  std::vector<std::pair<double, double>> panels;
  auto dist = [&](double t0, double t1) {
    double m = 1e300;
    for (cplx e : E) m = std::min(m, seg_dist(e, A + t0 * d, A + t1 * d));
    return m / L;
  };
  split_panels(0.0, 1.0, dist, refine, 0, panels);
  const auto& g = gauss_rule();
  for (auto [t0, t1] : panels) {
    const double h = 0.5 * (t1 - t0), tm = 0.5 * (t0 + t1);
    for (size_t j = 0; j < g.x.size(); ++j) {
      const cplx nu = A + (tm + h * g.x[j]) * d;
      out.push_back({nu, muA * ratio_product(E, -1, nu, A), h * g.w[j] * d});
    }
  }
}

// nu = e0 + d s^2, s in [0, 1], mu = c s prod sqrt((nu - e)/(e0 - e)); sign < 0 reverses orientation.
void branch_segment(const std::vector<cplx>& E, int i0, cplx B, cplx c, double sign, double refine,
                    std::vector<QuadNode>& out) {
  const cplx e0 = E[size_t(i0)];
  const cplx d = B - e0;
  std::vector<cplx> sing;
  for (int i = 0; i < int(E.size()); ++i)
    if (i != i0) {
      const cplx s = std::sqrt((E[size_t(i)] - e0) / d);
      sing.push_back(s);
      sing.push_back(-s);
    }
  auto dist = [&](double s0, double s1) {
    double m = 1e300;
    for (cplx z : sing) m = std::min(m, interval_dist(z, s0, s1));
    return m;
  };
  std::vector<std::pair<double, double>> panels;
  split_panels(0.0, 1.0, dist, refine, 0, panels);
  const auto& g = gauss_rule();
  for (auto [s0, s1] : panels) {
    const double h = 0.5 * (s1 - s0), sm = 0.5 * (s0 + s1);
    for (size_t j = 0; j < g.x.size(); ++j) {
      const double s = sm + h * g.x[j];
      const cplx nu = e0 + d * s * s;
      const cplx mu = c * s * ratio_product(E, i0, nu, e0);
      out.push_back({nu, mu, sign * h * g.w[j] * 2.0 * d * s});
    }
  }
}

cplx default_c(const std::vector<cplx>& E, int i0, cplx B) { return std::sqrt((B - E[size_t(i0)]) * G_at(E, i0)); }

std::vector<cplx> arc_vertices(const Arc& arc, const std::vector<cplx>& E) {
  std::vector<cplx> v = arc.vertices;
  if (v.size() == 2) v.insert(v.begin() + 1, 0.5 * (v[0] + v[1]));
  v.front() = E[size_t(arc.from)];
  v.back() = E[size_t(arc.to)];
  return v;
}

// c of the reversed parametrization at the arc's end point
cplx arc_end_c(const CurveSpec& s, const Arc& arc) {
  const auto E = s.finite_branch_points();
  const auto v = arc_vertices(arc, E);
  const cplx e0 = E[size_t(arc.from)];
  cplx mu = arc.c * ratio_product(E, arc.from, v[1], e0);
  for (size_t i = 1; i + 2 < v.size(); ++i) mu = continue_segment(s, v[i], mu, v[i + 1]);
  const cplx vl = v[v.size() - 2];
  return mu / ratio_product(E, arc.to, vl, E[size_t(arc.to)]);
}

cplx g0_at(const std::vector<cplx>& E, int idx) { return std::sqrt(G_at(E, idx)); }

int sgn(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

std::vector<cplx> rotation(double rad, double a0, double a1) {
  const int n = std::max(1, int(std::ceil(std::abs(a1 - a0) / 0.2)));
  std::vector<cplx> v;
  for (int i = 0; i <= n; ++i) v.push_back(std::polar(rad, a0 + (a1 - a0) * i / n));
  return v;
}

}  // namespace

std::vector<cplx> CurveSpec::branch_points() const {
  std::vector<cplx> b;
  for (int k = 0; k < genus(); ++k) {
    b.push_back(inner[size_t(k)]);
    b.push_back(outer(k));
  }
  return b;
}

std::vector<cplx> CurveSpec::finite_branch_points() const {
  std::vector<cplx> b{0.0};
  for (cplx e : branch_points()) b.push_back(e);
  return b;
}

double CurveSpec::min_separation() const {
  const auto E = finite_branch_points();
  double m = 1e300;
  for (size_t i = 0; i < E.size(); ++i)
    for (size_t j = i + 1; j < E.size(); ++j) m = std::min(m, std::abs(E[i] - E[j]));
  return m;
}

CurveSpec build_curve(const std::vector<cplx>& inner_points) {
  if (inner_points.empty()) throw Error("OutOfDisk", "at least one inner branch point is required");
  for (size_t i = 0; i < inner_points.size(); ++i) {
    const cplx w = inner_points[i];
    const double m = std::abs(w);
    if (!std::isfinite(m)) throw Error("OutOfDisk", "non-finite branch point");
    if (std::abs(m - 1.0) < 1e-12) throw Error("OnUnitCircle", "branch point on the unit circle");
    if (m == 0.0 || m > 1.0) throw Error("OutOfDisk", "inner branch points need 0 < |nu| < 1");
    for (size_t j = 0; j < i; ++j)
      if (std::abs(w - inner_points[j]) < 1e-12) throw Error("Duplicate", "repeated branch point");
  }
  CurveSpec s;
  s.inner = inner_points;
  const int g = s.genus();
  cplx c = (g % 2 == 0) ? 1.0 : -1.0;
  for (cplx w : inner_points) c *= w / std::abs(w);
  s.c0 = c;
  cplx p = 1.0;
  for (cplx e : s.branch_points()) p *= 1.0 - e;
  s.mu1 = std::sqrt(p);
  return s;
}

cplx curve_poly(const CurveSpec& s, cplx nu) {
  cplx p = nu;
  for (cplx e : s.branch_points()) p *= nu - e;
  return p;
}

cplx continue_segment(const CurveSpec& s, cplx a, cplx mu_a, cplx b) {
  return mu_a * ratio_product(s.finite_branch_points(), -1, b, a);
}

cplx mu_reference(const CurveSpec& s, cplx nu) { return continue_segment(s, 1.0, s.mu1, nu); }

cplx mu_near_p0(const CurveSpec& s, cplx lambda) {
  const cplx nu = lambda * lambda;
  cplx r = 1.0;
  for (cplx e : s.branch_points()) r *= std::sqrt(1.0 - nu / e);
  return s.c0 * lambda * r;
}

int sheet_of(const CurveSpec& s, cplx nu, cplx mu) {
  const cplx ref = mu_reference(s, nu);
  return std::abs(mu - ref) <= std::abs(mu + ref) ? 1 : -1;
}

CurvePoint curve_point(const CurveSpec& s, cplx nu, int sheet) {
  CurvePoint p;
  p.nu = nu;
  if (nu == cplx(0.0)) {
    p.tag = PointTag::P0;
    p.mu = 0.0;
    return p;
  }
  p.sheet = sheet >= 0 ? 1 : -1;
  p.mu = double(p.sheet) * mu_reference(s, nu);
  return p;
}

CurvePoint apply_involution(const CurveSpec& s, const CurvePoint& p, Involution which) {
  CurvePoint q = p;
  if (which == Involution::I) {
    q.mu = -p.mu;
    q.sheet = -p.sheet;
    return q;
  }
  if (p.tag == PointTag::P0 || p.tag == PointTag::Pinf) {
    q.tag = p.tag == PointTag::P0 ? PointTag::Pinf : PointTag::P0;
    q.nu = p.tag == PointTag::P0 ? cplx(INFINITY, 0.0) : cplx(0.0);
    q.mu = q.tag == PointTag::P0 ? cplx(0.0) : cplx(INFINITY, 0.0);
    return q;
  }
  const int g = s.genus();
  const cplx nb = std::conj(p.nu);
  q.nu = 1.0 / nb;
  q.mu = std::pow(nb, -(g + 1)) * s.c0 * std::conj(p.mu);
  q.sheet = sheet_of(s, q.nu, q.mu);
  return q;
}

CurvePoint rho_map(const CurveSpec& s, const PrimePoint& p) {
  if (p.lambda == cplx(0.0)) return curve_point(s, 0.0, 1);
  CurvePoint q;
  q.nu = p.lambda * p.lambda;
  q.mu = p.lambda * p.mut;
  q.sheet = sheet_of(s, q.nu, q.mu);
  return q;
}

CyclePath continue_mu(const CurveSpec& s, const std::vector<cplx>& path, int start_sheet, double eps) {
  if (path.empty()) throw Error("BadInput", "empty path");
  const auto E = s.finite_branch_points();
  CyclePath c;
  c.kind = "open";
  c.waypoints = path;
  c.mu.push_back((start_sheet >= 0 ? 1.0 : -1.0) * mu_reference(s, path[0]));
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    for (cplx e : E)
      if (seg_dist(e, path[i], path[i + 1]) < eps)
        throw Error("BranchTooClose", "path segment passes within eps of a branch point");
    c.mu.push_back(continue_segment(s, path[i], c.mu.back(), path[i + 1]));
  }
  for (size_t i = 0; i < path.size(); ++i) c.sheets.push_back(sheet_of(s, path[i], c.mu[i]));
  c.end_sheet = c.sheets.back();
  c.closed = path.size() > 1 && std::abs(path.back() - path.front()) < 1e-12 &&
             std::abs(c.mu.back() - c.mu.front()) <= 1e-9 * (1.0 + std::abs(c.mu.front()));
  return c;
}

std::vector<QuadNode> arc_nodes(const CurveSpec& s, const Arc& arc, int refine) {
  const auto E = s.finite_branch_points();
  const auto v = arc_vertices(arc, E);
  std::vector<QuadNode> out;
  branch_segment(E, arc.from, v[1], arc.c, 1.0, refine, out);
  cplx mu = arc.c * ratio_product(E, arc.from, v[1], E[size_t(arc.from)]);
  for (size_t i = 1; i + 2 < v.size(); ++i) {
    regular_segment(E, v[i], mu, v[i + 1], refine, out);
    mu = continue_segment(s, v[i], mu, v[i + 1]);
  }
  const cplx vl = v[v.size() - 2];
  const cplx cend = mu / ratio_product(E, arc.to, vl, E[size_t(arc.to)]);
  branch_segment(E, arc.to, vl, cend, -1.0, refine, out);
  return out;
}

std::vector<QuadNode> branch_path_nodes(const CurveSpec& s, int from, const std::vector<cplx>& vertices,
                                        cplx* mu_end, int refine) {
  if (vertices.empty()) throw Error("BadInput", "empty path");
  const auto E = s.finite_branch_points();
  const cplx e0 = E[size_t(from)];
  const cplx c = default_c(E, from, vertices[0]);
  std::vector<QuadNode> out;
  branch_segment(E, from, vertices[0], c, 1.0, refine, out);
  cplx mu = c * ratio_product(E, from, vertices[0], e0);
  for (size_t i = 0; i + 1 < vertices.size(); ++i) {
    regular_segment(E, vertices[i], mu, vertices[i + 1], refine, out);
    mu = continue_segment(s, vertices[i], mu, vertices[i + 1]);
  }
  if (mu_end) *mu_end = mu;
  return out;
}

std::vector<QuadNode> path_nodes(const CurveSpec& s, const std::vector<cplx>& vertices, cplx mu_start,
                                 cplx* mu_end, int refine) {
  const auto E = s.finite_branch_points();
  std::vector<QuadNode> out;
  cplx mu = mu_start;
  for (size_t i = 0; i + 1 < vertices.size(); ++i) {
    regular_segment(E, vertices[i], mu, vertices[i + 1], refine, out);
    mu = continue_segment(s, vertices[i], mu, vertices[i + 1]);
  }
  if (mu_end) *mu_end = mu;
  return out;
}

int arc_intersection(const CurveSpec& s, const Arc& x, const Arc& y) {
  const auto E = s.finite_branch_points();
  auto dir = [&](const Arc& a, int idx) {
    const double g0 = std::arg(g0_at(E, idx));
    if (a.from == idx) return std::arg(a.c) - g0;
    return std::arg(arc_end_c(s, a)) - g0 + kPi;
  };
  int total = 0;
  for (int idx : {x.from, x.to}) {
    if (idx != y.from && idx != y.to) continue;
    total += sgn(std::sin(dir(y, idx) - dir(x, idx)));
  }
  return total;
}

CycleSet build_cycles(const CurveSpec& s) {
  const int g = s.genus();
  if (s.min_separation() < 1e-6) throw Error("CutsIntersect", "branch points closer than 1e-6");
  CycleSet cs;
  cs.order.resize(size_t(g));
  std::iota(cs.order.begin(), cs.order.end(), 0);
  std::vector<double> th(static_cast<size_t>(g));
  for (int k = 0; k < g; ++k) th[size_t(k)] = std::arg(s.inner[size_t(k)]);
  std::sort(cs.order.begin(), cs.order.end(), [&](int a, int b) { return th[size_t(a)] < th[size_t(b)]; });
  for (int p = 0; p < g; ++p) {
    const double gap = p + 1 < g ? th[size_t(cs.order[size_t(p + 1)])] - th[size_t(cs.order[size_t(p)])]
                                 : th[size_t(cs.order[0])] + 2 * kPi - th[size_t(cs.order[size_t(p)])];
    if (g > 1 && gap < 1e-9) throw Error("CutsIntersect", "two radial cuts share a ray");
  }
  const auto E = s.finite_branch_points();
  auto inner_idx = [](int k) { return 1 + 2 * k; };
  auto outer_idx = [](int k) { return 2 + 2 * k; };
  auto make_arc = [&](int from, int to, std::vector<cplx> v) {
    Arc a;
    a.from = from;
    a.to = to;
    a.vertices = std::move(v);
    a.vertices.front() = E[size_t(from)];
    a.vertices.back() = E[size_t(to)];
    a.c = default_c(E, from, a.vertices.size() == 2 ? 0.5 * (a.vertices[0] + a.vertices[1]) : a.vertices[1]);
    return a;
  };
  for (int p = 0; p < g; ++p) {
    const int k = cs.order[size_t(p)];
    if (p == 0) {
      cs.chain.push_back(make_arc(0, inner_idx(k), {0.0, s.inner[size_t(k)]}));
    } else {
      const int kp = cs.order[size_t(p - 1)];
      const double t0 = th[size_t(kp)], t1 = th[size_t(k)], tm = 0.5 * (t0 + t1);
      auto v = rotation(std::abs(s.outer(kp)), t0, tm);
      auto w = rotation(std::abs(s.inner[size_t(k)]), tm, t1);
      v.insert(v.end(), w.begin(), w.end());
      cs.chain.push_back(make_arc(outer_idx(kp), inner_idx(k), v));
    }
    cs.chain.push_back(make_arc(inner_idx(k), outer_idx(k), {s.inner[size_t(k)], s.outer(k)}));
  }
  // orient so that C_i . C_{i+1} = +1 along the chain
  for (size_t i = 0; i + 1 < cs.chain.size(); ++i) {
    const int J = arc_intersection(s, cs.chain[i], cs.chain[i + 1]);
    if (J == 0) throw Error("CutsIntersect", "degenerate crossing in the cycle chain");
    cs.chain_signs.push_back(J);
    if (J < 0) cs.chain[i + 1].c = -cs.chain[i + 1].c;
  }
  cs.a.resize(size_t(g));
  cs.b.resize(size_t(g));
  auto fill_path = [&](CyclePath& c) {
    for (auto [coef, ai] : c.terms) {
      (void)coef;
      const Arc& arc = cs.chain[size_t(ai)];
      const auto v = arc_vertices(arc, E);
      cplx mu = 0.0;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i == 1) mu = arc.c * ratio_product(E, arc.from, v[1], E[size_t(arc.from)]);
        else if (i > 1 && i + 1 < v.size()) mu = continue_segment(s, v[i - 1], mu, v[i]);
        const bool end = i == 0 || i + 1 == v.size();
        c.waypoints.push_back(v[i]);
        c.mu.push_back(end ? cplx(0.0) : mu);
        c.sheets.push_back(end ? 0 : sheet_of(s, v[i], mu));
      }
    }
    c.closed = true;
  };
  // a_p = C_{2p}; b_p = -(C_1 + C_3 + ... + C_{2p-1}), giving a_p . b_p = +1
  for (int p = 0; p < g; ++p) {
    const int k = cs.order[size_t(p)];
    CyclePath& a = cs.a[size_t(k)];
    a.kind = "a";
    a.index = k;
    a.terms.push_back({1, 2 * p + 1});
    fill_path(a);
    CyclePath& b = cs.b[size_t(k)];
    b.kind = "b";
    b.index = k;
    for (int i = 0; i <= p; ++i) b.terms.push_back({-1, 2 * i});
    fill_path(b);
  }
  return cs;
}

cplx integrate_nodes(const std::vector<QuadNode>& nodes, const CurveIntegrand& f) {
  cplx s = 0.0;
  for (const auto& q : nodes) s += q.w * f(q.nu, q.mu);
  return s;
}

cplx integrate_cycle(const CurveSpec& s, const CycleSet& cs, const CyclePath& c, const CurveIntegrand& f,
                     int refine) {
  cplx total = 0.0;
  for (auto [coef, ai] : c.terms) {
    const auto nodes = arc_nodes(s, cs.chain[size_t(ai)], refine);
    cplx part = 0.0;
    for (const auto& q : nodes) part += q.w * (f(q.nu, q.mu) - f(q.nu, -q.mu));
    total += double(coef) * part;
  }
  return total;
}

std::vector<cplx> cycle_moments(const CurveSpec& s, const CycleSet& cs, const CyclePath& c, int kmin, int kmax,
                                int refine) {
  if (kmin < -1 || kmax < kmin) throw Error("BadInput", "moment window must satisfy -1 <= kmin <= kmax");
  const int g = s.genus();
  // nu^{-1} dnu/mu is not integrable at P0 along C_1. With Q = prod(nu - nu_k),
  // d(mu/nu) = (nu Q' - Q)/(2 nu mu) dnu, so on closed cycles
  // int nu^{-1} dnu/mu = (1/Q(0)) sum_j j Q_{j+1} int nu^j dnu/mu.
  const int lo = std::max(kmin, 0), hi = kmin < 0 ? std::max(kmax, 2 * g - 1) : kmax;
  std::vector<cplx> raw(size_t(hi - lo + 1), 0.0);
  for (auto [coef, ai] : c.terms) {
    for (const auto& q : arc_nodes(s, cs.chain[size_t(ai)], refine)) {
      const cplx base = 2.0 * double(coef) * q.w / q.mu;
      cplx p = std::pow(q.nu, lo);
      for (auto& v : raw) {
        v += base * p;
        p *= q.nu;
      }
    }
  }
  std::vector<cplx> m;
  if (kmin < 0) {
    Poly Q{1.0};
    for (cplx e : s.branch_points()) Q = poly_mul(Q, Poly{-e, 1.0});
    cplx acc = 0.0;
    for (int j = 1; j <= 2 * g - 1; ++j) acc += double(j) * Q[size_t(j + 1)] * raw[size_t(j)];
    m.push_back(acc / Q[0]);
  }
  for (int k = lo; k <= kmax; ++k) m.push_back(raw[size_t(k - lo)]);
  return m;
}

std::vector<cplx> loop_around_segment(cplx e, cplx f, double h, int n_cap) {
  const cplx u = (f - e) / std::abs(f - e);
  std::vector<cplx> v;
  for (int i = 0; i <= n_cap; ++i) v.push_back(f + h * u * std::polar(1.0, -kPi / 2 + kPi * i / n_cap));
  for (int i = 0; i <= n_cap; ++i) v.push_back(e + h * u * std::polar(1.0, kPi / 2 + kPi * i / n_cap));
  v.push_back(v.front());
  return v;
}

cplx CurveFunction::eval(const CurvePoint& p) const {
  cplx v = f1.eval(p.nu);
  if (!f2.is_zero()) v += f2.eval(p.nu) * p.mu;
  return v;
}

CurveFunction star(const CurveSpec& s, const CurveFunction& f) {
  CurveFunction r;
  r.f1 = star(f.f1);
  if (!f.f2.is_zero())
    r.f2 = scale(star(f.f2) * RationalFn::monomial(1.0, -(s.genus() + 1)), std::conj(s.c0));
  return r;
}

cplx lift_to_prime(const CurveSpec& s, const CurveFunction& f, const PrimePoint& p) {
  (void)s;
  const cplx nu = p.lambda * p.lambda;
  cplx v = f.f1.eval(nu);
  if (!f.f2.is_zero()) v += f.f2.eval(nu) * p.lambda * p.mut;
  return v;
}

Eigen::MatrixXcd period_matrix(const CurveSpec& s, const CycleSet& cs, int refine) {
  const int g = s.genus();
  Eigen::MatrixXcd A(g, g), B(g, g);
  for (int j = 0; j < g; ++j) {
    auto ma = cycle_moments(s, cs, cs.a[size_t(j)], 0, g - 1, refine);
    auto mb = cycle_moments(s, cs, cs.b[size_t(j)], 0, g - 1, refine);
    for (int k = 0; k < g; ++k) {
      A(k, j) = ma[size_t(k)];
      B(k, j) = mb[size_t(k)];
    }
  }
  // rows: differentials, columns: cycles
  return (A.inverse() * B).transpose();
}

}  // namespace cmc

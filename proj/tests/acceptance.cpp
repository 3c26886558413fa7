// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if all pass.
#include <Eigen/Dense>
#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cmc/cli.hpp"
#include "cmc/construct.hpp"
#include "cmc/flows.hpp"
#include "helpers.hpp"

using namespace cmc;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs one criterion; exceptions count as failures.
void criterion(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  detail.precision(3);
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const Error& e) {
    detail << "error " << e.code() << ": " << e.what();
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(name, pass, detail.str(), s);
}

std::vector<cplx> circle(int n, double rad = 1.0, double phase = 0.05) {
  std::vector<cplx> v;
  for (int k = 0; k < n; ++k) v.push_back(std::polar(rad, phase + 2 * kPi * k / n));
  return v;
}

FamilyParams family(const std::vector<cplx>& inner, const std::vector<int>& m) {
  FamilyParams fp;
  fp.curve = build_curve(inner);
  auto cs = build_cycles(fp.curve);
  auto pr = periods_U(fp.curve, cs, build_omega1(fp.curve, cs), build_omega2(fp.curve, cs));
  fp.q = solve_q(pr.U, m).q;
  return fp;
}

const ConstructedData& genus1() {
  static const ConstructedData cd = assemble_family(family({0.25}, {0}));
  return cd;
}

const ConstructedData& genus2() {
  static const ConstructedData cd = assemble_family(family({cplx(0.3, 0.2), -0.4}, {1, 0}));
  return cd;
}

const ZGrid& small_grid() {
  static const ZGrid g = ZGrid::square(6, 6, 0.3);
  return g;
}

const FrameGrid& dressed(const ConstructedData& cd) {
  static std::map<const ConstructedData*, FrameGrid> cache;
  auto it = cache.find(&cd);
  if (it == cache.end()) it = cache.emplace(&cd, dress(cd.hplus.loop, small_grid())).first;
  return it->second;
}

template <class T>
double vmax(const std::vector<T>& v, const std::function<double(const T&)>& f) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, f(x));
  return m;
}

// Kasa circle fit in the plane orthogonal to d; returns max |distance - R| and R.
std::pair<double, double> cylinder_fit(const std::vector<std::array<double, 3>>& pts, Eigen::Vector3d d) {
  d.normalize();
  Eigen::Vector3d e1 = d.unitOrthogonal(), e2 = d.cross(e1);
  const int n = int(pts.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  std::vector<Eigen::Vector2d> p2(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x(pts[i][0], pts[i][1], pts[i][2]);
    p2[i] = {x.dot(e1), x.dot(e2)};
    A.row(i) << 2 * p2[i].x(), 2 * p2[i].y(), 1.0;
    b(i) = p2[i].squaredNorm();
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  const Eigen::Vector2d c(s(0), s(1));
  const double R = std::sqrt(s(2) + c.squaredNorm());
  double dev = 0.0;
  for (const auto& p : p2) dev = std::max(dev, std::abs((p - c).norm() - R));
  return {dev, R};
}

void factorization() {
  criterion("factorization round trip", [](std::ostringstream& d) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
    double res = 0.0, unit = 0.0, agree = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      auto g = testing::random_twisted_loop(rng, 0.5);
      FactorOptions o0, o1;
      o1.seed = 1;
      auto a = iwasawa(g, o0);
      auto b = iwasawa(g, o1);
      // residual at fresh points of C_r
      double r = a.residual;
      for (int j = 0; j < 64; ++j) {
        const cplx l = std::polar(g.r, ang(rng));
        r = std::max(r, maxabs(g.eval(l) - a.unitary_part.eval(l) * a.plus_part.eval(l)));
      }
      res = std::max(res, r);
      for (int j = 0; j < 64; ++j) {
        const cplx l = std::polar(1.0, ang(rng));
        const Mat2 F = a.unitary_part.eval(l);
        unit = std::max(unit, maxabs(F.adjoint() * F - Mat2::Identity()));
        agree = std::max(agree, maxabs(F - b.unitary_part.eval(l)));
      }
    }
    d << "100 loops, residual " << res << ", unitarity " << unit << ", seed agreement " << agree;
    return res < 1e-9 && unit < 1e-8 && agree < 1e-8;
  });
}

// Shared between the cylinder and Maurer-Cartan criteria.
struct CylinderRun {
  FrameGrid fg;
  PotentialSample pot;
  MetricSample ms;
};

const CylinderRun& cylinder_run() {
  static const CylinderRun run = [] {
    CylinderRun c;
    c.fg = dress(LoopMatrix::identity(0.5), ZGrid::square(32, 32, 1.0));
    c.pot = extract_potential(c.fg);
    c.ms = extract_metric(c.fg, &c.pot);
    return c;
  }();
  return run;
}

void cylinder() {
  criterion("cylinder exactness", [](std::ostringstream& d) {
    const auto& c = cylinder_run();
    const auto& grid = c.fg.grid;
    double frame = 0.0;
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        for (int k = 0; k < 16; ++k) {
          const cplx lam = std::polar(1.0, 0.3 + 2 * kPi * k / 16);
          frame = std::max(frame, maxabs(c.fg.frames[grid.index(i, j)].eval(lam) - cylinder_value(grid.at(i, j), lam)));
        }
    auto mesh = surface_mesh(c.fg, 1.0);
    // axis direction: translation between neighbouring columns
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    for (int j = 0; j < grid.ny; ++j) {
      const auto& p = mesh.vertices[size_t(grid.index(1, j))];
      const auto& q = mesh.vertices[size_t(grid.index(0, j))];
      axis += Eigen::Vector3d(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
    }
    auto [dev, R] = cylinder_fit(mesh.vertices, axis);
    const double radius = std::max(dev, std::abs(R - 0.25));
    double u = 0.0, f = 0.0, E = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      u = std::max(u, std::abs(c.ms.u[size_t(i)]));
      f = std::max(f, std::abs(c.pot.f[size_t(i)] - 1.0));
      E = std::max(E, std::abs(c.pot.E[size_t(i)] - 1.0));
    }
    d << "32x32 grid, frame error " << frame << ", radius " << R << " (max |d - 0.25| " << radius << "), |u| "
      << u << ", |f - 1| " << f << ", |E - 1| " << E;
    return frame < 1e-10 && radius < 1e-6 && u < 1e-8 && f < 1e-10 && E < 1e-10;
  });
}

void maurer_cartan() {
  criterion("Maurer-Cartan shape", [](std::ostringstream& d) {
    bool ok = true;
    auto one = [&](const char* name, const MetricSample& ms) {
      const double ob = vmax<double>(ms.off_band, [](const double& x) { return x; });
      const double rg = vmax<double>(ms.reality_gap, [](const double& x) { return x; });
      d << name << " off-band " << ob << " reality " << rg << "; ";
      ok = ok && ob < 1e-6 && rg < 1e-6;
    };
    one("cylinder", cylinder_run().ms);
    one("genus 1", extract_metric(dressed(genus1())));
    one("genus 2", extract_metric(dressed(genus2())));
    return ok;
  });
}

void hopf() {
  criterion("Hopf invariance", [](std::ostringstream& d) {
    bool ok = true;
    for (const ConstructedData* cd : {&genus1(), &genus2()}) {
      auto pot = extract_potential(dressed(*cd));
      double e = 0.0;
      int n = 0;
      for (size_t i = 0; i < pot.E.size(); ++i)
        if (pot.valid[i]) {
          e = std::max(e, std::abs(pot.E[i] - 1.0));
          ++n;
        }
      d << "genus " << cd->params.curve.genus() << ": |E - 1| " << e << " at " << n << " points; ";
      ok = ok && n > 0 && e < 1e-6;
    }
    return ok;
  });
}

void identities() {
  criterion("constructed-data identities", [](std::ostringstream& d) {
    bool ok = true;
    for (const ConstructedData* cdp : {&genus1(), &genus2()}) {
      const auto& cd = *cdp;
      const auto& sd = cd.sd;
      double abc = 0.0;
      for (cplx l : circle(64, cd.r_final)) {
        const cplx a = sd.a(l), b = sd.b(l), c = sd.c(l);
        abc = std::max(abc, std::abs(a * a + b * c - 1.0));
      }
      double bc2 = cd.bc.identity_gap;
      for (double rad : {0.5, 1.0, 1.7})
        for (cplx x : circle(16, rad, 0.2)) {
          const cplx om = 1.0 - cd.a2.eval(x);
          bc2 = std::max(bc2, std::abs(cd.b2.eval(x) * cd.c2.eval(x) - om * om) / std::max(1.0, std::abs(om * om)));
        }
      const double bc0 = std::abs(sd.b(0.0) * sd.c(0.0) - 1.0);
      double a_lo = 0.0, a_hi = 0.0, b2_pos = 0.0;
      for (cplx l : circle(512)) {
        const cplx a2 = cd.a2.eval(l * l);
        a_lo = std::max(a_lo, -a2.real());
        a_hi = std::max(a_hi, a2.real());
        b2_pos = std::max(b2_pos, sd.two_sided(l).beta2.real());
      }
      d << "genus " << cd.params.curve.genus() << ": a^2+bc " << abc << ", b^2c^2 " << bc2 << ", b(0)c(0) " << bc0
        << ", |beta| at branch " << cd.beta_at_branch << ", max a^2 " << a_hi << "; ";
      ok = ok && abc < 1e-12 && bc2 < 1e-10 && bc0 < 1e-12 && cd.beta_at_branch < 1e-8 && a_lo <= 1e-14 &&
           a_hi < 1.0 && b2_pos <= 1e-12;
    }
    return ok;
  });
}

void periods() {
  criterion("period machinery", [](std::ostringstream& d) {
    double aper = 0.0, uv = 0.0, refine = 0.0;
    for (auto pts : std::vector<std::vector<cplx>>{{0.25}, {cplx(0.3, 0.2), -0.4}, {0.5, cplx(0, 0.6), cplx(-0.3, -0.3)}}) {
      auto s = build_curve(pts);
      auto cs = build_cycles(s);
      auto o1 = build_omega1(s, cs), o2 = build_omega2(s, cs);
      auto w = build_omega_q(o1, o2, cplx(0.7, -1.3));
      for (const auto* x : {&o1, &w})
        for (cplx a : cycle_periods(s, cs, cs.a, *x)) aper = std::max(aper, std::abs(a));
      auto rep = periods_U(s, cs, o1, o2);
      uv = std::max(uv, rep.uv_gap);
      auto fine = periods_U(s, cs, build_omega1(s, cs, 2), build_omega2(s, cs, 2), 2);
      for (size_t k = 0; k < rep.U.size(); ++k) refine = std::max(refine, std::abs(fine.U[k] - rep.U[k]));
    }
    double c0 = 0.0, oracle = 0.0;
    for (double r : {0.3, 0.5, 0.7})
      for (double phi : {0.0, kPi / 3}) {
        const cplx nu1 = std::polar(r, phi);
        auto s = build_curve({nu1});
        auto o1 = build_omega1(s, build_cycles(s));
        const double k = std::sqrt(1.0 - r * r);
        auto [K, E] = elliptic_KE(k);
        const cplx want = -std::polar(1.0, phi) / (2 * r) * E / K;
        c0 = std::max(c0, std::abs(o1.coeff(0) - want));
        oracle = std::max({oracle, std::abs(K - boost::math::ellint_1(k)), std::abs(E - boost::math::ellint_2(k))});
      }
    d << "a-periods " << aper << ", |V - conj U| " << uv << ", refinement " << refine << ", c0 vs AGM " << c0
      << ", AGM vs Boost " << oracle;
    return aper < 1e-8 && uv < 1e-8 && refine < 1e-9 && c0 < 1e-6 && oracle < 1e-12;
  });
}

void no_torus() {
  criterion("genus-1 no-torus", [](std::ostringstream& d) {
    double margin = 1e300;
    bool agm_ok = true;
    for (int i = 1; i <= 9; ++i) {
      const double r = 0.1 * i, k = std::sqrt(1.0 - r * r);
      auto [K, E] = elliptic_KE(k);
      const double ratio = E / (r * K);
      agm_ok = agm_ok && std::abs(ratio - boost::math::ellint_2(k) / (r * boost::math::ellint_1(k))) < 1e-12;
      margin = std::min(margin, ratio - 1.0);
    }
    int tested = 0, no = 0;
    const std::string path = "acceptance_curve.json";
    for (double r : {0.1, 0.25, 0.5, 0.7, 0.9})
      for (double phi : {0.0, kPi / 3, 2.5}) {
        std::ofstream(path) << dump(curve_to_json(build_curve({std::polar(r, phi)})));
        std::ostringstream out, err;
        const int code = run_cli({"check-torus", "--curve", path}, out, err);
        ++tested;
        if (code == kExitVerdict && json::parse(out.str())["result"]["verdict"] == "no-torus") ++no;
      }
    std::remove(path.c_str());
    d << "min E/(rK) - 1 over r = 0.1..0.9: " << margin << "; check-torus no-torus " << no << "/" << tested;
    return agm_ok && margin > 0.0 && no == tested;
  });
}

void symmetry() {
  criterion("symmetry end-to-end", [](std::ostringstream& d) {
    bool ok = true;
    auto sub = ZGrid::square(16, 16, 0.3);
    std::vector<cplx> zs;
    for (int i = 0; i < sub.size(); ++i) zs.push_back(sub.at(i % sub.nx, i / sub.nx));
    for (const ConstructedData* cd : {&genus1(), &genus2()}) {
      Dresser dr(cd->hplus.loop);
      const cplx q = cd->params.q;
      auto chi = build_chi(cd->sd);
      auto tc = verify_translation(dr, q, chi, zs, 16);
      double du = 0.0;
      for (cplx z : {cplx(0.0), cplx(0.2, 0.1), cplx(-0.3, 0.25), cplx(0.15, -0.3)})
        du = std::max(du, std::abs(metric_u_at(dr, z + q, -2.0) - metric_u_at(dr, z, -2.0)));
      auto neg = verify_translation(dr, q + 0.1, chi, {zs[0], zs[100], zs[200]}, 16);
      d << "genus " << cd->params.curve.genus() << ": residual " << tc.residual << " over " << tc.pairs
        << " points, u periodicity " << du << ", perturbed q " << neg.residual << "; ";
      ok = ok && tc.residual < 1e-6 && du < 1e-5 && neg.residual >= 1e-2;
    }
    return ok;
  });
}

void closing() {
  criterion("closing-order detector", [](std::ostringstream& d) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int right = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
      const int order = t % 2 ? 4 : 2;
      const cplx l0 = std::polar(1.0, kPi * U(rng));
      // positive weight w = c + sum (a_j l^j + conj(a_j) l^-j) on S^1
      std::vector<cplx> a;
      for (int j = 0; j < 3; ++j) a.push_back(cplx(0.2 * U(rng), 0.2 * U(rng)));
      const double c = 1.5 + 0.5 * U(rng);
      ScalarFn beta2 = [=](cplx l) {
        cplx w = c;
        for (int j = 0; j < 3; ++j) w += a[size_t(j)] * std::pow(l, j + 1) + std::conj(a[size_t(j)]) * std::pow(l, -(j + 1));
        // |l - l0|^2 on S^1
        const cplx s = 2.0 - l / l0 - l0 / l;
        return -std::pow(s, order / 2) * w;
      };
      auto res = closing_test(beta2, l0);
      const std::string want = order == 2 ? "chi_is_pm_I" : "fully_closed";
      if (res.verdict == want && res.order == order) ++right;
    }
    d << right << "/" << trials << " classified (orders 2 and 4)";
    return right == trials;
  });
}

void finite_type() {
  criterion("finite-type certificate", [](std::ostringstream& d) {
    const auto& cd = genus1();
    const std::vector<cplx> zs = {cplx(0.0), cplx(0.2, 0.1), cplx(-0.3, 0.25)};
    bool ok = true;
    double flow = 0.0, metric = 0.0;
    std::map<int, FiniteTypeCertificate> certs;
    for (int N : {2, 3, 4}) {
      auto c = certify_finite_type(cd.params.curve, cd.sd, cd.hplus.loop, N, zs);
      flow = std::max(flow, c.flow_residual);
      metric = std::max(metric, c.metric_residual);
      ok = ok && c.trivial;
      certs[N] = c;
    }
    // (h # t2 z2) # t3 z3 = h # (t2 z2 + t3 z3) = (h # t3 z3) # t2 z2
    auto scaled = [&](int N) {
      auto g = finite_type_generators(cd.params.curve, cd.sd, N).zeta;
      const double t = certs[N].t;
      return FlowGenerator{[g, t](cplx l) { return t * g.phi_hat(l); }, g.pole_order};
    };
    const auto z2 = scaled(2), z3 = scaled(3);
    const auto& h = cd.hplus.loop;
    auto x = apply_flow(apply_flow(h, z2, 1.0).hplus, z3, 1.0).hplus;
    auto y = apply_flow(h, add(z2, z3), 1.0).hplus;
    auto w = apply_flow(apply_flow(h, z3, 1.0).hplus, z2, 1.0).hplus;
    double add_gap = 0.0;
    for (cplx l : circle(48, 0.9 * h.r, 0.01))
      add_gap = std::max({add_gap, maxabs(x.eval(l) - y.eval(l)), maxabs(w.eval(l) - y.eval(l))});
    d << "genus 1, N = 2,3,4: flow residual " << flow << ", metric " << metric << ", additivity " << add_gap;
    return ok && flow < 1e-6 && metric < 1e-6 && add_gap < 1e-8;
  });
}

void riemann() {
  criterion("Riemann relations", [](std::ostringstream& d) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> rad(0.2, 0.8), U(-1.0, 1.0);
    double asym = 0.0, min_eig = 1e300;
    int curves = 0;
    for (int g = 1; g <= 3; ++g)
      for (int trial = 0; trial < 4; ++trial) {
        // arguments spread around the circle with jitter
        std::vector<cplx> pts;
        const double base = kPi * U(rng);
        for (int k = 0; k < g; ++k) pts.push_back(std::polar(rad(rng), base + 2 * kPi * k / g + 0.4 * U(rng) / g));
        auto s = build_curve(pts);
        auto cs = build_cycles(s);
        auto tau = period_matrix(s, cs);
        asym = std::max(asym, (tau - tau.transpose()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tau.imag());
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        ++curves;
      }
    d << curves << " curves of genus 1-3, asymmetry " << asym << ", min eigenvalue of Im tau " << min_eig;
    return asym < 1e-8 && min_eig > 0.0;
  });
}

}  // namespace

int main() {
  factorization();
  cylinder();
  maurer_cartan();
  hopf();
  identities();
  periods();
  no_torus();
  symmetry();
  closing();
  finite_type();
  riemann();
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "cmc/dpw.hpp"
#include "doctest.h"

using namespace cmc;

namespace {
// exp(pA) for A = [[0,1],[1,0]] in closed form
Mat2 expA(cplx p) {
  Mat2 m;
  m << std::cosh(p), std::sinh(p), std::sinh(p), std::cosh(p);
  return m;
}
}  // namespace

TEST_CASE("cylinder_frame matches the matrix exponential") {
  for (cplx z : {cplx(0.0), cplx(0.3, -0.2), cplx(-1.5, 1.1), cplx(2.0, 2.0)}) {
    auto E = cylinder_frame(z, 0.5, 64);
    CHECK(E.twisted);
    CHECK(twist_violation(E.coeffs) == 0.0);
    for (cplx lam : {cplx(1.0), std::polar(1.0, 0.7), std::polar(0.5, -2.0), std::polar(0.7, 3.0)}) {
      const Mat2 ref = expA(z / lam - lam * std::conj(z));
      CHECK(maxabs(E.eval(lam) - ref) < 1e-12 * std::max(1.0, maxabs(ref)));
    }
  }
  auto I0 = cylinder_frame(0.0, 0.5, 32);
  CHECK(I0.coeffs.size() == 1);
  CHECK(maxabs(I0.coeff(0) - Mat2::Identity()) == 0.0);
  const double y = 0.35;
  Mat2 ref;
  ref << std::cos(2 * y), kI * std::sin(2 * y), kI * std::sin(2 * y), std::cos(2 * y);
  CHECK(maxabs(cylinder_frame(cplx(0, y), 0.5, 32).eval(1.0) - ref) < 1e-14);
  CHECK(maxabs(cylinder_frame(0.8, 0.5, 32).eval(1.0) - Mat2::Identity()) < 1e-14);
}

TEST_CASE("dressing by the identity reproduces the cylinder") {
  auto grid = ZGrid::square(8, 8, 2.0);
  auto fg = dress(LoopMatrix::identity(0.5), grid);
  CHECK(fg.max_unitarity < 1e-10);
  CHECK(fg.initial_error < 1e-12);
  double err = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      for (int k = 0; k < 16; ++k) {
        const cplx lam = std::polar(1.0, 0.3 + 2 * kPi * k / 16);
        err = std::max(err, maxabs(fg.frames[grid.index(i, j)].eval(lam) - cylinder_value(grid.at(i, j), lam)));
      }
  CHECK(err < 1e-10);
}

TEST_CASE("sym formula") {
  double im = 1.0;
  auto x = sym_point(Mat2::Identity(), Mat2::Zero(), -2.0, &im);
  CHECK(std::abs(x[0]) < 1e-15);
  CHECK(std::abs(x[1]) < 1e-15);
  CHECK(std::abs(x[2] + 0.25) < 1e-15);
  CHECK(im < 1e-15);
  CHECK_THROWS_AS(sym_point(Mat2::Identity(), Mat2::Zero(), 0.0), Error);
  CHECK_THROWS_AS(sym_point(2.0 * Mat2::Identity(), Mat2::Zero(), -2.0), Error);

  // cylinder at lambda = 1: x_1 = Re z, (x_2, x_3) = -(sin 4y, cos 4y)/4
  for (cplx z : {cplx(0.3, 0.1), cplx(-1.2, 0.9), cplx(1.7, -1.4)}) {
    auto p = sym_point(cylinder_frame(z, 1.0, 60), 1.0, -2.0, &im);
    CHECK(std::abs(p[0] - z.real()) < 1e-12);
    CHECK(std::abs(p[1] + 0.25 * std::sin(4 * z.imag())) < 1e-12);
    CHECK(std::abs(p[2] + 0.25 * std::cos(4 * z.imag())) < 1e-12);
    CHECK(im < 1e-12);
  }
}

TEST_CASE("cylinder potential and metric") {
  auto grid = ZGrid::square(5, 5, 1.0);
  auto fg = dress(LoopMatrix::identity(0.5), grid);
  auto pot = extract_potential(fg);
  CHECK(pot.poles.empty());
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(pot.f[i] - 1.0) < 1e-10);
    CHECK(std::abs(pot.E[i] - 1.0) < 1e-10);
    CHECK(pot.off_band[i] < 1e-8);
  }
  auto ms = extract_metric(fg, &pot);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(ms.u[i]) < 1e-8);
    CHECK(ms.off_band[i] < 1e-8);
    CHECK(ms.reality_gap[i] < 1e-8);
  }
  CHECK(ms.max_residual < 1e-6);
  CHECK(std::isnan(ms.residual[0]));
  CHECK_THROWS_AS(extract_metric(dress(LoopMatrix::identity(0.5), ZGrid::square(2, 5, 1.0))), Error);
}

TEST_CASE("dressed frames: normalization, unitarity, Maurer-Cartan shape") {
  // h_+ = I + lambda * [[0, 0.3],[0.2i, 0]] (twisted plus loop)
  Mat2 h1 = Mat2::Zero();
  h1(0, 1) = 0.3;
  h1(1, 0) = cplx(0, 0.2);
  auto h = make_loop({{0, Mat2::Identity()}, {1, h1}}, 0.5, true);
  auto grid = ZGrid::square(4, 4, 1.0);
  auto fg = dress(h, grid);
  CHECK(fg.max_unitarity < 1e-8);
  CHECK(fg.initial_error < 1e-9);
  auto ms = extract_metric(fg);
  auto pot = extract_potential(fg);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(ms.off_band[i] < 1e-6);
    CHECK(ms.reality_gap[i] < 1e-6);
    CHECK(ms.u_exact_gap[i] < 1e-7);
    if (pot.valid[i]) CHECK(std::abs(pot.E[i] - 1.0) < 1e-6);
  }
}

TEST_CASE("r-independence of dressing") {
  Mat2 h1 = Mat2::Zero();
  h1(0, 1) = 0.4;
  h1(1, 0) = -0.1;
  auto ha = make_loop({{0, Mat2::Identity()}, {1, h1}}, 0.5, true);
  auto hb = ha;
  hb.r = 0.7;
  Dresser da(ha), db(hb);
  for (cplx z : {cplx(0.4, -0.3), cplx(-1.0, 0.8)}) {
    auto Fa = da.frame_loop(z), Fb = db.frame_loop(z);
    for (int k = 0; k < 12; ++k) {
      const cplx lam = std::polar(1.0, 0.5 * k);
      CHECK(maxabs(Fa.eval(lam) - Fb.eval(lam)) < 1e-8);
    }
  }
}

TEST_CASE("mesh export and mean curvature of a dressed surface") {
  Mat2 h1 = Mat2::Zero();
  h1(0, 1) = 0.3;
  h1(1, 0) = 0.25;
  auto h = make_loop({{0, Mat2::Identity()}, {1, h1}}, 0.5, true);
  ZGrid grid;
  grid.nx = grid.ny = 9;
  grid.x0 = 0.2;
  grid.y0 = -0.1;
  grid.dx = grid.dy = 0.01;
  auto fg = dress(h, grid);
  for (cplx lam : {cplx(1.0), std::polar(1.0, 1.1)}) {
    auto mesh = surface_mesh(fg, lam);
    CHECK(mesh.vertices.size() == size_t(grid.size()));
    CHECK(mesh.faces.size() == size_t(2 * 8 * 8));
    CHECK(mesh.imag_residue < 1e-8);
    auto H = mesh_mean_curvature(mesh, grid);
    for (int j = 1; j < 8; ++j)
      for (int i = 1; i < 8; ++i) CHECK(std::abs(std::abs(H[grid.index(i, j)]) - 2.0) < 1e-3);
  }
  auto mesh = surface_mesh(fg, 1.0);
  const std::string path = "test_dpw_mesh.obj";
  write_obj(mesh, path);
  std::ifstream in(path);
  int v = 0, f = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  CHECK(v == grid.size());
  CHECK(f == 128);
  std::remove(path.c_str());
}

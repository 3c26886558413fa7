#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cmc/factor.hpp"
#include "cmc/loops.hpp"

namespace cmc {

struct ZGrid {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
  cplx at(int i, int j) const { return {x0 + i * dx, y0 + j * dy}; }
  int index(int i, int j) const { return j * nx + i; }
  int size() const { return nx * ny; }
  // nx by ny lattice covering [-extent, extent]^2
  static ZGrid square(int nx, int ny, double extent);
};

struct DressOptions {
  int M = 0;             // nodes on C_r and S^1 (0: chosen from the seed and |z|)
  int Ms = 128;          // node count used by derivative-based extraction
  double H = -2.0;
  double fd_h = 0.02;    // base step of the Richardson-extrapolated derivatives
  double coeff_tol = 1e-17;
  FactorOptions factor;
};

// Dressing of the cylinder by a fixed plus loop, evaluated point by point.
class Dresser {
 public:
  explicit Dresser(const LoopMatrix& hplus, const DressOptions& opt = {});
  // hplus given by its values on C_r
  Dresser(std::function<Mat2(cplx)> hplus_fn, double r, bool twisted, const DressOptions& opt = {});

  struct Point {
    Samples F;        // normalized unitary frame on S^1, node count M(z)
    Mat2 p0;          // constant term of the plus factor
    std::string method;
  };
  Point frame(cplx z) const;
  // F at the Ms standard nodes of S^1
  Samples frame_std(cplx z, Mat2* p0 = nullptr) const;
  LoopMatrix frame_loop(cplx z) const;
  LoopMatrix to_loop(const Samples& F) const;

  double r() const { return r_; }
  bool twisted() const { return twisted_; }
  const DressOptions& options() const { return opt_; }
  int nodes_for(cplx z) const;

 private:
  const Samples& h_samples(int M) const;
  Point raw_frame(cplx z) const;

  std::function<Mat2(cplx)> hfn_;
  LoopMatrix hloop_;
  bool from_loop_ = false;
  double r_;
  bool twisted_;
  int M_base_;
  DressOptions opt_;
  LoopMatrix F0_;  // unnormalized frame at z = 0 (a constant unitary up to rounding)
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<Samples>> hcache_;
};

struct FrameGrid {
  ZGrid grid;
  std::vector<LoopMatrix> frames;
  LoopMatrix seed;
  double H = -2.0;
  double max_unitarity = 0.0;   // sup |F^*F - I| over grid and S^1 nodes
  double initial_error = 0.0;   // sup |F(0) - I| on S^1
};

LoopMatrix cylinder_frame(cplx z, double r, int N);

FrameGrid dress(const LoopMatrix& hplus, const ZGrid& grid, const DressOptions& opt = {});
FrameGrid dress_with(const Dresser& d, const LoopMatrix& seed, const ZGrid& grid);

// Sym's formula; returns the point of R^3 and (optionally) the imaginary residue.
std::array<double, 3> sym_point(const LoopMatrix& F, cplx lambda0, double H, double* imag_residue = nullptr);
std::array<double, 3> sym_point(const Mat2& F, const Mat2& Ftheta, double H, double* imag_residue = nullptr);
std::array<double, 3> frame_normal(const Mat2& F);

struct SurfaceMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;  // 0-based
  std::vector<std::array<double, 3>> normals;
  std::vector<double> u;                  // optional per-vertex scalar channel
  cplx lambda = 1.0;
  double imag_residue = 0.0;
};

SurfaceMesh surface_mesh(const FrameGrid& fg, cplx lambda0);
void write_obj(const SurfaceMesh& m, const std::string& path);
// Mean curvature from the mesh by finite differences of the immersion (interior nodes).
std::vector<double> mesh_mean_curvature(const SurfaceMesh& m, const ZGrid& grid);

// Richardson-extrapolated partial derivatives (d/dx, d/dy) of a sample-valued map.
std::pair<Samples, Samples> fd_partials(const std::function<Samples(cplx)>& f, cplx z, double h);

struct PotentialSample {
  std::vector<cplx> f, E;
  std::vector<double> off_band;  // largest xi coefficient away from degree -1
  std::vector<cplx> poles;
  std::vector<bool> valid;
};

PotentialSample extract_potential(const FrameGrid& fg, const DressOptions& opt = {});

struct MetricSample {
  std::vector<double> u;
  std::vector<cplx> E;              // Hopf coefficient read off the lambda^{-1} block
  std::vector<double> u_exact_gap;  // |u - u from p_+(0)| per node
  std::vector<double> residual;     // sinh-Gordon residual, NaN on the boundary
  std::vector<double> off_band;     // Maurer-Cartan coefficients outside {-1,0,1}
  std::vector<double> reality_gap;  // |alpha_1 + conj(alpha_{-1})^T|
  double max_residual = 0.0;
};

MetricSample extract_metric(const FrameGrid& fg, const PotentialSample* pot = nullptr, const DressOptions& opt = {});
// u at arbitrary points (no grid needed)
double metric_u_at(const Dresser& d, cplx z, double H);

}  // namespace cmc

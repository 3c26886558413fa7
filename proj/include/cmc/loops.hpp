#pragma once

#include <map>
#include <vector>

#include "cmc/types.hpp"

namespace cmc {

// Truncated Laurent series of 2x2 matrices; radius is metadata only.
struct LoopMatrix {
  std::map<int, Mat2> coeffs;
  double r = 1.0;
  int N = 32;
  bool twisted = false;
  double tail = 0.0;  // largest dropped coefficient norm (truncation residual estimate)

  Mat2 eval(cplx lambda) const;
  Mat2 deriv_theta(cplx lambda0) const;
  Mat2 coeff(int n) const;
  int min_degree() const;
  int max_degree() const;
  static LoopMatrix identity(double r = 1.0, int N = 32);
};

enum class Parity { Even, Odd, None };

struct ScalarLoop {
  std::map<int, cplx> coeffs;
  double r = 1.0;
  int N = 32;
  Parity parity = Parity::None;
  double tail = 0.0;

  cplx eval(cplx lambda) const;
  cplx coeff(int n) const;
  // largest coefficient violating the declared parity
  double parity_violation() const;
};

// Largest entry that violates the twisting pattern.
double twist_violation(const std::map<int, Mat2>& coeffs);

LoopMatrix make_loop(const std::map<int, Mat2>& coeffs, double r, bool twisted, int N = -1);
LoopMatrix multiply(const LoopMatrix& g, const LoopMatrix& h);
LoopMatrix star(const LoopMatrix& g);
// Inverse through the adjugate; exact for det == 1.
LoopMatrix inverse_adj(const LoopMatrix& g);
Mat2 eval(const LoopMatrix& g, cplx lambda);
Mat2 deriv_theta(const LoopMatrix& g, cplx lambda0);

// Largest coefficient norm with |n| > n0.
double tail_norm(const LoopMatrix& g, int n0);

}  // namespace cmc

#pragma once

#include <random>

#include "cmc/loops.hpp"

namespace cmc::testing {

// Random twisted det-1 loop diag(d,1/d)[[1,u],[0,1]][[1,0],[l,1]] with odd
// Laurent polynomials u, l; total degree at most 8.
inline LoopMatrix random_twisted_loop(std::mt19937_64& rng, double r, double amp = 0.3) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto rc = [&](double s) { return cplx(s * U(rng), s * U(rng)); };
  std::map<int, cplx> u, l;
  for (int n : {-3, -1, 1, 3, 5}) u[n] = rc(amp);
  for (int n : {-3, -1, 1, 3}) l[n] = rc(amp);
  const cplx d = std::polar(1.0 + 0.3 * U(rng), kPi * U(rng));
  std::map<int, Mat2> c;
  auto add = [&](int n, const Mat2& m) {
    auto it = c.find(n);
    if (it == c.end()) c.emplace(n, m);
    else it->second += m;
  };
  // [[1+u l, u],[l, 1]] then left-multiply by diag(d, 1/d)
  add(0, Mat2::Identity());
  for (auto [n, a] : u) {
    Mat2 m = Mat2::Zero();
    m(0, 1) = a;
    add(n, m);
  }
  for (auto [n, b] : l) {
    Mat2 m = Mat2::Zero();
    m(1, 0) = b;
    add(n, m);
  }
  for (auto [n, a] : u)
    for (auto [k, b] : l) {
      Mat2 m = Mat2::Zero();
      m(0, 0) = a * b;
      add(n + k, m);
    }
  Mat2 D = Mat2::Zero();
  D(0, 0) = d;
  D(1, 1) = 1.0 / d;
  for (auto& [n, m] : c) m = D * m;
  return make_loop(c, r, true, 32);
}

}  // namespace cmc::testing

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qmoco/types.hpp"

namespace qt {

using qmoco::cplx;

inline std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

inline std::vector<double> random_real(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm(const std::vector<cplx>& a) { return std::sqrt(std::real(dot(a, a))); }

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Literal centered unitary DFT along both axes.
inline std::vector<cplx> dft2(const std::vector<cplx>& x, qmoco::Grid g, int sign = -1) {
  const double pi = 3.14159265358979323846;
  std::vector<cplx> out(g.size());
  const double ch = static_cast<double>(g.rows / 2), cw = static_cast<double>(g.cols / 2);
  for (std::size_t ky = 0; ky < g.rows; ++ky)
    for (std::size_t kx = 0; kx < g.cols; ++kx) {
      cplx s = 0;
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c) {
          const double ph = sign * 2.0 * pi *
                            ((static_cast<double>(ky) - ch) * static_cast<double>(r) / static_cast<double>(g.rows) +
                             (static_cast<double>(kx) - cw) * static_cast<double>(c) / static_cast<double>(g.cols));
          s += x[r * g.cols + c] * cplx(std::cos(ph), std::sin(ph));
        }
      out[ky * g.cols + kx] = s / std::sqrt(static_cast<double>(g.size()));
    }
  return out;
}

}  // namespace qt

#include <cmath>

#include "qmoco/simd.hpp"

namespace qmoco::simd {
namespace {

void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

void cmul_conj_acc(const cplx* c, const cplx* x, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double cr = c[i].real(), ci = c[i].imag();
    const double xr = x[i].real(), xi = x[i].imag();
    out[i] += cplx{cr * xr + ci * xi, cr * xi - ci * xr};
  }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void magnitude(const cplx* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(std::norm(z[i]));
}

void pearson(const double* a, const double* b, std::size_t n_echoes, std::size_t stride,
             std::size_t count, double* rho) {
  const double inv = 1.0 / static_cast<double>(n_echoes);
  for (std::size_t v = 0; v < count; ++v) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      ma += a[e * stride + v];
      mb += b[e * stride + v];
    }
    ma *= inv;
    mb *= inv;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const double da = a[e * stride + v] - ma;
      const double db = b[e * stride + v] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    const double den = std::sqrt(saa) * std::sqrt(sbb);
    rho[v] = den > 0.0 ? sab / den : 0.0;
  }
}

void weighted_line_fit(const double* y, const double* w, const double* t, std::size_t n_echoes,
                       std::size_t stride, std::size_t count, double* intercept, double* slope) {
  for (std::size_t v = 0; v < count; ++v) {
    double sw = 0.0, swt = 0.0, swy = 0.0;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const double we = w[e * stride + v];
      sw += we;
      swt += we * t[e];
      swy += we * y[e * stride + v];
    }
    if (!(sw > 0.0)) {
      intercept[v] = 0.0;
      slope[v] = 0.0;
      continue;
    }
    const double tm = swt / sw;
    const double ym = swy / sw;
    double stt = 0.0, sty = 0.0;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const double we = w[e * stride + v];
      const double dt = t[e] - tm;
      stt += we * dt * dt;
      sty += we * dt * (y[e * stride + v] - ym);
    }
    const double b = stt > 0.0 ? sty / stt : 0.0;
    slope[v] = b;
    intercept[v] = ym - b * tm;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{cmul, cmul_conj_acc, axpy, scale, magnitude, pearson, weighted_line_fit};
  return k;
}

}  // namespace qmoco::simd

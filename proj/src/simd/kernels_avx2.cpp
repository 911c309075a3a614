// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// CPUID check.

#include "qmoco/simd.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace qmoco::simd {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

// Two complex products per register: [ar0 ai0 ar1 ai1] * [br0 bi0 br1 bi1].
inline __m256d mul2(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

// x * conj(c)
inline __m256d mul2_conj(__m256d c, __m256d x) {
  const __m256d c_re = _mm256_movedup_pd(c);
  const __m256d c_im = _mm256_permute_pd(c, 0xF);
  const __m256d x_sw = _mm256_permute_pd(x, 0x5);
  return _mm256_fmsubadd_pd(x, c_re, _mm256_mul_pd(x_sw, c_im));
}

void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(dp(a + i));
    const __m256d vb = _mm256_loadu_pd(dp(b + i));
    _mm256_storeu_pd(dp(out + i), mul2(va, vb));
  }
  if (i < n) scalar_kernels().cmul(a + i, b + i, out + i, n - i);
}

void cmul_conj_acc(const cplx* c, const cplx* x, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vc = _mm256_loadu_pd(dp(c + i));
    const __m256d vx = _mm256_loadu_pd(dp(x + i));
    const __m256d vo = _mm256_loadu_pd(dp(out + i));
    _mm256_storeu_pd(dp(out + i), _mm256_add_pd(vo, mul2_conj(vc, vx)));
  }
  if (i < n) scalar_kernels().cmul_conj_acc(c + i, x + i, out + i, n - i);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void magnitude(const cplx* z, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z01 = _mm256_loadu_pd(dp(z + i));
    const __m256d z23 = _mm256_loadu_pd(dp(z + i + 2));
    // [|z0|^2 |z2|^2 |z1|^2 |z3|^2]
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(z01, z01), _mm256_mul_pd(z23, z23));
    const __m256d ordered = _mm256_permute4x64_pd(s, 0b11011000);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(ordered));
  }
  if (i < n) scalar_kernels().magnitude(z + i, out + i, n - i);
}

void pearson(const double* a, const double* b, std::size_t n_echoes, std::size_t stride,
             std::size_t count, double* rho) {
  const __m256d inv = _mm256_set1_pd(1.0 / static_cast<double>(n_echoes));
  const __m256d zero = _mm256_setzero_pd();
  std::size_t v = 0;
  for (; v + 4 <= count; v += 4) {
    __m256d ma = zero, mb = zero;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      ma = _mm256_add_pd(ma, _mm256_loadu_pd(a + e * stride + v));
      mb = _mm256_add_pd(mb, _mm256_loadu_pd(b + e * stride + v));
    }
    ma = _mm256_mul_pd(ma, inv);
    mb = _mm256_mul_pd(mb, inv);
    __m256d sab = zero, saa = zero, sbb = zero;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + e * stride + v), ma);
      const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + e * stride + v), mb);
      sab = _mm256_fmadd_pd(da, db, sab);
      saa = _mm256_fmadd_pd(da, da, saa);
      sbb = _mm256_fmadd_pd(db, db, sbb);
    }
    const __m256d den = _mm256_mul_pd(_mm256_sqrt_pd(saa), _mm256_sqrt_pd(sbb));
    const __m256d ok = _mm256_cmp_pd(den, zero, _CMP_GT_OQ);
    const __m256d r = _mm256_div_pd(sab, _mm256_blendv_pd(_mm256_set1_pd(1.0), den, ok));
    _mm256_storeu_pd(rho + v, _mm256_and_pd(r, ok));
  }
  if (v < count) {
    // Tail: shift base pointers so the scalar kernel sees voxel v as index 0.
    scalar_kernels().pearson(a + v, b + v, n_echoes, stride, count - v, rho + v);
  }
}

void weighted_line_fit(const double* y, const double* w, const double* t, std::size_t n_echoes,
                       std::size_t stride, std::size_t count, double* intercept, double* slope) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t v = 0;
  for (; v + 4 <= count; v += 4) {
    __m256d sw = zero, swt = zero, swy = zero;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const __m256d we = _mm256_loadu_pd(w + e * stride + v);
      const __m256d te = _mm256_set1_pd(t[e]);
      sw = _mm256_add_pd(sw, we);
      swt = _mm256_fmadd_pd(we, te, swt);
      swy = _mm256_fmadd_pd(we, _mm256_loadu_pd(y + e * stride + v), swy);
    }
    const __m256d okw = _mm256_cmp_pd(sw, zero, _CMP_GT_OQ);
    const __m256d sw_safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), sw, okw);
    const __m256d tm = _mm256_div_pd(swt, sw_safe);
    const __m256d ym = _mm256_div_pd(swy, sw_safe);
    __m256d stt = zero, sty = zero;
    for (std::size_t e = 0; e < n_echoes; ++e) {
      const __m256d we = _mm256_loadu_pd(w + e * stride + v);
      const __m256d dt = _mm256_sub_pd(_mm256_set1_pd(t[e]), tm);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + e * stride + v), ym);
      const __m256d wdt = _mm256_mul_pd(we, dt);
      stt = _mm256_fmadd_pd(wdt, dt, stt);
      sty = _mm256_fmadd_pd(wdt, dy, sty);
    }
    const __m256d okt = _mm256_cmp_pd(stt, zero, _CMP_GT_OQ);
    const __m256d b = _mm256_and_pd(
        _mm256_div_pd(sty, _mm256_blendv_pd(_mm256_set1_pd(1.0), stt, okt)), okt);
    const __m256d a = _mm256_fnmadd_pd(b, tm, ym);
    _mm256_storeu_pd(slope + v, _mm256_and_pd(b, okw));
    _mm256_storeu_pd(intercept + v, _mm256_and_pd(a, okw));
  }
  if (v < count) {
    scalar_kernels().weighted_line_fit(y + v, w + v, t, n_echoes, stride, count - v,
                                       intercept + v, slope + v);
  }
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{cmul, cmul_conj_acc, axpy, scale, magnitude, pearson, weighted_line_fit};
  return k;
}

}  // namespace qmoco::simd

#else

namespace qmoco::simd {
const Kernels& avx2_kernels() { return scalar_kernels(); }
}  // namespace qmoco::simd

#endif

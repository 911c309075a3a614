#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference and
// an AVX2/FMA variant; the table is picked once from CPUID, and can be forced
// to scalar with QMOCO_SIMD=scalar or set_level().

#include <cstddef>

#include "qmoco/types.hpp"

namespace qmoco::simd {

enum class Level { scalar, avx2 };

struct Kernels {
  // out[i] = a[i] * b[i]
  void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out[i] += conj(c[i]) * x[i]
  void (*cmul_conj_acc)(const cplx* c, const cplx* x, cplx* out, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x[i] *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  // out[i] = |z[i]|
  void (*magnitude)(const cplx* z, double* out, std::size_t n);

  // Per-voxel Pearson correlation across echoes. Series v is
  // a[e * stride + v], e < n_echoes. Zero variance in either series gives 0.
  void (*pearson)(const double* a, const double* b, std::size_t n_echoes, std::size_t stride,
                  std::size_t count, double* rho);

  // Per-voxel weighted straight-line fit y = intercept + slope * t, with
  // weights w[e * stride + v]. Two-pass (weighted centering) for accuracy.
  // Degenerate designs write slope = 0 and intercept = weighted mean.
  void (*weighted_line_fit)(const double* y, const double* w, const double* t,
                            std::size_t n_echoes, std::size_t stride, std::size_t count,
                            double* intercept, double* slope);
};

const Kernels& scalar_kernels();
// Only valid to call when avx2_supported().
const Kernels& avx2_kernels();

bool avx2_supported();
Level active_level();
// Requests a level; silently falls back to scalar when AVX2 is unavailable.
void set_level(Level level);
const Kernels& kernels();

const char* level_name(Level level);

}  // namespace qmoco::simd

#pragma once

// Centered, unitary 2D DFT on a row-major grid, backed by FFTW.
//
// Forward along one axis of length N with center c = N/2:
//   Y[k] = N^-1/2 * sum_n X[n] exp(-2 pi i (k - c) n / N)
// so index c of k-space holds DC while image pixels are not shifted. A shift
// x[n - d] therefore multiplies Y by exp(-2 pi i (k - c) d / N).

#include <memory>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

class CenteredFft {
 public:
  explicit CenteredFft(Grid grid);
  ~CenteredFft();
  CenteredFft(const CenteredFft&) = delete;
  CenteredFft& operator=(const CenteredFft&) = delete;

  const Grid& grid() const { return grid_; }

  // In place; `data` holds grid().size() values. Thread-safe.
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;
  // Along readout (within each row).
  void forward_rows(std::span<cplx> data) const;
  void inverse_rows(std::span<cplx> data) const;
  // Along phase encoding (within each column).
  void forward_cols(std::span<cplx> data) const;
  void inverse_cols(std::span<cplx> data) const;

 private:
  struct Plans;
  Grid grid_;
  std::unique_ptr<Plans> plans_;
  std::vector<cplx> row_ramp_;  // exp(+2 pi i c n / N) along columns index
  std::vector<cplx> col_ramp_;
};

/// Shared transform for a grid; plans are created once per grid.
const CenteredFft& fft_for(Grid grid);

/// Unnormalized, uncentered in-place DFTs of `count` contiguous vectors of
/// length n (FFTW sign convention). Thread-safe.
class BatchFft {
 public:
  BatchFft(std::size_t n, std::size_t count);
  ~BatchFft();
  BatchFft(const BatchFft&) = delete;
  BatchFft& operator=(const BatchFft&) = delete;

  std::size_t length() const { return n_; }
  std::size_t count() const { return count_; }
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  std::size_t n_, count_;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

const BatchFft& batch_fft_for(std::size_t n, std::size_t count);

/// Solves (I + lambda * L) u = f for the 5-point Neumann Laplacian L using a
/// DCT-II diagonalization. In place on a real H x W image.
void solve_screened_neumann(Grid grid, double lambda, std::span<double> image);

}  // namespace qmoco

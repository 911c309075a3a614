#include "qmoco/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "qmoco/simd.hpp"

namespace qmoco {
namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

std::vector<cplx> ramp(std::size_t n) {
  std::vector<cplx> r(n);
  const double c = static_cast<double>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::polar(1.0, 2.0 * std::numbers::pi * c * static_cast<double>(i) / static_cast<double>(n));
  }
  return r;
}

}  // namespace

struct CenteredFft::Plans {
  fftw_plan full_fwd = nullptr, full_inv = nullptr;
  fftw_plan row_fwd = nullptr, row_inv = nullptr;
  fftw_plan col_fwd = nullptr, col_inv = nullptr;
  // Ramp and unitary scale, folded into one complex factor per pixel.
  std::vector<cplx> full_pre, full_post;
  std::vector<cplx> row_pre, row_post;
  std::vector<cplx> col_pre, col_post;
};

CenteredFft::CenteredFft(Grid grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  require(grid.rows > 0 && grid.cols > 0, "fft: empty grid");
  const int h = static_cast<int>(grid.rows);
  const int w = static_cast<int>(grid.cols);
  row_ramp_ = ramp(grid.cols);
  col_ramp_ = ramp(grid.rows);

  std::vector<cplx> buf(grid.size());
  {
    std::lock_guard lock(planner_mutex());
    auto* p = as_fftw(buf.data());
    plans_->full_fwd = fftw_plan_dft_2d(h, w, p, p, FFTW_FORWARD, kFlags);
    plans_->full_inv = fftw_plan_dft_2d(h, w, p, p, FFTW_BACKWARD, kFlags);
    plans_->row_fwd = fftw_plan_many_dft(1, &w, h, p, nullptr, 1, w, p, nullptr, 1, w, FFTW_FORWARD, kFlags);
    plans_->row_inv = fftw_plan_many_dft(1, &w, h, p, nullptr, 1, w, p, nullptr, 1, w, FFTW_BACKWARD, kFlags);
    plans_->col_fwd = fftw_plan_many_dft(1, &h, w, p, nullptr, w, 1, p, nullptr, w, 1, FFTW_FORWARD, kFlags);
    plans_->col_inv = fftw_plan_many_dft(1, &h, w, p, nullptr, w, 1, p, nullptr, w, 1, FFTW_BACKWARD, kFlags);
  }

  const double s_full = 1.0 / std::sqrt(static_cast<double>(grid.size()));
  const double s_row = 1.0 / std::sqrt(static_cast<double>(grid.cols));
  const double s_col = 1.0 / std::sqrt(static_cast<double>(grid.rows));
  auto& P = *plans_;
  P.full_pre.resize(grid.size());
  P.full_post.resize(grid.size());
  P.row_pre.resize(grid.size());
  P.row_post.resize(grid.size());
  P.col_pre.resize(grid.size());
  P.col_post.resize(grid.size());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const std::size_t i = r * grid.cols + c;
      const cplx rr = col_ramp_[r], rc = row_ramp_[c];
      P.full_pre[i] = rr * rc * s_full;
      P.full_post[i] = std::conj(rr * rc) * s_full;
      P.row_pre[i] = rc * s_row;
      P.row_post[i] = std::conj(rc) * s_row;
      P.col_pre[i] = rr * s_col;
      P.col_post[i] = std::conj(rr) * s_col;
    }
  }
}

CenteredFft::~CenteredFft() {
  std::lock_guard lock(planner_mutex());
  for (fftw_plan p : {plans_->full_fwd, plans_->full_inv, plans_->row_fwd, plans_->row_inv,
                      plans_->col_fwd, plans_->col_inv}) {
    if (p) fftw_destroy_plan(p);
  }
}

void CenteredFft::forward(std::span<cplx> d) const {
  const auto& k = simd::kernels();
  k.cmul(d.data(), plans_->full_pre.data(), d.data(), d.size());
  fftw_execute_dft(plans_->full_fwd, as_fftw(d.data()), as_fftw(d.data()));
}

void CenteredFft::inverse(std::span<cplx> d) const {
  fftw_execute_dft(plans_->full_inv, as_fftw(d.data()), as_fftw(d.data()));
  simd::kernels().cmul(d.data(), plans_->full_post.data(), d.data(), d.size());
}

void CenteredFft::forward_rows(std::span<cplx> d) const {
  simd::kernels().cmul(d.data(), plans_->row_pre.data(), d.data(), d.size());
  fftw_execute_dft(plans_->row_fwd, as_fftw(d.data()), as_fftw(d.data()));
}

void CenteredFft::inverse_rows(std::span<cplx> d) const {
  fftw_execute_dft(plans_->row_inv, as_fftw(d.data()), as_fftw(d.data()));
  simd::kernels().cmul(d.data(), plans_->row_post.data(), d.data(), d.size());
}

void CenteredFft::forward_cols(std::span<cplx> d) const {
  simd::kernels().cmul(d.data(), plans_->col_pre.data(), d.data(), d.size());
  fftw_execute_dft(plans_->col_fwd, as_fftw(d.data()), as_fftw(d.data()));
}

void CenteredFft::inverse_cols(std::span<cplx> d) const {
  fftw_execute_dft(plans_->col_inv, as_fftw(d.data()), as_fftw(d.data()));
  simd::kernels().cmul(d.data(), plans_->col_post.data(), d.data(), d.size());
}

const CenteredFft& fft_for(Grid grid) {
  static std::mutex m;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<CenteredFft>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{grid.rows, grid.cols}];
  if (!slot) slot = std::make_unique<CenteredFft>(grid);
  return *slot;
}

BatchFft::BatchFft(std::size_t n, std::size_t count) : n_(n), count_(count) {
  require(n > 0 && count > 0, "fft: empty batch");
  std::vector<cplx> buf(n * count);
  const int len = static_cast<int>(n);
  auto* p = as_fftw(buf.data());
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_many_dft(1, &len, static_cast<int>(count), p, nullptr, 1, len, p, nullptr, 1, len,
                            FFTW_FORWARD, kFlags);
  inv_ = fftw_plan_many_dft(1, &len, static_cast<int>(count), p, nullptr, 1, len, p, nullptr, 1, len,
                            FFTW_BACKWARD, kFlags);
}

BatchFft::~BatchFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void BatchFft::forward(std::span<cplx> d) const {
  require(d.size() == n_ * count_, "fft: batch size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(d.data()), as_fftw(d.data()));
}

void BatchFft::inverse(std::span<cplx> d) const {
  require(d.size() == n_ * count_, "fft: batch size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inv_), as_fftw(d.data()), as_fftw(d.data()));
}

const BatchFft& batch_fft_for(std::size_t n, std::size_t count) {
  static std::mutex m;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<BatchFft>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{n, count}];
  if (!slot) slot = std::make_unique<BatchFft>(n, count);
  return *slot;
}

void solve_screened_neumann(Grid grid, double lambda, std::span<double> image) {
  require(image.size() == grid.size(), "screened solve: size mismatch");
  struct DctPlans {
    fftw_plan fwd = nullptr, inv = nullptr;
    std::vector<double> eig;
  };
  static std::mutex m;
  static std::map<std::pair<std::size_t, std::size_t>, DctPlans> cache;
  DctPlans* plans = nullptr;
  {
    std::lock_guard lock(m);
    auto& slot = cache[{grid.rows, grid.cols}];
    if (!slot.fwd) {
      std::vector<double> buf(grid.size());
      const int h = static_cast<int>(grid.rows), w = static_cast<int>(grid.cols);
      std::lock_guard plan_lock(planner_mutex());
      slot.fwd = fftw_plan_r2r_2d(h, w, buf.data(), buf.data(), FFTW_REDFT10, FFTW_REDFT10, kFlags);
      slot.inv = fftw_plan_r2r_2d(h, w, buf.data(), buf.data(), FFTW_REDFT01, FFTW_REDFT01, kFlags);
      slot.eig.resize(grid.size());
      for (std::size_t r = 0; r < grid.rows; ++r) {
        const double er = 2.0 - 2.0 * std::cos(std::numbers::pi * r / grid.rows);
        for (std::size_t c = 0; c < grid.cols; ++c) {
          slot.eig[r * grid.cols + c] = er + 2.0 - 2.0 * std::cos(std::numbers::pi * c / grid.cols);
        }
      }
    }
    plans = &slot;
  }
  fftw_execute_r2r(plans->fwd, image.data(), image.data());
  const double norm = 1.0 / (4.0 * static_cast<double>(grid.size()));
  for (std::size_t i = 0; i < image.size(); ++i) image[i] *= norm / (1.0 + lambda * plans->eig[i]);
  fftw_execute_r2r(plans->inv, image.data(), image.data());
}

}  // namespace qmoco

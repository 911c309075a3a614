#include "qmoco/recon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qmoco/fft.hpp"
#include "qmoco/forward.hpp"
#include "qmoco/parallel.hpp"
#include "qmoco/simd.hpp"

namespace qmoco {

void ReconConfig::validate() const {
  require(n_unrolled >= 1, "recon: n_unrolled must be >= 1");
  require(dc_step_size > 0.0 && dc_step_size < 2.0, "recon: dc_step_size must lie in (0, 2)");
  require(denoiser.lambda >= 0.0, "recon: denoiser lambda must be >= 0");
  require(denoiser.inner_iters >= 1, "recon: denoiser inner_iters must be >= 1");
}

EchoSeries dc_gradient_step(const EchoSeries& x, const KSpaceData& y, const ExclusionMask& mask,
                            const CoilMaps& coils, double step) {
  require(step > 0.0, "dc_gradient_step: step must be positive");
  require(x.grid == y.grid && x.n_echoes() == y.n_echoes(), "dc_gradient_step: dimension mismatch");
  KSpaceData residual = sense_forward(x, coils);
  for (std::size_t i = 0; i < residual.data.size(); ++i) residual.data[i] -= y.data[i];
  const EchoSeries grad = adjoint(residual, coils, mask);
  EchoSeries out = x;
  simd::kernels().axpy(-step, reinterpret_cast<const double*>(grad.data.data()),
                       reinterpret_cast<double*>(out.data.data()), 2 * out.data.size());
  return out;
}

// ---------------------------------------------------------------------------
// Denoisers

namespace {

void gradient(std::span<const double> u, Grid g, std::vector<double>& gx, std::vector<double>& gy) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const std::size_t i = r * g.cols + c;
      gx[i] = c + 1 < g.cols ? u[i + 1] - u[i] : 0.0;
      gy[i] = r + 1 < g.rows ? u[i + g.cols] - u[i] : 0.0;
    }
  }
}

// Negative adjoint of `gradient`.
void divergence(const std::vector<double>& px, const std::vector<double>& py, Grid g,
                std::vector<double>& div) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const std::size_t i = r * g.cols + c;
      double d = 0.0;
      if (c + 1 < g.cols) d += px[i];
      if (c > 0) d -= px[i - 1];
      if (r + 1 < g.rows) d += py[i];
      if (r > 0) d -= py[i - g.cols];
      div[i] = d;
    }
  }
}

// Chambolle's dual projection for min_u 0.5 |u - f|^2 + lambda TV(u). Returns
// the iterate (including f itself) with the lowest primal objective.
void tv_prox(std::span<double> f, Grid g, double lambda, std::size_t iters) {
  if (lambda <= 0.0) return;
  const std::size_t n = g.size();
  const double tau = 0.125;
  std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0), gx(n), gy(n), u(n);
  std::vector<double> best(f.begin(), f.end());
  double best_obj = lambda * total_variation(f, g);
  const std::vector<double> f0(f.begin(), f.end());
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) u[i] = div[i] - f0[i] / lambda;
    gradient(u, g, gx, gy);
    for (std::size_t i = 0; i < n; ++i) {
      const double norm = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
      px[i] = (px[i] + tau * gx[i]) / (1.0 + tau * norm);
      py[i] = (py[i] + tau * gy[i]) / (1.0 + tau * norm);
    }
    divergence(px, py, g, div);
    double fid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = f0[i] - lambda * div[i];
      fid += (u[i] - f0[i]) * (u[i] - f0[i]);
    }
    const double obj = 0.5 * fid + lambda * total_variation(u, g);
    if (obj < best_obj) {
      best_obj = obj;
      best = u;
    }
  }
  std::copy(best.begin(), best.end(), f.begin());
}

}  // namespace

double total_variation(std::span<const double> img, Grid g) {
  double tv = 0.0;
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const std::size_t i = r * g.cols + c;
      const double dx = c + 1 < g.cols ? img[i + 1] - img[i] : 0.0;
      const double dy = r + 1 < g.rows ? img[i + g.cols] - img[i] : 0.0;
      tv += std::sqrt(dx * dx + dy * dy);
    }
  }
  return tv;
}

void denoise_image(std::span<cplx> img, Grid grid, const DenoiserSpec& spec) {
  require(spec.lambda >= 0.0, "denoiser: lambda must be >= 0");
  require(spec.kind != DenoiserKind::tv_prox || spec.inner_iters >= 1, "denoiser: inner_iters must be >= 1");
  require(img.size() == grid.size(), "denoiser: image size mismatch");
  if (spec.kind == DenoiserKind::identity) return;
  std::vector<double> re(grid.size()), im(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    re[i] = img[i].real();
    im[i] = img[i].imag();
  }
  if (spec.kind == DenoiserKind::tikhonov) {
    solve_screened_neumann(grid, spec.lambda, re);
    solve_screened_neumann(grid, spec.lambda, im);
  } else {
    tv_prox(re, grid, spec.lambda, spec.inner_iters);
    tv_prox(im, grid, spec.lambda, spec.inner_iters);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) img[i] = {re[i], im[i]};
}

EchoSeries denoise(const EchoSeries& x, const DenoiserSpec& spec) {
  EchoSeries out = x;
  for (std::size_t e = 0; e < out.n_echoes(); ++e) denoise_image(out.echo(e), out.grid, spec);
  return out;
}

// ---------------------------------------------------------------------------
// Unrolled reconstruction

PreparedKSpace prepare(const KSpaceData& y) {
  PreparedKSpace p{y.grid, y.n_coils, y.echo_times, y.data};
  const auto& fft = fft_for(y.grid);
  const std::size_t n = y.grid.size();
  for (std::size_t v = 0; v < y.n_echoes() * y.n_coils; ++v)
    fft.inverse_rows(std::span<cplx>(p.hybrid.data() + v * n, n));
  return p;
}

namespace {

void weight_rows(std::span<cplx> img, const ExclusionMask& mask, Grid g) {
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < g.rows; ++r)
    k.scale(mask.weights[r], reinterpret_cast<double*>(img.data() + r * g.cols), 2 * g.cols);
}

void transpose(const cplx* in, cplx* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = in[r * cols + c];
}

}  // namespace

// The loop runs on transposed (column-major) images so that phase-encode
// transforms are contiguous. The centering ramp is a pure modulation, so
// F_y^-1 W F_y equals an uncentered transform pair with the weights rotated by
// H/2 and scaled by 1/H.
EchoSeries unrolled_reconstruct(const PreparedKSpace& y, const ExclusionMask& mask,
                                const CoilMaps& coils, const ReconConfig& cfg) {
  cfg.validate();
  const Grid g = y.grid;
  require(coils.grid == g && coils.n_coils == y.n_coils, "reconstruct: coil maps do not match k-space");
  check_mask(mask, g.rows);
  const auto& fft = fft_for(g);

  // One unit coil with no denoiser: every operator is diagonal in k-space and
  // the iteration has the closed form X_K = Y (1 - (1 - s w)^K (1 - w_0)),
  // with w_0 = w for adjoint init and 0 for zero init.
  const bool unit_coil = y.n_coils == 1 &&
      std::all_of(coils.maps.begin(), coils.maps.end(), [](cplx v) { return v == cplx(1.0, 0.0); });
  if (unit_coil && cfg.denoiser.kind == DenoiserKind::identity) {
    std::vector<double> gain(g.rows);
    for (std::size_t r = 0; r < g.rows; ++r) {
      const double w = mask.weights[r];
      const double w0 = cfg.init == ReconInit::adjoint ? w : 0.0;
      gain[r] = 1.0 - std::pow(1.0 - cfg.dc_step_size * w, static_cast<double>(cfg.n_unrolled)) * (1.0 - w0);
    }
    EchoSeries x(g, y.echo_times);
    const ExclusionMask gains(std::move(gain));
    parallel_for(y.echo_times.size(), [&](std::size_t e) {
      auto xe = x.echo(e);
      std::copy_n(y.hybrid.begin() + e * g.size(), g.size(), xe.begin());
      weight_rows(xe, gains, g);
      fft.inverse_cols(xe);
    });
    return x;
  }

  const auto& batch = batch_fft_for(g.rows, g.cols);
  const std::size_t n = g.size(), h = g.rows;
  const Grid gt{g.cols, g.rows};
  EchoSeries x(g, y.echo_times);

  std::vector<double> w_raw(h);
  for (std::size_t j = 0; j < h; ++j) w_raw[j] = mask.weights[(j + h / 2) % h] / static_cast<double>(h);
  std::vector<cplx> coils_t(coils.maps.size());
  for (std::size_t c = 0; c < y.n_coils; ++c) transpose(coils.coil(c).data(), coils_t.data() + c * n, h, g.cols);

  parallel_for(y.echo_times.size(), [&](std::size_t e) {
    const auto& k = simd::kernels();
    std::vector<cplx> b(n, cplx{}), bt(n), tmp(n), normal(n), xt(n, cplx{});
    for (std::size_t c = 0; c < y.n_coils; ++c) {
      std::copy_n(y.hybrid.begin() + (e * y.n_coils + c) * n, n, tmp.begin());
      weight_rows(tmp, mask, g);
      fft.inverse_cols(tmp);
      k.cmul_conj_acc(coils.coil(c).data(), tmp.data(), b.data(), n);
    }
    transpose(b.data(), bt.data(), h, g.cols);
    if (cfg.init == ReconInit::adjoint) xt = bt;
    for (std::size_t it = 0; it < cfg.n_unrolled; ++it) {
      denoise_image(xt, gt, cfg.denoiser);
      std::fill(normal.begin(), normal.end(), cplx{});
      for (std::size_t c = 0; c < y.n_coils; ++c) {
        const cplx* ct = coils_t.data() + c * n;
        k.cmul(ct, xt.data(), tmp.data(), n);
        batch.forward(tmp);
        for (std::size_t col = 0; col < g.cols; ++col) {
          cplx* line = tmp.data() + col * h;
          for (std::size_t j = 0; j < h; ++j) line[j] *= w_raw[j];
        }
        batch.inverse(tmp);
        k.cmul_conj_acc(ct, tmp.data(), normal.data(), n);
      }
      // x -= step * (N x - b)
      auto* xd = reinterpret_cast<double*>(xt.data());
      k.axpy(-cfg.dc_step_size, reinterpret_cast<const double*>(normal.data()), xd, 2 * n);
      k.axpy(cfg.dc_step_size, reinterpret_cast<const double*>(bt.data()), xd, 2 * n);
    }
    transpose(xt.data(), x.echo(e).data(), g.cols, h);
  });
  return x;
}

EchoSeries unrolled_reconstruct(const KSpaceData& y, const ExclusionMask& mask,
                                const CoilMaps& coils, const ReconConfig& cfg) {
  return unrolled_reconstruct(prepare(y), mask, coils, cfg);
}

// ---------------------------------------------------------------------------
// Masks

std::pair<std::size_t, std::size_t> center_lines(std::size_t n_lines, std::size_t center) {
  const std::size_t begin = n_lines / 2 - std::min(center / 2, n_lines / 2);
  return {begin, std::min(n_lines, begin + center)};
}

ExclusionMask random_mask(std::size_t n_lines, double rate, std::size_t center, std::uint64_t seed) {
  require(rate >= 0.0 && rate <= 1.0, "random_mask: rate must lie in [0,1]");
  require(center <= n_lines, "random_mask: center exceeds line count");
  const auto [cb, ce] = center_lines(n_lines, center);
  std::vector<std::size_t> outer;
  for (std::size_t l = 0; l < n_lines; ++l)
    if (l < cb || l >= ce) outer.push_back(l);
  const auto n_zero = static_cast<std::size_t>(std::llround(rate * static_cast<double>(outer.size())));
  std::mt19937_64 rng(seed);
  std::shuffle(outer.begin(), outer.end(), rng);
  ExclusionMask m(n_lines, 1.0);
  for (std::size_t i = 0; i < n_zero; ++i) m.weights[outer[i]] = 0.0;
  return m;
}

std::vector<ExclusionMask> orba_masks(std::size_t n_lines, std::size_t n_masks, double rate,
                                      std::size_t center, double density_slope, std::uint64_t seed) {
  require(n_masks >= 1, "orba_masks: need at least one mask");
  require(rate >= 0.0 && rate <= 1.0, "orba_masks: rate must lie in [0,1]");
  require(center <= n_lines, "orba_masks: center exceeds line count");
  require(density_slope >= 0.0 && density_slope <= 1.0, "orba_masks: density_slope in [0,1]");
  const auto [cb, ce] = center_lines(n_lines, center);
  std::vector<std::size_t> outer;
  for (std::size_t l = 0; l < n_lines; ++l)
    if (l < cb || l >= ce) outer.push_back(l);
  const auto n_zero = static_cast<std::size_t>(std::llround(rate * static_cast<double>(outer.size())));

  // Exclusion probability rising linearly with distance from the center.
  const double mid = (static_cast<double>(n_lines) - 1.0) / 2.0;
  double max_d = 0.0;
  for (auto l : outer) max_d = std::max(max_d, std::abs(static_cast<double>(l) - mid));
  std::vector<double> p(outer.size());
  double total = 0.0;
  for (std::size_t j = 0; j < outer.size(); ++j) {
    const double d = max_d > 0 ? std::abs(static_cast<double>(outer[j]) - mid) / max_d : 0.0;
    p[j] = 1.0 - density_slope + 2.0 * density_slope * d;
    total += p[j];
  }
  for (auto& pj : p) pj = std::min(1.0, total > 0 ? pj * static_cast<double>(n_zero) / total : 0.0);

  // Per-line exclusion counts: n_masks * p rounded so they sum to n_zero per
  // mask, remainders going to the largest fractional parts (random ties).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t n_out = outer.size();
  std::vector<std::size_t> quota(n_out);
  std::vector<std::pair<double, std::size_t>> frac(n_out);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double want = p[j] * static_cast<double>(n_masks);
    quota[j] = std::min(n_masks, static_cast<std::size_t>(std::floor(want)));
    assigned += quota[j];
    frac[j] = {-(want - std::floor(want)) - 1e-9 * u01(rng), j};
  }
  std::sort(frac.begin(), frac.end());
  const std::size_t target = n_zero * n_masks;
  for (std::size_t k = 0; assigned < target; k = (k + 1) % n_out) {
    const std::size_t j = frac[k].second;
    if (quota[j] < n_masks) {
      ++quota[j];
      ++assigned;
    }
  }

  // Lines with the largest quota first, each into the masks with the most
  // free slots; random tie-breaks keep the set varied across seeds.
  std::vector<std::size_t> order(n_out);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return quota[a] > quota[b]; });
  std::vector<ExclusionMask> masks(n_masks, ExclusionMask(n_lines, 1.0));
  std::vector<std::size_t> room(n_masks, n_zero), by_room(n_masks);
  for (std::size_t j : order) {
    std::iota(by_room.begin(), by_room.end(), 0);
    std::shuffle(by_room.begin(), by_room.end(), rng);
    std::stable_sort(by_room.begin(), by_room.end(), [&](std::size_t a, std::size_t b) { return room[a] > room[b]; });
    for (std::size_t k = 0; k < quota[j]; ++k) {
      require(room[by_room[k]] > 0, "orba_masks: infeasible exclusion quotas");
      masks[by_room[k]].weights[outer[j]] = 0.0;
      --room[by_room[k]];
    }
  }
  return masks;
}

OrbaResult orba_reconstruct(const KSpaceData& y, const CoilMaps& coils, const ReconConfig& cfg,
                            const OrbaConfig& ocfg, std::uint64_t seed) {
  OrbaResult res;
  res.masks = orba_masks(y.grid.rows, ocfg.n_masks, ocfg.rate, ocfg.center, ocfg.density_slope, seed);
  const PreparedKSpace prepared = prepare(y);
  std::vector<EchoSeries> recons(res.masks.size());
  parallel_for(res.masks.size(), [&](std::size_t i) {
    recons[i] = unrolled_reconstruct(prepared, res.masks[i], coils, cfg);
  });
  res.recon = EchoSeries(y.grid, y.echo_times);
  res.mean_mask = ExclusionMask(y.grid.rows, 0.0);
  const double inv = 1.0 / static_cast<double>(res.masks.size());
  for (std::size_t i = 0; i < recons.size(); ++i) {
    simd::kernels().axpy(inv, reinterpret_cast<const double*>(recons[i].data.data()),
                         reinterpret_cast<double*>(res.recon.data.data()), 2 * res.recon.data.size());
    for (std::size_t l = 0; l < y.grid.rows; ++l) res.mean_mask.weights[l] += inv * res.masks[i].weights[l];
  }
  return res;
}

}  // namespace qmoco

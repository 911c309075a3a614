#include "qmoco/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmoco/fft.hpp"
#include "qmoco/simd.hpp"

namespace qmoco {

std::vector<std::size_t> acquisition_order(std::size_t n_lines, SamplingOrder order) {
  std::vector<std::size_t> lines(n_lines);
  if (order == SamplingOrder::linear) {
    for (std::size_t i = 0; i < n_lines; ++i) lines[i] = i;
    return lines;
  }
  // center_out: c, c+1, c-1, c+2, c-2, ...
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(n_lines / 2);
  std::size_t k = 0;
  for (std::ptrdiff_t d = 0; k < n_lines; ++d) {
    if (c + d < static_cast<std::ptrdiff_t>(n_lines)) lines[k++] = static_cast<std::size_t>(c + d);
    if (d > 0 && c - d >= 0 && k < n_lines) lines[k++] = static_cast<std::size_t>(c - d);
  }
  return lines;
}

MotionTrajectory make_trajectory(const std::vector<MotionEvent>& events, std::size_t n_lines,
                                 SamplingOrder order) {
  require(n_lines > 0, "make_trajectory: no lines");
  const auto shots = acquisition_order(n_lines, order);
  std::vector<std::ptrdiff_t> owner(n_lines, -1);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& ev = events[k];
    require(ev.first < ev.last, "make_trajectory: empty event range");
    require(ev.last <= n_lines, "make_trajectory: event range exceeds line count");
    const double bound = static_cast<double>(n_lines) / 4.0;
    require(std::abs(ev.state.rotation_deg) <= 45.0 && std::abs(ev.state.dx) <= bound &&
                std::abs(ev.state.dy) <= bound,
            "make_trajectory: pose outside the simulation bounds (|rotation| <= 45, |shift| <= H/4)");
    for (std::size_t s = ev.first; s < ev.last; ++s) {
      require(owner[shots[s]] < 0, "make_trajectory: overlapping event ranges");
      owner[shots[s]] = static_cast<std::ptrdiff_t>(k);
    }
  }

  MotionTrajectory traj;
  traj.line_assignment.assign(n_lines, 0);
  const bool has_rest = std::any_of(owner.begin(), owner.end(), [](auto o) { return o < 0; });
  if (has_rest) traj.states.push_back(RigidState{});
  const std::size_t base = traj.states.size();
  for (const auto& ev : events) traj.states.push_back(ev.state);
  for (std::size_t line = 0; line < n_lines; ++line) {
    traj.line_assignment[line] = owner[line] < 0 ? 0 : base + static_cast<std::size_t>(owner[line]);
  }
  return traj;
}

ComplexImage apply_rigid(const ComplexImage& img, const RigidState& state) {
  if (state.is_identity()) return img;
  const Grid g = img.grid;
  ComplexImage out(g);
  const double th = state.rotation_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  const double cx = (static_cast<double>(g.cols) - 1.0) / 2.0;
  const double cy = (static_cast<double>(g.rows) - 1.0) / 2.0;
  const auto h = static_cast<std::ptrdiff_t>(g.rows), w = static_cast<std::ptrdiff_t>(g.cols);
  auto sample = [&](std::ptrdiff_t r, std::ptrdiff_t c) -> cplx {
    return (r < 0 || r >= h || c < 0 || c >= w) ? cplx{} : img.data[r * w + c];
  };
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      // Inverse map: p = R^T (p' - center - t) + center.
      const double qx = static_cast<double>(c) - cx - state.dx;
      const double qy = static_cast<double>(r) - cy - state.dy;
      const double px = ct * qx + st * qy + cx;
      const double py = -st * qx + ct * qy + cy;
      const double fx0 = std::floor(px), fy0 = std::floor(py);
      const double fx = px - fx0, fy = py - fy0;
      const auto x0 = static_cast<std::ptrdiff_t>(fx0), y0 = static_cast<std::ptrdiff_t>(fy0);
      const cplx v00 = sample(y0, x0), v01 = sample(y0, x0 + 1);
      const cplx v10 = sample(y0 + 1, x0), v11 = sample(y0 + 1, x0 + 1);
      out.data[r * g.cols + c] = (v00 * (1.0 - fx) + v01 * fx) * (1.0 - fy) + (v10 * (1.0 - fx) + v11 * fx) * fy;
    }
  }
  return out;
}

void check_mask(const ExclusionMask& mask, std::size_t n_lines) {
  require(mask.size() == n_lines, "mask length does not match the number of phase-encode lines");
  for (double w : mask.weights) require(w >= 0.0 && w <= 1.0, "mask weights must lie in [0,1]");
}

KSpaceData forward_model(const EchoSeries& x, const CoilMaps& coils, const MotionTrajectory& traj) {
  const Grid g = x.grid;
  require(coils.grid == g, "forward_model: coil grid mismatch");
  require(traj.n_lines() == g.rows, "forward_model: trajectory line count mismatch");
  const auto& fft = fft_for(g);
  const auto& k = simd::kernels();
  KSpaceData y(g, coils.n_coils, x.echo_times);
  std::vector<cplx> tmp(g.size());
  for (std::size_t t = 0; t < traj.n_times(); ++t) {
    std::vector<std::size_t> lines;
    for (std::size_t l = 0; l < g.rows; ++l)
      if (traj.line_assignment[l] == t) lines.push_back(l);
    if (lines.empty()) continue;
    for (std::size_t e = 0; e < x.n_echoes(); ++e) {
      ComplexImage moved(g);
      std::copy(x.echo(e).begin(), x.echo(e).end(), moved.data.begin());
      moved = apply_rigid(moved, traj.states[t]);
      for (std::size_t c = 0; c < coils.n_coils; ++c) {
        k.cmul(coils.coil(c).data(), moved.data.data(), tmp.data(), g.size());
        fft.forward(tmp);
        auto dst = y.view(e, c);
        for (std::size_t l : lines)
          std::copy_n(tmp.begin() + l * g.cols, g.cols, dst.begin() + l * g.cols);
      }
    }
  }
  return y;
}

KSpaceData sense_forward(const EchoSeries& x, const CoilMaps& coils) {
  const Grid g = x.grid;
  require(coils.grid == g, "sense_forward: coil grid mismatch");
  const auto& fft = fft_for(g);
  const auto& k = simd::kernels();
  KSpaceData y(g, coils.n_coils, x.echo_times);
  for (std::size_t e = 0; e < x.n_echoes(); ++e) {
    for (std::size_t c = 0; c < coils.n_coils; ++c) {
      auto dst = y.view(e, c);
      k.cmul(coils.coil(c).data(), x.echo(e).data(), dst.data(), g.size());
      fft.forward(dst);
    }
  }
  return y;
}

EchoSeries adjoint(const KSpaceData& y, const CoilMaps& coils, const ExclusionMask& weights) {
  const Grid g = y.grid;
  require(coils.grid == g && coils.n_coils == y.n_coils, "adjoint: coil maps do not match k-space");
  check_mask(weights, g.rows);
  const auto& fft = fft_for(g);
  const auto& k = simd::kernels();
  EchoSeries x(g, y.echo_times);
  std::vector<cplx> tmp(g.size());
  for (std::size_t e = 0; e < y.n_echoes(); ++e) {
    auto acc = x.echo(e);
    for (std::size_t c = 0; c < y.n_coils; ++c) {
      auto src = y.view(e, c);
      std::copy(src.begin(), src.end(), tmp.begin());
      for (std::size_t r = 0; r < g.rows; ++r)
        k.scale(weights.weights[r], reinterpret_cast<double*>(tmp.data() + r * g.cols), 2 * g.cols);
      fft.inverse(tmp);
      k.cmul_conj_acc(coils.coil(c).data(), tmp.data(), acc.data(), g.size());
    }
  }
  return x;
}

KSpaceData apply_mask(const KSpaceData& y, const ExclusionMask& mask) {
  check_mask(mask, y.grid.rows);
  KSpaceData out = y;
  const auto& k = simd::kernels();
  const Grid g = y.grid;
  for (std::size_t e = 0; e < y.n_echoes(); ++e) {
    for (std::size_t c = 0; c < y.n_coils; ++c) {
      auto v = out.view(e, c);
      for (std::size_t r = 0; r < g.rows; ++r)
        k.scale(mask.weights[r], reinterpret_cast<double*>(v.data() + r * g.cols), 2 * g.cols);
    }
  }
  return out;
}

ExclusionMask ground_truth_mask(const MotionTrajectory& traj) {
  ExclusionMask m(traj.n_lines());
  for (std::size_t l = 0; l < traj.n_lines(); ++l)
    m.weights[l] = traj.states[traj.line_assignment[l]].is_identity() ? 1.0 : 0.0;
  return m;
}

}  // namespace qmoco

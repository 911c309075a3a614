#include "qmoco/quantify.hpp"

#include <cmath>

#include "qmoco/simd.hpp"

namespace qmoco {

MagnitudeSeries magnitudes(const EchoSeries& x) {
  MagnitudeSeries m(x.grid, x.echo_times);
  simd::kernels().magnitude(x.data.data(), m.data.data(), x.data.size());
  return m;
}

double exp_objective(std::span<const double> s, std::span<const double> te, double s0, double t2) {
  double f = 0.0;
  for (std::size_t e = 0; e < s.size(); ++e) {
    const double r = s[e] - s0 * std::exp(-te[e] / t2);
    f += r * r;
  }
  return f;
}

namespace {

// Damped Gauss-Newton on (s0, R2*). Only accepts steps that lower the
// objective, so the result is never worse than the initializer.
void refine_voxel(std::span<const double> s, std::span<const double> te, double& s0, double& rate,
                  std::size_t max_iters) {
  auto objective = [&](double a, double r) {
    double f = 0.0;
    for (std::size_t e = 0; e < s.size(); ++e) {
      const double d = s[e] - a * std::exp(-r * te[e]);
      f += d * d;
    }
    return f;
  };
  double f = objective(s0, rate);
  double mu = 1e-3;
  for (std::size_t it = 0; it < max_iters; ++it) {
    double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
    for (std::size_t e = 0; e < s.size(); ++e) {
      const double ex = std::exp(-rate * te[e]);
      const double da = ex, dr = -s0 * te[e] * ex;
      const double res = s[e] - s0 * ex;
      j11 += da * da;
      j12 += da * dr;
      j22 += dr * dr;
      g1 += da * res;
      g2 += dr * res;
    }
    bool improved = false;
    for (int tries = 0; tries < 12 && !improved; ++tries) {
      const double a11 = j11 * (1.0 + mu), a22 = j22 * (1.0 + mu);
      const double det = a11 * a22 - j12 * j12;
      if (!(det > 0.0)) {
        mu *= 10.0;
        continue;
      }
      const double ds0 = (a22 * g1 - j12 * g2) / det;
      const double dr = (a11 * g2 - j12 * g1) / det;
      const double ns0 = s0 + ds0, nr = rate + dr;
      const double nf = nr > 0.0 ? objective(ns0, nr) : f;
      if (nr > 0.0 && nf < f) {
        const double gain = f - nf;
        s0 = ns0;
        rate = nr;
        f = nf;
        mu = std::max(mu * 0.3, 1e-12);
        improved = true;
        if (gain <= 1e-15 * (f + 1e-300)) return;
      } else {
        mu *= 10.0;
      }
    }
    if (!improved) return;
  }
}

}  // namespace

QuantMaps fit_t2star(const MagnitudeSeries& mag, const RegionMask& region, const FitOptions& opts) {
  const std::size_t n_e = mag.n_echoes();
  const std::size_t n = mag.grid.size();
  require(n_e >= 2, "fit_t2star: need at least 2 echoes");
  require(region.grid == mag.grid, "fit_t2star: region grid mismatch");
  require(count(region) > 0, "fit_t2star: empty region");
  require(opts.t2star_cap > 0.0, "fit_t2star: cap must be positive");

  QuantMaps q;
  q.grid = mag.grid;
  q.t2star.assign(n, opts.t2star_cap);
  q.s0.assign(n, 0.0);
  q.residual.assign(n, 0.0);
  q.valid.assign(n, 0);
  q.method = opts.refine_lm ? "loglinear+lm" : "loglinear";

  std::vector<double> logs(n_e * n, 0.0), weights(n_e * n, 0.0);
  std::vector<std::uint8_t> positive(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!region.data[v]) continue;
    bool ok = true;
    for (std::size_t e = 0; e < n_e; ++e) ok = ok && mag.data[e * n + v] > 0.0;
    positive[v] = ok;
    if (!ok) continue;
    for (std::size_t e = 0; e < n_e; ++e) {
      const double s = mag.data[e * n + v];
      logs[e * n + v] = std::log(s);
      weights[e * n + v] = s * s;
    }
  }
  std::vector<double> intercept(n), slope(n);
  simd::kernels().weighted_line_fit(logs.data(), weights.data(), mag.echo_times.data(), n_e, n, n,
                                    intercept.data(), slope.data());

  std::vector<double> s(n_e);
  for (std::size_t v = 0; v < n; ++v) {
    if (!region.data[v]) continue;
    for (std::size_t e = 0; e < n_e; ++e) s[e] = mag.data[e * n + v];
    if (!positive[v]) continue;
    double s0 = std::exp(intercept[v]);
    double rate = -slope[v];
    q.s0[v] = s0;
    if (!(rate > 0.0) || !(1.0 / rate <= opts.t2star_cap)) {
      q.residual[v] = std::sqrt(exp_objective(s, mag.echo_times, s0, opts.t2star_cap) / n_e);
      continue;
    }
    if (opts.refine_lm) refine_voxel(s, mag.echo_times, s0, rate, opts.lm_max_iters);
    const double t2 = 1.0 / rate;
    if (!(t2 <= opts.t2star_cap) || !(s0 >= 0.0) || !std::isfinite(t2)) continue;
    q.t2star[v] = t2;
    q.s0[v] = s0;
    q.valid[v] = 1;
    q.residual[v] = std::sqrt(exp_objective(s, mag.echo_times, s0, t2) / static_cast<double>(n_e));
  }
  return q;
}

MagnitudeSeries predict_signal(const QuantMaps& maps, const std::vector<double>& echo_times) {
  MagnitudeSeries out(maps.grid, echo_times);
  const std::size_t n = maps.grid.size();
  for (std::size_t e = 0; e < echo_times.size(); ++e) {
    for (std::size_t v = 0; v < n; ++v)
      out.data[e * n + v] = maps.s0[v] * std::exp(-echo_times[e] / maps.t2star[v]);
  }
  return out;
}

RealImage t2star_image(const QuantMaps& maps, const RegionMask& region) {
  RealImage img(maps.grid, 0.0);
  for (std::size_t v = 0; v < maps.grid.size(); ++v)
    if (region.data[v]) img.data[v] = maps.t2star[v];
  return img;
}

}  // namespace qmoco

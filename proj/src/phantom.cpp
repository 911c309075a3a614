#include "qmoco/phantom.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace qmoco {
namespace {

constexpr double kPi = std::numbers::pi;

// Sum of a few random plane waves, scaled to [-1, 1].
struct SmoothField {
  std::array<double, 4> amp{}, fu{}, fv{}, fz{}, phase{};

  explicit SmoothField(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t k = 0; k < amp.size(); ++k) {
      amp[k] = 0.5 + u01(rng);
      fu[k] = kPi * (0.5 + 1.5 * u01(rng)) * (u01(rng) < 0.5 ? -1 : 1);
      fv[k] = kPi * (0.5 + 1.5 * u01(rng)) * (u01(rng) < 0.5 ? -1 : 1);
      fz[k] = 0.6 * (u01(rng) - 0.5);
      phase[k] = 2.0 * kPi * u01(rng);
    }
  }

  double operator()(double u, double v, double z) const {
    double s = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < amp.size(); ++k) {
      s += amp[k] * std::sin(fu[k] * u + fv[k] * v + fz[k] * z + phase[k]);
      norm += amp[k];
    }
    return s / norm;
  }
};

double ellipse(double u, double v, double cu, double cv, double ru, double rv) {
  const double a = (u - cu) / ru, b = (v - cv) / rv;
  return a * a + b * b;
}

}  // namespace

RealImage PhantomVolume::t2star(std::size_t z) const {
  RealImage img(grid);
  std::copy_n(t2star_map.begin() + z * grid.size(), grid.size(), img.data.begin());
  return img;
}

RegionMask PhantomVolume::brain(std::size_t z) const {
  RegionMask m(grid);
  std::copy_n(brain_mask.begin() + z * grid.size(), grid.size(), m.data.begin());
  return m;
}

RegionMask PhantomVolume::tissue(std::size_t z, Tissue t) const {
  RegionMask m(grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    m.data[i] = tissue_labels[z * grid.size() + i] == static_cast<std::uint8_t>(t);
  return m;
}

RegionMask PhantomVolume::head(std::size_t z) const {
  RegionMask m(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) m.data[i] = tissue_labels[z * grid.size() + i] != 0;
  return m;
}

PhantomVolume make_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  require(spec.rows >= 32 && spec.cols >= 32, "phantom: grid must be at least 32x32");
  require(spec.slices >= 4, "phantom: need at least 4 slices");
  require(spec.t2s_gm > 0 && spec.t2s_wm > 0 && spec.t2s_csf > 0, "phantom: T2* must be positive");
  require(spec.s0_gm >= 0 && spec.s0_wm >= 0 && spec.s0_csf >= 0, "phantom: s0 must be >= 0");
  require(spec.t2s_variation >= 0 && spec.t2s_variation < 1, "phantom: t2s_variation in [0,1)");
  require(spec.s0_variation >= 0 && spec.s0_variation < 1, "phantom: s0_variation in [0,1)");
  require(spec.csf_fraction >= 0 && spec.csf_fraction <= 2, "phantom: csf_fraction in [0,2]");

  std::mt19937_64 rng(seed);
  const SmoothField t2_field(rng);
  const SmoothField s0_field(rng);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double fold_phase = 2.0 * kPi * u01(rng);
  const double ph_u = 2.0 * u01(rng) - 1.0, ph_v = 2.0 * u01(rng) - 1.0;
  const double ph_q = 2.0 * u01(rng) - 1.0;

  PhantomVolume vol;
  vol.grid = {spec.rows, spec.cols};
  vol.slice_count = spec.slices;
  const std::size_t n = vol.grid.size() * spec.slices;
  vol.t2star_map.assign(n, 0.0);
  vol.s0_map.assign(n, 0.0);
  vol.phase_map.assign(n, 0.0);
  vol.tissue_labels.assign(n, 0);
  vol.brain_mask.assign(n, 0);

  const double cx = (static_cast<double>(spec.cols) - 1.0) / 2.0;
  const double cy = (static_cast<double>(spec.rows) - 1.0) / 2.0;
  const double csf = spec.csf_fraction;

  for (std::size_t z = 0; z < spec.slices; ++z) {
    const double zt = (static_cast<double>(z) + 0.5) / static_cast<double>(spec.slices);
    const double zf = static_cast<double>(z);
    const double size = 0.75 + 0.25 * std::sin(kPi * zt);
    const double ax = 0.44 * static_cast<double>(spec.cols) * size;
    const double ay = 0.44 * static_cast<double>(spec.rows) * size;
    const double rim = 1.0 - 0.07 * csf;
    const double vent = 0.6 + 0.4 * std::sin(kPi * zt);

    for (std::size_t r = 0; r < spec.rows; ++r) {
      for (std::size_t c = 0; c < spec.cols; ++c) {
        const double u = (static_cast<double>(c) - cx) / ax;
        const double v = (static_cast<double>(r) - cy) / ay;
        const double rho = std::hypot(u, v);
        if (rho > 1.0) continue;
        const double theta = std::atan2(v, u);
        const double wm_edge = 0.66 + 0.06 * std::sin(5.0 * theta + 0.7 * zf) +
                               0.03 * std::sin(9.0 * theta + 1.3 * zf + fold_phase);

        Tissue t = Tissue::gm;
        if (rho > rim) {
          t = Tissue::csf;
        } else if (rho < wm_edge) {
          t = Tissue::wm;
          if (csf > 0.0) {
            const double ru = 0.08 * csf * vent, rv = 0.24 * csf * vent;
            if (ellipse(u, v, -0.16, -0.06, ru, rv) < 1.0 || ellipse(u, v, 0.16, -0.06, ru, rv) < 1.0)
              t = Tissue::csf;
          }
          if (t == Tissue::wm && (ellipse(u, v, -0.3, 0.28, 0.11, 0.09) < 1.0 ||
                                  ellipse(u, v, 0.3, 0.28, 0.11, 0.09) < 1.0))
            t = Tissue::gm;
        }

        double t2 = 0.0, s0 = 0.0;
        switch (t) {
          case Tissue::gm: t2 = spec.t2s_gm; s0 = spec.s0_gm; break;
          case Tissue::wm: t2 = spec.t2s_wm; s0 = spec.s0_wm; break;
          case Tissue::csf: t2 = spec.t2s_csf; s0 = spec.s0_csf; break;
          case Tissue::background: break;
        }
        const std::size_t i = z * vol.grid.size() + r * spec.cols + c;
        vol.tissue_labels[i] = static_cast<std::uint8_t>(t);
        vol.brain_mask[i] = t == Tissue::gm || t == Tissue::wm;
        vol.t2star_map[i] = t2 * (1.0 + spec.t2s_variation * t2_field(u, v, zf));
        vol.s0_map[i] = s0 * (1.0 + spec.s0_variation * s0_field(u, v, zf));
        vol.phase_map[i] =
            spec.phase_amplitude * (0.5 * ph_u * u + 0.5 * ph_v * v + 0.4 * ph_q * (u * u + v * v - 0.5));
      }
    }
  }
  return vol;
}

std::vector<double> echo_train(std::size_t n, double te1, double dte) {
  std::vector<double> te(n);
  for (std::size_t e = 0; e < n; ++e) te[e] = te1 + dte * static_cast<double>(e);
  return te;
}

EchoSeries synthesize_echoes(const PhantomVolume& vol, const std::vector<double>& echo_times,
                             std::size_t slice) {
  require(slice < vol.slice_count, "synthesize_echoes: slice out of range");
  require(!echo_times.empty(), "synthesize_echoes: no echo times");
  for (std::size_t e = 0; e < echo_times.size(); ++e) {
    require(echo_times[e] > 0.0, "synthesize_echoes: echo times must be positive");
    require(e == 0 || echo_times[e] > echo_times[e - 1],
            "synthesize_echoes: echo times must be strictly increasing");
  }
  EchoSeries out(vol.grid, echo_times);
  const std::size_t off = slice * vol.grid.size();
  for (std::size_t e = 0; e < echo_times.size(); ++e) {
    auto img = out.echo(e);
    for (std::size_t v = 0; v < vol.grid.size(); ++v) {
      if (vol.tissue_labels[off + v] == 0) continue;
      const double mag = vol.s0_map[off + v] * std::exp(-echo_times[e] / vol.t2star_map[off + v]);
      img[v] = std::polar(mag, vol.phase_map[off + v]);
    }
  }
  return out;
}

CoilMaps make_coil_maps(std::size_t n_coils, Grid grid, std::uint64_t seed) {
  require(n_coils >= 1, "make_coil_maps: need at least one coil");
  require(grid.size() > 0, "make_coil_maps: empty grid");
  CoilMaps cm;
  cm.grid = grid;
  cm.n_coils = n_coils;
  cm.maps.assign(n_coils * grid.size(), cplx{1.0, 0.0});
  if (n_coils == 1) return cm;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double cx = (static_cast<double>(grid.cols) - 1.0) / 2.0;
  const double cy = (static_cast<double>(grid.rows) - 1.0) / 2.0;
  const double span = static_cast<double>(std::max(grid.rows, grid.cols));
  const double angle0 = 2.0 * kPi * u01(rng);

  for (std::size_t k = 0; k < n_coils; ++k) {
    const double ang = angle0 + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_coils);
    const double px = cx + 0.6 * span * std::cos(ang);
    const double py = cy + 0.6 * span * std::sin(ang);
    const double sigma = span * (0.45 + 0.1 * u01(rng));
    const double p0 = 2.0 * kPi * u01(rng);
    const double gx = (u01(rng) - 0.5) * 2.0 * kPi / span;
    const double gy = (u01(rng) - 0.5) * 2.0 * kPi / span;
    auto map = cm.coil(k);
    for (std::size_t r = 0; r < grid.rows; ++r) {
      for (std::size_t c = 0; c < grid.cols; ++c) {
        const double dx = static_cast<double>(c) - px, dy = static_cast<double>(r) - py;
        const double mag = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        const double ph = p0 + gx * static_cast<double>(c) + gy * static_cast<double>(r);
        map[r * grid.cols + c] = std::polar(mag, ph);
      }
    }
  }
  for (std::size_t v = 0; v < grid.size(); ++v) {
    double rss = 0.0;
    for (std::size_t k = 0; k < n_coils; ++k) rss += std::norm(cm.maps[k * grid.size() + v]);
    const double inv = 1.0 / std::sqrt(rss);
    for (std::size_t k = 0; k < n_coils; ++k) cm.maps[k * grid.size() + v] *= inv;
  }
  return cm;
}

double coil_smoothness_energy(const CoilMaps& coils) {
  const Grid g = coils.grid;
  double diff = 0.0, power = 0.0;
  std::size_t terms = 0;
  for (std::size_t k = 0; k < coils.n_coils; ++k) {
    auto m = coils.coil(k);
    for (std::size_t r = 0; r < g.rows; ++r) {
      for (std::size_t c = 0; c < g.cols; ++c) {
        const cplx v = m[r * g.cols + c];
        power += std::norm(v);
        if (c + 1 < g.cols) { diff += std::norm(m[r * g.cols + c + 1] - v); ++terms; }
        if (r + 1 < g.rows) { diff += std::norm(m[(r + 1) * g.cols + c] - v); ++terms; }
      }
    }
  }
  const double mean_power = power / static_cast<double>(coils.n_coils * g.size());
  return terms ? diff / static_cast<double>(terms) / mean_power : 0.0;
}

}  // namespace qmoco

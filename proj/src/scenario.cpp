#include "qmoco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qmoco/parallel.hpp"

namespace qmoco {

std::vector<RegionMask> Scenario::brain_regions() const {
  std::vector<RegionMask> out;
  for (std::size_t z = 0; z < n_slices(); ++z) out.push_back(volume.brain(z));
  return out;
}

void add_kspace_noise(KSpaceData& y, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0, "noise_sigma must be >= 0");
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& v : y.data) v += cplx(n(rng), n(rng));
}

Scenario simulate_scenario(const ScenarioSpec& spec) {
  Scenario s;
  s.volume = make_phantom(spec.phantom, spec.seed);
  s.coils = make_coil_maps(spec.n_coils, s.volume.grid, spec.seed + 1);
  s.echo_times = echo_train(spec.n_echoes, spec.te1, spec.dte);
  s.trajectory = make_trajectory(spec.events, s.volume.grid.rows, spec.order);
  s.truth_mask = ground_truth_mask(s.trajectory);
  const MotionTrajectory still = make_trajectory({}, s.volume.grid.rows, spec.order);
  const std::size_t nz = s.volume.slice_count;
  s.images.resize(nz);
  s.corrupted.resize(nz);
  s.clean.resize(nz);
  parallel_for(nz, [&](std::size_t z) {
    s.images[z] = synthesize_echoes(s.volume, s.echo_times, z);
    s.corrupted[z] = forward_model(s.images[z], s.coils, s.trajectory);
    s.clean[z] = forward_model(s.images[z], s.coils, still);
    const std::uint64_t noise_seed = spec.seed * 1000003ull + 7919ull * (z + 1);
    add_kspace_noise(s.corrupted[z], spec.noise_sigma, noise_seed);
    add_kspace_noise(s.clean[z], spec.noise_sigma, noise_seed);
  });
  return s;
}

namespace {

double signed_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  const double v = mag(rng);
  return sign(rng) ? v : -v;
}

}  // namespace

std::vector<MotionEvent> severe_motion_events(std::size_t n_lines, std::uint64_t seed, double fraction) {
  require(n_lines >= 32, "severe_motion_events: need at least 32 lines");
  std::mt19937_64 rng(seed ^ 0x5e7e2eull);
  const std::size_t total = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_lines)));
  const std::size_t len_a = total / 2, len_b = total - len_a;
  // Keep events clear of the central eighth of k-space on either side.
  const std::size_t guard = n_lines / 8;
  const std::size_t lo_end = n_lines / 2 - guard;   // window a in [1, lo_end)
  const std::size_t hi_begin = n_lines / 2 + guard;  // window b in [hi_begin, n_lines - 1)
  require(len_a + 1 < lo_end && hi_begin + len_b + 1 < n_lines, "severe_motion_events: fraction too large");
  std::uniform_int_distribution<std::size_t> pa(1, lo_end - len_a);
  std::uniform_int_distribution<std::size_t> pb(hi_begin, n_lines - 1 - len_b);
  const std::size_t a = pa(rng), b = pb(rng);
  std::vector<MotionEvent> ev;
  for (auto [first, len] : {std::pair{a, len_a}, std::pair{b, len_b}}) {
    RigidState st;
    st.rotation_deg = signed_uniform(rng, 3.0, 5.0);
    st.dx = signed_uniform(rng, 1.0, 2.5);
    st.dy = signed_uniform(rng, 1.0, 2.5);
    ev.push_back({first, first + len, st});
  }
  return ev;
}

std::vector<MotionEvent> minor_motion_events(std::size_t n_lines, std::uint64_t seed, double fraction) {
  require(n_lines >= 32, "minor_motion_events: need at least 32 lines");
  std::mt19937_64 rng(seed ^ 0x3170e2ull);
  const std::size_t len = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(fraction * n_lines)));
  const std::size_t guard = n_lines / 8;
  std::uniform_int_distribution<std::size_t> pick(1, n_lines / 2 - guard - len);
  std::bernoulli_distribution side(0.5);
  std::size_t first = pick(rng);
  if (side(rng)) first = n_lines - first - len;
  RigidState st;
  st.rotation_deg = signed_uniform(rng, 0.8, 1.2);
  st.dx = signed_uniform(rng, 0.3, 0.6);
  st.dy = signed_uniform(rng, 0.3, 0.6);
  return {{first, first + len, st}};
}

}  // namespace qmoco

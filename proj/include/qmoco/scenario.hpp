#pragma once

#include <cstdint>
#include <vector>

#include "qmoco/forward.hpp"
#include "qmoco/phantom.hpp"
#include "qmoco/types.hpp"

namespace qmoco {

struct ScenarioSpec {
  PhantomSpec phantom;
  std::size_t n_echoes = 12;
  double te1 = 5.0;  // ms
  double dte = 5.0;
  std::size_t n_coils = 4;
  std::vector<MotionEvent> events;
  SamplingOrder order = SamplingOrder::linear;
  double noise_sigma = 0.0;  // complex Gaussian, per k-space sample
  std::uint64_t seed = 0;
};

/// A simulated subject. The trajectory is shared by all slices.
struct Scenario {
  PhantomVolume volume;
  CoilMaps coils;
  std::vector<double> echo_times;
  MotionTrajectory trajectory;
  ExclusionMask truth_mask;
  std::vector<EchoSeries> images;       // clean echoes per slice
  std::vector<KSpaceData> corrupted;    // with motion and noise
  std::vector<KSpaceData> clean;        // motion-free, same noise realization

  std::size_t n_slices() const { return images.size(); }
  std::vector<RegionMask> brain_regions() const;
};

Scenario simulate_scenario(const ScenarioSpec& spec);

/// Adds complex Gaussian noise (sigma per real and imaginary part).
void add_kspace_noise(KSpaceData& y, double sigma, std::uint64_t seed);

/// Two motion windows away from the k-space center, together covering at
/// least `fraction` of the lines; each pose rotates >= 3 degrees or shifts
/// >= 2 voxels.
std::vector<MotionEvent> severe_motion_events(std::size_t n_lines, std::uint64_t seed,
                                              double fraction = 0.26);

/// One short window of small motion (about 1 degree / 0.5 voxel).
std::vector<MotionEvent> minor_motion_events(std::size_t n_lines, std::uint64_t seed,
                                             double fraction = 0.08);

}  // namespace qmoco

#pragma once

#include <cstdint>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

enum class Tissue : std::uint8_t { background = 0, gm = 1, wm = 2, csf = 3 };

/// Geometry and tissue parameters of the synthetic head.
struct PhantomSpec {
  std::size_t rows = kMaskLines;
  std::size_t cols = 64;
  std::size_t slices = 8;
  double t2s_gm = 60.0;  // ms
  double t2s_wm = 50.0;
  double t2s_csf = 200.0;
  double s0_gm = 0.85;
  double s0_wm = 0.7;
  double s0_csf = 1.0;
  // Peak relative smooth deviation of T2* around the tissue default.
  double t2s_variation = 0.1;
  double s0_variation = 0.05;
  // Scales ventricles and the cortical CSF rim; 0 removes CSF entirely.
  double csf_fraction = 1.0;
  // Peak magnitude of the smooth image phase, radians.
  double phase_amplitude = 1.0;
};

/// Multi-slice ground truth. All per-voxel maps are slice-major (Z x H x W).
struct PhantomVolume {
  Grid grid;
  std::size_t slice_count = 0;
  std::vector<double> t2star_map;  // ms, 0 in background
  std::vector<double> s0_map;
  std::vector<double> phase_map;  // radians, constant across echoes
  std::vector<std::uint8_t> tissue_labels;
  std::vector<std::uint8_t> brain_mask;  // GM or WM

  RealImage t2star(std::size_t z) const;
  RegionMask brain(std::size_t z) const;
  RegionMask tissue(std::size_t z, Tissue t) const;
  RegionMask head(std::size_t z) const;  // any non-background tissue
};

PhantomVolume make_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Ideal mono-exponential echoes of one slice with the volume's fixed phase.
EchoSeries synthesize_echoes(const PhantomVolume& vol, const std::vector<double>& echo_times,
                             std::size_t slice);

/// te1, te1 + dte, ... (n values).
std::vector<double> echo_train(std::size_t n, double te1, double dte);

/// Smooth Gaussian-lobe coil profiles, RSS-normalized to 1 at every voxel.
CoilMaps make_coil_maps(std::size_t n_coils, Grid grid, std::uint64_t seed);

/// Mean squared forward difference of the maps relative to their mean power.
double coil_smoothness_energy(const CoilMaps& coils);

}  // namespace qmoco

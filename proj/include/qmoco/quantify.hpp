#pragma once

#include <string>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

struct FitOptions {
  double t2star_cap = 500.0;  // ms
  bool refine_lm = false;     // Levenberg-Marquardt on the exponential model
  std::size_t lm_max_iters = 50;
};

/// Voxel-wise mono-exponential parameters of one slice.
struct QuantMaps {
  Grid grid;
  std::vector<double> t2star;    // ms, in (0, cap]
  std::vector<double> s0;        // >= 0
  std::vector<double> residual;  // RMS of s_e - s0 exp(-t_e / T2*)
  std::vector<std::uint8_t> valid;
  std::string method;            // "loglinear" or "loglinear+lm"
};

MagnitudeSeries magnitudes(const EchoSeries& x);

/// Weighted log-linear fit (weights s_e^2) with optional LM refinement.
/// Voxels outside `region` are skipped. Skipped or degenerate voxels (any
/// s_e <= 0, non-decaying, or T2* beyond the cap) get valid = 0 and T2* = cap.
QuantMaps fit_t2star(const MagnitudeSeries& mag, const RegionMask& region,
                     const FitOptions& opts = {});

/// s_e = s0 exp(-t_e / T2*) for every voxel.
MagnitudeSeries predict_signal(const QuantMaps& maps, const std::vector<double>& echo_times);

/// Sum of squared residuals of the model at one voxel.
double exp_objective(std::span<const double> s, std::span<const double> te, double s0, double t2);

/// T2* of region voxels (the cap where the fit was invalid), 0 elsewhere.
RealImage t2star_image(const QuantMaps& maps, const RegionMask& region);

}  // namespace qmoco

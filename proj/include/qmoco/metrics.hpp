#pragma once

#include <optional>
#include <string>

#include "qmoco/types.hpp"

namespace qmoco {

/// Display window of T2* maps; also the SSIM data range for T2*.
inline constexpr double kT2starWindow = 200.0;

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = kT2starWindow;
};

/// Mean |a - b| over region.
double mae(const RealImage& a, const RealImage& b, const RegionMask& region);

/// Local SSIM with a Gaussian window (truncated and renormalized at the image
/// border), averaged over region voxels.
double ssim(const RealImage& a, const RealImage& b, const RegionMask& region,
            const SsimParams& params = {});
double ssim(const RealImage& a, const RealImage& b, const SsimParams& params = {});

struct DetectionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // no line predicted as excluded
  bool recall_undefined = false;     // no line truly excluded
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Positive = excluded line (weight < threshold).
DetectionScores detection_scores(const ExclusionMask& pred, const ExclusionMask& truth,
                                 double threshold = 0.5);

struct MetricReport {
  std::string context;
  double mae_gm = 0.0, mae_wm = 0.0;
  double ssim_gm = 0.0, ssim_wm = 0.0;
  std::optional<DetectionScores> detection;
};

}  // namespace qmoco

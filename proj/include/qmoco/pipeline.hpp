#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qmoco/config.hpp"
#include "qmoco/detector.hpp"
#include "qmoco/metrics.hpp"
#include "qmoco/phantom.hpp"
#include "qmoco/quantify.hpp"
#include "qmoco/recon.hpp"

namespace qmoco {

// ---------------------------------------------------------------------------
// In-memory building blocks

std::vector<EchoSeries> reconstruct_volume(const std::vector<PreparedKSpace>& kspace,
                                           const std::vector<ExclusionMask>& masks, const CoilMaps& coils,
                                           const ReconConfig& cfg);

/// Fits every head voxel; returns T2* images (cap where invalid, 0 outside).
std::vector<QuantMaps> fit_volume(const std::vector<EchoSeries>& recon, const PhantomVolume& vol,
                                  const FitOptions& fit);
std::vector<RealImage> t2star_images(const std::vector<QuantMaps>& maps, const PhantomVolume& vol);

struct MapScores {
  double mae_gm = 0, mae_wm = 0, mae_brain = 0;
  double ssim_gm = 0, ssim_wm = 0, ssim_brain = 0;
};

/// MAE pooled over all region voxels; SSIM averaged over slices weighted by
/// region size.
MapScores score_t2star(const std::vector<RealImage>& estimate, const PhantomVolume& vol,
                       const SsimParams& ssim);

/// Confusion counts summed over slices.
DetectionScores pooled_detection(const std::vector<ExclusionMask>& pred,
                                 const std::vector<ExclusionMask>& truth, double threshold);

// ---------------------------------------------------------------------------
// Commands. Each reads its inputs from and writes its outputs to
// cfg.output_dir, plus a resolved-config sidecar `<command>.cfg`.

enum class MaskSource { ones, oracle, file };

void cmd_phantom(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_reconstruct(const RunConfig& cfg, MaskSource source, const std::filesystem::path& mask_file,
                     const std::string& tag);
void cmd_fit(const RunConfig& cfg, const std::string& tag);
void cmd_detect(const RunConfig& cfg);
void cmd_orba(const RunConfig& cfg);
/// Each entry is "tag" (against the phantom truth) or "tag_a:tag_b".
void cmd_metrics(const RunConfig& cfg, const std::vector<std::string>& pairs);
void cmd_report(const RunConfig& cfg);
/// phantom, simulate, reconstruct (nomoco, oracle), detect, orba, fits, report.
void cmd_run(const RunConfig& cfg);

/// Default tag for a mask source: nomoco, oracle or file.
std::string default_tag(MaskSource source);

}  // namespace qmoco

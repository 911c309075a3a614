#pragma once

#include <cstdint>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

enum class DenoiserKind { identity, tikhonov, tv_prox };

struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::identity;
  double lambda = 0.0;         // smoothing strength (tikhonov, tv_prox)
  std::size_t inner_iters = 20;  // tv_prox only
};

enum class ReconInit {
  zero_filled,  // x0 = 0
  adjoint,      // x0 = A^H E y
};

struct ReconConfig {
  std::size_t n_unrolled = 5;
  double dc_step_size = 1.0;
  DenoiserSpec denoiser;
  ReconInit init = ReconInit::adjoint;

  void validate() const;
};

/// x' = x - step * A^H E (A x - y), with A the motion-free operator.
EchoSeries dc_gradient_step(const EchoSeries& x, const KSpaceData& y, const ExclusionMask& mask,
                            const CoilMaps& coils, double step);

/// Applies the denoiser to each echo, real and imaginary parts separately.
EchoSeries denoise(const EchoSeries& x, const DenoiserSpec& spec);
void denoise_image(std::span<cplx> img, Grid grid, const DenoiserSpec& spec);

/// Isotropic total variation (forward differences, Neumann boundary).
double total_variation(std::span<const double> img, Grid grid);

/// Readout-transformed k-space of one slice, kept so that repeated
/// reconstructions with different masks only need column transforms.
struct PreparedKSpace {
  Grid grid;
  std::size_t n_coils = 0;
  std::vector<double> echo_times;
  std::vector<cplx> hybrid;  // [echo][coil][ky][x]
};

PreparedKSpace prepare(const KSpaceData& y);

/// Unrolled alternation of denoiser and DC gradient step.
EchoSeries unrolled_reconstruct(const KSpaceData& y, const ExclusionMask& mask,
                                const CoilMaps& coils, const ReconConfig& cfg);
EchoSeries unrolled_reconstruct(const PreparedKSpace& y, const ExclusionMask& mask,
                                const CoilMaps& coils, const ReconConfig& cfg);

/// Index range [begin, end) of the `center` central lines.
std::pair<std::size_t, std::size_t> center_lines(std::size_t n_lines, std::size_t center);

/// Exactly round(rate * (n_lines - center)) excluded lines, drawn uniformly
/// outside the fully-sampled center.
ExclusionMask random_mask(std::size_t n_lines, double rate, std::size_t center, std::uint64_t seed);

/// Variable-density mask set for bootstrap aggregation. Each mask excludes
/// exactly round(rate * (n_lines - center)) lines outside the kept center;
/// exclusion probability rises linearly with distance from the center
/// (density_slope in [0,1], 0 = uniform). Each line is excluded in
/// n_masks * p masks, rounded, so the per-line mean weight sits within
/// 1/n_masks of its expectation.
std::vector<ExclusionMask> orba_masks(std::size_t n_lines, std::size_t n_masks, double rate,
                                      std::size_t center, double density_slope, std::uint64_t seed);

struct OrbaConfig {
  std::size_t n_masks = 15;
  double rate = 0.5;
  std::size_t center = 10;
  double density_slope = 0.2;
};

struct OrbaResult {
  EchoSeries recon;
  ExclusionMask mean_mask;
  std::vector<ExclusionMask> masks;
};

/// Mean of unrolled reconstructions over the OR-BA mask set.
OrbaResult orba_reconstruct(const KSpaceData& y, const CoilMaps& coils, const ReconConfig& cfg,
                            const OrbaConfig& ocfg, std::uint64_t seed);

}  // namespace qmoco

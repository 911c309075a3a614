#pragma once

#include <optional>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

inline constexpr double kDefaultLambda = 0.1;

struct LossReport {
  double l_phys = 0.0;
  double l_reg = 0.0;
  double total = 0.0;
  double lambda = kDefaultLambda;
  std::optional<std::vector<double>> per_voxel_rho;
};

/// Per-voxel Pearson correlation across echoes; 0 where either series is flat.
std::vector<double> voxel_correlation(const MagnitudeSeries& s_rec, const MagnitudeSeries& s_fit);

/// Mean over `region` of 1 - rho between reconstructed and fitted echo
/// magnitudes. In [0, 2]; 0 means the recon is exactly mono-exponential.
double physics_loss(const MagnitudeSeries& s_rec, const MagnitudeSeries& s_fit,
                    const RegionMask& region, std::vector<double>* rho_out = nullptr);

/// Mean over pairs (z, z+2) of the mean absolute per-line mask difference.
/// `slice_index[i]` is the volume slice of masks[i]; only pairs with both
/// slices present contribute. Throws if no pair exists.
double mask_regularizer(const std::vector<ExclusionMask>& masks,
                        const std::vector<std::size_t>& slice_index);
/// Masks for consecutive slices 0..Z-1, Z >= 3.
double mask_regularizer(const std::vector<ExclusionMask>& masks);

/// d mask_regularizer / d masks[i][line] (sign subgradient, 0 at ties).
std::vector<std::vector<double>> mask_regularizer_grad(const std::vector<ExclusionMask>& masks,
                                                        const std::vector<std::size_t>& slice_index);

LossReport total_loss(double l_phys, double l_reg, double lambda = kDefaultLambda);

}  // namespace qmoco

#include "qmoco/physloss.hpp"

#include <cmath>

#include "qmoco/simd.hpp"

namespace qmoco {

std::vector<double> voxel_correlation(const MagnitudeSeries& s_rec, const MagnitudeSeries& s_fit) {
  require(s_rec.grid == s_fit.grid && s_rec.n_echoes() == s_fit.n_echoes(),
          "physics_loss: series shapes differ");
  const std::size_t n = s_rec.grid.size();
  std::vector<double> rho(n);
  simd::kernels().pearson(s_rec.data.data(), s_fit.data.data(), s_rec.n_echoes(), n, n, rho.data());
  return rho;
}

double physics_loss(const MagnitudeSeries& s_rec, const MagnitudeSeries& s_fit,
                    const RegionMask& region, std::vector<double>* rho_out) {
  require(s_rec.n_echoes() >= 3, "physics_loss: need at least 3 echoes");
  require(region.grid == s_rec.grid, "physics_loss: region grid mismatch");
  const std::size_t n_region = count(region);
  require(n_region > 0, "physics_loss: empty region");
  std::vector<double> rho = voxel_correlation(s_rec, s_fit);
  // Pairwise summation keeps the reduction order fixed and well conditioned.
  std::vector<double> terms;
  terms.reserve(n_region);
  for (std::size_t v = 0; v < rho.size(); ++v)
    if (region.data[v]) terms.push_back(1.0 - rho[v]);
  for (std::size_t width = 1; width < terms.size(); width *= 2) {
    for (std::size_t i = 0; i + width < terms.size(); i += 2 * width) terms[i] += terms[i + width];
  }
  if (rho_out) *rho_out = std::move(rho);
  return terms[0] / static_cast<double>(n_region);
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> regularizer_pairs(
    const std::vector<ExclusionMask>& masks, const std::vector<std::size_t>& slice_index) {
  require(masks.size() == slice_index.size(), "mask_regularizer: index count mismatch");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t j = 0; j < masks.size(); ++j) {
      if (slice_index[j] == slice_index[i] + 2) {
        require(masks[i].size() == masks[j].size(), "mask_regularizer: mask lengths differ");
        pairs.emplace_back(i, j);
      }
    }
  }
  require(!pairs.empty(), "mask_regularizer: no (z, z+2) slice pair present");
  return pairs;
}

}  // namespace

double mask_regularizer(const std::vector<ExclusionMask>& masks,
                        const std::vector<std::size_t>& slice_index) {
  const auto pairs = regularizer_pairs(masks, slice_index);
  double sum = 0.0;
  for (auto [i, j] : pairs) {
    double d = 0.0;
    for (std::size_t l = 0; l < masks[i].size(); ++l)
      d += std::abs(masks[i].weights[l] - masks[j].weights[l]);
    sum += d / static_cast<double>(masks[i].size());
  }
  return sum / static_cast<double>(pairs.size());
}

double mask_regularizer(const std::vector<ExclusionMask>& masks) {
  require(masks.size() >= 3, "mask_regularizer: need at least 3 slices");
  std::vector<std::size_t> idx(masks.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return mask_regularizer(masks, idx);
}

std::vector<std::vector<double>> mask_regularizer_grad(const std::vector<ExclusionMask>& masks,
                                                        const std::vector<std::size_t>& slice_index) {
  const auto pairs = regularizer_pairs(masks, slice_index);
  std::vector<std::vector<double>> grad(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) grad[i].assign(masks[i].size(), 0.0);
  for (auto [i, j] : pairs) {
    const double scale = 1.0 / (static_cast<double>(pairs.size()) * static_cast<double>(masks[i].size()));
    for (std::size_t l = 0; l < masks[i].size(); ++l) {
      const double d = masks[i].weights[l] - masks[j].weights[l];
      const double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      grad[i][l] += scale * sgn;
      grad[j][l] -= scale * sgn;
    }
  }
  return grad;
}

LossReport total_loss(double l_phys, double l_reg, double lambda) {
  LossReport r;
  r.l_phys = l_phys;
  r.l_reg = l_reg;
  r.lambda = lambda;
  r.total = l_phys + lambda * l_reg;
  return r;
}

}  // namespace qmoco

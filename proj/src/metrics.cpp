#include "qmoco/metrics.hpp"

#include <cmath>
#include <vector>

namespace qmoco {

double mae(const RealImage& a, const RealImage& b, const RegionMask& region) {
  require(a.grid == b.grid && a.grid == region.grid, "mae: shape mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t v = 0; v < a.data.size(); ++v) {
    if (!region.data[v]) continue;
    sum += std::abs(a.data[v] - b.data[v]);
    ++n;
  }
  require(n > 0, "mae: empty region");
  return sum / static_cast<double>(n);
}

double ssim(const RealImage& a, const RealImage& b, const RegionMask& region, const SsimParams& p) {
  require(a.grid == b.grid && a.grid == region.grid, "ssim: shape mismatch");
  require(p.data_range > 0.0, "ssim: data_range must be positive");
  require(p.window % 2 == 1, "ssim: window must be odd");
  const Grid g = a.grid;
  const auto half = static_cast<std::ptrdiff_t>(p.window / 2);
  std::vector<double> kernel(p.window);
  for (std::ptrdiff_t i = -half; i <= half; ++i)
    kernel[i + half] = std::exp(-static_cast<double>(i * i) / (2.0 * p.sigma * p.sigma));
  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  const auto h = static_cast<std::ptrdiff_t>(g.rows), w = static_cast<std::ptrdiff_t>(g.cols);

  double sum = 0.0;
  std::size_t n = 0;
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      if (!region.data[r * w + c]) continue;
      double ws = 0, ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
        const std::ptrdiff_t rr = r + dr;
        if (rr < 0 || rr >= h) continue;
        for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
          const std::ptrdiff_t cc = c + dc;
          if (cc < 0 || cc >= w) continue;
          const double k = kernel[dr + half] * kernel[dc + half];
          const double x = a.data[rr * w + cc], y = b.data[rr * w + cc];
          ws += k;
          ma += k * x;
          mb += k * y;
          saa += k * x * x;
          sbb += k * y * y;
          sab += k * x * y;
        }
      }
      ma /= ws;
      mb /= ws;
      // Same expression for all three moments so identical inputs give exactly 1.
      const double va = saa / ws - ma * ma;
      const double vb = sbb / ws - mb * mb;
      const double cov = sab / ws - ma * mb;
      const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      sum += num / den;
      ++n;
    }
  }
  require(n > 0, "ssim: empty region");
  return sum / static_cast<double>(n);
}

double ssim(const RealImage& a, const RealImage& b, const SsimParams& p) {
  return ssim(a, b, RegionMask(a.grid, 1), p);
}

DetectionScores detection_scores(const ExclusionMask& pred, const ExclusionMask& truth, double threshold) {
  require(pred.size() == truth.size(), "detection_scores: length mismatch");
  DetectionScores s;
  for (std::size_t l = 0; l < pred.size(); ++l) {
    const bool p = pred.weights[l] < threshold;
    const bool t = truth.weights[l] < threshold;
    if (p && t) ++s.tp;
    else if (p) ++s.fp;
    else if (t) ++s.fn;
    else ++s.tn;
  }
  s.precision_undefined = s.tp + s.fp == 0;
  s.recall_undefined = s.tp + s.fn == 0;
  s.precision = s.precision_undefined ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  s.recall = s.recall_undefined ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  if (s.precision_undefined && s.recall_undefined) {
    // Nothing to detect and nothing flagged: perfect agreement.
    s.precision = s.recall = s.f1 = 1.0;
  } else {
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  return s;
}

}  // namespace qmoco

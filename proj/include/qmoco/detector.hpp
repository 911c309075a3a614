#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmoco/physloss.hpp"
#include "qmoco/quantify.hpp"
#include "qmoco/recon.hpp"
#include "qmoco/types.hpp"

namespace qmoco {

enum class Activation { relu, tanh };

/// Slice index -> 3 (affine) -> 23 -> 46 (hidden nonlinearity) -> n_lines
/// (sigmoid). All weights live in one flat parameter vector.
class MaskPredictor {
 public:
  static constexpr std::size_t kEmbed = 3;
  static constexpr std::size_t kHidden1 = 23;
  static constexpr std::size_t kHidden2 = 46;

  MaskPredictor(std::size_t n_slices, std::size_t n_lines = kMaskLines,
                Activation act = Activation::relu);

  struct Trace {
    double input = 0.0;
    std::vector<double> embed, pre1, h1, pre2, h2, logits;
  };

  std::size_t n_slices() const { return n_slices_; }
  std::size_t n_lines() const { return n_lines_; }
  std::size_t n_params() const { return theta.size(); }
  Activation activation() const { return act_; }

  Trace trace(std::size_t z) const;
  ExclusionMask forward(std::size_t z) const;
  /// dtheta += d(sum_j g_j * logit_j)/dtheta for the traced slice.
  void backward(const Trace& t, std::span<const double> dlogits, std::span<double> dtheta) const;

  std::vector<double> theta;

 private:
  std::size_t n_slices_, n_lines_;
  Activation act_;
};

/// Small random hidden weights; output bias set so every initial weight is
/// close to `init_keep`.
MaskPredictor predictor_init(std::uint64_t seed, std::size_t n_slices,
                             std::size_t n_lines = kMaskLines, Activation act = Activation::relu,
                             double init_keep = 0.95);

ExclusionMask predictor_forward(const MaskPredictor& p, std::size_t z);

/// Entries >= threshold become 1, the rest 0.
ExclusionMask binarize_mask(const ExclusionMask& mask, double threshold = 0.5);

enum class DetectorOptimizer {
  nes,      // antithetic Gaussian perturbations of the output logits
  fd_adam,  // central differences on each output logit
};

enum class StopMonitor { total, l_reg };

struct DetectorConfig {
  double lambda = kDefaultLambda;
  std::size_t batch_slices = 4;
  std::size_t patience = 50;
  std::size_t max_epochs = 300;
  DetectorOptimizer optimizer = DetectorOptimizer::nes;
  double fd_epsilon = 0.05;   // logit step for fd_adam
  std::size_t population = 8;  // antithetic pairs per slice (nes)
  double sigma = 0.5;         // logit perturbation scale (nes)
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  // Far below typical gradient sizes: the physics loss of clean synthetic
  // data is tiny, and the usual 1e-8 would stall the update.
  double adam_epsilon = 1e-20;
  StopMonitor monitor = StopMonitor::total;
  Activation activation = Activation::relu;
  double init_keep = 0.95;
  std::uint64_t seed = 0;
  FitOptions fit;

  void validate() const;
};

/// One subject: readout-transformed k-space per slice, shared coils, and the
/// loss region (brain without CSF) per slice.
struct SubjectData {
  std::vector<PreparedKSpace> slices;
  CoilMaps coils;
  std::vector<RegionMask> regions;

  std::size_t n_slices() const { return slices.size(); }
};

SubjectData make_subject(const std::vector<KSpaceData>& kspace, CoilMaps coils,
                         std::vector<RegionMask> regions);

/// Physics loss of one slice: reconstruct, fit, re-predict, correlate.
double slice_physics_loss(const PreparedKSpace& y, const ExclusionMask& mask, const CoilMaps& coils,
                          const RegionMask& region, const ReconConfig& rcfg, const FitOptions& fit);

/// Physics loss averaged over the given slices plus the (z, z+2) mask
/// regularizer. `masks[i]` belongs to slice `slices[i]`; empty `slices`
/// means all slices in order.
LossReport evaluate_masks(const std::vector<ExclusionMask>& masks, const SubjectData& subject,
                          const ReconConfig& rcfg, double lambda = kDefaultLambda,
                          const FitOptions& fit = {}, std::vector<std::size_t> slices = {});

struct TraceRow {
  std::size_t epoch = 0;
  double l_phys = 0.0;
  double l_reg = 0.0;
  double total = 0.0;
  double best_total = 0.0;
  double wall_ms = 0.0;
};

struct DetectionResult {
  std::vector<ExclusionMask> masks;  // best-so-far, one per slice
  std::vector<TraceRow> trace;
  std::size_t best_epoch = 0;
  std::optional<LossReport> reference;  // loss of supplied reference masks
  MaskPredictor predictor{4};
};

DetectionResult optimize_masks(const SubjectData& subject, const DetectorConfig& dcfg,
                               const ReconConfig& rcfg,
                               const std::vector<ExclusionMask>* reference_masks = nullptr);

}  // namespace qmoco

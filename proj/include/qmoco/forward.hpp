#pragma once

#include <optional>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco {

/// In-plane rigid pose: rotation about the grid center (then translation).
struct RigidState {
  double rotation_deg = 0.0;  // counter-clockwise in (column, row) coordinates
  double dx = 0.0;            // columns
  double dy = 0.0;            // rows

  bool is_identity() const { return rotation_deg == 0.0 && dx == 0.0 && dy == 0.0; }
  bool operator==(const RigidState&) const = default;
};

enum class SamplingOrder { linear, center_out };

/// A pose held over a contiguous range of acquisition shots [first, last).
/// Shot s acquires phase-encode line order[s]; with linear order shots and
/// lines coincide.
struct MotionEvent {
  std::size_t first = 0;
  std::size_t last = 0;
  RigidState state;

  bool operator==(const MotionEvent&) const = default;
};

struct MotionTrajectory {
  std::vector<RigidState> states;             // one per time point
  std::vector<std::size_t> line_assignment;   // line index -> time point

  std::size_t n_lines() const { return line_assignment.size(); }
  std::size_t n_times() const { return states.size(); }
};

std::vector<std::size_t> acquisition_order(std::size_t n_lines, SamplingOrder order);

MotionTrajectory make_trajectory(const std::vector<MotionEvent>& events, std::size_t n_lines,
                                 SamplingOrder order = SamplingOrder::linear);

/// Rotate then translate with bilinear interpolation and zero boundary.
ComplexImage apply_rigid(const ComplexImage& img, const RigidState& state);

/// Motion-corrupted multicoil k-space: for each time point, move the images,
/// weight by each coil, transform, and keep only that time point's lines.
KSpaceData forward_model(const EchoSeries& x, const CoilMaps& coils, const MotionTrajectory& traj);

/// Motion-free multicoil k-space of every line (the reconstruction operator A).
KSpaceData sense_forward(const EchoSeries& x, const CoilMaps& coils);

/// A^H W y = sum_c conj(C_c) F^-1 (W y_c), per echo.
EchoSeries adjoint(const KSpaceData& y, const CoilMaps& coils, const ExclusionMask& weights);

/// Scales line ky by weights[ky] in every coil and echo.
KSpaceData apply_mask(const KSpaceData& y, const ExclusionMask& mask);

/// Keeps (1) lines acquired in the identity pose, excludes (0) the rest.
ExclusionMask ground_truth_mask(const MotionTrajectory& traj);

void check_mask(const ExclusionMask& mask, std::size_t n_lines);

}  // namespace qmoco

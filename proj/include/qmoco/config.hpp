#pragma once

// Run configuration: `section.key = value` lines, `#` starts a comment.
// Unknown keys and malformed values raise ValidationError.

#include <cstdint>
#include <filesystem>
#include <string>

#include "qmoco/detector.hpp"
#include "qmoco/metrics.hpp"
#include "qmoco/recon.hpp"
#include "qmoco/scenario.hpp"

namespace qmoco {

enum class MotionPreset { none, severe, minor };

struct RunConfig {
  ScenarioSpec scenario;  // phantom.*, trajectory.* (events, order, noise)
  MotionPreset preset = MotionPreset::none;
  double preset_fraction = 0.0;  // 0 = preset default
  ReconConfig recon;         // every final reconstruction
  ReconConfig detector_recon;  // inside the mask optimization loop only
  FitOptions fit;
  DetectorConfig detector;
  OrbaConfig orba;
  SsimParams ssim;
  double detection_threshold = 0.5;
  std::uint64_t seed = 0;  // seeds.base
  std::filesystem::path output_dir = "out";
  bool write_pgm = true;

  /// Events after applying the preset, if any.
  std::vector<MotionEvent> resolved_events() const;
  /// Scenario with the seed and events filled in.
  ScenarioSpec resolved_scenario() const;
  DetectorConfig resolved_detector() const;
  std::uint64_t orba_seed() const { return seed + 101; }

  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key with its current value; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& c);

std::string format_events(const std::vector<MotionEvent>& events);
std::vector<MotionEvent> parse_events(const std::string& text);

}  // namespace qmoco

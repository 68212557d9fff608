#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereogen/image.hpp"

namespace stereogen {

/// PSNR in dB over the joint RGB mean squared error, peak 255.
/// Identical frames give +infinity.
double psnr(const RgbFrame& a, const RgbFrame& b);

/// Fixed SSIM parameters; echoed into every report.
struct SsimParameters {
  static constexpr int window = 11;
  static constexpr double sigma = 1.5;
  static constexpr double k1 = 0.01;
  static constexpr double k2 = 0.03;
  static constexpr double dynamic_range = 255.0;
};

/// BT.601 luma plane (0.299 R + 0.587 G + 0.114 B).
Plane<double> luma(const RgbFrame& frame);

/// Mean SSIM over every full 11x11 Gaussian window (sigma 1.5) of the luma
/// planes. Throws size when either side is below 11 pixels.
double ssim(const RgbFrame& a, const RgbFrame& b);

struct FrameScore {
  std::size_t index = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Per-frame scores plus aggregates. Frames with infinite PSNR are left out
/// of mean_psnr and counted in infinite_psnr_frames; mean_psnr is +infinity
/// only when every frame is identical.
struct MetricReport {
  std::vector<FrameScore> per_frame;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::size_t infinite_psnr_frames = 0;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& doc);
};

MetricReport evaluate_frames(const std::vector<RgbFrame>& candidate,
                             const std::vector<RgbFrame>& reference);

/// Compares two numbered PNG directories frame by frame.
MetricReport evaluate_sequence(const std::filesystem::path& candidate_dir,
                               const std::filesystem::path& reference_dir);

/// Labelled runs against one reference, e.g. {"leave_blank", ...}, {"filled", ...}.
using LabelledRun = std::pair<std::string, MetricReport>;
nlohmann::json comparison_to_json(const std::vector<LabelledRun>& runs);
std::vector<LabelledRun> comparison_from_json(const nlohmann::json& doc);

}  // namespace stereogen

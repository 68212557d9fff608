#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stereogen/camera.hpp"
#include "stereogen/cloud.hpp"
#include "stereogen/frameio.hpp"
#include "stereogen/inpaint.hpp"
#include "stereogen/layout.hpp"
#include "stereogen/manifest.hpp"
#include "stereogen/render.hpp"

namespace stereogen {

enum class FillMode { builtin, external };

struct FillSettings {
  FillMode mode = FillMode::builtin;
  FillPolicy policy;
  /// Provider command with {frames}, {masks}, {out} placeholders (external only).
  std::string command;
  /// Extra hole margin before filling. Defaults to 0 for builtin, 3 for external.
  int dilation = 0;
  Rgb hole_color{0, 0, 0};
};

/// Fully resolved job: sequences discovered, defaults applied.
struct StereoJob {
  SequenceRef frames;
  SequenceRef depths;
  DepthEncoding depth_encoding = DepthEncoding::png16;
  DepthNormalization depth_norm;
  CameraIntrinsics intrinsics;
  StereoRig rig;
  Footprint footprint = Footprint::nearest;
  FillSettings fill;
  OutputLayout layout = OutputLayout::side_by_side;

  /// Checks frame/depth counts and that every dimension matches the intrinsics.
  void validate() const;
  RenderOptions render_options() const { return {footprint, fill.hole_color}; }
  /// Settings echoed into reports (paths, parameters; no run options).
  nlohmann::json config() const;
};

struct RunOptions {
  std::filesystem::path out_root;
  bool force = false;
  int workers = 1;
};

/// Builds a job from a manifest. Relative paths resolve against `base_dir`.
StereoJob resolve_job(const JobManifest& manifest, const std::filesystem::path& base_dir);
FillSettings resolve_fill(const JobManifest& manifest);
RunOptions resolve_run_options(const JobManifest& manifest, const std::filesystem::path& base_dir);

/// Wall-clock seconds spent in each per-frame stage.
struct FrameTimings {
  double normalize = 0.0;
  double cloud = 0.0;
  double transform = 0.0;
  double splat = 0.0;
  double mask = 0.0;

  /// Cloud, transform, splat and mask for both eyes.
  double stereo_frame() const noexcept { return cloud + transform + splat + mask; }
};

struct EyeViews {
  RenderedView left;
  RenderedView right;
};

/// One frame through cloud construction, per-eye transform, splat and mask.
EyeViews render_eyes(const RgbFrame& rgb, const DepthFrame& depth, const CameraIntrinsics& k,
                     const StereoRig& rig, const RenderOptions& options,
                     FrameTimings* timings = nullptr);

/// Widens the holes of `view` by `settings.dilation` and fills them with the
/// builtin policy. Returns the filled frame and the mask actually used.
std::pair<RgbFrame, Mask> fill_eye(const RenderedView& view, const FillSettings& settings);

/// Packs two eyes. side_by_side is 2W x H (left first), top_bottom W x 2H
/// (left on top), anaglyph_red_cyan takes red from left and green/blue from
/// right. `separate` packs nothing and returns nullopt.
std::optional<RgbFrame> combine(const RgbFrame& left, const RgbFrame& right,
                                OutputLayout layout);

/// Everything a finished job writes; `stereo` is empty for the separate layout.
struct StereoOutputs {
  std::vector<RgbFrame> left;
  std::vector<RgbFrame> right;
  std::vector<RgbFrame> stereo;
  std::vector<Mask> masks_left;
  std::vector<Mask> masks_right;
  nlohmann::json report;
};

/// Writes {left,right,stereo,masks_left,masks_right}/frame_%06d.png and
/// report.json under `out_root`. Returns the written paths in order.
std::vector<std::filesystem::path> write_outputs(const StereoOutputs& outputs,
                                                 const std::filesystem::path& out_root,
                                                 bool force);

// Job runners. Each writes under options.out_root (refusing a non-empty root
// unless forced), returns the report it also writes as report.json, and on
// failure moves what it had produced into out_root/quarantine and throws
// JobError naming the stage and, when known, the frame.

/// Full pipeline: views, fill, combine.
nlohmann::json generate_stereo(const StereoJob& job, const RunOptions& options);

/// Unfilled eye views: left/, right/, masks_left/, masks_right/ and the
/// z-buffers as depth_left/, depth_right/ (PFM, inf = hole).
nlohmann::json render_views(const StereoJob& job, const RunOptions& options);

/// Fills a render_views output directory: left/, right/, masks_left/, masks_right/.
nlohmann::json fill_views(const std::filesystem::path& views_dir, const FillSettings& fill,
                          const RunOptions& options);

/// Packs eye directories (left/, right/) into stereo/ (or copies both eyes for
/// the separate layout).
nlohmann::json combine_views(const std::filesystem::path& eyes_dir, OutputLayout layout,
                             const RunOptions& options);

/// The report with its "timings" block removed; equal across worker counts.
nlohmann::json strip_timings(nlohmann::json report);

}  // namespace stereogen

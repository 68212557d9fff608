#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "stereogen/camera.hpp"
#include "stereogen/cloud.hpp"
#include "stereogen/image.hpp"

namespace stereogen {

/// Fronto-parallel rectangle covering columns [x0, x1) and rows [y0, y1).
/// Bounds may extend past the image; the off-image part still exists in 3D.
struct SceneRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double depth = 1.0;
  Rgb color;
};

/// Background plane plus rectangles in front of it.
struct SceneSpec {
  int width = 0;
  int height = 0;
  CameraIntrinsics intrinsics;
  double background_depth = 1.0;
  Rgb background_color;
  std::vector<SceneRect> rectangles;

  void validate() const;

  /// Manifest-format document (strict keys). Intrinsics default like a job's.
  static SceneSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct SceneFrame {
  RgbFrame rgb;
  DepthFrame depth;
};

/// Painter's order: background, then rectangles far to near (later entries
/// win among equal depths).
SceneFrame render_scene(const SceneSpec& spec);

struct GroundTruthView {
  /// What the displaced camera really sees, including background revealed
  /// behind rectangles.
  RgbFrame image;
  DepthFrame depth;
  /// Pixels that no source pixel reaches under nearest-pixel splatting.
  Mask dropout;
};

/// Analytic second view for a pure translation (theta == 0): every layer moves
/// by its own disparity fx * tx / Z. Throws unsupported_analytic_case when the
/// transform rotates.
GroundTruthView ground_truth_view(const SceneSpec& spec, const ViewTransform& m);

}  // namespace stereogen

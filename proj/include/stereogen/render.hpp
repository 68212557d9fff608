#pragma once

#include <limits>

#include "stereogen/camera.hpp"
#include "stereogen/cloud.hpp"
#include "stereogen/image.hpp"

namespace stereogen {

enum class Footprint { nearest, bilinear2x2 };

struct RenderOptions {
  Footprint footprint = Footprint::nearest;
  Rgb hole_color{0, 0, 0};
  /// Depths within this distance of the per-pixel minimum count as a tie;
  /// ties go to the smallest source_index.
  double z_epsilon = 1e-6;
};

inline constexpr float kEmptyDepth = std::numeric_limits<float>::infinity();

/// One eye's splatted view. mask(p) == kMaskHole <=> zbuffer(p) == inf <=>
/// image(p) holds the hole color. The z-buffer is stored in single precision so
/// that it survives a PFM round trip unchanged.
struct RenderedView {
  RgbFrame image;
  Plane<float> zbuffer;
  Mask mask;

  std::size_t hole_count() const noexcept;
};

/// Forward z-buffered splat onto the image plane described by `k`.
/// The result does not depend on point order.
RenderedView splat(const ColoredPointCloud& cloud, const CameraIntrinsics& k,
                   const RenderOptions& options = {});

/// Dropout mask as an 8-bit frame (255 = hole, 0 = covered).
Mask extract_mask(const RenderedView& view);

/// Morphological dilation with a (2r+1)x(2r+1) square; r = 0 is the identity.
Mask dilate_mask(const Mask& mask, int radius);

/// Marks every pixel of `mask` as a hole in `view` (hole color, empty depth).
/// Used to widen the dropout region before filling.
RenderedView mask_out(const RenderedView& view, const Mask& mask, Rgb hole_color);

}  // namespace stereogen

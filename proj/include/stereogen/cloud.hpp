#pragma once

#include <cstdint>
#include <vector>

#include "stereogen/camera.hpp"
#include "stereogen/image.hpp"

namespace stereogen {

/// Raw provider samples before unit conversion (16-bit integers or PFM floats).
struct RawDepth {
  Plane<double> samples;
};

/// Depth in scene units. Every pixel with `valid` set holds a finite value > 0.
struct DepthFrame {
  Plane<double> values;
  Plane<std::uint8_t> valid;

  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
  std::size_t valid_count() const noexcept;

  /// Wraps metric values; samples that are non-finite or <= 0 are marked invalid.
  static DepthFrame from_values(Plane<double> values);
};

enum class DepthMode { metric, inverse };

struct DepthNormalization {
  DepthMode mode = DepthMode::metric;
  double scale = 1.0;
  double shift = 0.0;
};

/// metric: d = raw * scale + shift; inverse: d = scale / (raw + shift).
/// Results that are <= 0 or non-finite become invalid pixels. An all-invalid
/// frame is returned as-is (callers report it; it renders fully masked).
DepthFrame normalize_depth(const RawDepth& raw, const DepthNormalization& norm);

struct ColoredPoint {
  Point3 position;
  Rgb color;
  std::uint32_t source_index = 0;
};

/// Points are kept in ascending source_index order, one per valid source pixel.
struct ColoredPointCloud {
  std::vector<ColoredPoint> points;
  int source_width = 0;
  int source_height = 0;
};

ColoredPointCloud cloud_from_rgbd(const RgbFrame& rgb, const DepthFrame& depth,
                                  const CameraIntrinsics& k);

ColoredPointCloud transform_cloud(const ColoredPointCloud& cloud, const ViewTransform& m);
ColoredPointCloud transform_cloud(const ColoredPointCloud& cloud, const Matrix4& m);

}  // namespace stereogen

#include "stereogen/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stereogen/error.hpp"

namespace stereogen {

std::size_t DepthFrame::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(valid.data().begin(), valid.data().end(), [](auto v) { return v != 0; }));
}

DepthFrame DepthFrame::from_values(Plane<double> values) {
  DepthFrame frame{std::move(values), {}};
  frame.valid = Plane<std::uint8_t>(frame.values.width(), frame.values.height());
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    const double d = frame.values[i];
    frame.valid[i] = (std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
  return frame;
}

DepthFrame normalize_depth(const RawDepth& raw, const DepthNormalization& norm) {
  if (!std::isfinite(norm.scale) || !(norm.scale > 0.0) || !std::isfinite(norm.shift)) {
    std::ostringstream why;
    why << "depth scale must be positive and shift finite, got scale=" << norm.scale
        << " shift=" << norm.shift;
    throw Error(ErrorKind::invalid_argument, why.str());
  }
  Plane<double> values(raw.samples.width(), raw.samples.height());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = raw.samples[i];
    values[i] = norm.mode == DepthMode::metric ? r * norm.scale + norm.shift
                                               : norm.scale / (r + norm.shift);
  }
  return DepthFrame::from_values(std::move(values));
}

ColoredPointCloud cloud_from_rgbd(const RgbFrame& rgb, const DepthFrame& depth,
                                  const CameraIntrinsics& k) {
  if (rgb.width() != k.width || rgb.height() != k.height || depth.width() != k.width ||
      depth.height() != k.height) {
    std::ostringstream why;
    why << "rgb " << rgb.width() << "x" << rgb.height() << " and depth " << depth.width()
        << "x" << depth.height() << " must match intrinsics " << k.width << "x" << k.height;
    throw Error(ErrorKind::shape, why.str());
  }

  ColoredPointCloud cloud;
  cloud.source_width = k.width;
  cloud.source_height = k.height;
  cloud.points.reserve(depth.valid_count());

  // Same arithmetic as backproject; the validity flag already guarantees d > 0.
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t i = depth.values.index(x, y);
      if (!depth.valid[i]) continue;
      const double d = depth.values[i];
      ColoredPoint p;
      p.position = {d * (x - k.cx) / k.fx, d * (y - k.cy) / k.fy, d};
      p.color = rgb.at(i);
      p.source_index = static_cast<std::uint32_t>(i);
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

ColoredPointCloud transform_cloud(const ColoredPointCloud& cloud, const Matrix4& m) {
  ColoredPointCloud out = cloud;
  for (auto& p : out.points) p.position = transform_point(m, p.position);
  return out;
}

ColoredPointCloud transform_cloud(const ColoredPointCloud& cloud, const ViewTransform& m) {
  return transform_cloud(cloud, m.matrix());
}

}  // namespace stereogen

#include "stereogen/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "stereogen/error.hpp"

namespace stereogen {

namespace {

constexpr std::uint32_t kNoWinner = 0xFFFFFFFFu;

// Calls fn(pixel_index) for every pixel the footprint of (u, v) touches.
template <typename Fn>
void for_each_target(double u, double v, int width, int height, Footprint footprint,
                     Fn&& fn) {
  // Reject far-off projections before converting to int.
  if (!(u > -2.0 && v > -2.0 && u < width + 1.0 && v < height + 1.0)) return;
  if (footprint == Footprint::nearest) {
    const int x = static_cast<int>(std::floor(u + 0.5));
    const int y = static_cast<int>(std::floor(v + 0.5));
    if (x >= 0 && y >= 0 && x < width && y < height)
      fn(static_cast<std::size_t>(y) * width + x);
    return;
  }
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const int x = x0 + dx;
      const int y = y0 + dy;
      if (x >= 0 && y >= 0 && x < width && y < height)
        fn(static_cast<std::size_t>(y) * width + x);
    }
}

}  // namespace

std::size_t RenderedView::hole_count() const noexcept {
  return static_cast<std::size_t>(
      std::count(mask.data().begin(), mask.data().end(), kMaskHole));
}

RenderedView splat(const ColoredPointCloud& cloud, const CameraIntrinsics& k,
                   const RenderOptions& options) {
  const int w = k.width;
  const int h = k.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  struct Target {
    double u, v, z;
  };
  std::vector<Target> targets(cloud.points.size());
  std::vector<double> zmin(n, std::numeric_limits<double>::infinity());

  // Pass 1: nearest depth per pixel.
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i].position;
    if (!(p.z > 0.0) || !std::isfinite(p.z)) {
      targets[i] = {0.0, 0.0, -1.0};
      continue;
    }
    // Same arithmetic as project().
    targets[i] = {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
    const double z = p.z;
    for_each_target(targets[i].u, targets[i].v, w, h, options.footprint,
                    [&](std::size_t t) { zmin[t] = std::min(zmin[t], z); });
  }

  // Pass 2: among points within z_epsilon of the minimum, smallest source index wins.
  std::vector<std::uint32_t> winner(n, kNoWinner);
  std::vector<std::uint32_t> winner_point(n, 0);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Target& t = targets[i];
    if (t.z <= 0.0) continue;
    const std::uint32_t src = cloud.points[i].source_index;
    for_each_target(t.u, t.v, w, h, options.footprint, [&](std::size_t px) {
      if (t.z <= zmin[px] + options.z_epsilon && (winner[px] == kNoWinner || src < winner[px])) {
        winner[px] = src;
        winner_point[px] = static_cast<std::uint32_t>(i);
      }
    });
  }

  RenderedView view{RgbFrame(w, h, options.hole_color), Plane<float>(w, h, kEmptyDepth),
                    Mask(w, h, kMaskHole)};
  for (std::size_t px = 0; px < n; ++px) {
    if (winner[px] == kNoWinner) continue;
    view.image.set(px, cloud.points[winner_point[px]].color);
    view.zbuffer[px] = static_cast<float>(zmin[px]);
    view.mask[px] = kMaskCovered;
  }
  return view;
}

Mask extract_mask(const RenderedView& view) { return view.mask; }

Mask dilate_mask(const Mask& mask, int radius) {
  if (radius < 0) {
    std::ostringstream why;
    why << "dilation radius must be >= 0, got " << radius;
    throw Error(ErrorKind::invalid_argument, why.str());
  }
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();

  // Separable max filter: rows, then columns.
  Mask rows(w, h, kMaskCovered);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) != kMaskHole) continue;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx)
        rows(xx, y) = kMaskHole;
    }
  Mask out(w, h, kMaskCovered);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (rows(x, y) != kMaskHole) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy)
        out(x, yy) = kMaskHole;
    }
  return out;
}

RenderedView mask_out(const RenderedView& view, const Mask& mask, Rgb hole_color) {
  if (mask.width() != view.mask.width() || mask.height() != view.mask.height())
    throw Error(ErrorKind::shape, "mask and view dimensions differ");
  RenderedView out = view;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != kMaskHole) continue;
    out.mask[i] = kMaskHole;
    out.zbuffer[i] = kEmptyDepth;
    out.image.set(i, hole_color);
  }
  return out;
}

}  // namespace stereogen

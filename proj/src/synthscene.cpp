#include "stereogen/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "stereogen/error.hpp"

namespace stereogen {

namespace {

// Layer 0 is the background; layer i > 0 is rectangles[i - 1].
struct Layer {
  double depth;
  Rgb color;
  const SceneRect* rect;  // nullptr for the background

  bool contains(long x, long y) const {
    return rect == nullptr || (x >= rect->x0 && x < rect->x1 && y >= rect->y0 && y < rect->y1);
  }
};

// Far to near; among equal depths later rectangles come later.
std::vector<Layer> painter_order(const SceneSpec& spec) {
  std::vector<Layer> layers;
  for (const auto& r : spec.rectangles) layers.push_back({r.depth, r.color, &r});
  std::stable_sort(layers.begin(), layers.end(),
                   [](const Layer& a, const Layer& b) { return a.depth > b.depth; });
  layers.insert(layers.begin(), Layer{spec.background_depth, spec.background_color, nullptr});
  return layers;
}

// Index into `layers` of the layer visible at source pixel (x, y).
// Index of the layer each source pixel shows (the last one painted there).
Plane<std::uint32_t> visible_layers(const std::vector<Layer>& layers, int width, int height) {
  Plane<std::uint32_t> vis(width, height, 0);
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const SceneRect& r = *layers[i].rect;
    for (int y = std::max(0, r.y0); y < std::min(height, r.y1); ++y)
      for (int x = std::max(0, r.x0); x < std::min(width, r.x1); ++x)
        vis(x, y) = static_cast<std::uint32_t>(i);
  }
  return vis;
}

Rgb parse_color(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::manifest, "color must be [r, g, b]");
  Rgb c;
  std::uint8_t* channels[3] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255) throw Error(ErrorKind::manifest, "color channel outside [0, 255]");
    *channels[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::manifest, where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw Error(ErrorKind::manifest, "unknown key '" + key + "' in " + where);
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw Error(ErrorKind::invalid_argument, "scene size must be positive");
  intrinsics.validate();
  if (intrinsics.width != width || intrinsics.height != height)
    throw Error(ErrorKind::shape, "scene intrinsics do not match scene size");
  if (!(background_depth > 0.0) || !std::isfinite(background_depth))
    throw Error(ErrorKind::invalid_argument, "background depth must be positive");
  for (const auto& r : rectangles) {
    if (!(r.depth > 0.0) || !(r.depth < background_depth)) {
      std::ostringstream why;
      why << "rectangle depth " << r.depth << " must lie in (0, " << background_depth << ")";
      throw Error(ErrorKind::invalid_argument, why.str());
    }
    if (r.x1 <= r.x0 || r.y1 <= r.y0)
      throw Error(ErrorKind::invalid_argument, "rectangle bounds are empty");
  }
}

SceneSpec SceneSpec::from_json(const nlohmann::json& doc) {
  try {
    reject_unknown(doc, {"version", "width", "height", "fx", "fy", "cx", "cy", "background",
                         "rectangles"},
                   "scene");
    if (doc.value("version", 0) != 1)
      throw Error(ErrorKind::manifest, "scene version must be 1");
    SceneSpec s;
    s.width = doc.at("width").get<int>();
    s.height = doc.at("height").get<int>();
    if (s.width < 1 || s.height < 1)
      throw Error(ErrorKind::manifest, "scene size must be positive");
    const auto defaults = CameraIntrinsics::defaults_for(s.width, s.height);
    s.intrinsics = CameraIntrinsics::make(doc.value("fx", defaults.fx), doc.value("fy", defaults.fy),
                                          doc.value("cx", defaults.cx), doc.value("cy", defaults.cy),
                                          s.width, s.height);
    const auto& bg = doc.at("background");
    reject_unknown(bg, {"depth", "color"}, "background");
    s.background_depth = bg.at("depth").get<double>();
    s.background_color = parse_color(bg.at("color"));
    if (doc.contains("rectangles")) {
      for (const auto& r : doc.at("rectangles")) {
        reject_unknown(r, {"x0", "y0", "x1", "y1", "depth", "color"}, "rectangle");
        s.rectangles.push_back({r.at("x0").get<int>(), r.at("y0").get<int>(), r.at("x1").get<int>(),
                                r.at("y1").get<int>(), r.at("depth").get<double>(),
                                parse_color(r.at("color"))});
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::manifest, std::string("scene spec: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::manifest) throw;
    throw Error(ErrorKind::manifest, std::string("scene spec: ") + e.what());
  }
}

nlohmann::json SceneSpec::to_json() const {
  auto color = [](Rgb c) { return nlohmann::json::array({c.r, c.g, c.b}); };
  nlohmann::json rects = nlohmann::json::array();
  for (const auto& r : rectangles)
    rects.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1},
                     {"depth", r.depth}, {"color", color(r.color)}});
  return {{"version", 1},
          {"width", width},
          {"height", height},
          {"fx", intrinsics.fx},
          {"fy", intrinsics.fy},
          {"cx", intrinsics.cx},
          {"cy", intrinsics.cy},
          {"background", {{"depth", background_depth}, {"color", color(background_color)}}},
          {"rectangles", rects}};
}

SceneFrame render_scene(const SceneSpec& spec) {
  spec.validate();
  RgbFrame rgb(spec.width, spec.height, spec.background_color);
  Plane<double> depth(spec.width, spec.height, spec.background_depth);
  for (const Layer& layer : painter_order(spec)) {
    if (!layer.rect) continue;
    const SceneRect& r = *layer.rect;
    for (int y = std::max(0, r.y0); y < std::min(spec.height, r.y1); ++y)
      for (int x = std::max(0, r.x0); x < std::min(spec.width, r.x1); ++x) {
        rgb.set(x, y, r.color);
        depth(x, y) = r.depth;
      }
  }
  return {std::move(rgb), DepthFrame::from_values(std::move(depth))};
}

GroundTruthView ground_truth_view(const SceneSpec& spec, const ViewTransform& m) {
  spec.validate();
  if (m.theta() != 0.0)
    throw Error(ErrorKind::unsupported_analytic_case,
                "analytic ground truth needs a pure translation (theta = 0)");
  const std::vector<Layer> layers = painter_order(spec);

  // Source column that nearest-pixel splatting sends to target column x:
  // round(xs + d) == x  <=>  xs == ceil(x - d - 0.5).
  std::vector<double> disparity(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i)
    disparity[i] = spec.intrinsics.fx * m.tx() / layers[i].depth;

  std::vector<std::size_t> near_first(layers.size());
  std::iota(near_first.begin(), near_first.end(), 0);
  // Nearest first; among equal depths the later-painted layer first.
  std::sort(near_first.begin(), near_first.end(), [&](std::size_t a, std::size_t b) {
    if (layers[a].depth != layers[b].depth) return layers[a].depth < layers[b].depth;
    return a > b;
  });

  const Plane<std::uint32_t> visible = visible_layers(layers, spec.width, spec.height);
  GroundTruthView gt{RgbFrame(spec.width, spec.height), {}, Mask(spec.width, spec.height)};
  Plane<double> depth(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      std::size_t truth = 0;
      bool truth_found = false;
      bool reached = false;
      for (std::size_t li : near_first) {
        const long xs = static_cast<long>(std::ceil(x - disparity[li] - 0.5));
        if (!truth_found && layers[li].contains(xs, y)) {
          truth = li;
          truth_found = true;
        }
        if (!reached && xs >= 0 && xs < spec.width && visible(static_cast<int>(xs), y) == li)
          reached = true;
      }
      gt.image.set(x, y, layers[truth].color);
      depth(x, y) = layers[truth].depth;
      gt.dropout(x, y) = reached ? kMaskCovered : kMaskHole;
    }
  gt.depth = DepthFrame::from_values(std::move(depth));
  return gt;
}

}  // namespace stereogen

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stereogen/camera.hpp"
#include "stereogen/cli.hpp"
#include "stereogen/cloud.hpp"
#include "stereogen/error.hpp"
#include "stereogen/inpaint.hpp"
#include "stereogen/metrics.hpp"
#include "stereogen/render.hpp"
#include "stereogen/stereo.hpp"
#include "stereogen/synthscene.hpp"

namespace py = pybind11;
using namespace stereogen;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RgbFrame to_frame(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3)
    throw Error(ErrorKind::shape, "expected an HxWx3 uint8 array");
  RgbFrame f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), f.bytes().begin());
  return f;
}

U8Array from_frame(const RgbFrame& f) {
  U8Array a({f.height(), f.width(), 3});
  std::copy(f.bytes().begin(), f.bytes().end(), a.mutable_data());
  return a;
}

Mask to_mask(const U8Array& a) {
  if (a.ndim() != 2) throw Error(ErrorKind::shape, "expected an HxW uint8 mask");
  Mask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = a.data()[i] ? kMaskHole : kMaskCovered;
  return m;
}

U8Array from_mask(const Mask& m) {
  U8Array a({m.height(), m.width()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

template <typename T>
py::array_t<T> from_plane(const Plane<T>& p) {
  py::array_t<T> a({p.height(), p.width()});
  std::copy(p.data().begin(), p.data().end(), a.mutable_data());
  return a;
}

DepthFrame to_depth(const F64Array& a) {
  if (a.ndim() != 2) throw Error(ErrorKind::shape, "expected an HxW depth array");
  Plane<double> p(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), p.data().begin());
  return DepthFrame::from_values(std::move(p));
}

Rgb to_rgb(const std::array<int, 3>& c) {
  for (int v : c)
    if (v < 0 || v > 255) throw Error(ErrorKind::invalid_argument, "color channel out of range");
  return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
          static_cast<std::uint8_t>(c[2])};
}

Footprint parse_footprint(const std::string& s) {
  if (s == "nearest") return Footprint::nearest;
  if (s == "bilinear2x2") return Footprint::bilinear2x2;
  throw Error(ErrorKind::invalid_argument, "unknown footprint: " + s);
}

CameraIntrinsics intrinsics_for(int w, int h, const std::optional<std::array<double, 4>>& k) {
  if (!k) return CameraIntrinsics::defaults_for(w, h);
  return CameraIntrinsics::make((*k)[0], (*k)[1], (*k)[2], (*k)[3], w, h);
}

py::dict view_dict(const RenderedView& v) {
  py::dict d;
  d["image"] = from_frame(v.image);
  d["zbuffer"] = from_plane(v.zbuffer);
  d["mask"] = from_mask(v.mask);
  return d;
}

RenderedView to_view(const U8Array& image, const py::array_t<float, py::array::c_style | py::array::forcecast>& z,
                     const U8Array& mask) {
  RenderedView v{to_frame(image), {}, to_mask(mask)};
  if (z.ndim() != 2 || z.shape(0) != v.image.height() || z.shape(1) != v.image.width() ||
      v.mask.width() != v.image.width() || v.mask.height() != v.image.height())
    throw Error(ErrorKind::shape, "image, zbuffer and mask sizes differ");
  v.zbuffer = Plane<float>(v.image.width(), v.image.height());
  std::copy(z.data(), z.data() + z.size(), v.zbuffer.data().begin());
  return v;
}

py::array_t<double> matrix_array(const Matrix4& m) {
  py::array_t<double> a({4, 4});
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a.mutable_at(r, c) = m[r][c];
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Depth-based stereo view synthesis";

  static py::exception<Error> error_type(m, "StereogenError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("backproject",
        [](double x, double y, double d, std::array<double, 4> k, int w, int h) {
          const Point3 p = backproject(x, y, d, CameraIntrinsics::make(k[0], k[1], k[2], k[3], w, h));
          return std::array<double, 3>{p.x, p.y, p.z};
        },
        py::arg("x"), py::arg("y"), py::arg("depth"), py::arg("intrinsics"), py::arg("width"),
        py::arg("height"));

  m.def("project",
        [](std::array<double, 3> p, std::array<double, 4> k, int w, int h) {
          const Projection q = project({p[0], p[1], p[2]}, CameraIntrinsics::make(k[0], k[1], k[2], k[3], w, h));
          return std::array<double, 3>{q.u, q.v, q.z};
        },
        py::arg("point"), py::arg("intrinsics"), py::arg("width"), py::arg("height"));

  m.def("view_transform",
        [](double theta, double tx) { return matrix_array(build_view_transform(theta, tx).matrix()); },
        py::arg("theta"), py::arg("tx"));

  m.def("render_view",
        [](const U8Array& rgb, const F64Array& depth, double theta, double tx,
           std::optional<std::array<double, 4>> k, const std::string& footprint) {
          const RgbFrame frame = to_frame(rgb);
          const CameraIntrinsics intr = intrinsics_for(frame.width(), frame.height(), k);
          const auto cloud = cloud_from_rgbd(frame, to_depth(depth), intr);
          RenderOptions opts;
          opts.footprint = parse_footprint(footprint);
          return view_dict(splat(transform_cloud(cloud, build_view_transform(theta, tx)), intr, opts));
        },
        py::arg("rgb"), py::arg("depth"), py::arg("theta") = 0.0, py::arg("tx") = 0.0,
        py::arg("intrinsics") = py::none(), py::arg("footprint") = "nearest");

  m.def("render_eyes",
        [](const U8Array& rgb, const F64Array& depth, double baseline, double toe_in,
           std::optional<std::array<double, 4>> k, const std::string& footprint) {
          const RgbFrame frame = to_frame(rgb);
          const CameraIntrinsics intr = intrinsics_for(frame.width(), frame.height(), k);
          RenderOptions opts;
          opts.footprint = parse_footprint(footprint);
          const EyeViews eyes = render_eyes(frame, to_depth(depth), intr, {baseline, toe_in}, opts);
          return py::make_tuple(view_dict(eyes.left), view_dict(eyes.right));
        },
        py::arg("rgb"), py::arg("depth"), py::arg("baseline") = 0.064, py::arg("toe_in") = 0.0,
        py::arg("intrinsics") = py::none(), py::arg("footprint") = "nearest");

  m.def("dilate_mask", [](const U8Array& mask, int radius) { return from_mask(dilate_mask(to_mask(mask), radius)); },
        py::arg("mask"), py::arg("radius"));

  m.def("fill",
        [](const U8Array& image, const py::array_t<float, py::array::c_style | py::array::forcecast>& zbuffer,
           const U8Array& mask, const std::string& method, std::array<int, 3> fallback) {
          RenderedView v = to_view(image, zbuffer, mask);
          // Masked pixels count as holes whatever the z-buffer says.
          v = mask_out(v, v.mask, {0, 0, 0});
          return from_frame(fill_background(v, {parse_fill_method(method), to_rgb(fallback)}));
        },
        py::arg("image"), py::arg("zbuffer"), py::arg("mask"),
        py::arg("method") = "background_extrapolate", py::arg("fallback_color") = std::array<int, 3>{0, 0, 0});

  m.def("combine",
        [](const U8Array& left, const U8Array& right, const std::string& layout) {
          const auto packed = combine(to_frame(left), to_frame(right), parse_layout(layout));
          if (!packed) throw Error(ErrorKind::invalid_argument, "the separate layout packs nothing");
          return from_frame(*packed);
        },
        py::arg("left"), py::arg("right"), py::arg("layout") = "sbs");

  m.def("psnr", [](const U8Array& a, const U8Array& b) { return psnr(to_frame(a), to_frame(b)); });
  m.def("ssim", [](const U8Array& a, const U8Array& b) { return ssim(to_frame(a), to_frame(b)); });

  m.def("_render_scene",
        [](const std::string& spec_json) {
          const SceneFrame f = render_scene(SceneSpec::from_json(nlohmann::json::parse(spec_json)));
          return py::make_tuple(from_frame(f.rgb), from_plane(f.depth.values));
        },
        py::arg("spec_json"));

  m.def("_ground_truth_view",
        [](const std::string& spec_json, double theta, double tx) {
          const GroundTruthView g =
              ground_truth_view(SceneSpec::from_json(nlohmann::json::parse(spec_json)), build_view_transform(theta, tx));
          py::dict d;
          d["image"] = from_frame(g.image);
          d["depth"] = from_plane(g.depth.values);
          d["dropout"] = from_mask(g.dropout);
          return d;
        },
        py::arg("spec_json"), py::arg("theta") = 0.0, py::arg("tx") = 0.0);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}

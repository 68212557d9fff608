#include "stereogen/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stereogen/error.hpp"

namespace stereogen {

namespace {

Matrix4 identity4() {
  Matrix4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

Matrix4 multiply(const Matrix4& a, const Matrix4& b) {
  Matrix4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  return out;
}

}  // namespace

CameraIntrinsics CameraIntrinsics::make(double fx, double fy, double cx, double cy,
                                        int width, int height) {
  CameraIntrinsics k{fx, fy, cx, cy, width, height};
  k.validate();
  return k;
}

CameraIntrinsics CameraIntrinsics::defaults_for(int width, int height) {
  const double f = static_cast<double>(std::max(width, height));
  return make(f, f, width / 2.0, height / 2.0, width, height);
}

void CameraIntrinsics::validate() const {
  std::ostringstream why;
  if (width < 1 || height < 1) {
    why << "image size must be at least 1x1, got " << width << "x" << height;
  } else if (!(std::isfinite(fx) && fx > 0.0) || !(std::isfinite(fy) && fy > 0.0)) {
    why << "focal lengths must be positive, got fx=" << fx << " fy=" << fy;
  } else if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    why << "principal point (" << cx << ", " << cy << ") outside " << width << "x"
        << height << " image";
  } else {
    return;
  }
  throw Error(ErrorKind::invalid_argument, why.str());
}

Point3 transform_point(const Matrix4& m, const Point3& p) noexcept {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
          m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
          m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3]};
}

Matrix4 rigid_inverse(const Matrix4& m) noexcept {
  Matrix4 inv = identity4();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv[i][j] = m[j][i];
  for (int i = 0; i < 3; ++i)
    inv[i][3] = -(inv[i][0] * m[0][3] + inv[i][1] * m[1][3] + inv[i][2] * m[2][3]);
  return inv;
}

ViewTransform::ViewTransform(double theta, double tx) : theta_(theta), tx_(tx) {
  // Pure Y-axis rotation; no translation term in the rotation factor.
  Matrix4 rotation = identity4();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  rotation[0][0] = c;
  rotation[0][2] = s;
  rotation[2][0] = -s;
  rotation[2][2] = c;

  Matrix4 translation = identity4();
  translation[0][3] = tx;

  matrix_ = multiply(rotation, translation);
}

Point3 backproject(double x, double y, double d, const CameraIntrinsics& k) {
  if (!std::isfinite(d) || d <= 0.0) {
    std::ostringstream why;
    why << "depth " << d << " at pixel (" << x << ", " << y << ") is not positive";
    throw Error(ErrorKind::invalid_depth, why.str());
  }
  return {d * (x - k.cx) / k.fx, d * (y - k.cy) / k.fy, d};
}

Projection project(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) {
    std::ostringstream why;
    why << "point with Z=" << p.z << " is behind the camera";
    throw Error(ErrorKind::behind_camera, why.str());
  }
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
}

ViewTransform build_view_transform(double theta, double tx) {
  if (!std::isfinite(theta) || !std::isfinite(tx) ||
      std::abs(theta) > std::numbers::pi / 2.0) {
    std::ostringstream why;
    why << "view transform needs finite tx and |theta| <= pi/2, got theta=" << theta
        << " tx=" << tx;
    throw Error(ErrorKind::invalid_argument, why.str());
  }
  return ViewTransform(theta, tx);
}

Point3 apply_transform(const ViewTransform& m, const Point3& p) noexcept {
  return transform_point(m.matrix(), p);
}

void StereoRig::validate() const {
  if (!std::isfinite(baseline) || !std::isfinite(toe_in) ||
      !(std::abs(toe_in) < std::numbers::pi / 2.0)) {
    std::ostringstream why;
    why << "rig needs finite baseline and |toe_in| < pi/2, got baseline=" << baseline
        << " toe_in=" << toe_in;
    throw Error(ErrorKind::invalid_argument, why.str());
  }
}

EyeTransforms rig_transforms(const StereoRig& rig) {
  rig.validate();
  return {build_view_transform(rig.toe_in / 2.0, rig.baseline / 2.0),
          build_view_transform(-rig.toe_in / 2.0, -rig.baseline / 2.0)};
}

}  // namespace stereogen

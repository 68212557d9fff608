#pragma once

#include <array>
#include <utility>

namespace stereogen {

/// Pinhole intrinsics in pixels. Construct through `make` to get validation.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws Error(invalid_argument) unless fx, fy > 0, the principal point lies
  /// inside the image, and both dimensions are at least one pixel.
  static CameraIntrinsics make(double fx, double fy, double cx, double cy, int width,
                               int height);

  /// f = max(width, height), principal point at the image center.
  static CameraIntrinsics defaults_for(int width, int height);

  void validate() const;
};

/// Camera-frame point. +X right, +Y down, +Z into the scene.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Continuous image coordinates of a projected point, plus its depth.
struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Applies an affine 4x4 (last row 0 0 0 1) to a point.
Point3 transform_point(const Matrix4& m, const Point3& p) noexcept;

/// Inverse of a rigid transform: [R t]^-1 = [R^T  -R^T t].
Matrix4 rigid_inverse(const Matrix4& m) noexcept;

/// Rotation about Y by `theta` composed with a prior translation along X by
/// `tx`: matrix = R(theta) * T(tx).
class ViewTransform {
 public:
  ViewTransform() : ViewTransform(0.0, 0.0) {}

  double theta() const noexcept { return theta_; }
  double tx() const noexcept { return tx_; }
  const Matrix4& matrix() const noexcept { return matrix_; }

  friend ViewTransform build_view_transform(double theta, double tx);

 private:
  ViewTransform(double theta, double tx);

  double theta_;
  double tx_;
  Matrix4 matrix_;
};

/// Pixel (x, y) at depth d to a camera-frame point.
/// Throws Error(invalid_depth) for d <= 0 or non-finite d.
Point3 backproject(double x, double y, double d, const CameraIntrinsics& k);

/// Throws Error(behind_camera) for p.z <= 0. The result may fall outside the image.
Projection project(const Point3& p, const CameraIntrinsics& k);

/// Requires finite arguments and |theta| <= pi/2.
ViewTransform build_view_transform(double theta, double tx);

Point3 apply_transform(const ViewTransform& m, const Point3& p) noexcept;

/// Two virtual eyes placed symmetrically about the source camera.
/// A negative baseline swaps the eyes.
struct StereoRig {
  double baseline = 0.064;
  double toe_in = 0.0;

  void validate() const;
};

struct EyeTransforms {
  ViewTransform left;
  ViewTransform right;
};

/// left = (+toe_in/2, +baseline/2), right = (-toe_in/2, -baseline/2).
EyeTransforms rig_transforms(const StereoRig& rig);

}  // namespace stereogen

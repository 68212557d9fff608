#include <doctest.h>

#include <cmath>

#include "stereogen/cloud.hpp"
#include "stereogen/error.hpp"

using namespace stereogen;

namespace {

RawDepth raw1(double v) { return {Plane<double>(1, 1, v)}; }

RgbFrame frame2x2() {
  RgbFrame f(2, 2);
  f.set(0, 0, {1, 2, 3});
  f.set(1, 0, {4, 5, 6});
  f.set(0, 1, {7, 8, 9});
  f.set(1, 1, {10, 11, 12});
  return f;
}

}  // namespace

TEST_CASE("normalize_depth") {
  auto d = normalize_depth(raw1(2.0), {DepthMode::metric, 1, 0});
  CHECK(d.valid[0] == 1);
  CHECK(d.values[0] == 2.0);

  d = normalize_depth(raw1(0.5), {DepthMode::inverse, 1, 0});
  CHECK(d.valid[0] == 1);
  CHECK(d.values[0] == 2.0);

  d = normalize_depth(raw1(0.0), {DepthMode::metric, 1, 0});
  CHECK(d.valid[0] == 0);
  CHECK(d.valid_count() == 0);

  d = normalize_depth(raw1(1000.0), {DepthMode::metric, 0.001, 0});
  CHECK(d.values[0] == doctest::Approx(1.0));

  d = normalize_depth(raw1(3.0), {DepthMode::metric, 2, -1});
  CHECK(d.values[0] == 5.0);

  // inverse with zero disparity is infinite: invalid
  d = normalize_depth(raw1(0.0), {DepthMode::inverse, 1, 0});
  CHECK(d.valid[0] == 0);
  d = normalize_depth(raw1(std::nan("")), {DepthMode::metric, 1, 0});
  CHECK(d.valid[0] == 0);
  try {
    normalize_depth(raw1(2.0), {DepthMode::metric, -1, 0});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("cloud_from_rgbd") {
  const auto k = CameraIntrinsics::make(2, 2, 1, 1, 2, 2);
  auto depth = DepthFrame::from_values(Plane<double>(2, 2, 4.0));
  auto cloud = cloud_from_rgbd(frame2x2(), depth, k);
  REQUIRE(cloud.points.size() == 4);
  CHECK(cloud.source_width == 2);
  for (std::uint32_t i = 0; i < 4; ++i) CHECK(cloud.points[i].source_index == i);
  CHECK(cloud.points[3].color == Rgb{10, 11, 12});
  const auto p = backproject(1, 1, 4.0, k);
  CHECK(cloud.points[3].position == p);

  depth.values(1, 0) = -1.0;
  depth = DepthFrame::from_values(depth.values);
  cloud = cloud_from_rgbd(frame2x2(), depth, k);
  REQUIRE(cloud.points.size() == 3);
  CHECK(cloud.points[0].source_index == 0);
  CHECK(cloud.points[1].source_index == 2);
  CHECK(cloud.points[2].source_index == 3);

  const auto bad = DepthFrame::from_values(Plane<double>(3, 2, 1.0));
  try {
    cloud_from_rgbd(frame2x2(), bad, k);
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::shape);
  }
}

TEST_CASE("transform_cloud") {
  const auto k = CameraIntrinsics::make(2, 2, 1, 1, 2, 2);
  Plane<double> v(2, 2);
  v[0] = 1.0;
  v[1] = 2.5;
  v[2] = 3.0;
  v[3] = 0.7;
  const auto cloud = cloud_from_rgbd(frame2x2(), DepthFrame::from_values(v), k);

  const auto same = transform_cloud(cloud, build_view_transform(0, 0));
  REQUIRE(same.points.size() == cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK(same.points[i].position == cloud.points[i].position);
    CHECK(same.points[i].color == cloud.points[i].color);
    CHECK(same.points[i].source_index == cloud.points[i].source_index);
  }

  const auto moved = transform_cloud(cloud, build_view_transform(0, 0.1));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK(moved.points[i].position.x == cloud.points[i].position.x + 0.1);
    CHECK(moved.points[i].position.y == cloud.points[i].position.y);
    CHECK(moved.points[i].position.z == cloud.points[i].position.z);
  }
}

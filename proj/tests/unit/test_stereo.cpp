#include <doctest.h>

#include <random>

#include "stereogen/error.hpp"
#include "stereogen/frameio.hpp"
#include "stereogen/stereo.hpp"
#include "stereogen/synthscene.hpp"
#include "test_util.hpp"

using namespace stereogen;
namespace fs = std::filesystem;

namespace {

std::size_t count_holes(const Mask& m) {
  return static_cast<std::size_t>(std::count(m.data().begin(), m.data().end(), kMaskHole));
}

StereoJob job_for(const fs::path& root, double baseline) {
  JobManifest m;
  m.frames = "frames";
  m.depths = "depths";
  m.fx = 500.0;
  m.fy = 500.0;
  m.baseline = baseline;
  return resolve_job(m, root);
}

// Two frames of a random scene plus a random-depth frame.
void write_inputs(const fs::path& root, std::uint32_t seed) {
  std::mt19937 rng(seed);
  testutil::write_scene_sequence(testutil::random_scene(rng, 48, 32, false), root, 2);
  Plane<float> d(48, 32);
  std::uniform_real_distribution<float> u(0.5f, 6.f);
  for (auto& v : d.data()) v = u(rng);
  write_rgb_png(root / "frames" / frame_filename(2), testutil::random_frame(rng, 48, 32));
  write_pfm(root / "depths" / frame_filename(2, "pfm"), d);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::usage;
}

}  // namespace

TEST_CASE("combine layouts") {
  std::mt19937 rng(1);
  const auto l = testutil::random_frame(rng, 5, 3), r = testutil::random_frame(rng, 5, 3);
  const auto sbs = *combine(l, r, OutputLayout::side_by_side);
  CHECK(sbs.width() == 10);
  CHECK(sbs.height() == 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) {
      CHECK(sbs.at(x, y) == l.at(x, y));
      CHECK(sbs.at(x + 5, y) == r.at(x, y));
    }
  const auto tb = *combine(l, l, OutputLayout::top_bottom);
  CHECK(tb.width() == 5);
  CHECK(tb.height() == 6);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) CHECK(tb.at(x, y + 3) == tb.at(x, y));
  const auto ana = *combine(RgbFrame(4, 4, {255, 255, 255}), RgbFrame(4, 4), OutputLayout::anaglyph_red_cyan);
  CHECK(ana == RgbFrame(4, 4, {255, 0, 0}));
  CHECK(!combine(l, r, OutputLayout::separate));
  CHECK(kind_of([&] { combine(l, RgbFrame(4, 3), OutputLayout::side_by_side); }) == ErrorKind::shape);
  CHECK(parse_layout("side_by_side") == OutputLayout::side_by_side);
  CHECK(to_string(OutputLayout::anaglyph_red_cyan) == "anaglyph");
}

TEST_CASE("null rig reproduces the source in both eyes") {
  std::mt19937 rng(2);
  const auto rgb = testutil::random_frame(rng, 31, 19);
  Plane<double> d(31, 19);
  std::uniform_real_distribution<double> u(0.2, 50);
  for (auto& v : d.data()) v = u(rng);
  const auto k = CameraIntrinsics::defaults_for(31, 19);
  FrameTimings t;
  const auto eyes = render_eyes(rgb, DepthFrame::from_values(d), k, {0.0, 0.0}, {}, &t);
  CHECK(eyes.left.image == rgb);
  CHECK(eyes.right.image == rgb);
  CHECK(count_holes(eyes.left.mask) == 0);
  CHECK(count_holes(eyes.right.mask) == 0);
  CHECK(t.cloud > 0);
  CHECK(t.splat > 0);
}

TEST_CASE("negating the rig swaps the eyes") {
  std::mt19937 rng(3);
  const auto s = testutil::random_scene(rng, 40, 30, false);
  const auto f = render_scene(s);
  for (StereoRig rig : {StereoRig{0.064, 0.0}, StereoRig{0.05, 0.03}}) {
    const auto a = render_eyes(f.rgb, f.depth, s.intrinsics, rig, {});
    const auto b = render_eyes(f.rgb, f.depth, s.intrinsics, {-rig.baseline, -rig.toe_in}, {});
    CHECK(a.left.image == b.right.image);
    CHECK(a.right.image == b.left.image);
    CHECK(a.left.mask == b.right.mask);
    CHECK(a.right.zbuffer == b.left.zbuffer);
  }
}

TEST_CASE("mask area grows with the baseline") {
  std::mt19937 rng(4);
  for (int t = 0; t < 10; ++t) {
    const auto s = testutil::random_scene(rng, 64, 40, false);
    const auto f = render_scene(s);
    std::size_t prev_l = 0, prev_r = 0;
    for (double b : {0.0, 0.02, 0.04, 0.08}) {
      const auto e = render_eyes(f.rgb, f.depth, s.intrinsics, {b, 0.0}, {});
      CHECK(count_holes(e.left.mask) >= prev_l);
      CHECK(count_holes(e.right.mask) >= prev_r);
      prev_l = count_holes(e.left.mask);
      prev_r = count_holes(e.right.mask);
    }
  }
}

TEST_CASE("right eye mask of the square scene") {
  const auto s = testutil::square_over_plane();
  const auto f = render_scene(s);
  const auto e = render_eyes(f.rgb, f.depth, s.intrinsics, {0.064, 0.0}, {});
  // Each eye moves by half the baseline: the band is 500 * 0.032 * (1 - 1/4)
  // columns over the square's 40 rows, plus a 4-column border strip.
  const int band = static_cast<int>(500 * 0.032 * (1.0 - 0.25));
  const int strip = static_cast<int>(500 * 0.032 / 4);
  CHECK(count_holes(e.right.mask) == static_cast<std::size_t>(band * 40 + strip * s.height));
  CHECK(count_holes(e.left.mask) == count_holes(e.right.mask));
}

TEST_CASE("fill_eye dilates before filling") {
  const auto s = testutil::square_over_plane();
  const auto f = render_scene(s);
  const auto e = render_eyes(f.rgb, f.depth, s.intrinsics, {0.064, 0.0}, {});
  FillSettings fs0;
  auto [img0, used0] = fill_eye(e.right, fs0);
  CHECK(used0 == e.right.mask);
  CHECK(count_holes(used0) > 0);
  FillSettings fs2;
  fs2.dilation = 2;
  auto [img2, used2] = fill_eye(e.right, fs2);
  CHECK(used2 == dilate_mask(e.right.mask, 2));
  for (std::size_t i = 0; i < used2.size(); ++i)
    if (used2[i] == kMaskCovered) CHECK(img2.at(i) == e.right.image.at(i));
}

TEST_CASE("job resolution") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 5);
  auto job = job_for(dir.path(), 0.064);
  CHECK(job.depth_encoding == DepthEncoding::pfm);
  CHECK(job.frames.count == 3);
  CHECK(job.intrinsics.cx == 24);
  CHECK(job.fill.dilation == 0);

  JobManifest m;
  m.frames = "frames";
  m.depths = "depths";
  m.fill = "external";
  m.fill_cmd = "cp {frames}/* {out}; : {masks}";
  CHECK(resolve_job(m, dir.path()).fill.dilation == 3);
  m.fill_cmd = "cp {frames}/* {out}";
  CHECK(kind_of([&] { resolve_job(m, dir.path()); }) == ErrorKind::invalid_argument);

  JobManifest missing;
  missing.frames = "frames";
  CHECK(kind_of([&] { resolve_job(missing, dir.path()); }) == ErrorKind::manifest);

  fs::remove(dir / "depths" / frame_filename(2, "pfm"));
  CHECK(kind_of([&] { job_for(dir.path(), 0.064); }) == ErrorKind::sequence_length);
}

TEST_CASE("generate_stereo writes outputs and a report") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 6);
  const auto job = job_for(dir.path(), 0.064);
  const auto report = generate_stereo(job, {dir / "out", false, 2});
  CHECK(report["frame_count"] == 3);
  CHECK(report["frames"].size() == 3);
  CHECK(report["timings"]["per_frame"].size() == 3);
  for (const auto& [stage, total] : report["timings"]["stages"].items()) CHECK(total.get<double>() > 0);
  for (const char* sub : {"left", "right", "stereo", "masks_left", "masks_right"})
    CHECK(discover_sequence(dir / "out" / sub, "png").count == 3);
  CHECK(read_rgb_png(dir / "out" / "stereo" / frame_filename(0)).width() == 96);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(!fs::exists(dir / "out" / ".staging"));
  CHECK(kind_of([&] { generate_stereo(job, {dir / "out", false, 1}); }) == ErrorKind::output_exists);
  CHECK_NOTHROW(generate_stereo(job, {dir / "out", true, 1}));
}

TEST_CASE("null rig job is an identity") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 7);
  auto job = job_for(dir.path(), 0.0);
  job.layout = OutputLayout::separate;
  generate_stereo(job, {dir / "out", false, 1});
  CHECK(!fs::exists(dir / "out" / "stereo"));
  for (int i = 0; i < 3; ++i) {
    const auto src = read_rgb_png(dir / "frames" / frame_filename(i));
    CHECK(read_rgb_png(dir / "out" / "left" / frame_filename(i)) == src);
    CHECK(read_rgb_png(dir / "out" / "right" / frame_filename(i)) == src);
    CHECK(count_holes(read_mask_png(dir / "out" / "masks_left" / frame_filename(i))) == 0);
  }
}

TEST_CASE("worker count does not change outputs") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 8);
  const auto job = job_for(dir.path(), 0.064);
  const auto r1 = generate_stereo(job, {dir / "w1", false, 1});
  const auto r3 = generate_stereo(job, {dir / "w3", false, 3});
  CHECK(strip_timings(r1) == strip_timings(r3));
  CHECK(r1["timings"]["workers"] == 1);
  fs::remove(dir / "w1" / "report.json");
  fs::remove(dir / "w3" / "report.json");
  CHECK(testutil::trees_equal(dir / "w1", dir / "w3"));
}

TEST_CASE("views, fill and combine compose to the full pipeline") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 9);
  auto job = job_for(dir.path(), 0.064);
  job.fill.dilation = 1;
  generate_stereo(job, {dir / "synth", false, 1});
  render_views(job, {dir / "views", false, 1});
  for (const char* sub : {"depth_left", "depth_right"})
    CHECK(discover_sequence(dir / "views" / sub, "pfm").count == 3);
  fill_views(dir / "views", job.fill, {dir / "filled", false, 1});
  combine_views(dir / "filled", job.layout, {dir / "combined", false, 1});
  for (int i = 0; i < 3; ++i) {
    const auto name = frame_filename(i);
    CHECK(testutil::files_equal(dir / "synth" / "left" / name, dir / "filled" / "left" / name));
    CHECK(testutil::files_equal(dir / "synth" / "masks_right" / name, dir / "filled" / "masks_right" / name));
    CHECK(testutil::files_equal(dir / "synth" / "stereo" / name, dir / "combined" / "stereo" / name));
  }
}

TEST_CASE("failures quarantine the staging area") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 10);
  const auto job = job_for(dir.path(), 0.064);
  write_text_file(dir / "frames" / frame_filename(1), "broken");
  try {
    generate_stereo(job, {dir / "out", false, 2});
    FAIL("expected a job error");
  } catch (const JobError& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(e.stage() == "load");
    CHECK(e.frame() == 1u);
  }
  CHECK(fs::is_directory(dir / "out" / "quarantine"));
  CHECK(!fs::exists(dir / "out" / "left"));
  CHECK(!fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("external provider jobs") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 11);
  auto job = job_for(dir.path(), 0.064);
  job.fill.mode = FillMode::external;
  job.fill.command = "cp {frames}/*.png {out}/; : {masks}";
  generate_stereo(job, {dir / "ext", false, 1});
  render_views(job, {dir / "views", false, 1});
  for (int i = 0; i < 3; ++i) {
    const auto name = frame_filename(i);
    // Identity provider: filled frame equals the unfilled view.
    CHECK(read_rgb_png(dir / "ext" / "left" / name) == read_rgb_png(dir / "views" / "left" / name));
  }

  job.fill.command = "echo no gpu >&2; exit 1; : {frames} {masks} {out}";
  try {
    generate_stereo(job, {dir / "bad", false, 1});
    FAIL("expected provider failure");
  } catch (const JobError& e) {
    CHECK(e.kind() == ErrorKind::provider_failure);
    CHECK(e.stage() == "fill");
    CHECK(std::string(e.what()).find("no gpu") != std::string::npos);
  }
  CHECK(!fs::exists(dir / "bad" / "left"));
  CHECK(!fs::exists(dir / "bad" / "stereo"));
}

TEST_CASE("empty depth frames warn and render fully masked") {
  testutil::TempDir dir("stereo");
  write_inputs(dir.path(), 12);
  write_pfm(dir / "depths" / frame_filename(1, "pfm"), Plane<float>(48, 32, 0.f));
  const auto job = job_for(dir.path(), 0.064);
  const auto report = render_views(job, {dir / "out", false, 1});
  REQUIRE(report["warnings"].size() == 1);
  CHECK(count_holes(read_mask_png(dir / "out" / "masks_left" / frame_filename(1))) == 48u * 32u);
}

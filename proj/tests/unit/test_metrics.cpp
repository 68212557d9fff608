#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stereogen/error.hpp"
#include "stereogen/frameio.hpp"
#include "stereogen/metrics.hpp"
#include "test_util.hpp"

using namespace stereogen;

namespace {

RgbFrame noisy(const RgbFrame& f, int amplitude, std::mt19937& rng) {
  RgbFrame out = f;
  std::uniform_int_distribution<int> n(-amplitude, amplitude);
  for (auto& b : out.bytes()) b = static_cast<std::uint8_t>(std::clamp(b + n(rng), 0, 255));
  return out;
}

}  // namespace

TEST_CASE("psnr") {
  const RgbFrame zero(16, 16, {0, 0, 0}), mid(16, 16, {128, 128, 128});
  CHECK(std::isinf(psnr(zero, zero)));
  const double expected = oracle::psnr_direct(zero, mid);
  CHECK(std::abs(psnr(zero, mid) - expected) < 1e-9);

  std::mt19937 rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto a = testutil::random_frame(rng, 13, 7);
    const auto b = testutil::random_frame(rng, 13, 7);
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK(std::abs(psnr(a, b) - oracle::psnr_direct(a, b)) < 1e-9);
  }
  try {
    psnr(zero, RgbFrame(16, 15));
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::shape);
  }
}

TEST_CASE("psnr falls as noise grows") {
  std::mt19937 rng(4);
  const auto base = testutil::random_frame(rng, 32, 32);
  double prev = INFINITY;
  for (int amp : {4, 16, 64}) {
    const double p = psnr(base, noisy(base, amp, rng));
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim agrees with the windowed oracle") {
  std::mt19937 rng(8);
  for (int i = 0; i < 5; ++i) {
    const auto a = testutil::random_frame(rng, 19, 14);
    const auto b = noisy(a, 40, rng);
    CHECK(std::abs(ssim(a, b) - oracle::ssim_direct(a, b)) < 1e-9);
  }
}

TEST_CASE("ssim identity, symmetry and range") {
  std::mt19937 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto a = testutil::random_frame(rng, 24, 16);
    const auto b = testutil::random_frame(rng, 24, 16);
    CHECK(std::abs(ssim(a, a) - 1.0) < 1e-9);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
    CHECK(ssim(a, b) >= -1.0);
    CHECK(ssim(a, b) <= 1.0);
    CHECK(ssim(a, b) < 1.0 - 1e-9);
  }
  const RgbFrame flat(11, 11, {10, 10, 10});
  CHECK(std::abs(ssim(flat, flat) - 1.0) < 1e-12);
}

TEST_CASE("ssim of an inverted test card is negative") {
  RgbFrame card(22, 11);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 22; ++x) {
      const std::uint8_t v = ((x / 2 + y / 3) % 2) ? 255 : 0;
      card.set(x, y, {v, v, v});
    }
  RgbFrame inverted = card;
  for (auto& b : inverted.bytes()) b = static_cast<std::uint8_t>(255 - b);
  const double expected = oracle::ssim_direct(card, inverted);
  CHECK(expected < 0.0);
  CHECK(std::abs(ssim(card, inverted) - expected) < 1e-9);
}

TEST_CASE("ssim rejects frames smaller than the window") {
  try {
    ssim(RgbFrame(10, 20), RgbFrame(10, 20));
    FAIL("expected size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
}

TEST_CASE("luma") {
  RgbFrame f(1, 1, {100, 50, 200});
  CHECK(luma(f)[0] == doctest::Approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200));
}

TEST_CASE("report aggregates") {
  std::mt19937 rng(12);
  std::vector<RgbFrame> ref, cand;
  for (int i = 0; i < 4; ++i) {
    ref.push_back(testutil::random_frame(rng, 12, 12));
    cand.push_back(i == 1 ? ref.back() : noisy(ref.back(), 20, rng));
  }
  const auto r = evaluate_frames(cand, ref);
  REQUIRE(r.per_frame.size() == 4);
  CHECK(r.infinite_psnr_frames == 1);
  double sp = 0, ss = 0;
  for (const auto& f : r.per_frame) {
    if (!std::isinf(f.psnr_db)) sp += f.psnr_db;
    ss += f.ssim;
  }
  CHECK(std::abs(r.mean_psnr - sp / 3) < 1e-9);
  CHECK(std::abs(r.mean_ssim - ss / 4) < 1e-9);

  const auto j = r.to_json();
  CHECK(j["per_frame"][1]["psnr_db"] == "inf");
  const auto back = MetricReport::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(j["config"]["ssim"]["window"] == 11);
  CHECK(j["external"]["lpips"].is_null());

  const auto same = evaluate_frames(ref, ref);
  CHECK(std::isinf(same.mean_psnr));
  CHECK(same.mean_ssim == doctest::Approx(1.0));

  try {
    evaluate_frames(cand, {ref[0]});
    FAIL("expected length error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::sequence_length);
  }
}

TEST_CASE("comparison document holds a pair of runs") {
  MetricReport blank, filled;
  blank.per_frame = {{0, 11.411, 0.388}};
  blank.mean_psnr = 11.411;
  blank.mean_ssim = 0.388;
  filled.per_frame = {{0, 12.793, 0.474}};
  filled.mean_psnr = 12.793;
  filled.mean_ssim = 0.474;
  const auto doc = comparison_to_json({{"leave_blank", blank}, {"filled", filled}});
  const auto runs = comparison_from_json(nlohmann::json::parse(doc.dump()));
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].first == "leave_blank");
  CHECK(runs[1].second.mean_psnr == 12.793);
  CHECK(runs[1].second.mean_ssim == 0.474);
}

TEST_CASE("evaluate_sequence over directories") {
  testutil::TempDir dir("metrics");
  std::mt19937 rng(13);
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  for (int i = 0; i < 2; ++i) {
    const auto f = testutil::random_frame(rng, 12, 12);
    write_rgb_png(dir / "a" / frame_filename(i), f);
    write_rgb_png(dir / "b" / frame_filename(i), f);
  }
  const auto r = evaluate_sequence(dir / "a", dir / "b");
  CHECK(std::isinf(r.mean_psnr));
  CHECK(r.mean_ssim == doctest::Approx(1.0).epsilon(1e-12));
  write_rgb_png(dir / "a" / frame_filename(2), testutil::random_frame(rng, 12, 12));
  try {
    evaluate_sequence(dir / "a", dir / "b");
    FAIL("expected length error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::sequence_length);
  }
}

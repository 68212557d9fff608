#include "stereogen/stereo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "stereogen/error.hpp"

namespace stereogen {

namespace {

using nlohmann::json;

constexpr int kExternalDefaultDilation = 3;

class Stopwatch {
 public:
  Stopwatch() : start_(Clock::now()) {}
  /// Seconds since construction or the previous lap.
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_;
};

json color_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

double hole_fraction(const Mask& mask) {
  const auto holes = std::count(mask.data().begin(), mask.data().end(), kMaskHole);
  return mask.size() == 0 ? 0.0 : static_cast<double>(holes) / static_cast<double>(mask.size());
}

// --- staging / quarantine ---

/// Work happens in out_root/.staging; commit() publishes the listed entries,
/// and a staging area that is never committed becomes out_root/quarantine.
class Staging {
 public:
  Staging(const fs::path& out_root, bool force)
      : root_(out_root), dir_(out_root / ".staging") {
    if (out_root.empty()) throw Error(ErrorKind::usage, "no output directory given");
    prepare_output_root(out_root, force);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  ~Staging() {
    if (committed_) return;
    std::error_code ec;
    fs::rename(dir_, root_ / "quarantine", ec);
  }

  fs::path subdir(const std::string& name) const {
    const fs::path p = dir_ / name;
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + p.string() + ": " + ec.message());
    return p;
  }

  const fs::path& dir() const noexcept { return dir_; }

  void commit(std::initializer_list<const char*> entries) {
    for (const char* name : entries) {
      const fs::path from = dir_ / name;
      if (fs::exists(from)) fs::rename(from, root_ / name);
    }
    fs::remove_all(dir_);
    committed_ = true;
  }

 private:
  fs::path root_;
  fs::path dir_;
  bool committed_ = false;
};

// --- ordered parallel frame processing ---

struct StageTracker {
  const char* stage = "load";
};

struct Failure {
  std::string stage;
  ErrorKind kind;
  std::string message;
};

[[noreturn]] void throw_failure(std::optional<std::size_t> frame, const Failure& f) {
  std::ostringstream why;
  if (frame)
    why << "frame " << *frame << ", ";
  why << "stage " << f.stage << ": " << f.message;
  throw JobError(f.kind, why.str(), f.stage, frame);
}

template <typename Fn>
std::optional<Failure> capture(StageTracker& stage, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return Failure{stage.stage, e.kind(), e.what()};
  } catch (const std::exception& e) {
    return Failure{stage.stage, ErrorKind::io, e.what()};
  }
  return std::nullopt;
}

/// Runs compute(i, stage) for every frame on up to `workers` threads and hands
/// the results to consume(i, result, stage) on the calling thread in frame
/// order. The first failing frame (in order) aborts with a JobError.
template <typename Result, typename Compute, typename Consume>
void process_frames(std::size_t count, int workers, Compute&& compute, Consume&& consume) {
  const std::size_t threads = static_cast<std::size_t>(std::max(1, workers));
  const std::size_t batch = threads * 2;
  for (std::size_t begin = 0; begin < count; begin += batch) {
    const std::size_t end = std::min(count, begin + batch);
    std::vector<std::optional<Result>> results(end - begin);
    std::vector<std::optional<Failure>> failures(end - begin);
    std::atomic<std::size_t> next{begin};
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
        StageTracker stage;
        failures[i - begin] = capture(stage, [&] { results[i - begin].emplace(compute(i, stage)); });
      }
    };
    const std::size_t n = std::min(threads, end - begin);
    if (n <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(n);
      for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = begin; i < end; ++i) {
      if (failures[i - begin]) throw_failure(i, *failures[i - begin]);
      StageTracker stage{"write"};
      if (auto f = capture(stage, [&] { consume(i, std::move(*results[i - begin]), stage); }))
        throw_failure(i, *f);
    }
  }
}

template <typename Fn>
void sequence_stage(const char* name, Fn&& fn) {
  StageTracker stage{name};
  if (auto f = capture(stage, fn)) throw_failure(std::nullopt, *f);
}

// --- shared per-frame pieces ---

EyeViews compute_eyes(const RgbFrame& rgb, const DepthFrame& depth, const CameraIntrinsics& k,
                      const StereoRig& rig, const RenderOptions& options, FrameTimings& timings,
                      StageTracker& stage) {
  Stopwatch clock;
  stage.stage = "cloud";
  const ColoredPointCloud cloud = cloud_from_rgbd(rgb, depth, k);
  timings.cloud += clock.lap();
  const EyeTransforms eyes = rig_transforms(rig);

  auto render_one = [&](const ViewTransform& m) {
    stage.stage = "transform";
    const ColoredPointCloud moved = transform_cloud(cloud, m);
    timings.transform += clock.lap();
    stage.stage = "splat";
    RenderedView view = splat(moved, k, options);
    timings.splat += clock.lap();
    stage.stage = "mask";
    view.mask = extract_mask(view);
    timings.mask += clock.lap();
    return view;
  };
  EyeViews out{render_one(eyes.left), render_one(eyes.right)};
  return out;
}

struct LoadedFrame {
  RgbFrame rgb;
  DepthFrame depth;
  std::optional<std::string> warning;
};

LoadedFrame load_frame(const StereoJob& job, std::size_t i, FrameTimings& timings,
                       StageTracker& stage) {
  stage.stage = "load";
  LoadedFrame f;
  f.rgb = load_rgb_frame(job.frames, i);
  const RawDepth raw = load_depth_frame(job.depths, i, job.depth_encoding);
  stage.stage = "normalize";
  Stopwatch clock;
  f.depth = normalize_depth(raw, job.depth_norm);
  timings.normalize = clock.lap();
  if (f.depth.valid_count() == 0)
    f.warning = "frame " + std::to_string(i) + ": depth has no valid samples; views are fully masked";
  return f;
}

json frame_timing_json(std::size_t i, const FrameTimings& t) {
  return {{"index", i},
          {"normalize_s", t.normalize},
          {"cloud_s", t.cloud},
          {"transform_s", t.transform},
          {"splat_s", t.splat},
          {"mask_s", t.mask},
          {"stereo_frame_s", t.stereo_frame()}};
}

/// Stage totals plus the stereo-frame figures over the per-frame timing list.
json summarize_timings(const json& per_frame, int workers, double wall) {
  json stages = json::object();
  double stereo_sum = 0.0;
  double stereo_max = 0.0;
  for (const auto& t : per_frame) {
    for (const auto& [key, value] : t.items()) {
      if (key == "index") continue;
      stages[key] = stages.value(key, 0.0) + value.get<double>();
    }
    if (t.contains("stereo_frame_s")) {
      stereo_sum += t["stereo_frame_s"].get<double>();
      stereo_max = std::max(stereo_max, t["stereo_frame_s"].get<double>());
    }
  }
  json out = {{"workers", workers}, {"wall_s", wall}, {"per_frame", per_frame}, {"stages", stages}};
  if (!per_frame.empty() && per_frame.front().contains("stereo_frame_s")) {
    out["stereo_frame_s_mean"] = stereo_sum / static_cast<double>(per_frame.size());
    out["stereo_frame_s_max"] = stereo_max;
  }
  return out;
}

json make_report(const char* kind, std::size_t count, json config, json frames, json warnings,
                 json timings) {
  return {{"version", 1},         {"kind", kind},          {"frame_count", count},
          {"config", std::move(config)}, {"frames", std::move(frames)},
          {"warnings", std::move(warnings)}, {"timings", std::move(timings)}};
}

void write_report(const fs::path& dir, const json& report) {
  write_text_file(dir / "report.json", report.dump(2) + "\n");
}

json fill_config(const FillSettings& fill) {
  json c = {{"fill", fill.mode == FillMode::builtin ? "builtin" : "external"},
            {"dilate", fill.dilation},
            {"hole_color", color_json(fill.hole_color)}};
  if (fill.mode == FillMode::builtin) {
    c["fill_policy"] = to_string(fill.policy.method);
    c["fallback_color"] = color_json(fill.policy.fallback_color);
  } else {
    c["fill_cmd"] = fill.command;
  }
  return c;
}

/// Prepares provider inputs for one eye: masked-out frames and dilated masks.
struct ProviderInput {
  RgbFrame frame;
  Mask mask;
};

ProviderInput provider_input(const RenderedView& view, const FillSettings& fill) {
  const Mask used = dilate_mask(view.mask, fill.dilation);
  return {mask_out(view, used, fill.hole_color).image, used};
}

/// Invokes the provider once per eye. Inputs live in <staging>/views_{eye}
/// and <staging>/masks_{eye}.
std::pair<std::vector<RgbFrame>, std::vector<RgbFrame>> run_providers(const Staging& staging,
                                                                      const FillSettings& fill,
                                                                      double& seconds) {
  std::pair<std::vector<RgbFrame>, std::vector<RgbFrame>> out;
  Stopwatch clock;
  sequence_stage("fill", [&] {
    out.first = external_inpaint(staging.dir() / "views_left", staging.dir() / "masks_left",
                                 fill.command, staging.dir() / "provider_left");
    out.second = external_inpaint(staging.dir() / "views_right", staging.dir() / "masks_right",
                                  fill.command, staging.dir() / "provider_right");
  });
  seconds = clock.lap();
  return out;
}

}  // namespace

// --- resolution ---

void StereoJob::validate() const {
  intrinsics.validate();
  rig.validate();
  if (frames.count == 0) throw Error(ErrorKind::sequence_length, "no input frames");
  if (frames.count != depths.count) {
    std::ostringstream why;
    why << "frame count " << frames.count << " differs from depth count " << depths.count;
    throw Error(ErrorKind::sequence_length, why.str());
  }
  if (frames.width != intrinsics.width || frames.height != intrinsics.height ||
      depths.width != intrinsics.width || depths.height != intrinsics.height) {
    std::ostringstream why;
    why << "frames " << frames.width << "x" << frames.height << " and depths " << depths.width
        << "x" << depths.height << " must both be " << intrinsics.width << "x"
        << intrinsics.height;
    throw Error(ErrorKind::shape, why.str());
  }
  if (fill.dilation < 0) throw Error(ErrorKind::invalid_argument, "dilation must be >= 0");
  if (fill.mode == FillMode::external) expand_command(fill.command, "f", "m", "o");
}

json StereoJob::config() const {
  json c = {
      {"frames", frames.directory.string()},
      {"frames_pattern", frames.pattern()},
      {"depths", depths.directory.string()},
      {"depths_pattern", depths.pattern()},
      {"frame_count", frames.count},
      {"width", intrinsics.width},
      {"height", intrinsics.height},
      {"depth_encoding", to_string(depth_encoding)},
      {"depth_mode", depth_norm.mode == DepthMode::metric ? "metric" : "inverse"},
      {"depth_scale", depth_norm.scale},
      {"depth_shift", depth_norm.shift},
      {"fx", intrinsics.fx},
      {"fy", intrinsics.fy},
      {"cx", intrinsics.cx},
      {"cy", intrinsics.cy},
      {"baseline", rig.baseline},
      {"toe_in", rig.toe_in},
      {"footprint", footprint == Footprint::nearest ? "nearest" : "bilinear2x2"},
      {"layout", to_string(layout)},
  };
  c.update(fill_config(fill));
  return c;
}

FillSettings resolve_fill(const JobManifest& m) {
  FillSettings f;
  f.mode = m.fill.value_or("builtin") == "external" ? FillMode::external : FillMode::builtin;
  if (f.mode == FillMode::external) {
    if (!m.fill_cmd || m.fill_cmd->empty())
      throw Error(ErrorKind::manifest, "external fill needs fill_cmd");
    f.command = *m.fill_cmd;
  }
  f.dilation = m.dilate.value_or(f.mode == FillMode::external ? kExternalDefaultDilation : 0);
  if (f.dilation < 0) throw Error(ErrorKind::manifest, "dilate must be >= 0");
  f.policy.method = parse_fill_method(m.fill_policy.value_or("background_extrapolate"));
  f.policy.fallback_color = m.fallback_color.value_or(Rgb{0, 0, 0});
  f.hole_color = m.hole_color.value_or(Rgb{0, 0, 0});
  return f;
}

RunOptions resolve_run_options(const JobManifest& m, const fs::path& base_dir) {
  RunOptions o;
  if (m.out) o.out_root = resolve_path(*m.out, base_dir);
  o.force = m.force.value_or(false);
  const unsigned hw = std::thread::hardware_concurrency();
  o.workers = m.workers.value_or(hw == 0 ? 1 : static_cast<int>(hw));
  return o;
}

StereoJob resolve_job(const JobManifest& m, const fs::path& base_dir) {
  if (!m.frames) throw Error(ErrorKind::manifest, "manifest lacks 'frames'");
  if (!m.depths) throw Error(ErrorKind::manifest, "manifest lacks 'depths'");
  StereoJob job;
  job.frames = discover_sequence(resolve_path(*m.frames, base_dir), "png");

  const fs::path depth_dir = resolve_path(*m.depths, base_dir);
  if (m.depth_encoding) {
    job.depth_encoding = parse_depth_encoding(*m.depth_encoding);
  } else {
    // Infer from the directory contents when unspecified.
    job.depth_encoding = DepthEncoding::png16;
    std::error_code ec;
    if (fs::is_directory(depth_dir, ec))
      for (const auto& e : fs::directory_iterator(depth_dir))
        if (e.path().extension() == ".pfm") {
          job.depth_encoding = DepthEncoding::pfm;
          break;
        }
  }
  job.depths = discover_sequence(depth_dir, depth_extension(job.depth_encoding));

  job.depth_norm.mode = m.depth_mode.value_or("metric") == "inverse" ? DepthMode::inverse
                                                                     : DepthMode::metric;
  job.depth_norm.scale = m.depth_scale.value_or(1.0);
  job.depth_norm.shift = m.depth_shift.value_or(0.0);
  if (!(job.depth_norm.scale > 0.0)) throw Error(ErrorKind::manifest, "depth_scale must be > 0");

  const auto k0 = CameraIntrinsics::defaults_for(job.frames.width, job.frames.height);
  job.intrinsics = CameraIntrinsics::make(m.fx.value_or(k0.fx), m.fy.value_or(k0.fy),
                                          m.cx.value_or(k0.cx), m.cy.value_or(k0.cy),
                                          job.frames.width, job.frames.height);
  job.rig.baseline = m.baseline.value_or(0.064);
  job.rig.toe_in = m.toe_in.value_or(0.0);
  job.footprint = m.footprint.value_or("nearest") == "bilinear2x2" ? Footprint::bilinear2x2
                                                                   : Footprint::nearest;
  job.fill = resolve_fill(m);
  job.layout = parse_layout(m.layout.value_or("sbs"));
  job.validate();
  return job;
}

// --- per-frame operations ---

EyeViews render_eyes(const RgbFrame& rgb, const DepthFrame& depth, const CameraIntrinsics& k,
                     const StereoRig& rig, const RenderOptions& options, FrameTimings* timings) {
  FrameTimings local;
  StageTracker stage;
  return compute_eyes(rgb, depth, k, rig, options, timings ? *timings : local, stage);
}

std::pair<RgbFrame, Mask> fill_eye(const RenderedView& view, const FillSettings& settings) {
  Mask used = dilate_mask(view.mask, settings.dilation);
  const RenderedView widened =
      settings.dilation == 0 ? view : mask_out(view, used, settings.hole_color);
  return {fill_background(widened, settings.policy), std::move(used)};
}

std::optional<RgbFrame> combine(const RgbFrame& left, const RgbFrame& right,
                                OutputLayout layout) {
  if (left.width() != right.width() || left.height() != right.height()) {
    std::ostringstream why;
    why << "eye sizes differ: " << left.width() << "x" << left.height() << " vs "
        << right.width() << "x" << right.height();
    throw Error(ErrorKind::shape, why.str());
  }
  const int w = left.width();
  const int h = left.height();
  const std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
  switch (layout) {
    case OutputLayout::side_by_side: {
      RgbFrame out(2 * w, h);
      for (int y = 0; y < h; ++y) {
        auto dst = out.bytes().begin() + static_cast<std::ptrdiff_t>(2 * row_bytes * y);
        auto l = left.bytes().begin() + static_cast<std::ptrdiff_t>(row_bytes * y);
        auto r = right.bytes().begin() + static_cast<std::ptrdiff_t>(row_bytes * y);
        std::copy(l, l + static_cast<std::ptrdiff_t>(row_bytes), dst);
        std::copy(r, r + static_cast<std::ptrdiff_t>(row_bytes),
                  dst + static_cast<std::ptrdiff_t>(row_bytes));
      }
      return out;
    }
    case OutputLayout::top_bottom: {
      RgbFrame out(w, 2 * h);
      auto dst = std::copy(left.bytes().begin(), left.bytes().end(), out.bytes().begin());
      std::copy(right.bytes().begin(), right.bytes().end(), dst);
      return out;
    }
    case OutputLayout::anaglyph_red_cyan: {
      RgbFrame out(w, h);
      for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        const Rgb l = left.at(i);
        const Rgb r = right.at(i);
        out.set(i, {l.r, r.g, r.b});
      }
      return out;
    }
    case OutputLayout::separate:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<fs::path> write_outputs(const StereoOutputs& o, const fs::path& out_root, bool force) {
  const std::size_t n = o.left.size();
  if (o.right.size() != n || o.masks_left.size() != n || o.masks_right.size() != n ||
      (!o.stereo.empty() && o.stereo.size() != n))
    throw Error(ErrorKind::sequence_length, "output sequences differ in length");
  prepare_output_root(out_root, force);
  std::vector<fs::path> written;
  auto dir = [&](const char* name) {
    const fs::path p = out_root / name;
    fs::create_directories(p);
    return p;
  };
  const fs::path left = dir("left"), right = dir("right"), ml = dir("masks_left"),
                 mr = dir("masks_right");
  const fs::path stereo = o.stereo.empty() ? fs::path() : dir("stereo");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = frame_filename(i);
    write_rgb_png(left / name, o.left[i]);
    write_rgb_png(right / name, o.right[i]);
    write_mask_png(ml / name, o.masks_left[i]);
    write_mask_png(mr / name, o.masks_right[i]);
    written.insert(written.end(), {left / name, right / name, ml / name, mr / name});
    if (!o.stereo.empty()) {
      write_rgb_png(stereo / name, o.stereo[i]);
      written.push_back(stereo / name);
    }
  }
  if (!o.report.is_null()) {
    write_report(out_root, o.report);
    written.push_back(out_root / "report.json");
  }
  return written;
}

json strip_timings(json report) {
  report.erase("timings");
  return report;
}

// --- job runners ---

json generate_stereo(const StereoJob& job, const RunOptions& options) {
  job.validate();
  Stopwatch wall;
  Staging staging(options.out_root, options.force);
  const bool packed = job.layout != OutputLayout::separate;
  const bool external = job.fill.mode == FillMode::external;
  const fs::path left_dir = staging.subdir("left"), right_dir = staging.subdir("right"),
                 ml_dir = staging.subdir("masks_left"), mr_dir = staging.subdir("masks_right");
  const fs::path stereo_dir = packed ? staging.subdir("stereo") : fs::path();
  fs::path views_left, views_right;
  if (external) {
    views_left = staging.subdir("views_left");
    views_right = staging.subdir("views_right");
  }

  const std::size_t n = job.frames.count;
  json frames = json::array(), warnings = json::array(), per_frame = json::array();

  struct FrameOut {
    RgbFrame left, right;
    Mask mask_left, mask_right;
    std::optional<RgbFrame> stereo;
    json info, timing;
    std::optional<std::string> warning;
  };

  process_frames<FrameOut>(
      n, options.workers,
      [&](std::size_t i, StageTracker& stage) {
        FrameTimings t;
        LoadedFrame in = load_frame(job, i, t, stage);
        EyeViews eyes = compute_eyes(in.rgb, in.depth, job.intrinsics, job.rig,
                                     job.render_options(), t, stage);
        FrameOut out;
        out.info = {{"index", i},
                    {"valid_depth_fraction",
                     static_cast<double>(in.depth.valid_count()) /
                         static_cast<double>(in.depth.values.size())},
                    {"mask_fraction_left", hole_fraction(eyes.left.mask)},
                    {"mask_fraction_right", hole_fraction(eyes.right.mask)}};
        out.timing = frame_timing_json(i, t);
        out.warning = in.warning;
        Stopwatch clock;
        if (external) {
          stage.stage = "mask";
          ProviderInput l = provider_input(eyes.left, job.fill);
          ProviderInput r = provider_input(eyes.right, job.fill);
          out.left = std::move(l.frame);
          out.right = std::move(r.frame);
          out.mask_left = std::move(l.mask);
          out.mask_right = std::move(r.mask);
          return out;
        }
        stage.stage = "fill";
        std::tie(out.left, out.mask_left) = fill_eye(eyes.left, job.fill);
        std::tie(out.right, out.mask_right) = fill_eye(eyes.right, job.fill);
        out.timing["fill_s"] = clock.lap();
        stage.stage = "combine";
        out.stereo = combine(out.left, out.right, job.layout);
        out.timing["combine_s"] = clock.lap();
        return out;
      },
      [&](std::size_t i, FrameOut&& out, StageTracker&) {
        const std::string name = frame_filename(i);
        Stopwatch clock;
        write_rgb_png((external ? views_left : left_dir) / name, out.left);
        write_rgb_png((external ? views_right : right_dir) / name, out.right);
        write_mask_png(ml_dir / name, out.mask_left);
        write_mask_png(mr_dir / name, out.mask_right);
        if (out.stereo) write_rgb_png(stereo_dir / name, *out.stereo);
        out.timing["write_s"] = clock.lap();
        frames.push_back(std::move(out.info));
        per_frame.push_back(std::move(out.timing));
        if (out.warning) warnings.push_back(*out.warning);
      });

  json timings;
  if (external) {
    double provider_s = 0.0;
    auto [left, right] = run_providers(staging, job.fill, provider_s);
    struct Packed {
      std::optional<RgbFrame> stereo;
      double seconds;
    };
    process_frames<Packed>(
        n, options.workers,
        [&](std::size_t i, StageTracker& stage) {
          stage.stage = "combine";
          Stopwatch clock;
          Packed p{combine(left[i], right[i], job.layout), 0.0};
          p.seconds = clock.lap();
          return p;
        },
        [&](std::size_t i, Packed&& p, StageTracker&) {
          const std::string name = frame_filename(i);
          write_rgb_png(left_dir / name, left[i]);
          write_rgb_png(right_dir / name, right[i]);
          if (p.stereo) write_rgb_png(stereo_dir / name, *p.stereo);
          per_frame[i]["combine_s"] = p.seconds;
        });
    timings = summarize_timings(per_frame, options.workers, 0.0);
    timings["stages"]["provider_s"] = provider_s;
  } else {
    timings = summarize_timings(per_frame, options.workers, 0.0);
  }
  timings["wall_s"] = wall.lap();
  json report = make_report("synth", n, job.config(), std::move(frames), std::move(warnings),
                            std::move(timings));
  write_report(staging.dir(), report);
  staging.commit({"left", "right", "stereo", "masks_left", "masks_right", "report.json"});
  return report;
}

json render_views(const StereoJob& job, const RunOptions& options) {
  job.validate();
  Stopwatch wall;
  Staging staging(options.out_root, options.force);
  const fs::path left_dir = staging.subdir("left"), right_dir = staging.subdir("right"),
                 ml_dir = staging.subdir("masks_left"), mr_dir = staging.subdir("masks_right"),
                 dl_dir = staging.subdir("depth_left"), dr_dir = staging.subdir("depth_right");

  json frames = json::array(), warnings = json::array(), per_frame = json::array();
  struct FrameOut {
    EyeViews eyes;
    json info, timing;
    std::optional<std::string> warning;
  };
  process_frames<FrameOut>(
      job.frames.count, options.workers,
      [&](std::size_t i, StageTracker& stage) {
        FrameTimings t;
        LoadedFrame in = load_frame(job, i, t, stage);
        FrameOut out{compute_eyes(in.rgb, in.depth, job.intrinsics, job.rig,
                                  job.render_options(), t, stage),
                     {}, {}, in.warning};
        out.info = {{"index", i},
                    {"valid_depth_fraction",
                     static_cast<double>(in.depth.valid_count()) /
                         static_cast<double>(in.depth.values.size())},
                    {"mask_fraction_left", hole_fraction(out.eyes.left.mask)},
                    {"mask_fraction_right", hole_fraction(out.eyes.right.mask)}};
        out.timing = frame_timing_json(i, t);
        return out;
      },
      [&](std::size_t i, FrameOut&& out, StageTracker&) {
        const std::string name = frame_filename(i);
        Stopwatch clock;
        write_rgb_png(left_dir / name, out.eyes.left.image);
        write_rgb_png(right_dir / name, out.eyes.right.image);
        write_mask_png(ml_dir / name, out.eyes.left.mask);
        write_mask_png(mr_dir / name, out.eyes.right.mask);
        write_pfm(dl_dir / frame_filename(i, "pfm"), out.eyes.left.zbuffer);
        write_pfm(dr_dir / frame_filename(i, "pfm"), out.eyes.right.zbuffer);
        out.timing["write_s"] = clock.lap();
        frames.push_back(std::move(out.info));
        per_frame.push_back(std::move(out.timing));
        if (out.warning) warnings.push_back(*out.warning);
      });

  json timings = summarize_timings(per_frame, options.workers, 0.0);
  timings["wall_s"] = wall.lap();
  json report = make_report("views", job.frames.count, job.config(), std::move(frames),
                            std::move(warnings), std::move(timings));
  write_report(staging.dir(), report);
  staging.commit({"left", "right", "masks_left", "masks_right", "depth_left", "depth_right",
                  "report.json"});
  return report;
}

json fill_views(const fs::path& views_dir, const FillSettings& fill, const RunOptions& options) {
  if (fill.dilation < 0) throw Error(ErrorKind::invalid_argument, "dilation must be >= 0");
  if (fill.mode == FillMode::external) expand_command(fill.command, "f", "m", "o");
  const SequenceRef left = discover_sequence(views_dir / "left", "png");
  const SequenceRef right = discover_sequence(views_dir / "right", "png");
  const SequenceRef masks_l = discover_sequence(views_dir / "masks_left", "png");
  const SequenceRef masks_r = discover_sequence(views_dir / "masks_right", "png");
  const SequenceRef depth_l = discover_sequence(views_dir / "depth_left", "pfm");
  const SequenceRef depth_r = discover_sequence(views_dir / "depth_right", "pfm");
  for (const SequenceRef* s : {&right, &masks_l, &masks_r, &depth_l, &depth_r})
    if (s->count != left.count || s->width != left.width || s->height != left.height)
      throw Error(ErrorKind::sequence_length,
                  s->directory.string() + " does not match " + left.directory.string());

  Stopwatch wall;
  Staging staging(options.out_root, options.force);
  const bool external = fill.mode == FillMode::external;
  const fs::path left_dir = staging.subdir("left"), right_dir = staging.subdir("right"),
                 ml_dir = staging.subdir("masks_left"), mr_dir = staging.subdir("masks_right");
  fs::path views_left, views_right;
  if (external) {
    views_left = staging.subdir("views_left");
    views_right = staging.subdir("views_right");
  }

  auto load_view = [](const SequenceRef& img, const SequenceRef& mask, const SequenceRef& depth,
                      std::size_t i) {
    return RenderedView{load_rgb_frame(img, i), load_pfm_frame(depth, i), load_mask_frame(mask, i)};
  };

  json frames = json::array(), per_frame = json::array();
  struct FrameOut {
    RgbFrame left, right;
    Mask mask_left, mask_right;
    double seconds = 0.0;
  };
  process_frames<FrameOut>(
      left.count, options.workers,
      [&](std::size_t i, StageTracker& stage) {
        const RenderedView l = load_view(left, masks_l, depth_l, i);
        const RenderedView r = load_view(right, masks_r, depth_r, i);
        stage.stage = "fill";
        Stopwatch clock;
        FrameOut out;
        if (external) {
          ProviderInput pl = provider_input(l, fill);
          ProviderInput pr = provider_input(r, fill);
          out = {std::move(pl.frame), std::move(pr.frame), std::move(pl.mask), std::move(pr.mask)};
        } else {
          std::tie(out.left, out.mask_left) = fill_eye(l, fill);
          std::tie(out.right, out.mask_right) = fill_eye(r, fill);
        }
        out.seconds = clock.lap();
        return out;
      },
      [&](std::size_t i, FrameOut&& out, StageTracker&) {
        const std::string name = frame_filename(i);
        write_rgb_png((external ? views_left : left_dir) / name, out.left);
        write_rgb_png((external ? views_right : right_dir) / name, out.right);
        write_mask_png(ml_dir / name, out.mask_left);
        write_mask_png(mr_dir / name, out.mask_right);
        frames.push_back({{"index", i},
                          {"mask_fraction_left", hole_fraction(out.mask_left)},
                          {"mask_fraction_right", hole_fraction(out.mask_right)}});
        per_frame.push_back({{"index", i}, {"fill_s", out.seconds}});
      });

  json timings = summarize_timings(per_frame, options.workers, 0.0);
  if (external) {
    double provider_s = 0.0;
    auto [l, r] = run_providers(staging, fill, provider_s);
    for (std::size_t i = 0; i < left.count; ++i) {
      StageTracker stage{"write"};
      if (auto f = capture(stage, [&] {
            write_rgb_png(left_dir / frame_filename(i), l[i]);
            write_rgb_png(right_dir / frame_filename(i), r[i]);
          }))
        throw_failure(i, *f);
    }
    timings["stages"]["provider_s"] = provider_s;
  }
  timings["wall_s"] = wall.lap();
  json config = fill_config(fill);
  config["views"] = views_dir.string();
  json report = make_report("fill", left.count, std::move(config), std::move(frames),
                            json::array(), std::move(timings));
  write_report(staging.dir(), report);
  staging.commit({"left", "right", "masks_left", "masks_right", "report.json"});
  return report;
}

json combine_views(const fs::path& eyes_dir, OutputLayout layout, const RunOptions& options) {
  const SequenceRef left = discover_sequence(eyes_dir / "left", "png");
  const SequenceRef right = discover_sequence(eyes_dir / "right", "png");
  if (left.count != right.count)
    throw Error(ErrorKind::sequence_length, "left and right eye sequences differ in length");
  Stopwatch wall;
  Staging staging(options.out_root, options.force);
  const bool packed = layout != OutputLayout::separate;
  const fs::path stereo_dir = packed ? staging.subdir("stereo") : fs::path();
  const fs::path left_dir = packed ? fs::path() : staging.subdir("left");
  const fs::path right_dir = packed ? fs::path() : staging.subdir("right");

  json per_frame = json::array();
  struct FrameOut {
    RgbFrame left, right;
    std::optional<RgbFrame> stereo;
    double seconds = 0.0;
  };
  process_frames<FrameOut>(
      left.count, options.workers,
      [&](std::size_t i, StageTracker& stage) {
        FrameOut out{load_rgb_frame(left, i), load_rgb_frame(right, i), std::nullopt, 0.0};
        stage.stage = "combine";
        Stopwatch clock;
        out.stereo = combine(out.left, out.right, layout);
        out.seconds = clock.lap();
        return out;
      },
      [&](std::size_t i, FrameOut&& out, StageTracker&) {
        const std::string name = frame_filename(i);
        if (out.stereo) {
          write_rgb_png(stereo_dir / name, *out.stereo);
        } else {
          write_rgb_png(left_dir / name, out.left);
          write_rgb_png(right_dir / name, out.right);
        }
        per_frame.push_back({{"index", i}, {"combine_s", out.seconds}});
      });

  json timings = summarize_timings(per_frame, options.workers, 0.0);
  timings["wall_s"] = wall.lap();
  json frames = json::array();
  for (std::size_t i = 0; i < left.count; ++i) frames.push_back({{"index", i}});
  json report = make_report("combine", left.count,
                            {{"eyes", eyes_dir.string()}, {"layout", to_string(layout)}},
                            std::move(frames), json::array(), std::move(timings));
  write_report(staging.dir(), report);
  staging.commit({"left", "right", "stereo", "report.json"});
  return report;
}

}  // namespace stereogen

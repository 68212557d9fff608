#include "stereogen/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stereogen/error.hpp"
#include "stereogen/metrics.hpp"
#include "stereogen/stereo.hpp"
#include "stereogen/synthscene.hpp"

namespace stereogen::cli {

namespace {

using nlohmann::json;

Rgb parse_color(const std::string& text) {
  std::istringstream in(text);
  int c[3];
  char sep1 = 0, sep2 = 0;
  if (!(in >> c[0] >> sep1 >> c[1] >> sep2 >> c[2]) || sep1 != ',' || sep2 != ',' ||
      !(in >> std::ws).eof())
    throw Error(ErrorKind::usage, "color must be R,G,B, got '" + text + "'");
  for (int v : c)
    if (v < 0 || v > 255) throw Error(ErrorKind::usage, "color channel outside [0, 255]: " + text);
  return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
          static_cast<std::uint8_t>(c[2])};
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

/// Raw flag values; unset flags stay empty so the manifest value survives.
struct JobFlags {
  std::string manifest;
  std::optional<std::string> frames, depths, depth_encoding, depth_mode, footprint, fill,
      fill_cmd, fill_policy, fallback_color, hole_color, layout, out;
  std::optional<double> depth_scale, depth_shift, fx, fy, cx, cy, baseline, toe_in;
  std::optional<int> dilate, workers;
  bool force = false;
};

// CLI11 2.4 binds std::optional through its generic wrapper support.
template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& name, std::optional<T>& dst,
                 const std::string& help) {
  return app->add_option(name, dst, help);
}

void add_io_flags(CLI::App* app, JobFlags& f) {
  opt(app, "--out", f.out, "output directory");
  app->add_flag("--force", f.force, "replace a non-empty output directory");
  opt(app, "--workers", f.workers, "worker threads (default: available cores)")
      ->check(CLI::PositiveNumber);
}

void add_fill_flags(CLI::App* app, JobFlags& f) {
  opt(app, "--dilate", f.dilate, "hole dilation radius in pixels")->check(CLI::NonNegativeNumber);
  opt(app, "--fill", f.fill, "builtin | external")->check(CLI::IsMember({"builtin", "external"}));
  opt(app, "--fill-cmd", f.fill_cmd, "provider command with {frames} {masks} {out}");
  opt(app, "--fill-policy", f.fill_policy, "background_extrapolate | nearest_valid")
      ->check(CLI::IsMember({"background_extrapolate", "nearest_valid"}));
  opt(app, "--fallback-color", f.fallback_color, "R,G,B for frames with no covered pixel");
  opt(app, "--hole-color", f.hole_color, "R,G,B painted into dropout pixels");
}

void add_job_flags(CLI::App* app, JobFlags& f) {
  app->add_option("--manifest", f.manifest, "job manifest (JSON)");
  opt(app, "--frames", f.frames, "directory of numbered RGB PNG frames");
  opt(app, "--depths", f.depths, "directory of numbered depth maps");
  opt(app, "--depth-encoding", f.depth_encoding, "png16 | pfm")
      ->check(CLI::IsMember({"png16", "pfm"}));
  opt(app, "--depth-mode", f.depth_mode, "metric | inverse")
      ->check(CLI::IsMember({"metric", "inverse"}));
  opt(app, "--depth-scale", f.depth_scale, "depth scale factor");
  opt(app, "--depth-shift", f.depth_shift, "depth offset");
  opt(app, "--fx", f.fx, "focal length x (pixels)");
  opt(app, "--fy", f.fy, "focal length y (pixels)");
  opt(app, "--cx", f.cx, "principal point x (pixels)");
  opt(app, "--cy", f.cy, "principal point y (pixels)");
  opt(app, "--baseline", f.baseline, "eye separation in scene units");
  opt(app, "--toe-in", f.toe_in, "total convergence angle (radians)");
  opt(app, "--footprint", f.footprint, "nearest | bilinear2x2")
      ->check(CLI::IsMember({"nearest", "bilinear2x2"}));
  opt(app, "--layout", f.layout, "sbs | tb | anaglyph | separate")
      ->check(CLI::IsMember({"sbs", "tb", "anaglyph", "separate"}));
  add_fill_flags(app, f);
  add_io_flags(app, f);
}

/// Manifest (if any) with flags layered on top. Returns the manifest and the
/// directory its relative paths resolve against.
std::pair<JobManifest, fs::path> merged_manifest(const JobFlags& f) {
  JobManifest m;
  fs::path base = fs::current_path();
  if (!f.manifest.empty()) {
    m = JobManifest::load(f.manifest);
    base = fs::absolute(f.manifest).parent_path();
  }
  JobManifest flags;
  if (f.frames) flags.frames = absolute(*f.frames);
  if (f.depths) flags.depths = absolute(*f.depths);
  if (f.out) flags.out = absolute(*f.out);
  flags.depth_encoding = f.depth_encoding;
  flags.depth_mode = f.depth_mode;
  flags.depth_scale = f.depth_scale;
  flags.depth_shift = f.depth_shift;
  flags.fx = f.fx;
  flags.fy = f.fy;
  flags.cx = f.cx;
  flags.cy = f.cy;
  flags.baseline = f.baseline;
  flags.toe_in = f.toe_in;
  flags.footprint = f.footprint;
  flags.dilate = f.dilate;
  flags.fill = f.fill;
  flags.fill_cmd = f.fill_cmd;
  flags.fill_policy = f.fill_policy;
  if (f.fallback_color) flags.fallback_color = parse_color(*f.fallback_color);
  if (f.hole_color) flags.hole_color = parse_color(*f.hole_color);
  flags.layout = f.layout;
  if (f.force) flags.force = true;
  flags.workers = f.workers;
  m.merge(flags);
  return {m, base};
}

RunOptions run_options(const JobManifest& m, const fs::path& base) {
  RunOptions o = resolve_run_options(m, base);
  if (o.out_root.empty()) throw Error(ErrorKind::usage, "no output directory (--out or 'out')");
  return o;
}

json job_summary(const char* command, const json& report, const RunOptions& o) {
  json s = {{"command", command},
            {"status", "ok"},
            {"frames", report.at("frame_count")},
            {"out", o.out_root.string()}};
  const json& t = report.at("timings");
  if (t.contains("stereo_frame_s_mean")) s["stereo_frame_s_mean"] = t["stereo_frame_s_mean"];
  s["warnings"] = report.at("warnings").size();
  return s;
}

void print_error(std::ostream& err, ErrorKind kind, const std::string& message,
                 const JobError* job = nullptr) {
  json e = {{"error", std::string(to_string(kind))}, {"message", message}};
  if (job) {
    e["stage"] = job->stage();
    if (job->frame()) e["frame"] = *job->frame();
  }
  err << e.dump() << "\n";
}

// --- scene materialization ---

json materialize_scene(const fs::path& spec_path, const fs::path& out, double baseline,
                       int count, bool force) {
  std::ifstream in(spec_path);
  if (!in) throw Error(ErrorKind::io, "cannot read scene spec " + spec_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::manifest, std::string("scene spec is not valid JSON: ") + e.what());
  }
  const SceneSpec spec = SceneSpec::from_json(doc);
  if (count < 1) throw Error(ErrorKind::usage, "--count must be >= 1");

  prepare_output_root(out, force);
  const SceneFrame frame = render_scene(spec);
  const EyeTransforms eyes = rig_transforms({baseline, 0.0});
  const GroundTruthView gl = ground_truth_view(spec, eyes.left);
  const GroundTruthView gr = ground_truth_view(spec, eyes.right);
  Plane<float> depth(spec.width, spec.height);
  for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = static_cast<float>(frame.depth.values[i]);

  for (const char* d : {"frames", "depths", "truth_left", "truth_right", "truth_masks_left",
                        "truth_masks_right"})
    fs::create_directories(out / d);
  for (int i = 0; i < count; ++i) {
    const std::string name = frame_filename(static_cast<std::size_t>(i));
    write_rgb_png(out / "frames" / name, frame.rgb);
    write_pfm(out / "depths" / frame_filename(static_cast<std::size_t>(i), "pfm"), depth);
    write_rgb_png(out / "truth_left" / name, gl.image);
    write_rgb_png(out / "truth_right" / name, gr.image);
    write_mask_png(out / "truth_masks_left" / name, gl.dropout);
    write_mask_png(out / "truth_masks_right" / name, gr.dropout);
  }
  JobManifest job;
  job.frames = "frames";
  job.depths = "depths";
  job.depth_encoding = "pfm";
  job.fx = spec.intrinsics.fx;
  job.fy = spec.intrinsics.fy;
  job.cx = spec.intrinsics.cx;
  job.cy = spec.intrinsics.cy;
  job.baseline = baseline;
  write_text_file(out / "job.json", job.serialize());
  return {{"command", "scene"}, {"status", "ok"}, {"frames", count}, {"out", out.string()},
          {"width", spec.width}, {"height", spec.height}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stereogen: monocular RGB-D video to stereoscopic video", "stereogen"};
  app.require_subcommand(1);
  app.fallthrough(false);

  JobFlags synth_f, views_f, validate_f, fill_f, combine_f;
  auto* synth = app.add_subcommand("synth", "full pipeline: render eyes, fill, combine");
  add_job_flags(synth, synth_f);
  auto* views = app.add_subcommand("views", "render eyes and masks without filling");
  add_job_flags(views, views_f);
  auto* validate = app.add_subcommand("validate", "check manifest and input sequences only");
  add_job_flags(validate, validate_f);

  std::string views_dir;
  auto* fill = app.add_subcommand("fill", "fill holes of a `views` output directory");
  fill->add_option("--manifest", fill_f.manifest, "job manifest (fill keys are used)");
  fill->add_option("--views", views_dir, "directory written by `views`")->required();
  add_fill_flags(fill, fill_f);
  add_io_flags(fill, fill_f);

  std::string eyes_dir;
  auto* comb = app.add_subcommand("combine", "pack left/right eye directories");
  comb->add_option("--manifest", combine_f.manifest, "job manifest (layout key is used)");
  comb->add_option("--eyes", eyes_dir, "directory holding left/ and right/")->required();
  opt(comb, "--layout", combine_f.layout, "sbs | tb | anaglyph | separate")
      ->check(CLI::IsMember({"sbs", "tb", "anaglyph", "separate"}));
  add_io_flags(comb, combine_f);

  std::string reference;
  std::vector<std::string> candidates;
  std::string eval_report;
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM of candidate sequences against a reference");
  eval->add_option("--reference", reference, "reference frame directory")->required();
  eval->add_option("--candidate", candidates, "[LABEL=]DIR, repeatable")->required();
  eval->add_option("--report", eval_report, "also write the report to this file");

  std::string scene_spec, scene_out;
  double scene_baseline = 0.064;
  int scene_count = 1;
  bool scene_force = false;
  auto* scene = app.add_subcommand("scene", "materialize a synthetic scene with ground truth");
  scene->add_option("--spec", scene_spec, "scene spec (JSON)")->required();
  scene->add_option("--out", scene_out, "output directory")->required();
  scene->add_option("--baseline", scene_baseline, "rig baseline for the ground-truth eyes");
  scene->add_option("--count", scene_count, "number of identical frames")->check(CLI::PositiveNumber);
  scene->add_flag("--force", scene_force, "replace a non-empty output directory");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(argv_rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, ErrorKind::usage, e.what());
    return 2;
  }

  try {
    if (synth->parsed() || views->parsed() || validate->parsed()) {
      const JobFlags& f = synth->parsed() ? synth_f : views->parsed() ? views_f : validate_f;
      auto [m, base] = merged_manifest(f);
      const StereoJob job = resolve_job(m, base);
      if (validate->parsed()) {
        out << json{{"command", "validate"},
                    {"status", "ok"},
                    {"frames", job.frames.count},
                    {"width", job.intrinsics.width},
                    {"height", job.intrinsics.height},
                    {"config", job.config()}}
                   .dump()
            << "\n";
        return 0;
      }
      const RunOptions o = run_options(m, base);
      const char* command = synth->parsed() ? "synth" : "views";
      err << "stereogen: " << command << " " << job.frames.count << " frame(s) -> "
          << o.out_root.string() << "\n";
      const json report = synth->parsed() ? generate_stereo(job, o) : render_views(job, o);
      out << job_summary(command, report, o).dump() << "\n";
      return 0;
    }
    if (fill->parsed()) {
      auto [m, base] = merged_manifest(fill_f);
      const FillSettings settings = resolve_fill(m);
      const RunOptions o = run_options(m, base);
      err << "stereogen: fill " << views_dir << " -> " << o.out_root.string() << "\n";
      const json report = fill_views(fs::absolute(views_dir), settings, o);
      out << job_summary("fill", report, o).dump() << "\n";
      return 0;
    }
    if (comb->parsed()) {
      auto [m, base] = merged_manifest(combine_f);
      const RunOptions o = run_options(m, base);
      const OutputLayout layout = parse_layout(m.layout.value_or("sbs"));
      err << "stereogen: combine " << eyes_dir << " -> " << o.out_root.string() << "\n";
      const json report = combine_views(fs::absolute(eyes_dir), layout, o);
      out << job_summary("combine", report, o).dump() << "\n";
      return 0;
    }
    if (eval->parsed()) {
      std::vector<LabelledRun> runs;
      for (const std::string& c : candidates) {
        const auto eq = c.find('=');
        const std::string label = eq == std::string::npos ? fs::path(c).filename().string()
                                                          : c.substr(0, eq);
        const std::string dir = eq == std::string::npos ? c : c.substr(eq + 1);
        err << "stereogen: eval " << label << "\n";
        runs.emplace_back(label, evaluate_sequence(dir, reference));
      }
      const json report = comparison_to_json(runs);
      if (!eval_report.empty()) write_text_file(eval_report, report.dump(2) + "\n");
      out << report.dump() << "\n";
      return 0;
    }
    if (scene->parsed()) {
      out << materialize_scene(scene_spec, scene_out, scene_baseline, scene_count, scene_force)
                 .dump()
          << "\n";
      return 0;
    }
  } catch (const JobError& e) {
    print_error(err, e.kind(), e.what(), &e);
    return e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(err, ErrorKind::io, e.what());
    return 1;
  }
  return 2;
}

}  // namespace stereogen::cli

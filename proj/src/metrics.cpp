#include "stereogen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stereogen/error.hpp"
#include "stereogen/frameio.hpp"

namespace stereogen {

namespace {

void require_same_shape(const RgbFrame& a, const RgbFrame& b) {
  if (a.width() == b.width() && a.height() == b.height()) return;
  std::ostringstream why;
  why << "frames differ in size: " << a.width() << "x" << a.height() << " vs " << b.width()
      << "x" << b.height();
  throw Error(ErrorKind::shape, why.str());
}

std::vector<double> gaussian_kernel() {
  std::vector<double> k(SsimParameters::window);
  const int half = SsimParameters::window / 2;
  double sum = 0.0;
  for (int i = 0; i < SsimParameters::window; ++i) {
    const double d = i - half;
    k[i] = std::exp(-(d * d) / (2.0 * SsimParameters::sigma * SsimParameters::sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-region separable filter: output is (w-10) x (h-10).
Plane<double> filter_valid(const Plane<double>& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.width() - n + 1;
  const int oh = in.height() - n + 1;
  Plane<double> horizontal(ow, in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * in(x + i, y);
      horizontal(x, y) = acc;
    }
  Plane<double> out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * horizontal(x, y + i);
      out(x, y) = acc;
    }
  return out;
}

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double read_number_or_inf(const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

double psnr(const RgbFrame& a, const RgbFrame& b) {
  require_same_shape(a, b);
  const auto& pa = a.bytes();
  const auto& pb = b.bytes();
  if (pa.empty()) throw Error(ErrorKind::size, "psnr of empty frames");
  double sse = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(pa.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Plane<double> luma(const RgbFrame& frame) {
  Plane<double> y(frame.width(), frame.height());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Rgb c = frame.at(i);
    y[i] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  }
  return y;
}

double ssim(const RgbFrame& a, const RgbFrame& b) {
  require_same_shape(a, b);
  if (std::min(a.width(), a.height()) < SsimParameters::window) {
    std::ostringstream why;
    why << "ssim needs at least " << SsimParameters::window << "x" << SsimParameters::window
        << " pixels, got " << a.width() << "x" << a.height();
    throw Error(ErrorKind::size, why.str());
  }
  const Plane<double> la = luma(a);
  const Plane<double> lb = luma(b);
  Plane<double> aa(la.width(), la.height()), bb(la.width(), la.height()),
      ab(la.width(), la.height());
  for (std::size_t i = 0; i < la.size(); ++i) {
    aa[i] = la[i] * la[i];
    bb[i] = lb[i] * lb[i];
    ab[i] = la[i] * lb[i];
  }
  const auto k = gaussian_kernel();
  const Plane<double> mu_a = filter_valid(la, k);
  const Plane<double> mu_b = filter_valid(lb, k);
  const Plane<double> e_aa = filter_valid(aa, k);
  const Plane<double> e_bb = filter_valid(bb, k);
  const Plane<double> e_ab = filter_valid(ab, k);

  const double c1 = std::pow(SsimParameters::k1 * SsimParameters::dynamic_range, 2);
  const double c2 = std::pow(SsimParameters::k2 * SsimParameters::dynamic_range, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = std::max(0.0, e_aa[i] - ma * ma);
    const double var_b = std::max(0.0, e_bb[i] - mb * mb);
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  // Rounding can push the mean a few ulps past the mathematical bound.
  return std::clamp(total / static_cast<double>(mu_a.size()), -1.0, 1.0);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : per_frame)
    frames.push_back({{"index", f.index}, {"psnr_db", number_or_inf(f.psnr_db)}, {"ssim", f.ssim}});
  return {
      {"per_frame", frames},
      {"aggregate",
       {{"mean_psnr_db", number_or_inf(mean_psnr)},
        {"mean_ssim", mean_ssim},
        {"frames", per_frame.size()},
        {"infinite_psnr_frames", infinite_psnr_frames}}},
      {"config",
       {{"psnr", {{"peak", 255}, {"channels", "rgb_joint"}}},
        {"ssim",
         {{"channel", "bt601_luma"},
          {"window", SsimParameters::window},
          {"sigma", SsimParameters::sigma},
          {"k1", SsimParameters::k1},
          {"k2", SsimParameters::k2},
          {"dynamic_range", SsimParameters::dynamic_range}}}}},
      {"external", {{"lpips", nullptr}, {"fvd", nullptr}}},
  };
}

MetricReport MetricReport::from_json(const nlohmann::json& doc) {
  try {
    MetricReport r;
    for (const auto& f : doc.at("per_frame"))
      r.per_frame.push_back({f.at("index").get<std::size_t>(), read_number_or_inf(f.at("psnr_db")),
                             f.at("ssim").get<double>()});
    const auto& agg = doc.at("aggregate");
    r.mean_psnr = read_number_or_inf(agg.at("mean_psnr_db"));
    r.mean_ssim = agg.at("mean_ssim").get<double>();
    r.infinite_psnr_frames = agg.at("infinite_psnr_frames").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed metric report: ") + e.what());
  }
}

MetricReport evaluate_frames(const std::vector<RgbFrame>& candidate,
                             const std::vector<RgbFrame>& reference) {
  if (candidate.size() != reference.size()) {
    std::ostringstream why;
    why << "candidate has " << candidate.size() << " frames, reference has "
        << reference.size();
    throw Error(ErrorKind::sequence_length, why.str());
  }
  if (candidate.empty()) throw Error(ErrorKind::sequence_length, "no frames to evaluate");
  MetricReport r;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    FrameScore s{i, psnr(candidate[i], reference[i]), ssim(candidate[i], reference[i])};
    if (std::isinf(s.psnr_db))
      ++r.infinite_psnr_frames;
    else
      psnr_sum += s.psnr_db;
    ssim_sum += s.ssim;
    r.per_frame.push_back(s);
  }
  const std::size_t finite = candidate.size() - r.infinite_psnr_frames;
  r.mean_psnr = finite == 0 ? std::numeric_limits<double>::infinity()
                            : psnr_sum / static_cast<double>(finite);
  r.mean_ssim = ssim_sum / static_cast<double>(candidate.size());
  return r;
}

MetricReport evaluate_sequence(const std::filesystem::path& candidate_dir,
                               const std::filesystem::path& reference_dir) {
  const SequenceRef cand = discover_sequence(candidate_dir, "png");
  const SequenceRef ref = discover_sequence(reference_dir, "png");
  if (cand.count != ref.count) {
    std::ostringstream why;
    why << candidate_dir.string() << " has " << cand.count << " frames, "
        << reference_dir.string() << " has " << ref.count;
    throw Error(ErrorKind::sequence_length, why.str());
  }
  return evaluate_frames(load_rgb_sequence(cand), load_rgb_sequence(ref));
}

nlohmann::json comparison_to_json(const std::vector<LabelledRun>& runs) {
  nlohmann::json doc = {{"version", 1}, {"runs", nlohmann::json::array()}};
  for (const auto& [label, report] : runs) {
    nlohmann::json entry = report.to_json();
    entry["label"] = label;
    doc["runs"].push_back(std::move(entry));
  }
  return doc;
}

std::vector<LabelledRun> comparison_from_json(const nlohmann::json& doc) {
  std::vector<LabelledRun> runs;
  try {
    for (const auto& entry : doc.at("runs"))
      runs.emplace_back(entry.at("label").get<std::string>(), MetricReport::from_json(entry));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed comparison report: ") + e.what());
  }
  return runs;
}

}  // namespace stereogen

#include "stereogen/inpaint.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include "stereogen/error.hpp"
#include "stereogen/frameio.hpp"

namespace stereogen {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kDiagnosticTail = 4096;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size()))
    text.replace(pos, from.size(), to);
}

// Picks the source pixel for a hole from its row neighbours.
std::size_t pick_in_row(std::size_t left, std::size_t right, std::size_t at,
                        const RenderedView& view, FillMethod method) {
  if (left == kNone) return right;
  if (right == kNone) return left;
  if (method == FillMethod::background_extrapolate)
    return view.zbuffer[right] > view.zbuffer[left] ? right : left;
  return (right - at) < (at - left) ? right : left;
}

}  // namespace

std::string to_string(FillMethod method) {
  return method == FillMethod::background_extrapolate ? "background_extrapolate"
                                                      : "nearest_valid";
}

FillMethod parse_fill_method(const std::string& text) {
  if (text == "background_extrapolate") return FillMethod::background_extrapolate;
  if (text == "nearest_valid") return FillMethod::nearest_valid;
  throw Error(ErrorKind::invalid_argument, "unknown fill method '" + text + "'");
}

RgbFrame fill_background(const RenderedView& view, const FillPolicy& policy) {
  const int w = view.image.width();
  const int h = view.image.height();
  const std::size_t n = view.mask.size();
  RgbFrame out = view.image;
  if (view.hole_count() == 0) return out;
  if (view.hole_count() == n) return RgbFrame(w, h, policy.fallback_color);

  auto covered = [&](std::size_t i) { return view.mask[i] != kMaskHole; };

  // Raster-order neighbours, used only for rows without any covered pixel.
  std::vector<std::size_t> prev_global(n, kNone), next_global(n, kNone);
  for (std::size_t i = 0, last = kNone; i < n; ++i) {
    if (covered(i)) last = i;
    prev_global[i] = last;
  }
  for (std::size_t i = n, last = kNone; i-- > 0;) {
    if (covered(i)) last = i;
    next_global[i] = last;
  }

  std::vector<std::size_t> left(static_cast<std::size_t>(w)), right(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    std::size_t last = kNone;
    for (int x = 0; x < w; ++x) {
      if (covered(row + x)) last = row + x;
      left[x] = last;
    }
    last = kNone;
    for (int x = w; x-- > 0;) {
      if (covered(row + x)) last = row + x;
      right[x] = last;
    }
    const bool row_empty = left[w - 1] == kNone;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      if (covered(i)) continue;
      std::size_t src;
      if (!row_empty) {
        src = pick_in_row(left[x], right[x], i, view, policy.method);
      } else {
        const std::size_t p = prev_global[i];
        const std::size_t q = next_global[i];
        if (p == kNone)
          src = q;
        else if (q == kNone)
          src = p;
        else
          src = (q - i) < (i - p) ? q : p;
      }
      out.set(i, view.image.at(src));
    }
  }
  return out;
}

std::string expand_command(const std::string& command_template,
                           const std::filesystem::path& frames_dir,
                           const std::filesystem::path& masks_dir,
                           const std::filesystem::path& output_dir) {
  for (const char* key : {"{frames}", "{masks}", "{out}"}) {
    if (command_template.find(key) == std::string::npos)
      throw Error(ErrorKind::invalid_argument,
                  std::string("fill command template lacks the ") + key + " placeholder");
  }
  std::string cmd = command_template;
  replace_all(cmd, "{frames}", shell_quote(frames_dir.string()));
  replace_all(cmd, "{masks}", shell_quote(masks_dir.string()));
  replace_all(cmd, "{out}", shell_quote(output_dir.string()));
  return cmd;
}

std::vector<RgbFrame> external_inpaint(const std::filesystem::path& frames_dir,
                                       const std::filesystem::path& masks_dir,
                                       const std::string& command_template,
                                       const std::filesystem::path& output_dir) {
  const SequenceRef frames = discover_sequence(frames_dir, "png");
  const SequenceRef masks = discover_sequence(masks_dir, "png");
  if (frames.count != masks.count || frames.pattern() != masks.pattern()) {
    std::ostringstream why;
    why << "frames (" << frames.count << " x " << frames.pattern() << ") and masks ("
        << masks.count << " x " << masks.pattern() << ") do not pair up";
    throw Error(ErrorKind::sequence_length, why.str());
  }
  const std::string cmd = expand_command(command_template, frames_dir, masks_dir, output_dir);

  std::error_code ec;
  if (std::filesystem::exists(output_dir, ec) && !std::filesystem::is_empty(output_dir, ec))
    throw Error(ErrorKind::output_exists, "provider output " + output_dir.string() +
                                              " is not empty");
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + output_dir.string());

  std::fflush(nullptr);
  const std::string shell = "exec 2>&1; " + cmd;
  std::FILE* pipe = ::popen(shell.c_str(), "r");
  if (!pipe) throw Error(ErrorKind::provider_failure, "cannot start provider: " + cmd);
  std::string diagnostics;
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) {
    diagnostics.append(buf.data(), got);
    if (diagnostics.size() > 4 * kDiagnosticTail)
      diagnostics.erase(0, diagnostics.size() - kDiagnosticTail);
  }
  const int status = ::pclose(pipe);
  if (diagnostics.size() > kDiagnosticTail)
    diagnostics.erase(0, diagnostics.size() - kDiagnosticTail);

  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::ostringstream why;
    why << "provider exited with ";
    if (status != -1 && WIFEXITED(status))
      why << "status " << WEXITSTATUS(status);
    else if (status != -1 && WIFSIGNALED(status))
      why << "signal " << WTERMSIG(status);
    else
      why << "unknown status";
    why << ": " << diagnostics;
    throw Error(ErrorKind::provider_failure, why.str());
  }

  for (std::size_t i = 0; i < frames.count; ++i) {
    const auto produced = output_dir / frames.filename(i);
    if (!std::filesystem::is_regular_file(produced, ec))
      throw Error(ErrorKind::provider_contract,
                  "provider produced no output for frame index " + std::to_string(i) + " (" +
                      produced.filename().string() + ")");
    int w = 0, h = 0;
    try {
      std::tie(w, h) = read_dimensions(produced);
    } catch (const Error& e) {
      throw Error(ErrorKind::provider_contract, "unreadable provider output for frame index " +
                                                    std::to_string(i) + ": " + e.what());
    }
    if (w != frames.width || h != frames.height) {
      std::ostringstream why;
      why << "provider output " << produced.filename().string() << " is " << w << "x" << h
          << ", expected " << frames.width << "x" << frames.height;
      throw Error(ErrorKind::provider_contract, why.str());
    }
  }

  std::vector<RgbFrame> result;
  result.reserve(frames.count);
  for (std::size_t i = 0; i < frames.count; ++i) {
    try {
      result.push_back(read_rgb_png(output_dir / frames.filename(i)));
    } catch (const Error& e) {
      throw Error(ErrorKind::provider_contract, "unreadable provider output for frame index " +
                                                    std::to_string(i) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace stereogen

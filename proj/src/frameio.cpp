#include "stereogen/frameio.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <sstream>

#include "stereogen/error.hpp"

namespace stereogen {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw Error(ErrorKind::io, "cannot open " + path.string() + " (" +
                                   std::strerror(errno) + ")");
  }
  return f;
}

// Decoded PNG in the caller-requested layout.
struct PngPixels {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> data;
};

enum class PngTarget { rgb8, native };

void png_error_to_string(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = message;
  png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

// All C++ objects live outside the setjmp region; libpng failures return false.
bool decode_png(std::FILE* file, PngTarget target, PngPixels& out, std::string& error) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_string,
                             png_silent_warning);
  if (!png) {
    error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    error = "png_create_info_struct failed";
    return false;
  }
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);

  if (target == PngTarget::rgb8) {
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8)
      png_set_expand_gray_1_2_4_to_8(png);
    if (out.bit_depth == 16) png_set_strip_16(png);
    if (out.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY || out.color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
  }
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngPixels load_png(const fs::path& path, PngTarget target) {
  FilePtr f = open_file(path, "rb");
  std::uint8_t signature[8] = {};
  if (std::fread(signature, 1, 8, f.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
    throw Error(ErrorKind::format, path.string() + ": not a PNG file");
  std::rewind(f.get());
  PngPixels pixels;
  std::string error;
  if (!decode_png(f.get(), target, pixels, error))
    throw Error(ErrorKind::format, path.string() + ": " + error);
  return pixels;
}

void encode_png(const fs::path& path, int width, int height, int color_type, int bit_depth,
                const std::uint8_t* data, std::size_t stride) {
  FilePtr f = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            png_error_to_string, png_silent_warning);
  if (!png) throw Error(ErrorKind::io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::io, "png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data + stride * static_cast<std::size_t>(y));
  volatile bool ok = false;
  if (!setjmp(png_jmpbuf(png))) {
    png_init_io(png, f.get());
    png_set_compression_level(png, 1);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(ErrorKind::io, path.string() + ": " + error);
  if (std::fflush(f.get()) != 0) throw Error(ErrorKind::io, "write failed: " + path.string());
}

void expect_dims(const fs::path& path, int w, int h, int expected_w, int expected_h) {
  if (w == expected_w && h == expected_h) return;
  std::ostringstream why;
  why << path.string() << ": size " << w << "x" << h << " differs from sequence size "
      << expected_w << "x" << expected_h;
  throw Error(ErrorKind::shape, why.str());
}

// --- PFM header parsing with byte offsets ---

class HeaderReader {
 public:
  HeaderReader(const std::vector<std::uint8_t>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) fail("unexpected end of header");
    return {bytes_.begin() + start, bytes_.begin() + pos_};
  }

  // Exactly one whitespace byte separates the header from the samples.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      fail("expected whitespace after scale");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream why;
    why << path_.string() << ": malformed PFM at byte " << pos_ << ": " << what;
    throw Error(ErrorKind::format, why.str());
  }

  std::size_t pos() const noexcept { return pos_; }
  void mark(std::size_t p) { pos_ = p; }

  void skip_space() {
    while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

int parse_dimension(HeaderReader& reader) {
  reader.skip_space();
  const std::size_t at = reader.pos();
  const std::string tok = reader.token();
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || value < 1) {
    reader.mark(at);
    reader.fail("bad dimension '" + tok + "'");
  }
  return value;
}

struct PfmHeader {
  int width = 0;
  int height = 0;
  bool little_endian = true;
  std::size_t data_offset = 0;
};

PfmHeader parse_pfm_header(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  HeaderReader reader(bytes, path);
  const std::string magic = reader.token();
  if (magic == "PF") {
    reader.mark(0);
    reader.fail("3-channel PFM; depth needs a single channel (Pf)");
  }
  if (magic != "Pf") {
    reader.mark(0);
    reader.fail("missing 'Pf' magic");
  }
  PfmHeader h;
  h.width = parse_dimension(reader);
  h.height = parse_dimension(reader);
  reader.skip_space();
  const std::size_t scale_at = reader.pos();
  const std::string scale_tok = reader.token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) scale = 0.0;
  } catch (const std::exception&) {
    scale = 0.0;
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    reader.mark(scale_at);
    reader.fail("bad scale '" + scale_tok + "'");
  }
  h.little_endian = scale < 0.0;
  reader.single_space();
  h.data_offset = reader.pos();
  return h;
}

}  // namespace

RgbFrame read_rgb_png(const fs::path& path) {
  PngPixels px = load_png(path, PngTarget::rgb8);
  RgbFrame frame(px.width, px.height);
  frame.bytes() = std::move(px.data);
  return frame;
}

void write_rgb_png(const fs::path& path, const RgbFrame& frame) {
  encode_png(path, frame.width(), frame.height(), PNG_COLOR_TYPE_RGB, 8, frame.bytes().data(),
             static_cast<std::size_t>(frame.width()) * 3);
}

Mask read_mask_png(const fs::path& path) {
  PngPixels px = load_png(path, PngTarget::native);
  if (px.color_type != PNG_COLOR_TYPE_GRAY || px.bit_depth != 8)
    throw Error(ErrorKind::format, path.string() + ": mask must be 8-bit single-channel PNG");
  Mask mask(px.width, px.height);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = px.data[i] != 0 ? kMaskHole : kMaskCovered;
  return mask;
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  encode_png(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 8, mask.data().data(),
             static_cast<std::size_t>(mask.width()));
}

RawDepth read_depth_png16(const fs::path& path) {
  PngPixels px = load_png(path, PngTarget::native);
  if (px.color_type != PNG_COLOR_TYPE_GRAY || px.bit_depth != 16) {
    std::ostringstream why;
    why << path.string() << ": depth PNG must be 16-bit single-channel (found " << px.channels
        << " channel(s), " << px.bit_depth << "-bit)";
    throw Error(ErrorKind::format, why.str());
  }
  RawDepth raw{Plane<double>(px.width, px.height)};
  for (std::size_t i = 0; i < raw.samples.size(); ++i)
    raw.samples[i] = static_cast<double>((px.data[2 * i] << 8) | px.data[2 * i + 1]);
  return raw;
}

void write_depth_png16(const fs::path& path, const Plane<std::uint16_t>& depth) {
  std::vector<std::uint8_t> be(depth.size() * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(depth[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(depth[i] & 0xFF);
  }
  encode_png(path, depth.width(), depth.height(), PNG_COLOR_TYPE_GRAY, 16, be.data(),
             static_cast<std::size_t>(depth.width()) * 2);
}

Plane<float> read_pfm(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const PfmHeader h = parse_pfm_header(bytes, path);
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() - h.data_offset < count * 4) {
    std::ostringstream why;
    why << path.string() << ": malformed PFM at byte " << bytes.size() << ": expected "
        << count * 4 << " sample bytes after offset " << h.data_offset;
    throw Error(ErrorKind::format, why.str());
  }
  const bool swap = h.little_endian != (std::endian::native == std::endian::little);
  Plane<float> out(h.width, h.height);
  const std::uint8_t* src = bytes.data() + h.data_offset;
  for (int row = 0; row < h.height; ++row) {
    const int y = h.height - 1 - row;
    for (int x = 0; x < h.width; ++x) {
      std::uint8_t b[4];
      std::memcpy(b, src, 4);
      src += 4;
      if (swap) {
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
      float v;
      std::memcpy(&v, b, 4);
      out(x, y) = v;
    }
  }
  return out;
}

void write_pfm(const fs::path& path, const Plane<float>& values) {
  std::ostringstream header;
  header << "Pf\n" << values.width() << " " << values.height() << "\n-1.0\n";
  std::string text = header.str();
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.reserve(bytes.size() + values.size() * 4);
  for (int y = values.height() - 1; y >= 0; --y)
    for (int x = 0; x < values.width(); ++x) {
      std::uint8_t b[4];
      const float v = values(x, y);
      std::memcpy(b, &v, 4);
      if constexpr (std::endian::native == std::endian::big) {
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
      bytes.insert(bytes.end(), b, b + 4);
    }
  FilePtr f = open_file(path, "wb");
  if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
    throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::pair<int, int> read_dimensions(const fs::path& path) {
  if (path.extension() == ".pfm") {
    FilePtr f = open_file(path, "rb");
    std::vector<std::uint8_t> head(256);
    head.resize(std::fread(head.data(), 1, head.size(), f.get()));
    const PfmHeader h = parse_pfm_header(head, path);
    return {h.width, h.height};
  }
  FilePtr f = open_file(path, "rb");
  std::uint8_t head[24] = {};
  if (std::fread(head, 1, 24, f.get()) != 24 || png_sig_cmp(head, 0, 8) != 0)
    throw Error(ErrorKind::format, path.string() + ": not a PNG file");
  auto be32 = [&](int at) {
    return (head[at] << 24) | (head[at + 1] << 16) | (head[at + 2] << 8) | head[at + 3];
  };
  return {be32(16), be32(20)};
}

// --- sequences ---

std::string SequenceRef::pattern() const {
  std::ostringstream p;
  p << prefix << "%0" << digits << "d." << extension;
  return p.str();
}

std::string SequenceRef::filename(std::size_t index) const {
  std::string number = std::to_string(index);
  if (static_cast<int>(number.size()) < digits)
    number.insert(0, static_cast<std::size_t>(digits) - number.size(), '0');
  return prefix + number + "." + extension;
}

std::string frame_filename(std::size_t index, const std::string& extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.", index);
  return buf + extension;
}

SequenceRef discover_sequence(const fs::path& directory, const std::string& extension) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec))
    throw Error(ErrorKind::io, "sequence directory not found: " + directory.string());

  const std::regex numbered("^(.*?)([0-9]+)\\." + extension + "$");
  std::map<std::size_t, std::string> by_index;
  std::string prefix;
  int digits = -1;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, numbered)) continue;
    const int width = static_cast<int>(m[2].length());
    if (digits < 0) {
      prefix = m[1];
      digits = width;
    } else if (m[1] != prefix || width != digits) {
      throw Error(ErrorKind::format, directory.string() + ": mixed frame naming ('" + name +
                                         "' vs pattern " + prefix + "%0" +
                                         std::to_string(digits) + "d." + extension + ")");
    }
    by_index.emplace(std::stoull(m[2]), name);
  }
  if (by_index.empty())
    throw Error(ErrorKind::io, directory.string() + ": no numbered ." + extension + " files");

  std::size_t expected = 0;
  for (const auto& [index, name] : by_index) {
    if (index != expected)
      throw Error(ErrorKind::missing_frame, directory.string() + ": missing frame at index " +
                                                std::to_string(expected));
    ++expected;
  }

  SequenceRef ref;
  ref.directory = directory;
  ref.prefix = prefix;
  ref.digits = digits;
  ref.extension = extension;
  ref.count = by_index.size();
  std::tie(ref.width, ref.height) = read_dimensions(ref.path(0));
  return ref;
}

RgbFrame load_rgb_frame(const SequenceRef& ref, std::size_t index) {
  const fs::path p = ref.path(index);
  RgbFrame frame = read_rgb_png(p);
  expect_dims(p, frame.width(), frame.height(), ref.width, ref.height);
  return frame;
}

RawDepth load_depth_frame(const SequenceRef& ref, std::size_t index, DepthEncoding encoding) {
  const fs::path p = ref.path(index);
  RawDepth raw;
  if (encoding == DepthEncoding::png16) {
    raw = read_depth_png16(p);
  } else {
    const Plane<float> values = read_pfm(p);
    raw.samples = Plane<double>(values.width(), values.height());
    for (std::size_t i = 0; i < values.size(); ++i) raw.samples[i] = values[i];
  }
  expect_dims(p, raw.samples.width(), raw.samples.height(), ref.width, ref.height);
  return raw;
}

Mask load_mask_frame(const SequenceRef& ref, std::size_t index) {
  const fs::path p = ref.path(index);
  Mask mask = read_mask_png(p);
  expect_dims(p, mask.width(), mask.height(), ref.width, ref.height);
  return mask;
}

Plane<float> load_pfm_frame(const SequenceRef& ref, std::size_t index) {
  const fs::path p = ref.path(index);
  Plane<float> values = read_pfm(p);
  expect_dims(p, values.width(), values.height(), ref.width, ref.height);
  return values;
}

std::vector<RgbFrame> load_rgb_sequence(const SequenceRef& ref) {
  std::vector<RgbFrame> frames;
  frames.reserve(ref.count);
  for (std::size_t i = 0; i < ref.count; ++i) frames.push_back(load_rgb_frame(ref, i));
  return frames;
}

std::vector<RawDepth> load_depth_sequence(const SequenceRef& ref, DepthEncoding encoding) {
  std::vector<RawDepth> frames;
  frames.reserve(ref.count);
  for (std::size_t i = 0; i < ref.count; ++i)
    frames.push_back(load_depth_frame(ref, i, encoding));
  return frames;
}

std::string to_string(DepthEncoding encoding) {
  return encoding == DepthEncoding::png16 ? "png16" : "pfm";
}

DepthEncoding parse_depth_encoding(const std::string& text) {
  if (text == "png16") return DepthEncoding::png16;
  if (text == "pfm") return DepthEncoding::pfm;
  throw Error(ErrorKind::invalid_argument, "unknown depth encoding '" + text + "'");
}

std::string depth_extension(DepthEncoding encoding) {
  return encoding == DepthEncoding::png16 ? "png" : "pfm";
}

// --- output trees ---

void prepare_output_root(const fs::path& out_root, bool force) {
  std::error_code ec;
  if (fs::exists(out_root, ec)) {
    if (!fs::is_directory(out_root, ec))
      throw Error(ErrorKind::io, out_root.string() + " exists and is not a directory");
    if (!fs::is_empty(out_root, ec)) {
      if (!force)
        throw Error(ErrorKind::output_exists,
                    out_root.string() + " is not empty (pass --force to overwrite)");
      for (const auto& entry : fs::directory_iterator(out_root)) fs::remove_all(entry.path());
    }
    return;
  }
  fs::create_directories(out_root, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + out_root.string() + ": " + ec.message());
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace stereogen

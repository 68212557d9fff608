#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stereogen/cloud.hpp"
#include "stereogen/image.hpp"

namespace stereogen {

namespace fs = std::filesystem;

enum class DepthEncoding { png16, pfm };

// --- single files -----------------------------------------------------------

/// Any 8-bit or 16-bit PNG, converted to 8-bit RGB (alpha dropped, gray expanded).
RgbFrame read_rgb_png(const fs::path& path);
void write_rgb_png(const fs::path& path, const RgbFrame& frame);

/// 8-bit single-channel PNG. Nonzero samples are holes on read.
Mask read_mask_png(const fs::path& path);
void write_mask_png(const fs::path& path, const Mask& mask);

/// 16-bit single-channel PNG, samples returned as raw integers.
RawDepth read_depth_png16(const fs::path& path);
void write_depth_png16(const fs::path& path, const Plane<std::uint16_t>& depth);

/// Single-channel portable float map ("Pf"). Rows are stored bottom-to-top; a
/// negative scale means little-endian samples.
Plane<float> read_pfm(const fs::path& path);
/// Writes little-endian (scale -1.0).
void write_pfm(const fs::path& path, const Plane<float>& values);

/// Width and height from a PNG or PFM header without decoding pixels.
std::pair<int, int> read_dimensions(const fs::path& path);

// --- sequences --------------------------------------------------------------

/// Numbered frames in one directory: <prefix><zero-padded index>.<extension>,
/// contiguous from 0.
struct SequenceRef {
  fs::path directory;
  std::string prefix;
  int digits = 6;
  std::string extension;  // without the dot
  std::size_t count = 0;
  int width = 0;
  int height = 0;

  /// printf-style name pattern, e.g. "frame_%06d.png".
  std::string pattern() const;
  std::string filename(std::size_t index) const;
  fs::path path(std::size_t index) const { return directory / filename(index); }
};

/// Canonical output name: frame_%06d.<extension>.
std::string frame_filename(std::size_t index, const std::string& extension = "png");

/// Scans `directory` for numbered files with the given extension.
/// Throws missing_frame on a numbering gap, format on mixed naming, io when
/// the directory is absent or holds no matching file.
SequenceRef discover_sequence(const fs::path& directory, const std::string& extension);

/// Frame `index` of the sequence; shape error if it differs from ref's dimensions.
RgbFrame load_rgb_frame(const SequenceRef& ref, std::size_t index);
RawDepth load_depth_frame(const SequenceRef& ref, std::size_t index, DepthEncoding encoding);
Mask load_mask_frame(const SequenceRef& ref, std::size_t index);
Plane<float> load_pfm_frame(const SequenceRef& ref, std::size_t index);

std::vector<RgbFrame> load_rgb_sequence(const SequenceRef& ref);
std::vector<RawDepth> load_depth_sequence(const SequenceRef& ref, DepthEncoding encoding);

std::string to_string(DepthEncoding encoding);
DepthEncoding parse_depth_encoding(const std::string& text);
std::string depth_extension(DepthEncoding encoding);

// --- output trees -----------------------------------------------------------

/// Creates `out_root`, refusing (output_exists) when it already holds entries
/// unless `force`, in which case its contents are removed first.
void prepare_output_root(const fs::path& out_root, bool force);

/// Reads a whole file into memory.
std::vector<std::uint8_t> read_file_bytes(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace stereogen

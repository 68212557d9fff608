#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stereogen/image.hpp"
#include "stereogen/render.hpp"

namespace stereogen {

enum class FillMethod {
  /// Copy the farther of the nearest covered pixels to the left and right.
  background_extrapolate,
  /// Copy the nearest covered pixel in the row regardless of depth.
  nearest_valid,
};

struct FillPolicy {
  FillMethod method = FillMethod::background_extrapolate;
  Rgb fallback_color{0, 0, 0};
};

std::string to_string(FillMethod method);
FillMethod parse_fill_method(const std::string& text);

/// Fills every masked pixel of `view`; covered pixels are copied unchanged.
///
/// Each hole takes the color of a covered pixel in its own row: for
/// background_extrapolate the one (of the nearest on either side) with the
/// larger z-buffer depth, left on equal depth. A row with no covered pixel
/// takes the covered pixel nearest in raster order (earlier on a tie). A view
/// with no covered pixel at all becomes `fallback_color`.
RgbFrame fill_background(const RenderedView& view, const FillPolicy& policy);

/// Runs an external inpainting command once over a whole sequence.
///
/// `command_template` must contain {frames}, {masks} and {out}; they are
/// replaced with shell-quoted directory paths and the result is run through
/// /bin/sh with the caller's environment. `output_dir` must be empty or absent.
/// The provider must exit 0 and write one identically named, identically sized
/// frame per input into `output_dir`.
///
/// Throws provider_failure (nonzero exit, message carries the tail of the
/// provider's combined output) or provider_contract (missing or mis-sized
/// outputs). Nothing is read back from `output_dir` on failure.
std::vector<RgbFrame> external_inpaint(const std::filesystem::path& frames_dir,
                                       const std::filesystem::path& masks_dir,
                                       const std::string& command_template,
                                       const std::filesystem::path& output_dir);

/// Placeholder substitution used by external_inpaint, exposed for testing.
std::string expand_command(const std::string& command_template,
                           const std::filesystem::path& frames_dir,
                           const std::filesystem::path& masks_dir,
                           const std::filesystem::path& output_dir);

}  // namespace stereogen

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stereogen/image.hpp"

namespace stereogen {

/// Serialized job configuration. Keys mirror the command-line flags one to
/// one (`depth_scale` <-> `--depth-scale`); absent keys take defaults when the
/// job is resolved. Parsing is strict: unknown keys, wrong types and unknown
/// enum values are manifest errors.
struct JobManifest {
  static constexpr int kVersion = 1;

  int version = kVersion;
  std::optional<std::string> frames;
  std::optional<std::string> depths;
  std::optional<std::string> depth_encoding;  // png16 | pfm
  std::optional<std::string> depth_mode;      // metric | inverse
  std::optional<double> depth_scale;
  std::optional<double> depth_shift;
  std::optional<double> fx;
  std::optional<double> fy;
  std::optional<double> cx;
  std::optional<double> cy;
  std::optional<double> baseline;
  std::optional<double> toe_in;
  std::optional<std::string> footprint;  // nearest | bilinear2x2
  std::optional<int> dilate;
  std::optional<std::string> fill;         // builtin | external
  std::optional<std::string> fill_cmd;
  std::optional<std::string> fill_policy;  // background_extrapolate | nearest_valid
  std::optional<Rgb> fallback_color;
  std::optional<Rgb> hole_color;
  std::optional<std::string> layout;  // sbs | tb | anaglyph | separate
  std::optional<std::string> out;
  std::optional<bool> force;
  std::optional<int> workers;

  static JobManifest parse(const nlohmann::json& doc);
  static JobManifest parse_text(const std::string& text);
  static JobManifest load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  /// Canonical text: sorted keys, two-space indent, trailing newline.
  std::string serialize() const;

  /// Copies every field set in `overrides` over this one.
  void merge(const JobManifest& overrides);

  friend bool operator==(const JobManifest&, const JobManifest&) = default;
};

}  // namespace stereogen

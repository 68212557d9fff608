#include "stereogen/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "stereogen/error.hpp"
#include "stereogen/layout.hpp"

namespace stereogen {

std::string to_string(OutputLayout layout) {
  switch (layout) {
    case OutputLayout::side_by_side: return "sbs";
    case OutputLayout::top_bottom: return "tb";
    case OutputLayout::anaglyph_red_cyan: return "anaglyph";
    case OutputLayout::separate: return "separate";
  }
  return "sbs";
}

OutputLayout parse_layout(const std::string& text) {
  if (text == "sbs" || text == "side_by_side") return OutputLayout::side_by_side;
  if (text == "tb" || text == "top_bottom") return OutputLayout::top_bottom;
  if (text == "anaglyph" || text == "anaglyph_red_cyan") return OutputLayout::anaglyph_red_cyan;
  if (text == "separate") return OutputLayout::separate;
  throw Error(ErrorKind::invalid_argument, "unknown layout '" + text + "'");
}

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "version", "frames", "depths", "depth_encoding", "depth_mode", "depth_scale",
      "depth_shift", "fx", "fy", "cx", "cy", "baseline", "toe_in", "footprint", "dilate",
      "fill", "fill_cmd", "fill_policy", "fallback_color", "hole_color", "layout", "out",
      "force", "workers"};
  return keys;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::manifest, "manifest key '" + key + "': " + what);
}

void get_string(const json& doc, const char* key, std::optional<std::string>& dst,
                std::initializer_list<const char*> allowed = {}) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_string()) bad(key, "expected a string");
  std::string s = v.get<std::string>();
  if (allowed.size() != 0) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || s == a;
    if (!ok) {
      std::string options;
      for (const char* a : allowed) options += std::string(options.empty() ? "" : ", ") + a;
      bad(key, "'" + s + "' is not one of " + options);
    }
  }
  dst = std::move(s);
}

void get_number(const json& doc, const char* key, std::optional<double>& dst) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  dst = v.get<double>();
}

void get_int(const json& doc, const char* key, std::optional<int>& dst) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) bad(key, "expected an integer");
  dst = v.get<int>();
}

void get_color(const json& doc, const char* key, std::optional<Rgb>& dst) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_array() || v.size() != 3) bad(key, "expected [r, g, b]");
  Rgb c;
  std::uint8_t* ch[3] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255)
      bad(key, "channels must be integers in [0, 255]");
    *ch[i] = static_cast<std::uint8_t>(v[i].get<int>());
  }
  dst = c;
}

template <typename T>
void put(json& doc, const char* key, const std::optional<T>& v) {
  if (v) doc[key] = *v;
}

void put_color(json& doc, const char* key, const std::optional<Rgb>& v) {
  if (v) doc[key] = json::array({v->r, v->g, v->b});
}

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

}  // namespace

JobManifest JobManifest::parse(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::manifest, "manifest must be an object");
  for (const auto& [key, value] : doc.items())
    if (!known_keys().count(key)) throw Error(ErrorKind::manifest, "unknown manifest key '" + key + "'");
  if (!doc.contains("version")) throw Error(ErrorKind::manifest, "manifest lacks 'version'");
  if (!doc.at("version").is_number_integer() || doc.at("version").get<int>() != kVersion)
    bad("version", "unsupported version (expected " + std::to_string(kVersion) + ")");

  JobManifest m;
  get_string(doc, "frames", m.frames);
  get_string(doc, "depths", m.depths);
  get_string(doc, "depth_encoding", m.depth_encoding, {"png16", "pfm"});
  get_string(doc, "depth_mode", m.depth_mode, {"metric", "inverse"});
  get_number(doc, "depth_scale", m.depth_scale);
  get_number(doc, "depth_shift", m.depth_shift);
  get_number(doc, "fx", m.fx);
  get_number(doc, "fy", m.fy);
  get_number(doc, "cx", m.cx);
  get_number(doc, "cy", m.cy);
  get_number(doc, "baseline", m.baseline);
  get_number(doc, "toe_in", m.toe_in);
  get_string(doc, "footprint", m.footprint, {"nearest", "bilinear2x2"});
  get_int(doc, "dilate", m.dilate);
  get_string(doc, "fill", m.fill, {"builtin", "external"});
  get_string(doc, "fill_cmd", m.fill_cmd);
  get_string(doc, "fill_policy", m.fill_policy, {"background_extrapolate", "nearest_valid"});
  get_color(doc, "fallback_color", m.fallback_color);
  get_color(doc, "hole_color", m.hole_color);
  get_string(doc, "layout", m.layout,
             {"sbs", "tb", "anaglyph", "separate", "side_by_side", "top_bottom",
              "anaglyph_red_cyan"});
  get_string(doc, "out", m.out);
  if (doc.contains("force")) {
    if (!doc.at("force").is_boolean()) bad("force", "expected true or false");
    m.force = doc.at("force").get<bool>();
  }
  get_int(doc, "workers", m.workers);
  if (m.dilate && *m.dilate < 0) bad("dilate", "must be >= 0");
  if (m.workers && *m.workers < 1) bad("workers", "must be >= 1");
  return m;
}

JobManifest JobManifest::parse_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::manifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  return parse(doc);
}

JobManifest JobManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read manifest " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str());
}

json JobManifest::to_json() const {
  json doc = json::object();
  doc["version"] = version;
  put(doc, "frames", frames);
  put(doc, "depths", depths);
  put(doc, "depth_encoding", depth_encoding);
  put(doc, "depth_mode", depth_mode);
  put(doc, "depth_scale", depth_scale);
  put(doc, "depth_shift", depth_shift);
  put(doc, "fx", fx);
  put(doc, "fy", fy);
  put(doc, "cx", cx);
  put(doc, "cy", cy);
  put(doc, "baseline", baseline);
  put(doc, "toe_in", toe_in);
  put(doc, "footprint", footprint);
  put(doc, "dilate", dilate);
  put(doc, "fill", fill);
  put(doc, "fill_cmd", fill_cmd);
  put(doc, "fill_policy", fill_policy);
  put_color(doc, "fallback_color", fallback_color);
  put_color(doc, "hole_color", hole_color);
  put(doc, "layout", layout);
  put(doc, "out", out);
  put(doc, "force", force);
  put(doc, "workers", workers);
  return doc;
}

std::string JobManifest::serialize() const { return to_json().dump(2) + "\n"; }

void JobManifest::merge(const JobManifest& o) {
  take(frames, o.frames);
  take(depths, o.depths);
  take(depth_encoding, o.depth_encoding);
  take(depth_mode, o.depth_mode);
  take(depth_scale, o.depth_scale);
  take(depth_shift, o.depth_shift);
  take(fx, o.fx);
  take(fy, o.fy);
  take(cx, o.cx);
  take(cy, o.cy);
  take(baseline, o.baseline);
  take(toe_in, o.toe_in);
  take(footprint, o.footprint);
  take(dilate, o.dilate);
  take(fill, o.fill);
  take(fill_cmd, o.fill_cmd);
  take(fill_policy, o.fill_policy);
  take(fallback_color, o.fallback_color);
  take(hole_color, o.hole_color);
  take(layout, o.layout);
  take(out, o.out);
  take(force, o.force);
  take(workers, o.workers);
}

}  // namespace stereogen

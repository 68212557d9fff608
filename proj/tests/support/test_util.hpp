#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "stereogen/image.hpp"
#include "stereogen/synthscene.hpp"

namespace testutil {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "stereogen");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

stereogen::RgbFrame random_frame(std::mt19937& rng, int w, int h);
stereogen::Mask random_mask(std::mt19937& rng, int w, int h, double hole_probability);

/// Scene whose layers all have integer disparity fx * tx / Z for
/// fx = 500 and |tx| in {0.032, 0.064}: depths are drawn from {1, 2, 4, 8}
/// with the background at 16. No rectangle overlaps another when `disjoint`.
/// Colors are never black.
stereogen::SceneSpec random_scene(std::mt19937& rng, int w, int h, bool disjoint);

/// Square at Z=1 over a plane at Z=4, f=500, principal point at the center.
stereogen::SceneSpec square_over_plane(int w = 160, int h = 120);

/// Writes `count` copies of a scene frame as frames/ (PNG) and depths/ (PFM).
void write_scene_sequence(const stereogen::SceneSpec& spec, const fs::path& root, int count);

bool files_equal(const fs::path& a, const fs::path& b);
/// Every regular file under `a` has a byte-identical twin under `b` and vice versa.
bool trees_equal(const fs::path& a, const fs::path& b);

}  // namespace testutil

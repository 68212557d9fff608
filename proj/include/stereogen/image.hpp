#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace stereogen {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Single-channel row-major raster.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// 8-bit binary mask, 255 = hole, 0 = covered.
using Mask = Plane<std::uint8_t>;

inline constexpr std::uint8_t kMaskHole = 255;
inline constexpr std::uint8_t kMaskCovered = 0;

/// Interleaved 8-bit RGB frame.
class RgbFrame {
 public:
  RgbFrame() = default;
  RgbFrame(int width, int height, Rgb fill = {})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    for (std::size_t i = 0; i < pixel_count(); ++i) set(i, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return data_.size() / 3; }

  Rgb at(std::size_t i) const noexcept {
    return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]};
  }
  Rgb at(int x, int y) const noexcept { return at(index(x, y)); }
  void set(std::size_t i, Rgb c) noexcept {
    data_[3 * i] = c.r;
    data_[3 * i + 1] = c.g;
    data_[3 * i + 2] = c.b;
  }
  void set(int x, int y, Rgb c) noexcept { set(index(x, y), c); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::vector<std::uint8_t>& bytes() noexcept { return data_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }

  friend bool operator==(const RgbFrame&, const RgbFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace stereogen

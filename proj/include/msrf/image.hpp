#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace msrf {

// Planar float image, row-major within each channel plane.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;  // size = width * height * channels

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool empty() const { return data.empty(); }
};

// 4-channel (r, g, b, tau) image with a per-channel validity flag. Channels
// that were never rendered or captured are flagged invalid and left zero.
struct RgbtImage {
  int width = 0;
  int height = 0;
  Image rgb;      // 3 channels
  Image thermal;  // 1 channel
  std::array<bool, 4> channel_valid = {false, false, false, false};

  RgbtImage() = default;
  RgbtImage(int w, int h) : width(w), height(h), rgb(w, h, 3), thermal(w, h, 1) {}

  bool rgb_valid() const {
    return channel_valid[0] && channel_valid[1] && channel_valid[2];
  }
  bool thermal_valid() const { return channel_valid[3]; }
  void set_rgb_valid(bool v) {
    channel_valid[0] = channel_valid[1] = channel_valid[2] = v;
  }
  void set_thermal_valid(bool v) { channel_valid[3] = v; }
};

// 8-bit PNG. Values are clamped to [0,1] and quantized on write.
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

// PFM, little-endian, scanlines bottom-up ("Pf" grayscale / "PF" 3-channel).
void write_pfm(const std::string& path, const Image& image);
Image read_pfm(const std::string& path);

// Box filter by an integer factor; width and height must divide evenly.
Image box_downsample(const Image& image, int factor);

double mean_abs_diff(const Image& a, const Image& b);

}  // namespace msrf

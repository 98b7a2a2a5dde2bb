#include "msrf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "msrf/errors.hpp"

namespace msrf {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize8(float v) {
  float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

bool host_is_little_endian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t*>(&probe) == 1;
}

}  // namespace

void write_png(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("png writer supports 1 or 3 channels, got " +
                  std::to_string(image.channels));
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(image.width) * image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        row[static_cast<size_t>(x) * image.channels + c] =
            quantize8(image.at(x, y, c));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw MissingFile("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng read failed for " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  // Normalize every variant down to 8-bit gray or rgb.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);
  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported png channel count in " + path);
  }

  Image image(static_cast<int>(w), static_cast<int>(h), channels);
  std::vector<uint8_t> row(static_cast<size_t>(w) * channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        image.at(static_cast<int>(x), static_cast<int>(y), c) =
            row[static_cast<size_t>(x) * channels + c] / 255.0f;
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_pfm(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("pfm writer supports 1 or 3 channels, got " +
                  std::to_string(image.channels));
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  // Negative scale marks little-endian payload.
  std::fprintf(fp.get(), "%s\n%d %d\n-1.0\n",
               image.channels == 1 ? "Pf" : "PF", image.width, image.height);
  std::vector<float> row(static_cast<size_t>(image.width) * image.channels);
  for (int y = image.height - 1; y >= 0; --y) {  // bottom-up
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        row[static_cast<size_t>(x) * image.channels + c] = image.at(x, y, c);
      }
    }
    if (!host_is_little_endian()) {
      for (float& v : row) {
        auto* b = reinterpret_cast<uint8_t*>(&v);
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
    }
    if (std::fwrite(row.data(), sizeof(float), row.size(), fp.get()) !=
        row.size()) {
      throw IoError("short write to " + path);
    }
  }
}

Image read_pfm(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw MissingFile("cannot open " + path);
  char magic[3] = {0, 0, 0};
  if (std::fscanf(fp.get(), "%2s", magic) != 1) {
    throw IoError("bad pfm header in " + path);
  }
  int channels = 0;
  if (std::strcmp(magic, "Pf") == 0) channels = 1;
  else if (std::strcmp(magic, "PF") == 0) channels = 3;
  else throw IoError("bad pfm magic in " + path);
  int w = 0, h = 0;
  double scale = 0.0;
  if (std::fscanf(fp.get(), "%d %d %lf", &w, &h, &scale) != 3 || w <= 0 ||
      h <= 0 || scale == 0.0) {
    throw IoError("bad pfm header in " + path);
  }
  std::fgetc(fp.get());  // single whitespace after the scale line

  const bool file_little = scale < 0.0;
  Image image(w, h, channels);
  std::vector<float> row(static_cast<size_t>(w) * channels);
  for (int y = h - 1; y >= 0; --y) {
    if (std::fread(row.data(), sizeof(float), row.size(), fp.get()) !=
        row.size()) {
      throw IoError("short read from " + path);
    }
    if (file_little != host_is_little_endian()) {
      for (float& v : row) {
        auto* b = reinterpret_cast<uint8_t*>(&v);
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
    }
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        image.at(x, y, c) = row[static_cast<size_t>(x) * channels + c];
      }
    }
  }
  return image;
}

Image box_downsample(const Image& image, int factor) {
  if (factor <= 0 || image.width % factor != 0 || image.height % factor != 0) {
    throw ResolutionMismatch("downsample factor " + std::to_string(factor) +
                             " does not divide " + std::to_string(image.width) +
                             "x" + std::to_string(image.height));
  }
  Image out(image.width / factor, image.height / factor, image.channels);
  const float inv = 1.0f / (factor * factor);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        float sum = 0.0f;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            sum += image.at(x * factor + dx, y * factor + dy, c);
          }
        }
        out.at(x, y, c) = sum * inv;
      }
    }
  }
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ShapeMismatch("mean_abs_diff shapes differ");
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  }
  return a.data.empty() ? 0.0 : sum / static_cast<double>(a.data.size());
}

}  // namespace msrf

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "schemnet/geometry.hpp"

namespace schemnet {

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major luminance

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Foreground mask; 1 = ink regardless of the source polarity.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  // Out-of-bounds reads are background.
  bool test(int x, int y) const { return in_bounds(x, y) && get(x, y); }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t popcount() const;
  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

enum class Connectivity { Four = 4, Eight = 8 };

struct RegionStats {
  long area = 0;
  BBox bbox;
  Point representative;  // first pixel in row-major order
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background
  int region_count = 0;
  std::vector<RegionStats> regions;  // regions[i] describes label i+1

  std::int32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  const RegionStats& stats(int label) const { return regions[static_cast<std::size_t>(label) - 1]; }
};

// Decoding / encoding
GrayImage load_image(std::span<const std::uint8_t> bytes);
GrayImage load_image_file(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Threshold that maximizes between-class variance; class 0 is values < T.
int otsu_threshold(std::span<const std::uint64_t, 256> histogram);
BinaryImage binarize(const GrayImage& img);
BinaryImage close_gaps(const BinaryImage& img, int radius);
BinaryImage dilate(const BinaryImage& img, int radius);
LabelMap label_components(const BinaryImage& img, Connectivity conn = Connectivity::Eight);

GrayImage to_gray(const BinaryImage& img);
// Debug rendering of a label map: background white, regions in distinct gray levels.
GrayImage colorize_labels(const LabelMap& labels);

BinaryImage flip_horizontal(const BinaryImage& img);
GrayImage flip_horizontal(const GrayImage& img);
GrayImage upscale(const GrayImage& img, int factor);
// Largest k in [2, max_factor] such that the image is constant on every aligned k×k block, else 1.
int detect_block_scale(const BinaryImage& img, int max_factor = 4);
BinaryImage downscale(const BinaryImage& img, int factor);

}  // namespace schemnet

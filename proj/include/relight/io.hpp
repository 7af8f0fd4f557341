#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relight/geometry.hpp"
#include "relight/shading.hpp"

namespace relight {

/// Raw contents of a portable float map, rows top to bottom.
struct PfmData {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> values;  // channel-interleaved
};

/// Reads "Pf" (1 channel) or "PF" (3 channels). The sign of the scale line selects the
/// byte order (negative = little-endian). Rejects truncated payloads and non-finite values.
PfmData read_pfm(const std::string& path);

/// Writes little-endian, rows bottom to top as the format requires.
void write_pfm(const std::string& path, const PfmData& data);

/// Single-channel PFM as a fully valid depth map.
DepthMap read_depth_pfm(const std::string& path, double pixel_spacing);
void write_depth_pfm(const std::string& path, const DepthMap& depth);

ImagePlane read_image_pfm(const std::string& path);
void write_image_pfm(const std::string& path, const ImagePlane& image);

/// Transfer applied before 8-bit quantization. Without a gamma the sRGB curve is used.
struct PngEncoding {
  std::optional<double> gamma;

  static PngEncoding srgb() { return {}; }
  static PngEncoding linear() { return {1.0}; }
};

/// sRGB encoding of a linear value in [0, 1].
double srgb_encode(double linear);

/// Encodes, clamps to [0, 1] and rounds to 8 bits.
std::vector<std::uint8_t> quantize_8bit(const ImagePlane& image, const PngEncoding& enc);

/// 8-bit gray or RGB PNG. No time or text chunks, so output depends only on the pixels.
void write_png(const std::string& path, const ImagePlane& image, const PngEncoding& enc = {});

}  // namespace relight

#include "relight/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "relight/error.hpp"

namespace relight {

namespace {

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct HeaderCursor {
  const std::vector<char>& bytes;
  const std::string& path;
  std::size_t pos = 0;

  std::string token(const char* what) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t begin = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (begin == pos) throw DataError(path + ": malformed PFM header, missing " + what);
    return std::string(bytes.data() + begin, pos - begin);
  }
};

int parse_dimension(const std::string& text, const std::string& path, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 1) throw DataError(path + ": malformed PFM header, bad " + what + " '" + text + "'");
  return v;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

PfmData read_pfm(const std::string& path) {
  const std::vector<char> bytes = slurp(path);
  HeaderCursor cur{bytes, path};
  const std::string magic = cur.token("type");
  PfmData out;
  if (magic == "Pf") {
    out.channels = 1;
  } else if (magic == "PF") {
    out.channels = 3;
  } else {
    throw DataError(path + ": malformed PFM header, unknown type '" + magic + "'");
  }
  out.width = parse_dimension(cur.token("width"), path, "width");
  out.height = parse_dimension(cur.token("height"), path, "height");
  const std::string scale_text = cur.token("scale");
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_text, &used);
    if (used != scale_text.size()) scale = 0.0;
  } catch (const std::exception&) {
    scale = 0.0;
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw DataError(path + ": malformed PFM header, bad scale '" + scale_text + "'");
  // Exactly one whitespace byte separates the header from the payload.
  if (cur.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[cur.pos]))) {
    throw DataError(path + ": truncated PFM payload");
  }
  ++cur.pos;

  const std::size_t count =
      static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height) * static_cast<std::size_t>(out.channels);
  if (bytes.size() - cur.pos < count * 4) {
    throw DataError(path + ": truncated PFM payload, expected " + std::to_string(count * 4) + " bytes, found " +
                    std::to_string(bytes.size() - cur.pos));
  }
  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  out.values.resize(count);
  const std::size_t row_len = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.channels);
  for (int fr = 0; fr < out.height; ++fr) {
    const std::size_t dst_row = static_cast<std::size_t>(out.height - 1 - fr);
    for (std::size_t k = 0; k < row_len; ++k) {
      std::uint32_t raw;
      std::memcpy(&raw, bytes.data() + cur.pos + (static_cast<std::size_t>(fr) * row_len + k) * 4, 4);
      if (swap) raw = byteswap32(raw);
      const float v = std::bit_cast<float>(raw);
      if (!std::isfinite(v)) {
        throw DataError(path + ": non-finite value at row " + std::to_string(dst_row) + ", column " +
                        std::to_string(k / static_cast<std::size_t>(out.channels)));
      }
      out.values[dst_row * row_len + k] = v;
    }
  }
  return out;
}

void write_pfm(const std::string& path, const PfmData& data) {
  if (data.channels != 1 && data.channels != 3) throw DataError("PFM supports 1 or 3 channels");
  const std::size_t row_len = static_cast<std::size_t>(data.width) * static_cast<std::size_t>(data.channels);
  if (data.values.size() != row_len * static_cast<std::size_t>(data.height)) {
    throw DataError("PFM value count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << (data.channels == 1 ? "Pf" : "PF") << '\n' << data.width << ' ' << data.height << "\n-1\n";
  std::vector<char> payload(data.values.size() * 4);
  std::size_t o = 0;
  for (int r = data.height - 1; r >= 0; --r) {
    for (std::size_t k = 0; k < row_len; ++k) {
      std::uint32_t raw = std::bit_cast<std::uint32_t>(data.values[static_cast<std::size_t>(r) * row_len + k]);
      if constexpr (std::endian::native == std::endian::big) raw = byteswap32(raw);
      std::memcpy(payload.data() + o, &raw, 4);
      o += 4;
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

DepthMap read_depth_pfm(const std::string& path, double pixel_spacing) {
  PfmData d = read_pfm(path);
  if (d.channels != 1) throw DataError(path + ": expected 1-channel PFM for a depth map");
  return DepthMap(d.width, d.height, pixel_spacing, std::vector<double>(d.values.begin(), d.values.end()));
}

void write_depth_pfm(const std::string& path, const DepthMap& depth) {
  PfmData d{depth.width(), depth.height(), 1, {}};
  d.values.assign(depth.values().begin(), depth.values().end());
  write_pfm(path, d);
}

ImagePlane read_image_pfm(const std::string& path) {
  PfmData d = read_pfm(path);
  return ImagePlane(d.width, d.height, d.channels, std::vector<double>(d.values.begin(), d.values.end()));
}

void write_image_pfm(const std::string& path, const ImagePlane& image) {
  PfmData d{image.width(), image.height(), image.channels(), {}};
  d.values.assign(image.values().begin(), image.values().end());
  write_pfm(path, d);
}

double srgb_encode(double linear) {
  return linear <= 0.0031308 ? 12.92 * linear : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

std::vector<std::uint8_t> quantize_8bit(const ImagePlane& image, const PngEncoding& enc) {
  if (enc.gamma && !(*enc.gamma > 0.0)) throw UsageError("gamma must be > 0");
  std::vector<std::uint8_t> out(image.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = std::clamp(image.values()[i], 0.0, 1.0);
    v = enc.gamma ? std::pow(v, 1.0 / *enc.gamma) : srgb_encode(v);
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  return out;
}

void write_png(const std::string& path, const ImagePlane& image, const PngEncoding& enc) {
  const std::vector<std::uint8_t> pixels = quantize_8bit(image, enc);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DataError("cannot write PNG '" + path + "': " + msg);
  }
}

}  // namespace relight

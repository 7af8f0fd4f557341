#include <gtest/gtest.h>

#include <png.h>

#include <bit>
#include <cstring>
#include <random>

#include "relight/error.hpp"
#include "relight/io.hpp"
#include "../support/temp_dir.hpp"

namespace relight {
namespace {

using testing::TempDir;

std::string float_bytes(float f, bool little) {
  std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  std::string s(4, '\0');
  for (int k = 0; k < 4; ++k) s[little ? k : 3 - k] = static_cast<char>((u >> (8 * k)) & 0xff);
  return s;
}

// Decodes an 8-bit PNG with libpng's simplified reader, independent of the writer path.
std::vector<std::uint8_t> decode_png(const std::string& path, int& w, int& h, int& channels) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  EXPECT_TRUE(png_image_begin_read_from_file(&img, path.c_str()));
  channels = PNG_IMAGE_SAMPLE_CHANNELS(img.format);
  w = static_cast<int>(img.width);
  h = static_cast<int>(img.height);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  EXPECT_TRUE(png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr));
  return buf;
}

TEST(Pfm, RandomDepthRoundTripIsBitwise) {
  TempDir dir;
  std::mt19937 rng(17);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  std::vector<double> d(17 * 9);
  for (double& v : d) v = u(rng);  // float-representable
  const DepthMap depth(17, 9, 0.5, d);
  write_depth_pfm(dir.file("d.pfm"), depth);
  const DepthMap back = read_depth_pfm(dir.file("d.pfm"), 0.5);
  ASSERT_EQ(back.width(), 17);
  ASSERT_EQ(back.height(), 9);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(back.values()[i]), std::bit_cast<std::uint64_t>(d[i]));
  // Second write reproduces the same bytes.
  write_depth_pfm(dir.file("e.pfm"), back);
  EXPECT_EQ(testing::read_bytes(dir.file("d.pfm")), testing::read_bytes(dir.file("e.pfm")));
}

TEST(Pfm, RowsAreStoredBottomToTop) {
  TempDir dir;
  // 1 x 2, little-endian: first stored row is the bottom one.
  testing::write_bytes(dir.file("a.pfm"), "Pf\n1 2\n-1.0\n" + float_bytes(1.0f, true) + float_bytes(2.0f, true));
  const PfmData p = read_pfm(dir.file("a.pfm"));
  EXPECT_EQ(p.values, (std::vector<float>{2.0f, 1.0f}));
}

TEST(Pfm, ScaleSignSelectsByteOrder) {
  TempDir dir;
  testing::write_bytes(dir.file("le.pfm"), "Pf\n2 1\n-1.0\n" + float_bytes(0.25f, true) + float_bytes(-3.5f, true));
  testing::write_bytes(dir.file("be.pfm"), "Pf\n2 1\n1.0\n" + float_bytes(0.25f, false) + float_bytes(-3.5f, false));
  EXPECT_EQ(read_pfm(dir.file("le.pfm")).values, (std::vector<float>{0.25f, -3.5f}));
  EXPECT_EQ(read_pfm(dir.file("be.pfm")).values, (std::vector<float>{0.25f, -3.5f}));
}

TEST(Pfm, ThreeChannelFileIsNotADepthMap) {
  TempDir dir;
  write_image_pfm(dir.file("rgb.pfm"), ImagePlane::filled(3, 2, 3, 0.5));
  try {
    read_depth_pfm(dir.file("rgb.pfm"), 1.0);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 1-channel"), std::string::npos);
  }
  EXPECT_EQ(read_image_pfm(dir.file("rgb.pfm")).channels(), 3);
}

TEST(Pfm, MalformedInputsAreDescribed) {
  TempDir dir;
  auto message = [&](const std::string& bytes) {
    testing::write_bytes(dir.file("bad.pfm"), bytes);
    try {
      read_pfm(dir.file("bad.pfm"));
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("P6\n1 1\n-1\n").find("malformed PFM header"), std::string::npos);
  EXPECT_NE(message("Pf\n0 1\n-1\n").find("malformed PFM header"), std::string::npos);
  EXPECT_NE(message("Pf\n2 2\n-1.0\n" + float_bytes(1.0f, true)).find("truncated"), std::string::npos);
  const std::string nan = message("Pf\n1 1\n-1.0\n" + float_bytes(std::numeric_limits<float>::quiet_NaN(), true));
  EXPECT_NE(nan.find("non-finite"), std::string::npos);
  EXPECT_THROW(read_pfm(dir.file("missing.pfm")), DataError);
}

TEST(Png, ConstantImagesAndSrgbMidGray) {
  TempDir dir;
  const struct {
    double value;
    int expected;
  } cases[] = {{0.0, 0}, {1.0, 255}, {0.5, 188}, {1.7, 255}, {-0.2, 0}};
  for (const auto& c : cases) {
    write_png(dir.file("g.png"), ImagePlane::filled(4, 3, 1, c.value));
    int w, h, ch;
    const std::vector<std::uint8_t> px = decode_png(dir.file("g.png"), w, h, ch);
    EXPECT_EQ(w, 4);
    EXPECT_EQ(h, 3);
    EXPECT_EQ(ch, 1);
    for (auto v : px) EXPECT_EQ(v, c.expected) << "value " << c.value;
  }
  EXPECT_EQ(quantize_8bit(ImagePlane::filled(1, 1, 1, 0.5), PngEncoding::linear())[0], 128);
}

TEST(Png, SrgbCurveMatchesDefinition) {
  EXPECT_EQ(srgb_encode(0.0), 0.0);
  EXPECT_NEAR(srgb_encode(0.002), 12.92 * 0.002, 1e-15);
  EXPECT_NEAR(srgb_encode(0.5), 1.055 * std::pow(0.5, 1.0 / 2.4) - 0.055, 1e-15);
  EXPECT_NEAR(srgb_encode(1.0), 1.0, 1e-15);
}

TEST(Png, RgbChannelOrderAndDeterminism) {
  TempDir dir;
  const ImagePlane img(2, 1, 3, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0});
  write_png(dir.file("a.png"), img);
  write_png(dir.file("b.png"), img);
  EXPECT_EQ(testing::read_bytes(dir.file("a.png")), testing::read_bytes(dir.file("b.png")));
  int w, h, ch;
  const std::vector<std::uint8_t> px = decode_png(dir.file("a.png"), w, h, ch);
  ASSERT_EQ(ch, 3);
  EXPECT_EQ(px, (std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255}));
}

}  // namespace
}  // namespace relight

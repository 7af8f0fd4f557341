#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relight/geometry.hpp"
#include "relight/parallel.hpp"
#include "relight/shadow.hpp"

namespace relight {

/// H x W x C grid of linear-light values, channel-interleaved, with a validity mask.
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int width, int height, int channels, std::vector<double> values, std::vector<std::uint8_t> valid = {});

  static ImagePlane filled(int width, int height, int channels, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  double at(int row, int col, int ch = 0) const { return values_[offset(row, col, ch)]; }
  double& at(int row, int col, int ch = 0) { return values_[offset(row, col, ch)]; }
  bool valid(std::size_t pixel) const { return valid_[pixel] != 0; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const std::uint8_t> mask() const { return valid_; }

  std::size_t offset(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(ch);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

/// Directional plus ambient lighting.
struct LightingParams {
  LightDirection direction = LightDirection({0.0, 0.0, 1.0});
  double ambient = 0.5;
  double directional = 0.5;

  /// Throws DataError unless both intensities are >= 0 and their sum <= max_total.
  void validate(double max_total = 4.0) const;
};

/// max(0, <n, w>), with zero subgradient at the kink.
inline double lambert(const Vec3& n, const Vec3& w) {
  const double c = dot(n, w);
  return c > 0.0 ? c : 0.0;
}

/// i_a + M i_d lambert. Evaluation order is shared with the recorded pipeline.
inline double shadowed_shading_value(double ambient, double directional, double lambert_term, double mask) {
  return ambient + mask * directional * lambert_term;
}

ImagePlane diffuse_shading(const NormalMap& normals, const LightingParams& light);
ImagePlane shadowed_shading(const NormalMap& normals, const LightingParams& light, const ShadowMask& mask);

/// I = A * s, with single-channel shading broadcast across albedo channels.
/// The result carries the shading's validity mask; invalid pixels are 0.
ImagePlane render(const ImagePlane& albedo, const ImagePlane& shading);

/// Every intermediate of one relighting pass.
struct RenderResult {
  PointGrid points;
  NormalMap normals;
  ShadowMask mask;
  ShadowTrace trace;
  ImagePlane shading;
  ImagePlane image;
};

/// depth -> normals -> shadow mask -> shadowed shading -> image.
RenderResult relight(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                     const ShadowConfig& cfg = {}, const ExecOptions& exec = {});

/// Same as relight() with shadow sample positions taken from a fixed plan.
RenderResult relight_planned(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                             const ShadowConfig& cfg, const SamplePlan& plan);

}  // namespace relight

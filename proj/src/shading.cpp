#include "relight/shading.hpp"

#include <cmath>
#include <string>

#include "relight/error.hpp"

namespace relight {

ImagePlane::ImagePlane(int width, int height, int channels, std::vector<double> values, std::vector<std::uint8_t> valid)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)), valid_(std::move(valid)) {
  if (width < 1 || height < 1) throw DataError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw DataError("image must have 1 or 3 channels, got " + std::to_string(channels));
  if (values_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw DataError("image value count does not match dimensions");
  }
  if (valid_.empty()) valid_.assign(pixel_count(), 1);
  if (valid_.size() != pixel_count()) throw DataError("image mask size does not match dimensions");
}

ImagePlane ImagePlane::filled(int width, int height, int channels, double value) {
  const std::size_t n = static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)) *
                        static_cast<std::size_t>(std::max(channels, 0));
  return ImagePlane(width, height, channels, std::vector<double>(n, value));
}

void LightingParams::validate(double max_total) const {
  if (!(ambient >= 0.0) || !std::isfinite(ambient)) throw DataError("ambient intensity must be >= 0");
  if (!(directional >= 0.0) || !std::isfinite(directional)) throw DataError("directional intensity must be >= 0");
  if (ambient + directional > max_total) {
    throw DataError("ambient + directional intensity exceeds " + std::to_string(max_total));
  }
}

namespace {

ImagePlane shade(const NormalMap& normals, const LightingParams& light, const ShadowMask* mask) {
  light.validate();
  if (mask && (mask->width != normals.width || mask->height != normals.height)) {
    throw DataError("shadow mask dimensions do not match normals");
  }
  std::vector<double> s(normals.normals.size(), 0.0);
  const Vec3& w = light.direction.vec();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!normals.valid[i]) continue;
    const double m = mask ? mask->values[i] : 1.0;
    s[i] = shadowed_shading_value(light.ambient, light.directional, lambert(normals.normals[i], w), m);
  }
  return ImagePlane(normals.width, normals.height, 1, std::move(s), normals.valid);
}

}  // namespace

ImagePlane diffuse_shading(const NormalMap& normals, const LightingParams& light) {
  return shade(normals, light, nullptr);
}

ImagePlane shadowed_shading(const NormalMap& normals, const LightingParams& light, const ShadowMask& mask) {
  return shade(normals, light, &mask);
}

ImagePlane render(const ImagePlane& albedo, const ImagePlane& shading) {
  if (albedo.width() != shading.width() || albedo.height() != shading.height()) {
    throw DataError("albedo is " + std::to_string(albedo.width()) + "x" + std::to_string(albedo.height()) +
                    " but shading is " + std::to_string(shading.width()) + "x" + std::to_string(shading.height()));
  }
  if (shading.channels() != 1) throw DataError("shading must be single-channel");
  const int ch = albedo.channels();
  std::vector<double> out(albedo.values().size(), 0.0);
  std::vector<std::uint8_t> valid(shading.mask().begin(), shading.mask().end());
  for (std::size_t p = 0; p < shading.pixel_count(); ++p) {
    if (!valid[p]) continue;
    const double s = shading.values()[p];
    for (int c = 0; c < ch; ++c) {
      const std::size_t k = p * static_cast<std::size_t>(ch) + static_cast<std::size_t>(c);
      out[k] = albedo.values()[k] * s;
    }
  }
  return ImagePlane(albedo.width(), albedo.height(), ch, std::move(out), std::move(valid));
}

RenderResult relight(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                     const ShadowConfig& cfg, const ExecOptions& exec) {
  RenderResult r;
  r.points = depth_to_points(depth);
  r.normals = compute_normals(r.points);
  r.mask = estimate_shadow_mask(depth, light.direction, cfg, exec, &r.trace);
  r.shading = shadowed_shading(r.normals, light, r.mask);
  r.image = render(albedo, r.shading);
  return r;
}

RenderResult relight_planned(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                             const ShadowConfig& cfg, const SamplePlan& plan) {
  RenderResult r;
  r.points = depth_to_points(depth);
  r.normals = compute_normals(r.points);
  r.mask = estimate_shadow_mask_planned(depth, light.direction, cfg, plan, &r.trace);
  r.shading = shadowed_shading(r.normals, light, r.mask);
  r.image = render(albedo, r.shading);
  return r;
}

}  // namespace relight

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "relight/geometry.hpp"
#include "relight/parallel.hpp"
#include "relight/vec3.hpp"

namespace relight {

/// Unit vector pointing from the surface toward a directional light.
class LightDirection {
 public:
  /// Requires | |w| - 1 | <= 1e-6.
  explicit LightDirection(const Vec3& w);

  /// Normalizes any nonzero finite vector.
  static LightDirection from_vector(const Vec3& v);

  /// Azimuth is measured in the image plane from +x toward +y, elevation from the image
  /// plane toward the camera. (0, 90) is the overhead light (0, 0, 1).
  static LightDirection from_angles(double azimuth_deg, double elevation_deg);

  const Vec3& vec() const { return w_; }
  double azimuth_deg() const;
  double elevation_deg() const;

 private:
  Vec3 w_;
};

enum class OutOfBoundsPolicy {
  Terminate,  // stop walking the ray at the first sample that touches an invalid pixel
  Skip,       // drop that sample and keep walking
};

/// Ray sampling parameters for the soft shadow mask. Unset lengths default to values
/// proportional to the pixel spacing of the depth map being processed.
struct ShadowConfig {
  int samples = 160;
  /// World units skipped along the projected ray before the first sample.
  std::optional<double> start_offset;
  /// Multiplier applied to the minimum ray distance before the visibility sigmoid.
  std::optional<double> distance_scale;
  OutOfBoundsPolicy out_of_bounds = OutOfBoundsPolicy::Terminate;
};

/// Default start offset, in pixel spacings.
inline constexpr double kDefaultStartOffsetPixels = 2.0;
/// Default distance scale times the pixel spacing: visibility reaches 1/2 when the
/// nearest sample is ~0.44 pixel from the shadow ray.
inline constexpr double kDefaultDistanceScalePixels = 4.0;

struct ResolvedShadowConfig {
  int samples;
  double start_offset;
  double distance_scale;
  OutOfBoundsPolicy out_of_bounds;
};

/// Fills defaults for the given pixel spacing and validates samples >= 1,
/// start_offset >= 0 and distance_scale > 0.
ResolvedShadowConfig resolve(const ShadowConfig& cfg, double pixel_spacing);

/// Four-tap bilinear interpolation over a row-major grid.
struct BilinearStencil {
  std::array<std::uint32_t, 4> index{};
  std::array<double, 4> weight{};
};

template <typename Lookup>
double bilinear_eval(const BilinearStencil& s, Lookup&& value_at) {
  return s.weight[0] * value_at(s.index[0]) + s.weight[1] * value_at(s.index[1]) +
         s.weight[2] * value_at(s.index[2]) + s.weight[3] * value_at(s.index[3]);
}

/// Off-grid sample position along a projected shadow ray. Its depth is interpolated
/// from the stencil; the position itself does not depend on depth values.
struct SampleSite {
  double x = 0.0;
  double y = 0.0;
  BilinearStencil stencil;
};

/// Walks projected shadow rays over one grid for a fixed light direction.
class RayPlanner {
 public:
  RayPlanner(int width, int height, double pixel_spacing, std::span<const std::uint8_t> valid,
             const LightDirection& light, const ResolvedShadowConfig& cfg);

  /// True when the light is within 1e-6 of the view axis; every ray is then empty.
  bool degenerate() const { return degenerate_; }

  /// Replaces `out` with the sample sites for the ray leaving pixel (row, col).
  void plan(int row, int col, std::vector<SampleSite>& out) const;

 private:
  int width_;
  int height_;
  double spacing_;
  std::span<const std::uint8_t> valid_;
  ResolvedShadowConfig cfg_;
  PixelBounds bounds_;
  double ux_ = 0.0;
  double uy_ = 0.0;
  bool degenerate_ = false;
};

/// Sentinel distance for rays without samples; visibility maps it to exactly 1.
inline constexpr double kUnoccluded = std::numeric_limits<double>::infinity();

struct RayDistance {
  double distance = kUnoccluded;
  int argmin = -1;
};

/// Surface points along the shadow ray of pixel (row, col). Empty for an overhead light
/// or when the ray leaves the valid bounding box before the start offset.
std::vector<Vec3> sample_ray_points(const PointGrid& points, int row, int col, const LightDirection& light,
                                    const ShadowConfig& cfg = {});

/// min_j |(samples[j] - origin) x light|; ties resolve to the first index.
RayDistance min_ray_distance(const Vec3& origin, std::span<const Vec3> samples, const LightDirection& light);

/// Soft visibility 1 - 4 e^{-d} / (1 + e^{-d})^2 with d = distance_scale * d_min.
double visibility(double d_min, double distance_scale = 1.0);

/// Derivative of visibility() with respect to d_min.
double visibility_slope(double d_min, double distance_scale = 1.0);

struct ShadowMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

/// Per-pixel intermediate results, for diagnostics and branch-stability checks.
struct ShadowTrace {
  std::vector<double> d_min;
  std::vector<int> argmin;
  std::vector<int> sample_count;
};

/// Sample sites for every pixel, stored contiguously.
struct SamplePlan {
  std::vector<std::uint32_t> offsets;  // size = pixel count + 1
  std::vector<SampleSite> sites;

  std::span<const SampleSite> for_pixel(std::size_t i) const {
    return std::span<const SampleSite>(sites).subspan(offsets[i], offsets[i + 1] - offsets[i]);
  }
};

SamplePlan plan_samples(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg = {});

ShadowMask estimate_shadow_mask(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg = {},
                                const ExecOptions& exec = {}, ShadowTrace* trace = nullptr);

/// Evaluates the mask with sample positions taken from `plan` instead of the light.
/// Used to differentiate with the sampling geometry held fixed.
ShadowMask estimate_shadow_mask_planned(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg,
                                        const SamplePlan& plan, ShadowTrace* trace = nullptr);

}  // namespace relight

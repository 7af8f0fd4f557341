#pragma once

#include <cstdint>
#include <vector>

#include "relight/geometry.hpp"
#include "relight/parallel.hpp"
#include "relight/shadow.hpp"

namespace relight {

/// Brute-force hard visibility of the directional light.
struct BinaryVisibility {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> lit;  // 1 = lit; invalid pixels are reported lit
  std::vector<double> hit_t;      // ray parameter of the first hit, +inf when lit
};

inline constexpr double kOracleStartOffset = 1e-4;

/// Marches the 3D ray from every surface point in `steps` uniform increments until it
/// leaves the volume (valid bounding box in x/y, maximum surface height in z). The
/// surface between pixel centres is bilinear. A point counts as shadowed when the ray
/// passes from above to below the surface, or when it already starts below it (the
/// surface at the point faces away from the light).
BinaryVisibility trace_exact(const DepthMap& depth, const LightDirection& light, int steps = 10000,
                             const ExecOptions& exec = {});

/// Fraction of valid pixels, excluding those within `boundary_band` pixels (Chebyshev
/// distance) of an oracle shadow boundary, where (mask < threshold) == !lit.
double compare_mask(const ShadowMask& mask, const BinaryVisibility& vis, const std::vector<std::uint8_t>& valid,
                    double threshold = 0.5, int boundary_band = 2);

}  // namespace relight

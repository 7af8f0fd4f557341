#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relight/geometry.hpp"
#include "relight/parallel.hpp"
#include "relight/shading.hpp"
#include "relight/shadow.hpp"

namespace relight {

struct GateResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Number of representable doubles between a and b (0 when equal).
std::uint64_t ulp_distance(double a, double b);

/// Visibility function: exact zero, the ln 3 value, monotone sweep and sentinel.
GateResult check_visibility_function();

/// Both algebraic forms of shadowed shading agree within `max_ulp` on random tuples.
GateResult check_shading_identity(std::size_t tuples = 1'000'000, std::uint64_t seed = 7, std::uint64_t max_ulp = 4);

/// Thresholded mask against the marching oracle outside a 2-pixel boundary band.
GateResult check_oracle_agreement(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg,
                                  double min_agreement = 0.95, const ExecOptions& exec = {});

/// Dark band behind a unit step under a 45 degree light, 128 x 128 at spacing 1/32.
GateResult check_shadow_length(const ShadowConfig& cfg = {}, const ExecOptions& exec = {});

/// Width in pixels of the mask < threshold run that ends next to column `edge_col`
/// (exclusive) on one row.
int shadow_band_width(const ShadowMask& mask, int row, int edge_col, double threshold = 0.5);

/// Reverse-mode gradients against central differences for `depth_pixels` random
/// pixels, the intensities and the light tangents.
GateResult check_gradients(const DepthMap& depth, const LightingParams& lighting, const ShadowConfig& cfg,
                           std::size_t depth_pixels = 100, std::uint64_t seed = 11);

struct CheckOptions {
  LightingParams lighting{LightDirection::from_angles(0.0, 45.0), 0.5, 0.5};
  ShadowConfig shadow;
  ExecOptions exec;
};

/// Runs every gate above on `depth`.
std::vector<GateResult> run_checks(const DepthMap& depth, const CheckOptions& opts = {});

}  // namespace relight

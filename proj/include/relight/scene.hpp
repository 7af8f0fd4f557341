#pragma once

#include <optional>
#include <string>

#include "relight/geometry.hpp"

namespace relight {

enum class SceneKind { Flat, Step, GaussianBump, NoseRidge, FromFile };

/// Synthetic test geometry. Unless `pixel_spacing` is given the image spans 4 world
/// units along its wider side, centred on the origin.
struct SceneSpec {
  SceneKind kind = SceneKind::Flat;
  int width = 64;
  int height = 64;
  std::optional<double> pixel_spacing;
  double step_height = 1.0;     // step: height of the x >= 0 half
  double bump_amplitude = 0.5;  // gaussian_bump
  double bump_sigma = 0.5;
  std::string path;             // from_file

  double spacing() const;
  void validate() const;
};

/// Parses "kind[:N|WxH][,key=value...]", e.g. "step:128,h=1" or "gaussian_bump:48,sigma=0.4".
/// Keys: h, amp, sigma, spacing. Throws UsageError naming the offending field.
SceneSpec parse_scene(const std::string& text);

/// Builds the depth map of a synthetic scene (not FromFile).
///   flat           depth 1
///   step           height h for x >= 0, 0 otherwise
///   gaussian_bump  height amp * exp(-r^2 / (2 sigma^2)); apex depth 0
///   nose_ridge     elliptical face cap with a ridge-shaped nose, elliptical mask
DepthMap make_scene(const SceneSpec& spec);

/// World x/y of a pixel relative to the image centre.
double centred_x(int col, int width, double spacing);
double centred_y(int row, int height, double spacing);

}  // namespace relight

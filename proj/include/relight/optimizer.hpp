#pragma once

#include <span>
#include <string>
#include <vector>

#include "relight/autodiff.hpp"
#include "relight/geometry.hpp"
#include "relight/losses.hpp"
#include "relight/shading.hpp"
#include "relight/shadow.hpp"

namespace relight {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam moments over a flat parameter vector.
struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t size = 0, AdamConfig cfg = {}) : config(cfg), m(size, 0.0), v(size, 0.0) {}

  /// Advances the moments with `grads` and returns the additive update for each entry.
  /// `names[i]` labels entry i in the error raised for a non-finite gradient.
  std::vector<double> update(std::span<const double> grads, std::span<const std::string> names = {});
};

/// Which of the pipeline inputs a fit may change.
struct FreeParams {
  bool omega = false;
  bool ambient = false;
  bool directional = false;
  bool depth = false;

  bool any() const { return omega || ambient || directional || depth; }

  /// Comma-separated subset of omega, ambient, directional, depth. Throws UsageError.
  static FreeParams parse(const std::string& text);
  std::string to_string() const;
};

struct FitParams {
  LightingParams lighting;
  std::vector<double> depth;  // one per pixel
};

/// Applies one Adam step to the free parameters. The light direction moves along the
/// tangent plane and is renormalized; intensities are clamped at 0. `state` is sized
/// on first use.
void adam_step(AdamState& state, FitParams& params, const GradientSet& grads, const FreeParams& free);

struct FitProblem {
  ImagePlane target;
  DepthMap depth;
  ImagePlane albedo;
  LightingParams initial;
  ShadowConfig shadow;
  FreeParams free;
  LossWeights weights;  // recon and dssim terms are used
  SsimParams ssim;
  AdamConfig adam;
  int iterations = 2000;
  double tolerance = 0.0;  // stop once |loss delta| < tolerance; 0 disables
};

struct FitResult {
  FitParams params;
  std::vector<double> loss_trace;  // loss before each step, then the loss of `params`
  int iterations = 0;
  bool converged = false;
};

/// Image loss used by fit(): weights.recon * MSE + weights.dssim * DSSIM.
LossGradient fit_loss(const ImagePlane& image, const ImagePlane& target, const LossWeights& weights,
                      const SsimParams& ssim);

/// Runs render -> loss -> backward -> adam_step. A zero budget returns the
/// initialization. Throws DataError naming the iteration if the loss stops being finite.
FitResult fit(const FitProblem& problem);

/// Angle between two directions, in degrees.
double angle_between_deg(const Vec3& a, const Vec3& b);

}  // namespace relight

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "relight/losses.hpp"
#include "relight/shading.hpp"
#include "relight/shadow.hpp"
#include "relight/tape.hpp"

namespace relight {

/// A relighting pass recorded on a tape, with the slots of its inputs and outputs.
struct RecordedRender {
  ImagePlane image;
  ad::Tape tape;
  std::vector<ad::Slot> depth_slots;   // one per pixel
  std::vector<ad::Slot> albedo_slots;  // one per albedo value
  std::vector<ad::Slot> image_slots;   // one per image value
  ad::Slot3 omega{};
  ad::Slot ambient = 0;
  ad::Slot directional = 0;
  Vec3 omega_value;
};

/// Gradients of a scalar with respect to every pipeline input.
struct GradientSet {
  std::vector<double> depth;
  std::vector<double> albedo;
  Vec3 omega;  // projected onto the tangent plane of the unit sphere at the light direction
  double ambient = 0.0;
  double directional = 0.0;
};

/// Runs the relighting pipeline while recording it. The image matches relight()
/// bit for bit. Shadow sample positions are recorded as constants.
RecordedRender record_and_render(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                                 const ShadowConfig& cfg = {});

/// Reuses the buffers of `out`, for optimization loops.
void record_and_render(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                       const ShadowConfig& cfg, RecordedRender& out);

/// Reverse pass seeded with dL/dI (one entry per image value).
GradientSet backward(const RecordedRender& rec, std::span<const double> seed);

/// Number of shadow rays whose recorded visibility is below `threshold`.
std::size_t count_occluding(const ad::Tape& tape, double threshold = 0.5);

/// Scalar loss of a rendered image and its gradient with respect to that image.
using ImageLoss = std::function<LossGradient(const ImagePlane&)>;

struct FdScene {
  DepthMap depth;
  ImagePlane albedo;
  LightingParams lighting;
  ShadowConfig shadow;
  ImageLoss loss;
};

/// Which coordinates to probe.
struct FdParams {
  std::vector<std::size_t> depth_pixels;
  bool ambient = false;
  bool directional = false;
  bool omega_tangents = false;  // two orthonormal tangent directions of the light
};

struct FdEntry {
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;    // central difference with step h
  double rel_error = 0.0;  // of `numeric`
  bool stable = true;      // no branch change at +-h
  /// The O(h^2) error of `numeric`, estimated from a second difference with step 2h,
  /// exceeds half the tolerance. Such an entry is left out of max_rel_error only when
  /// the extrapolated derivative (4 D(h) - D(2h)) / 3 matches the analytic value.
  bool truncation_limited = false;
  double extrapolated_rel_error = 0.0;
};

struct FdReport {
  std::vector<FdEntry> entries;
  double max_rel_error = 0.0;  // over counted entries
  std::size_t excluded = 0;    // branch-unstable entries
  std::size_t truncation_excluded = 0;
  double tolerance = 0.0;

  bool passed() const { return max_rel_error < tolerance; }
  /// Max relative error over counted entries whose name starts with `prefix`.
  double max_rel_error_for(const std::string& prefix) const;
};

/// Compares reverse-mode gradients against central differences (f(x+h) - f(x-h)) / 2h.
/// Perturbed evaluations reuse the unperturbed sample plan. A coordinate whose
/// perturbation changes any shadow argmin or Lambert clamp state is excluded.
/// Relative error is |a - n| / max(|a|, |n|, abs_floor).
FdReport finite_difference_check(const FdScene& scene, const FdParams& params, double h = 1e-4, double tol = 1e-3,
                                 double abs_floor = 1e-10);

/// Mean squared error against a fixed target over the target's valid pixels.
ImageLoss mse_loss_to(const ImagePlane& target);

}  // namespace relight

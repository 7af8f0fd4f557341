#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relight/shading.hpp"
#include "relight/vec3.hpp"

namespace relight {

/// Weights of the supervision terms. There is no adversarial term.
struct LossWeights {
  double depth = 1.0;
  double albedo = 5.0;
  double ambient = 2.5;
  double light = 1.0;
  double recon = 20.0;
  double dssim = 8.0;

  void validate() const;
};

/// Gaussian-window SSIM parameters.
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// A loss value together with its gradient with respect to the predicted argument.
struct LossGradient {
  double value = 0.0;
  std::vector<double> d_pred;
};

/// sum M |Dp - Dt| / sum M
double depth_loss(std::span<const double> pred, std::span<const double> target, std::span<const std::uint8_t> mask);
LossGradient depth_loss_grad(std::span<const double> pred, std::span<const double> target,
                             std::span<const std::uint8_t> mask);

/// ITU-R BT.601 luma of an RGB triple.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

/// Masked mean absolute difference of the luma of two RGB albedos.
double albedo_loss(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask);
LossGradient albedo_loss_grad(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask);

double ambient_loss(double pred, double target);

/// 1 - <wp, wt>; both must be unit within 1e-4.
double light_loss(const Vec3& pred, const Vec3& target);

/// Masked mean squared error, averaged over channels.
double recon_loss(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask);
LossGradient recon_loss_grad(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask);

/// Mean SSIM over window centres that keep the whole window inside the image,
/// averaged over channels. Inputs are clamped to [0, 1].
double ssim(const ImagePlane& a, const ImagePlane& b, const SsimParams& params = {});

/// (1 - SSIM) / 2
double dssim_loss(const ImagePlane& pred, const ImagePlane& target, const SsimParams& params = {});
LossGradient dssim_loss_grad(const ImagePlane& pred, const ImagePlane& target, const SsimParams& params = {});

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int window, double sigma);

struct LossComponents {
  double depth = 0.0;
  double albedo = 0.0;
  double ambient = 0.0;
  double light = 0.0;
  double recon = 0.0;
  double dssim = 0.0;
};

double total_loss(const LossComponents& c, const LossWeights& w = {});

}  // namespace relight

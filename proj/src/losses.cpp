#include "relight/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/error.hpp"

namespace relight {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double mask_sum(std::span<const std::uint8_t> mask) {
  double n = 0.0;
  for (std::uint8_t m : mask) n += m ? 1.0 : 0.0;
  if (n == 0.0) throw DataError("no supervised pixels");
  return n;
}

void require_same_shape(const ImagePlane& a, const ImagePlane& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw DataError(std::string(what) + ": image dimensions do not match");
  }
}

void require_mask(std::span<const std::uint8_t> mask, std::size_t pixels, const char* what) {
  if (mask.size() != pixels) throw DataError(std::string(what) + ": mask size does not match");
}

// "Valid" 2-D correlation with a separable kernel: out is (h - k + 1) x (w - k + 1).
std::vector<double> filter_valid(std::span<const double> in, int w, int h, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * static_cast<std::size_t>(ow), 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * in[static_cast<std::size_t>(r) * w + c + t];
      rows[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * static_cast<std::size_t>(ow), 0.0);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * rows[static_cast<std::size_t>(r + t) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

// Adjoint of filter_valid: scatters a centre map back onto the full grid.
std::vector<double> filter_valid_adjoint(std::span<const double> centres, int w, int h,
                                         const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * static_cast<std::size_t>(ow), 0.0);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      const double g = centres[static_cast<std::size_t>(r) * ow + c];
      for (int t = 0; t < k; ++t) rows[static_cast<std::size_t>(r + t) * ow + c] += taps[t] * g;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      const double g = rows[static_cast<std::size_t>(r) * ow + c];
      for (int t = 0; t < k; ++t) out[static_cast<std::size_t>(r) * w + c + t] += taps[t] * g;
    }
  }
  return out;
}

struct SsimChannel {
  double mean = 0.0;
  std::vector<double> grad;  // d mean / d x, before clamping
};

// Mean SSIM of one channel plane and, optionally, its gradient with respect to x.
SsimChannel ssim_channel(const std::vector<double>& x, const std::vector<double>& y, int w, int h,
                         const SsimParams& p, bool want_grad) {
  const auto taps = gaussian_taps(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const std::size_t n = x.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, w, h, taps);
  const auto my = filter_valid(y, w, h, taps);
  const auto exx = filter_valid(xx, w, h, taps);
  const auto eyy = filter_valid(yy, w, h, taps);
  const auto exy = filter_valid(xy, w, h, taps);

  const std::size_t centres = mx.size();
  std::vector<double> d_mu, d_exx, d_exy;
  if (want_grad) {
    d_mu.resize(centres);
    d_exx.resize(centres);
    d_exy.resize(centres);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < centres; ++i) {
    const double a1 = 2.0 * mx[i] * my[i] + c1;
    const double a2 = 2.0 * (exy[i] - mx[i] * my[i]) + c2;
    const double b1 = mx[i] * mx[i] + my[i] * my[i] + c1;
    const double b2 = (exx[i] - mx[i] * mx[i]) + (eyy[i] - my[i] * my[i]) + c2;
    const double s = (a1 * a2) / (b1 * b2);
    total += s;
    if (want_grad) {
      const double inv = 1.0 / (b1 * b2);
      d_mu[i] = (2.0 * my[i] * a2 - 2.0 * my[i] * a1) * inv - s * (2.0 * mx[i] / b1 - 2.0 * mx[i] / b2);
      d_exx[i] = -s / b2;
      d_exy[i] = 2.0 * a1 * inv;
    }
  }
  SsimChannel out;
  out.mean = total / static_cast<double>(centres);
  if (want_grad) {
    const double scale = 1.0 / static_cast<double>(centres);
    for (std::size_t i = 0; i < centres; ++i) {
      d_mu[i] *= scale;
      d_exx[i] *= scale;
      d_exy[i] *= scale;
    }
    const auto g_mu = filter_valid_adjoint(d_mu, w, h, taps);
    const auto g_xx = filter_valid_adjoint(d_exx, w, h, taps);
    const auto g_xy = filter_valid_adjoint(d_exy, w, h, taps);
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = g_mu[i] + 2.0 * x[i] * g_xx[i] + y[i] * g_xy[i];
  }
  return out;
}

struct SsimResult {
  double value = 0.0;
  std::vector<double> d_pred;
};

SsimResult ssim_impl(const ImagePlane& a, const ImagePlane& b, const SsimParams& p, bool want_grad) {
  require_same_shape(a, b, "ssim");
  if (a.width() < p.window || a.height() < p.window) {
    throw DataError("image " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " is smaller than the SSIM window");
  }
  const int w = a.width();
  const int h = a.height();
  const int ch = a.channels();
  const std::size_t n = a.pixel_count();
  SsimResult out;
  if (want_grad) out.d_pred.assign(a.values().size(), 0.0);
  std::vector<double> x(n), y(n);
  for (int c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(a.values()[i * ch + c], 0.0, 1.0);
      y[i] = std::clamp(b.values()[i * ch + c], 0.0, 1.0);
    }
    const SsimChannel sc = ssim_channel(x, y, w, h, p, want_grad);
    out.value += sc.mean / ch;
    if (want_grad) {
      for (std::size_t i = 0; i < n; ++i) {
        const double raw = a.values()[i * ch + c];
        const double pass = (raw >= 0.0 && raw <= 1.0) ? 1.0 : 0.0;
        out.d_pred[i * ch + c] = sc.grad[i] * pass / ch;
      }
    }
  }
  return out;
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {depth, albedo, ambient, light, recon, dssim}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("loss weights must be finite and >= 0");
  }
}

std::vector<double> gaussian_taps(int window, double sigma) {
  if (window < 1 || !(sigma > 0.0)) throw DataError("invalid SSIM window");
  std::vector<double> taps(static_cast<std::size_t>(window));
  const double centre = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - centre;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

double depth_loss(std::span<const double> pred, std::span<const double> target, std::span<const std::uint8_t> mask) {
  return depth_loss_grad(pred, target, mask).value;
}

LossGradient depth_loss_grad(std::span<const double> pred, std::span<const double> target,
                             std::span<const std::uint8_t> mask) {
  if (pred.size() != target.size() || pred.size() != mask.size()) throw DataError("depth_loss: sizes do not match");
  const double n = mask_sum(mask);
  LossGradient out;
  out.d_pred.assign(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    const double r = pred[i] - target[i];
    out.value += std::abs(r);
    out.d_pred[i] = sign(r) / n;
  }
  out.value /= n;
  return out;
}

double albedo_loss(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask) {
  return albedo_loss_grad(pred, target, mask).value;
}

LossGradient albedo_loss_grad(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask) {
  require_same_shape(pred, target, "albedo_loss");
  if (pred.channels() != 3) throw DataError("albedo_loss: expected RGB albedo");
  require_mask(mask, pred.pixel_count(), "albedo_loss");
  const double n = mask_sum(mask);
  const auto p = pred.values();
  const auto t = target.values();
  LossGradient out;
  out.d_pred.assign(p.size(), 0.0);
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!mask[i]) continue;
    const double r = luma(p[3 * i], p[3 * i + 1], p[3 * i + 2]) - luma(t[3 * i], t[3 * i + 1], t[3 * i + 2]);
    out.value += std::abs(r);
    const double g = sign(r) / n;
    out.d_pred[3 * i] = 0.299 * g;
    out.d_pred[3 * i + 1] = 0.587 * g;
    out.d_pred[3 * i + 2] = 0.114 * g;
  }
  out.value /= n;
  return out;
}

double ambient_loss(double pred, double target) { return std::abs(pred - target); }

double light_loss(const Vec3& pred, const Vec3& target) {
  if (std::abs(norm(pred) - 1.0) > 1e-4 || std::abs(norm(target) - 1.0) > 1e-4) {
    throw DataError("light_loss: directions must be unit vectors");
  }
  return 1.0 - dot(pred, target);
}

double recon_loss(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask) {
  return recon_loss_grad(pred, target, mask).value;
}

LossGradient recon_loss_grad(const ImagePlane& pred, const ImagePlane& target, std::span<const std::uint8_t> mask) {
  require_same_shape(pred, target, "recon_loss");
  require_mask(mask, pred.pixel_count(), "recon_loss");
  const double n = mask_sum(mask);
  const std::size_t ch = static_cast<std::size_t>(pred.channels());
  const double denom = n * static_cast<double>(ch);
  const auto p = pred.values();
  const auto t = target.values();
  LossGradient out;
  out.d_pred.assign(p.size(), 0.0);
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!mask[i]) continue;
    for (std::size_t c = 0; c < ch; ++c) {
      const double r = p[i * ch + c] - t[i * ch + c];
      out.value += r * r;
      out.d_pred[i * ch + c] = 2.0 * r / denom;
    }
  }
  out.value /= denom;
  return out;
}

double ssim(const ImagePlane& a, const ImagePlane& b, const SsimParams& params) {
  return ssim_impl(a, b, params, false).value;
}

double dssim_loss(const ImagePlane& pred, const ImagePlane& target, const SsimParams& params) {
  return (1.0 - ssim(pred, target, params)) / 2.0;
}

LossGradient dssim_loss_grad(const ImagePlane& pred, const ImagePlane& target, const SsimParams& params) {
  SsimResult s = ssim_impl(pred, target, params, true);
  LossGradient out;
  out.value = (1.0 - s.value) / 2.0;
  out.d_pred = std::move(s.d_pred);
  for (double& g : out.d_pred) g *= -0.5;
  return out;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  w.validate();
  return w.depth * c.depth + w.albedo * c.albedo + w.ambient * c.ambient + w.light * c.light + w.recon * c.recon +
         w.dssim * c.dssim;
}

}  // namespace relight

#pragma once

// Straightforward SSIM used as an independent oracle for the library version: a 2-D
// Gaussian window built directly from exp(-(dx^2 + dy^2) / 2 sigma^2), per-window
// weighted moments summed in place, no separable passes or running sums.

#include <algorithm>
#include <cmath>
#include <vector>

namespace relight::testing {

inline double reference_ssim_channel(const std::vector<double>& a, const std::vector<double>& b, int width,
                                     int height, int window = 11, double sigma = 1.5, double k1 = 0.01,
                                     double k2 = 0.03) {
  const int half = window / 2;
  std::vector<double> g(static_cast<std::size_t>(window * window));
  double total = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      g[(dy + half) * window + (dx + half)] = v;
      total += v;
    }
  }
  for (double& v : g) v /= total;

  const double c1 = (k1 * 1.0) * (k1 * 1.0);
  const double c2 = (k2 * 1.0) * (k2 * 1.0);
  double sum = 0.0;
  int count = 0;
  for (int cy = half; cy < height - half; ++cy) {
    for (int cx = half; cx < width - half; ++cx) {
      double mx = 0, my = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          const double wt = g[(dy + half) * window + (dx + half)];
          const int k = (cy + dy) * width + (cx + dx);
          mx += wt * std::clamp(a[k], 0.0, 1.0);
          my += wt * std::clamp(b[k], 0.0, 1.0);
        }
      }
      double vx = 0, vy = 0, cxy = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          const double wt = g[(dy + half) * window + (dx + half)];
          const int k = (cy + dy) * width + (cx + dx);
          const double ex = std::clamp(a[k], 0.0, 1.0) - mx;
          const double ey = std::clamp(b[k], 0.0, 1.0) - my;
          vx += wt * ex * ex;
          vy += wt * ey * ey;
          cxy += wt * ex * ey;
        }
      }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / count;
}

}  // namespace relight::testing

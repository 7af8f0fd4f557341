#include "relight/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "relight/error.hpp"

namespace relight {

namespace {

class BilinearSurface {
 public:
  explicit BilinearSurface(const DepthMap& d) : d_(d), b_(d.valid_bounds()) {}

  const PixelBounds& bounds() const { return b_; }

  // Surface height z = -depth at world (x, y); nullopt outside the valid region.
  std::optional<double> height(double x, double y) const {
    const double s = d_.pixel_spacing();
    const double colf = x / s;
    const double rowf = (d_.height() - 1) - y / s;
    if (colf < b_.col_min || colf > b_.col_max || rowf < b_.row_min || rowf > b_.row_max) return std::nullopt;
    const int c0 = std::clamp(static_cast<int>(std::floor(colf)), 0, d_.width() - 2);
    const int r0 = std::clamp(static_cast<int>(std::floor(rowf)), 0, d_.height() - 2);
    const double fc = colf - c0;
    const double fr = rowf - r0;
    const double w[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
    const int rr[4] = {r0, r0, r0 + 1, r0 + 1};
    const int cc[4] = {c0, c0 + 1, c0, c0 + 1};
    double z = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (w[k] == 0.0) continue;
      if (!d_.valid(rr[k], cc[k])) return std::nullopt;
      z += w[k] * -d_.at(rr[k], cc[k]);
    }
    return z;
  }

 private:
  const DepthMap& d_;
  PixelBounds b_;
};

}  // namespace

BinaryVisibility trace_exact(const DepthMap& depth, const LightDirection& light, int steps, const ExecOptions& exec) {
  if (!(light.vec().z > 0.0)) throw DataError("light direction must point toward the camera side (z > 0)");
  if (steps < 1) throw DataError("oracle steps must be >= 1");

  const BilinearSurface surface(depth);
  const PixelBounds& b = surface.bounds();
  const double s = depth.pixel_spacing();
  const int H = depth.height();
  const Vec3 w = light.vec();

  double z_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (depth.mask()[i]) z_max = std::max(z_max, -depth.values()[i]);
  }

  BinaryVisibility vis;
  vis.width = depth.width();
  vis.height = H;
  vis.lit.assign(depth.size(), 1);
  vis.hit_t.assign(depth.size(), std::numeric_limits<double>::infinity());
  if (b.empty()) return vis;

  const double x_lo = pixel_world_x(b.col_min, s), x_hi = pixel_world_x(b.col_max, s);
  const double y_lo = pixel_world_y(b.row_max, H, s), y_hi = pixel_world_y(b.row_min, H, s);

  parallel_for(static_cast<std::size_t>(H), exec, [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t rr = row_begin; rr < row_end; ++rr) {
      const int r = static_cast<int>(rr);
      for (int c = 0; c < depth.width(); ++c) {
        if (!depth.valid(r, c)) continue;
        const Vec3 o = Vec3{pixel_world_x(c, s), pixel_world_y(r, H, s), -depth.at(r, c)} + w * kOracleStartOffset;

        double t_exit = (z_max - o.z) / w.z;
        if (w.x > 0.0) t_exit = std::min(t_exit, (x_hi - o.x) / w.x);
        if (w.x < 0.0) t_exit = std::min(t_exit, (x_lo - o.x) / w.x);
        if (w.y > 0.0) t_exit = std::min(t_exit, (y_hi - o.y) / w.y);
        if (w.y < 0.0) t_exit = std::min(t_exit, (y_lo - o.y) / w.y);
        if (!(t_exit > 0.0)) t_exit = 0.0;

        const double dt = t_exit / steps;
        bool prev_above = true;
        for (int k = 0; k <= steps; ++k) {
          const double t = k * dt;
          const Vec3 p = o + w * t;
          const std::optional<double> hz = surface.height(p.x, p.y);
          if (!hz) break;
          const bool above = p.z > *hz;
          if (!above && (k == 0 || prev_above)) {
            const std::size_t i = depth.index(r, c);
            vis.lit[i] = 0;
            vis.hit_t[i] = kOracleStartOffset + t;
            break;
          }
          prev_above = above;
          if (dt == 0.0) break;
        }
      }
    }
  });
  return vis;
}

double compare_mask(const ShadowMask& mask, const BinaryVisibility& vis, const std::vector<std::uint8_t>& valid,
                    double threshold, int boundary_band) {
  if (mask.width != vis.width || mask.height != vis.height || valid.size() != vis.lit.size() ||
      mask.values.size() != vis.lit.size()) {
    throw DataError("mask and visibility dimensions do not match");
  }
  const int W = vis.width;
  const int H = vis.height;
  auto at = [&](int r, int c) { return static_cast<std::size_t>(r) * static_cast<std::size_t>(W) + static_cast<std::size_t>(c); };

  // Pixels whose oracle state differs from a valid 8-neighbour.
  std::vector<std::uint8_t> boundary(vis.lit.size(), 0);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      if (!valid[at(r, c)]) continue;
      for (int dr = -1; dr <= 1 && !boundary[at(r, c)]; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rn = r + dr, cn = c + dc;
          if (rn < 0 || rn >= H || cn < 0 || cn >= W || !valid[at(rn, cn)]) continue;
          if (vis.lit[at(rn, cn)] != vis.lit[at(r, c)]) {
            boundary[at(r, c)] = 1;
            break;
          }
        }
      }
    }
  }

  std::size_t counted = 0, agree = 0;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      if (!valid[at(r, c)]) continue;
      bool near = false;
      for (int dr = -boundary_band; dr <= boundary_band && !near; ++dr) {
        for (int dc = -boundary_band; dc <= boundary_band; ++dc) {
          const int rn = r + dr, cn = c + dc;
          if (rn >= 0 && rn < H && cn >= 0 && cn < W && boundary[at(rn, cn)]) {
            near = true;
            break;
          }
        }
      }
      if (near) continue;
      ++counted;
      const bool shadowed = mask.values[at(r, c)] < threshold;
      if (shadowed == (vis.lit[at(r, c)] == 0)) ++agree;
    }
  }
  return counted == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(counted);
}

}  // namespace relight

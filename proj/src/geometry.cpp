#include "relight/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/error.hpp"

namespace relight {

DepthMap::DepthMap(int width, int height, double pixel_spacing, std::vector<double> values,
                   std::vector<std::uint8_t> valid)
    : width_(width), height_(height), spacing_(pixel_spacing), values_(std::move(values)), valid_(std::move(valid)) {
  if (width < 2 || height < 2) {
    throw DataError("depth map must be at least 2x2, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  if (!(pixel_spacing > 0.0) || !std::isfinite(pixel_spacing)) {
    throw DataError("pixel spacing must be positive and finite");
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (values_.size() != n) throw DataError("depth value count does not match dimensions");
  if (valid_.empty()) valid_.assign(n, 1);
  if (valid_.size() != n) throw DataError("validity mask size does not match dimensions");
  for (std::size_t i = 0; i < n; ++i) {
    if (valid_[i] && !std::isfinite(values_[i])) {
      throw DataError("non-finite depth at valid pixel " + std::to_string(i));
    }
  }
}

DepthMap DepthMap::filled(int width, int height, double pixel_spacing, double value) {
  return DepthMap(width, height, pixel_spacing,
                  std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), value));
}

DepthMap DepthMap::with_values(std::vector<double> values) const {
  return DepthMap(width_, height_, spacing_, std::move(values), valid_);
}

PixelBounds DepthMap::valid_bounds() const {
  PixelBounds b{height_, -1, width_, -1};
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!valid(r, c)) continue;
      b.row_min = std::min(b.row_min, r);
      b.row_max = std::max(b.row_max, r);
      b.col_min = std::min(b.col_min, c);
      b.col_max = std::max(b.col_max, c);
    }
  }
  return b;
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid_.begin(), valid_.end(), [](std::uint8_t v) { return v != 0; }));
}

PointGrid depth_to_points(const DepthMap& depth) {
  PointGrid grid;
  grid.width = depth.width();
  grid.height = depth.height();
  grid.pixel_spacing = depth.pixel_spacing();
  grid.valid.assign(depth.mask().begin(), depth.mask().end());
  grid.points.resize(depth.size());
  const double s = depth.pixel_spacing();
  for (int r = 0; r < depth.height(); ++r) {
    for (int c = 0; c < depth.width(); ++c) {
      grid.points[depth.index(r, c)] = {pixel_world_x(c, s), pixel_world_y(r, depth.height(), s), -depth.at(r, c)};
    }
  }
  return grid;
}

NormalStencil normal_stencil(std::span<const std::uint8_t> valid, int width, int height, int row, int col) {
  auto ok = [&](int r, int c) {
    return r >= 0 && r < height && c >= 0 && c < width &&
           valid[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)] != 0;
  };
  NormalStencil s{col, col, row, row};
  if (ok(row, col - 1)) s.col_lo = col - 1;
  if (ok(row, col + 1)) s.col_hi = col + 1;
  if (ok(row - 1, col)) s.row_up = row - 1;
  if (ok(row + 1, col)) s.row_down = row + 1;
  return s;
}

NormalMap compute_normals(const PointGrid& points) {
  NormalMap out;
  out.width = points.width;
  out.height = points.height;
  out.valid = points.valid;
  const std::size_t n = points.points.size();
  out.normals.assign(n, Vec3{0.0, 0.0, 1.0});
  out.degenerate.assign(n, 0);

  bool any_valid = false;
  for (int r = 0; r < points.height; ++r) {
    for (int c = 0; c < points.width; ++c) {
      if (!points.is_valid(r, c)) continue;
      any_valid = true;
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(points.width) + static_cast<std::size_t>(c);
      const NormalStencil st = normal_stencil(points.valid, points.width, points.height, r, c);
      if (st.degenerate()) {
        out.degenerate[i] = 1;
        continue;
      }
      const Vec3 tx = points.at(r, st.col_hi) - points.at(r, st.col_lo);
      const Vec3 ty = points.at(st.row_up, c) - points.at(st.row_down, c);
      const Vec3 n_raw = cross(tx, ty);
      if (dot(n_raw, n_raw) == 0.0) {
        out.degenerate[i] = 1;
        continue;
      }
      // tx has zero y and positive x, ty zero x and positive y, so n_raw.z > 0.
      out.normals[i] = normalized(n_raw);
    }
  }
  if (!any_valid) throw DataError("cannot compute normals: valid region is empty");
  return out;
}

}  // namespace relight

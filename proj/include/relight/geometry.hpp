#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relight/vec3.hpp"

namespace relight {

/// Inclusive pixel bounds of a valid region.
struct PixelBounds {
  int row_min = 0;
  int row_max = -1;
  int col_min = 0;
  int col_max = -1;

  bool empty() const { return row_max < row_min || col_max < col_min; }
};

/// H x W grid of depths (larger = farther from the camera) with a validity mask.
///
/// Pixel (row, col) sits at world (col * spacing, (height - 1 - row) * spacing);
/// row 0 is the top of the image. Values on invalid pixels are carried but never read
/// by the pipeline.
class DepthMap {
 public:
  DepthMap(int width, int height, double pixel_spacing, std::vector<double> values,
           std::vector<std::uint8_t> valid = {});

  static DepthMap filled(int width, int height, double pixel_spacing, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  double pixel_spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  double at(int row, int col) const { return values_[index(row, col)]; }
  bool valid(int row, int col) const { return valid_[index(row, col)] != 0; }
  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return valid_; }

  /// Same grid, mask and spacing with replaced depth values.
  DepthMap with_values(std::vector<double> values) const;

  PixelBounds valid_bounds() const;
  std::size_t valid_count() const;

 private:
  int width_;
  int height_;
  double spacing_;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

/// World-space surface points, one per pixel, under the orthographic camera.
struct PointGrid {
  int width = 0;
  int height = 0;
  double pixel_spacing = 1.0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  const Vec3& at(int row, int col) const {
    return points[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
  }
  bool is_valid(int row, int col) const {
    return valid[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)] != 0;
  }
};

struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;
  /// Valid pixels without neighbors in one axis; their normal is (0, 0, 1).
  std::vector<std::uint8_t> degenerate;
};

/// x/y world coordinates of a pixel centre.
inline double pixel_world_x(int col, double spacing) { return col * spacing; }
inline double pixel_world_y(int row, int height, double spacing) { return (height - 1 - row) * spacing; }

PointGrid depth_to_points(const DepthMap& depth);

/// Neighbour pixels used for the tangents of one normal. Central differences in the
/// interior, one-sided where a neighbour is missing or invalid.
///   tangent_x = p(row, col_hi) - p(row, col_lo)
///   tangent_y = p(row_up, col) - p(row_down, col)   (row_up is the smaller row index)
struct NormalStencil {
  int col_lo, col_hi;
  int row_up, row_down;

  bool degenerate() const { return col_lo == col_hi || row_up == row_down; }
};

NormalStencil normal_stencil(std::span<const std::uint8_t> valid, int width, int height, int row, int col);

NormalMap compute_normals(const PointGrid& points);

}  // namespace relight

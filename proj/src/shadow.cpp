#include "relight/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "relight/error.hpp"

namespace relight {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kAxisTolerance = 1e-6;

void require_front_light(const LightDirection& light) {
  if (!(light.vec().z > 0.0)) throw DataError("light direction must point toward the camera side (z > 0)");
}

// Evaluates one ray from precomputed sites. Shared by every mask entry point.
RayDistance evaluate_ray(const Vec3& origin, std::span<const SampleSite> sites, const std::vector<Vec3>& points,
                         const Vec3& w) {
  RayDistance best;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const SampleSite& s = sites[j];
    const double z = bilinear_eval(s.stencil, [&](std::uint32_t k) { return points[k].z; });
    const double d = norm(cross(Vec3{s.x, s.y, z} - origin, w));
    if (d < best.distance) {
      best.distance = d;
      best.argmin = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

LightDirection::LightDirection(const Vec3& w) : w_(w) {
  const double len = norm(w);
  if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-6) {
    throw DataError("light direction must be a unit vector (|w| = " + std::to_string(len) + ")");
  }
}

LightDirection LightDirection::from_vector(const Vec3& v) {
  const double len = norm(v);
  if (!std::isfinite(len) || len == 0.0) throw DataError("light vector must be finite and nonzero");
  return LightDirection(v / len);
}

LightDirection LightDirection::from_angles(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  return from_vector({std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)});
}

double LightDirection::azimuth_deg() const { return std::atan2(w_.y, w_.x) / kDegToRad; }

double LightDirection::elevation_deg() const { return std::asin(std::clamp(w_.z, -1.0, 1.0)) / kDegToRad; }

ResolvedShadowConfig resolve(const ShadowConfig& cfg, double pixel_spacing) {
  ResolvedShadowConfig r{cfg.samples, cfg.start_offset.value_or(kDefaultStartOffsetPixels * pixel_spacing),
                         cfg.distance_scale.value_or(kDefaultDistanceScalePixels / pixel_spacing), cfg.out_of_bounds};
  if (r.samples < 1) throw DataError("samples must be >= 1");
  if (!(r.start_offset >= 0.0) || !std::isfinite(r.start_offset)) throw DataError("start_offset must be >= 0");
  if (!(r.distance_scale > 0.0) || !std::isfinite(r.distance_scale)) throw DataError("distance_scale must be > 0");
  return r;
}

RayPlanner::RayPlanner(int width, int height, double pixel_spacing, std::span<const std::uint8_t> valid,
                       const LightDirection& light, const ResolvedShadowConfig& cfg)
    : width_(width), height_(height), spacing_(pixel_spacing), valid_(valid), cfg_(cfg) {
  bounds_ = PixelBounds{height, -1, width, -1};
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!valid[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)]) continue;
      bounds_.row_min = std::min(bounds_.row_min, r);
      bounds_.row_max = std::max(bounds_.row_max, r);
      bounds_.col_min = std::min(bounds_.col_min, c);
      bounds_.col_max = std::max(bounds_.col_max, c);
    }
  }
  const double len = std::hypot(light.vec().x, light.vec().y);
  degenerate_ = len < kAxisTolerance;
  if (!degenerate_) {
    ux_ = light.vec().x / len;
    uy_ = light.vec().y / len;
  }
}

void RayPlanner::plan(int row, int col, std::vector<SampleSite>& out) const {
  out.clear();
  if (degenerate_ || bounds_.empty()) return;

  const double x_lo = pixel_world_x(bounds_.col_min, spacing_);
  const double x_hi = pixel_world_x(bounds_.col_max, spacing_);
  const double y_lo = pixel_world_y(bounds_.row_max, height_, spacing_);
  const double y_hi = pixel_world_y(bounds_.row_min, height_, spacing_);
  const double x0 = pixel_world_x(col, spacing_);
  const double y0 = pixel_world_y(row, height_, spacing_);

  double t_exit = std::numeric_limits<double>::infinity();
  if (ux_ > 0.0) t_exit = std::min(t_exit, (x_hi - x0) / ux_);
  if (ux_ < 0.0) t_exit = std::min(t_exit, (x_lo - x0) / ux_);
  if (uy_ > 0.0) t_exit = std::min(t_exit, (y_hi - y0) / uy_);
  if (uy_ < 0.0) t_exit = std::min(t_exit, (y_lo - y0) / uy_);

  const double start = cfg_.start_offset;
  if (!(t_exit > start)) return;

  const int m = cfg_.samples;
  const double span = t_exit - start;
  out.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double t = m == 1 ? start : start + span * (static_cast<double>(j) / static_cast<double>(m - 1));
    // Fractional pixel coordinates, clamped against rounding at the exit boundary.
    const double colf = std::clamp((x0 + t * ux_) / spacing_, static_cast<double>(bounds_.col_min),
                                   static_cast<double>(bounds_.col_max));
    const double rowf = std::clamp((height_ - 1) - (y0 + t * uy_) / spacing_, static_cast<double>(bounds_.row_min),
                                   static_cast<double>(bounds_.row_max));
    const int c0 = std::clamp(static_cast<int>(std::floor(colf)), 0, width_ - 2);
    const int r0 = std::clamp(static_cast<int>(std::floor(rowf)), 0, height_ - 2);
    const double fc = colf - c0;
    const double fr = rowf - r0;

    SampleSite site;
    site.x = colf * spacing_;
    site.y = ((height_ - 1) - rowf) * spacing_;
    const auto w = static_cast<std::uint32_t>(width_);
    const auto base = static_cast<std::uint32_t>(r0) * w + static_cast<std::uint32_t>(c0);
    site.stencil.index = {base, base + 1, base + w, base + w + 1};
    site.stencil.weight = {(1.0 - fr) * (1.0 - fc), (1.0 - fr) * fc, fr * (1.0 - fc), fr * fc};

    bool inside = true;
    int heaviest = 0;
    for (int k = 0; k < 4; ++k) {
      if (site.stencil.weight[k] > 0.0 && !valid_[site.stencil.index[k]]) inside = false;
      if (site.stencil.weight[k] > site.stencil.weight[heaviest]) heaviest = k;
    }
    // Zero-weight taps may sit on invalid pixels whose values are arbitrary.
    for (int k = 0; k < 4; ++k) {
      if (site.stencil.weight[k] == 0.0) site.stencil.index[k] = site.stencil.index[heaviest];
    }
    if (!inside) {
      if (cfg_.out_of_bounds == OutOfBoundsPolicy::Terminate) return;
      continue;
    }
    out.push_back(site);
  }
}

std::vector<Vec3> sample_ray_points(const PointGrid& points, int row, int col, const LightDirection& light,
                                    const ShadowConfig& cfg) {
  require_front_light(light);
  if (row < 0 || row >= points.height || col < 0 || col >= points.width || !points.is_valid(row, col)) {
    throw DataError("pixel outside valid region");
  }
  const RayPlanner planner(points.width, points.height, points.pixel_spacing, points.valid, light,
                           resolve(cfg, points.pixel_spacing));
  std::vector<SampleSite> sites;
  planner.plan(row, col, sites);
  std::vector<Vec3> out;
  out.reserve(sites.size());
  for (const SampleSite& s : sites) {
    out.push_back({s.x, s.y, bilinear_eval(s.stencil, [&](std::uint32_t k) { return points.points[k].z; })});
  }
  return out;
}

RayDistance min_ray_distance(const Vec3& origin, std::span<const Vec3> samples, const LightDirection& light) {
  RayDistance best;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double d = norm(cross(samples[j] - origin, light.vec()));
    if (d < best.distance) {
      best.distance = d;
      best.argmin = static_cast<int>(j);
    }
  }
  return best;
}

double visibility(double d_min, double distance_scale) {
  if (d_min == kUnoccluded) return 1.0;
  const double e = std::exp(-distance_scale * d_min);
  return -4.0 * e / ((1.0 + e) * (1.0 + e)) + 1.0;
}

double visibility_slope(double d_min, double distance_scale) {
  if (d_min == kUnoccluded) return 0.0;
  const double e = std::exp(-distance_scale * d_min);
  const double q = 1.0 + e;
  // d/dd tanh^2(s d / 2) = s tanh(s d / 2) sech^2(s d / 2)
  return distance_scale * ((1.0 - e) / q) * (4.0 * e / (q * q));
}

SamplePlan plan_samples(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg) {
  require_front_light(light);
  const RayPlanner planner(depth.width(), depth.height(), depth.pixel_spacing(), depth.mask(), light,
                           resolve(cfg, depth.pixel_spacing()));
  SamplePlan plan;
  plan.offsets.reserve(depth.size() + 1);
  plan.offsets.push_back(0);
  std::vector<SampleSite> sites;
  for (int r = 0; r < depth.height(); ++r) {
    for (int c = 0; c < depth.width(); ++c) {
      if (depth.valid(r, c)) {
        planner.plan(r, c, sites);
        plan.sites.insert(plan.sites.end(), sites.begin(), sites.end());
      }
      plan.offsets.push_back(static_cast<std::uint32_t>(plan.sites.size()));
    }
  }
  return plan;
}

namespace {

void init_outputs(const DepthMap& depth, ShadowMask& mask, ShadowTrace* trace) {
  mask.width = depth.width();
  mask.height = depth.height();
  mask.values.assign(depth.size(), 1.0);
  if (trace) {
    trace->d_min.assign(depth.size(), kUnoccluded);
    trace->argmin.assign(depth.size(), -1);
    trace->sample_count.assign(depth.size(), 0);
  }
}

void store(std::size_t i, const RayDistance& rd, std::size_t count, double scale, ShadowMask& mask,
           ShadowTrace* trace) {
  mask.values[i] = visibility(rd.distance, scale);
  if (trace) {
    trace->d_min[i] = rd.distance;
    trace->argmin[i] = rd.argmin;
    trace->sample_count[i] = static_cast<int>(count);
  }
}

}  // namespace

ShadowMask estimate_shadow_mask(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg,
                                const ExecOptions& exec, ShadowTrace* trace) {
  require_front_light(light);
  const ResolvedShadowConfig rc = resolve(cfg, depth.pixel_spacing());
  const PointGrid points = depth_to_points(depth);
  const RayPlanner planner(depth.width(), depth.height(), depth.pixel_spacing(), depth.mask(), light, rc);

  ShadowMask mask;
  init_outputs(depth, mask, trace);
  parallel_for(static_cast<std::size_t>(depth.height()), exec, [&](std::size_t row_begin, std::size_t row_end) {
    std::vector<SampleSite> sites;
    sites.reserve(static_cast<std::size_t>(rc.samples));
    for (std::size_t r = row_begin; r < row_end; ++r) {
      for (int c = 0; c < depth.width(); ++c) {
        const int row = static_cast<int>(r);
        if (!depth.valid(row, c)) continue;
        planner.plan(row, c, sites);
        const RayDistance rd = evaluate_ray(points.at(row, c), sites, points.points, light.vec());
        store(depth.index(row, c), rd, sites.size(), rc.distance_scale, mask, trace);
      }
    }
  });
  return mask;
}

ShadowMask estimate_shadow_mask_planned(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg,
                                        const SamplePlan& plan, ShadowTrace* trace) {
  require_front_light(light);
  if (plan.offsets.size() != depth.size() + 1) throw DataError("sample plan does not match depth map");
  const ResolvedShadowConfig rc = resolve(cfg, depth.pixel_spacing());
  const PointGrid points = depth_to_points(depth);
  ShadowMask mask;
  init_outputs(depth, mask, trace);
  for (int r = 0; r < depth.height(); ++r) {
    for (int c = 0; c < depth.width(); ++c) {
      if (!depth.valid(r, c)) continue;
      const std::size_t i = depth.index(r, c);
      const auto sites = plan.for_pixel(i);
      store(i, evaluate_ray(points.at(r, c), sites, points.points, light.vec()), sites.size(), rc.distance_scale, mask,
            trace);
    }
  }
  return mask;
}

}  // namespace relight

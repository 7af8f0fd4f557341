#include "relight/checks.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "relight/autodiff.hpp"
#include "relight/optimizer.hpp"
#include "relight/oracle.hpp"
#include "relight/scene.hpp"

namespace relight {

namespace {

template <typename Fn>
GateResult timed(int id, std::string name, Fn&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  GateResult g;
  g.id = id;
  g.name = std::move(name);
  body(g);
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// Maps doubles onto integers whose order matches the numeric order.
std::int64_t ordered_bits(double x) {
  const auto b = std::bit_cast<std::int64_t>(x);
  return b < 0 ? std::numeric_limits<std::int64_t>::min() - b : b;
}

}  // namespace

std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  const std::int64_t ia = ordered_bits(a), ib = ordered_bits(b);
  return ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                 : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
}

GateResult check_visibility_function() {
  return timed(1, "visibility function", [](GateResult& g) {
    const double at_zero = visibility(0.0);
    const double at_ln3 = visibility(std::log(3.0));
    bool monotone = true;
    double prev = visibility(0.0);
    constexpr int kSweep = 10000;
    for (int k = 1; k < kSweep; ++k) {
      const double v = visibility(20.0 * k / (kSweep - 1));
      if (v < prev) monotone = false;
      prev = v;
    }
    const double sentinel = visibility(kUnoccluded);
    g.passed = at_zero == 0.0 && std::abs(at_ln3 - 0.25) <= 1e-12 && monotone && sentinel == 1.0;
    g.detail = format("M(0)=%g M(ln3)-0.25=%.3g monotone=%s M(inf)=%g", at_zero, at_ln3 - 0.25,
                      monotone ? "yes" : "no", sentinel);
  });
}

GateResult check_shading_identity(std::size_t tuples, std::uint64_t seed, std::uint64_t max_ulp) {
  return timed(2, "shading identity", [&](GateResult& g) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_dir = [&](bool front) {
      Vec3 v;
      do {
        v = {gauss(rng), gauss(rng), gauss(rng)};
      } while (norm(v) < 1e-3);
      v = v / norm(v);
      if (front) v.z = std::abs(v.z);
      return v;
    };
    std::uint64_t worst = 0;
    for (std::size_t k = 0; k < tuples; ++k) {
      const Vec3 n = random_dir(false);
      const Vec3 w = random_dir(true);
      const double m = unit(rng), ia = unit(rng), id = unit(rng);
      const double lam = lambert(n, w);
      const double direct = shadowed_shading_value(ia, id, lam, m);
      const double blended = m * (ia + id * lam) + (1.0 - m) * ia;
      worst = std::max(worst, ulp_distance(direct, blended));
    }
    g.passed = worst <= max_ulp;
    g.detail = format("%zu tuples, max %llu ulp (limit %llu)", tuples, static_cast<unsigned long long>(worst),
                      static_cast<unsigned long long>(max_ulp));
  });
}

GateResult check_oracle_agreement(const DepthMap& depth, const LightDirection& light, const ShadowConfig& cfg,
                                  double min_agreement, const ExecOptions& exec) {
  return timed(3, "oracle agreement", [&](GateResult& g) {
    const BinaryVisibility vis = trace_exact(depth, light, 10000, exec);
    const ShadowMask mask = estimate_shadow_mask(depth, light, cfg, exec);
    const double agreement =
        compare_mask(mask, vis, std::vector<std::uint8_t>(depth.mask().begin(), depth.mask().end()));
    g.passed = agreement >= min_agreement;
    g.detail = format("agreement %.4f (need >= %.2f)", agreement, min_agreement);
  });
}

int shadow_band_width(const ShadowMask& mask, int row, int edge_col, double threshold) {
  int width = 0;
  for (int c = edge_col - 1; c >= 0; --c) {
    if (!(mask.values[static_cast<std::size_t>(row) * static_cast<std::size_t>(mask.width) + static_cast<std::size_t>(c)] <
          threshold)) {
      break;
    }
    ++width;
  }
  return width;
}

GateResult check_shadow_length(const ShadowConfig& cfg, const ExecOptions& exec) {
  return timed(4, "shadow length", [&](GateResult& g) {
    SceneSpec spec;
    spec.kind = SceneKind::Step;
    spec.width = spec.height = 128;
    spec.pixel_spacing = 1.0 / 32.0;
    spec.step_height = 1.0;
    const DepthMap depth = make_scene(spec);
    const ShadowMask mask = estimate_shadow_mask(depth, LightDirection::from_angles(0.0, 45.0), cfg, exec);
    int edge = 0;
    while (centred_x(edge, spec.width, *spec.pixel_spacing) < 0.0) ++edge;
    const int band = shadow_band_width(mask, spec.height / 2, edge);
    const double expected = 1.0 / *spec.pixel_spacing;
    g.passed = std::abs(band - expected) <= 2.0;
    g.detail = format("band %d px, expected %.0f +/- 2", band, expected);
  });
}

GateResult check_gradients(const DepthMap& depth, const LightingParams& lighting, const ShadowConfig& cfg,
                           std::size_t depth_pixels, std::uint64_t seed) {
  return timed(5, "gradients", [&](GateResult& g) {
    const ImagePlane albedo = ImagePlane::filled(depth.width(), depth.height(), 1, 0.65);
    LightingParams target_light = lighting;
    target_light.direction = LightDirection::from_angles(lighting.direction.azimuth_deg() + 12.0,
                                                         std::min(80.0, lighting.direction.elevation_deg() + 6.0));
    target_light.ambient = lighting.ambient + 0.05;
    const ImagePlane target = relight(depth, albedo, target_light, cfg).image;

    FdScene scene{depth, albedo, lighting, cfg, [target](const ImagePlane& image) {
                    return fit_loss(image, target, LossWeights{}, SsimParams{});
                  }};
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < depth.size(); ++i) {
      if (depth.mask()[i]) valid.push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(valid.begin(), valid.end(), rng);
    valid.resize(std::min(valid.size(), depth_pixels));
    std::sort(valid.begin(), valid.end());

    const FdReport report = finite_difference_check(scene, FdParams{valid, true, true, true});
    const double depth_err = report.max_rel_error_for("depth");
    const double omega_err = report.max_rel_error_for("omega");
    const double intensity_err = std::max(report.max_rel_error_for("ambient"), report.max_rel_error_for("directional"));
    std::size_t intensity_unstable = 0;
    for (const FdEntry& e : report.entries) {
      if (!e.stable && (e.name == "ambient" || e.name == "directional")) ++intensity_unstable;
    }
    g.passed = report.max_rel_error < 1e-3 && intensity_err < 1e-6 && intensity_unstable == 0 &&
               (report.excluded + report.truncation_excluded) * 2 < report.entries.size();
    g.detail = format("max rel err depth %.2e, omega %.2e, intensities %.2e; of %zu entries %zu branch-unstable, "
                      "%zu truncation-limited",
                      depth_err, omega_err, intensity_err, report.entries.size(), report.excluded,
                      report.truncation_excluded);
  });
}

std::vector<GateResult> run_checks(const DepthMap& depth, const CheckOptions& opts) {
  std::vector<GateResult> out;
  out.push_back(check_visibility_function());
  out.push_back(check_shading_identity());
  out.push_back(check_oracle_agreement(depth, opts.lighting.direction, opts.shadow, 0.95, opts.exec));
  out.push_back(check_shadow_length(opts.shadow, opts.exec));
  out.push_back(check_gradients(depth, opts.lighting, opts.shadow));
  return out;
}

}  // namespace relight

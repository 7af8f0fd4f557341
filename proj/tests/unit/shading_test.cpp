#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relight/error.hpp"
#include "relight/scene.hpp"
#include "relight/shading.hpp"

namespace relight {
namespace {

NormalMap single_normal(const Vec3& n) {
  NormalMap m;
  m.width = m.height = 1;
  m.normals = {n};
  m.valid = {1};
  m.degenerate = {0};
  return m;
}

ShadowMask single_mask(double v) { return ShadowMask{1, 1, {v}}; }

const LightingParams kOverhead{LightDirection({0.0, 0.0, 1.0}), 0.5, 0.5};

TEST(DiffuseShading, Examples) {
  EXPECT_EQ(diffuse_shading(single_normal({0, 0, 1}), kOverhead).at(0, 0), 1.0);
  EXPECT_EQ(diffuse_shading(single_normal({1, 0, 0}), kOverhead).at(0, 0), 0.5);
  // <n, w> = -0.3: back-facing, clamped to ambient.
  const Vec3 back{std::sqrt(1.0 - 0.09), 0.0, -0.3};
  EXPECT_EQ(diffuse_shading(single_normal(back), kOverhead).at(0, 0), 0.5);
}

TEST(ShadowedShading, Examples) {
  const NormalMap n = single_normal({0, 0, 1});
  EXPECT_EQ(shadowed_shading(n, kOverhead, single_mask(0.0)).at(0, 0), 0.5);
  EXPECT_EQ(shadowed_shading(n, kOverhead, single_mask(0.5)).at(0, 0), 0.75);
  EXPECT_EQ(shadowed_shading(n, kOverhead, single_mask(1.0)).at(0, 0), diffuse_shading(n, kOverhead).at(0, 0));
}

TEST(ShadowedShading, RejectsBadIntensitiesAndMismatch) {
  const NormalMap n = single_normal({0, 0, 1});
  LightingParams neg = kOverhead;
  neg.ambient = -0.1;
  EXPECT_THROW(diffuse_shading(n, neg), DataError);
  EXPECT_THROW(shadowed_shading(n, kOverhead, ShadowMask{2, 1, {1.0, 1.0}}), DataError);
}

// Property: ambient is a floor and ambient + directional a ceiling, for any M in [0, 1].
TEST(ShadowedShadingProperty, BoundedByIntensities) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 5000; ++k) {
    const Vec3 n = normalized({g(rng), g(rng), g(rng)});
    const LightingParams l{LightDirection::from_vector({g(rng), g(rng), std::abs(g(rng)) + 1e-3}), u(rng), u(rng)};
    const double s = shadowed_shading(single_normal(n), l, single_mask(u(rng))).at(0, 0);
    EXPECT_GE(s, l.ambient - 1e-15);
    EXPECT_LE(s, l.ambient + l.directional + 1e-15);
  }
}

TEST(Render, Examples) {
  const ImagePlane one = ImagePlane::filled(2, 2, 1, 1.0);
  EXPECT_EQ(render(ImagePlane::filled(2, 2, 1, 0.5), one).at(1, 1), 0.5);
  EXPECT_EQ(render(ImagePlane::filled(2, 2, 1, 0.0), one).at(0, 1), 0.0);
  const ImagePlane rgb(1, 1, 3, {0.6, 0.4, 0.2});
  const ImagePlane out = render(rgb, ImagePlane::filled(1, 1, 1, 0.5));
  EXPECT_EQ(out.at(0, 0, 0), 0.3);
  EXPECT_EQ(out.at(0, 0, 1), 0.2);
  EXPECT_EQ(out.at(0, 0, 2), 0.1);
}

TEST(Render, DimensionMismatchIsAnError) {
  EXPECT_THROW(render(ImagePlane::filled(2, 3, 1, 0.5), ImagePlane::filled(3, 2, 1, 1.0)), DataError);
  EXPECT_THROW(render(ImagePlane::filled(2, 2, 1, 0.5), ImagePlane::filled(2, 2, 3, 1.0)), DataError);
}

TEST(Render, InvalidPixelsAreZero) {
  const ImagePlane shading(2, 1, 1, {0.8, 0.8}, {1, 0});
  const ImagePlane out = render(ImagePlane::filled(2, 1, 3, 0.5), shading);
  EXPECT_EQ(out.at(0, 0, 1), 0.4);
  EXPECT_EQ(out.at(0, 1, 0), 0.0);
  EXPECT_FALSE(out.valid(1));
}

TEST(Relight, UnitMaskReproducesDiffuseBitForBit) {
  SceneSpec spec;
  spec.kind = SceneKind::GaussianBump;
  spec.width = spec.height = 32;
  const DepthMap depth = make_scene(spec);
  const NormalMap n = compute_normals(depth_to_points(depth));
  const LightingParams l{LightDirection::from_angles(40.0, 35.0), 0.3, 0.6};
  const ImagePlane a = diffuse_shading(n, l);
  const ImagePlane b = shadowed_shading(n, l, ShadowMask{32, 32, std::vector<double>(32 * 32, 1.0)});
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(Relight, OverheadLightOnPlaneIsUniform) {
  const DepthMap flat = DepthMap::filled(16, 16, 0.25, 1.0);
  const RenderResult r = relight(flat, ImagePlane::filled(16, 16, 1, 0.65), kOverhead);
  for (double v : r.image.values()) EXPECT_EQ(v, 0.65 * 1.0);
}

}  // namespace
}  // namespace relight

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relight/error.hpp"
#include "relight/geometry.hpp"
#include "relight/scene.hpp"

namespace relight {
namespace {

TEST(DepthMap, RejectsBadShapesAndValues) {
  EXPECT_THROW(DepthMap(1, 4, 1.0, std::vector<double>(4, 0.0)), DataError);
  EXPECT_THROW(DepthMap(2, 2, 0.0, std::vector<double>(4, 0.0)), DataError);
  EXPECT_THROW(DepthMap(2, 2, 1.0, std::vector<double>(3, 0.0)), DataError);
  EXPECT_THROW(DepthMap(2, 2, 1.0, {0.0, NAN, 0.0, 0.0}), DataError);
  // Non-finite values are allowed where the mask is off.
  EXPECT_NO_THROW(DepthMap(2, 2, 1.0, {0.0, NAN, 0.0, 0.0}, {1, 0, 1, 1}));
}

TEST(DepthToPoints, ConstantPlane) {
  const PointGrid p = depth_to_points(DepthMap::filled(2, 2, 1.0, 1.0));
  EXPECT_EQ(p.at(0, 0), Vec3(0.0, 1.0, -1.0));
  EXPECT_EQ(p.at(0, 1), Vec3(1.0, 1.0, -1.0));
  EXPECT_EQ(p.at(1, 0), Vec3(0.0, 0.0, -1.0));
  EXPECT_EQ(p.at(1, 1), Vec3(1.0, 0.0, -1.0));
}

TEST(DepthToPoints, TopLeftPixelWithHalfSpacing) {
  const PointGrid p = depth_to_points(DepthMap(2, 2, 0.5, {0.0, 1.0, 1.0, 1.0}));
  EXPECT_EQ(p.at(0, 0), Vec3(0.0, 0.5, 0.0));
}

TEST(DepthToPoints, BumpApexAtCentre) {
  // Odd size so a pixel sits exactly on the apex; depth 1 - exp(-r^2).
  const int n = 33;
  const double s = 0.125;
  std::vector<double> d(n * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = centred_x(c, n, s), y = centred_y(r, n, s);
      d[r * n + c] = 1.0 - std::exp(-(x * x + y * y));
    }
  }
  const PointGrid p = depth_to_points(DepthMap(n, n, s, d));
  EXPECT_EQ(p.at(n / 2, n / 2).z, 0.0);
}

TEST(DepthToPoints, NegatedZReproducesDepth) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> d(7 * 5);
  for (double& v : d) v = u(rng);
  const DepthMap depth(7, 5, 0.3, d);
  const PointGrid p = depth_to_points(depth);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(-p.points[i].z, d[i]);
}

TEST(Normals, ConstantPlaneFacesCamera) {
  const NormalMap n = compute_normals(depth_to_points(DepthMap::filled(6, 5, 0.2, 3.0)));
  for (const Vec3& v : n.normals) EXPECT_EQ(v, Vec3(0.0, 0.0, 1.0));
}

TEST(Normals, TiltedPlaneMatchesClosedForm) {
  // depth = -x tan 30, so the surface rises toward +x.
  const int w = 8, h = 6;
  const double t = std::tan(std::numbers::pi / 6.0);
  std::vector<double> d(w * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) d[r * w + c] = -c * t;
  }
  const NormalMap n = compute_normals(depth_to_points(DepthMap(w, h, 1.0, d)));
  // Linear surface: central and one-sided differences agree, borders included.
  for (const Vec3& v : n.normals) {
    EXPECT_NEAR(v.x, -0.5, 1e-12);
    EXPECT_NEAR(v.y, 0.0, 1e-12);
    EXPECT_NEAR(v.z, std::sqrt(3.0) / 2.0, 1e-12);
  }
}

TEST(Normals, TiltAlongImageRowsPointsUpTheSlope) {
  // Depth grows with row index: the surface is higher toward the top of the image (+y).
  std::vector<double> d(4 * 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) d[r * 4 + c] = r * 1.0;
  }
  const NormalMap n = compute_normals(depth_to_points(DepthMap(4, 4, 1.0, d)));
  const Vec3 expected = normalized({0.0, -1.0, 1.0});
  for (const Vec3& v : n.normals) {
    EXPECT_NEAR(v.x, expected.x, 1e-12);
    EXPECT_NEAR(v.y, expected.y, 1e-12);
    EXPECT_NEAR(v.z, expected.z, 1e-12);
  }
}

TEST(Normals, IsolatedPixelIsDegenerate) {
  std::vector<std::uint8_t> valid(9, 0);
  valid[4] = 1;
  const NormalMap n = compute_normals(depth_to_points(DepthMap(3, 3, 1.0, std::vector<double>(9, 2.0), valid)));
  EXPECT_TRUE(n.degenerate[4]);
  EXPECT_EQ(n.normals[4], Vec3(0.0, 0.0, 1.0));
}

TEST(Normals, EmptyValidRegionIsAnError) {
  EXPECT_THROW(compute_normals(depth_to_points(DepthMap(3, 3, 1.0, std::vector<double>(9, 0.0),
                                                        std::vector<std::uint8_t>(9, 0)))),
               DataError);
}

TEST(Normals, InteriorErrorShrinksQuadratically) {
  // Paraboloid depth: central differences are exact for quadratics, so compare a cubic.
  auto max_error = [](int n) {
    const double s = 2.0 / (n - 1);
    std::vector<double> d(n * n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double x = centred_x(c, n, s);
        d[r * n + c] = 0.3 * x * x * x;
      }
    }
    const NormalMap nm = compute_normals(depth_to_points(DepthMap(n, n, s, d)));
    double worst = 0.0;
    for (int r = 1; r < n - 1; ++r) {
      for (int c = 1; c < n - 1; ++c) {
        const double x = centred_x(c, n, s);
        const Vec3 exact = normalized({0.9 * x * x, 0.0, 1.0});
        worst = std::max(worst, norm(nm.normals[r * n + c] - exact));
      }
    }
    return worst;
  };
  const double coarse = max_error(17), fine = max_error(33);
  EXPECT_LT(fine, coarse / 3.0);
}

// Property: every emitted normal is unit length and camera-facing, for random depths
// and random masks.
TEST(NormalsProperty, UnitAndCameraFacing) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::bernoulli_distribution keep(0.8);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 3 + trial % 9, h = 2 + trial % 7;
    std::vector<double> d(w * h);
    std::vector<std::uint8_t> valid(w * h);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = u(rng);
      valid[i] = keep(rng);
    }
    valid[0] = 1;
    const NormalMap n = compute_normals(depth_to_points(DepthMap(w, h, 0.1 + trial * 0.01, d, valid)));
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!valid[i]) continue;
      EXPECT_NEAR(norm(n.normals[i]), 1.0, 1e-12);
      EXPECT_GE(n.normals[i].z, 0.0);
    }
  }
}

}  // namespace
}  // namespace relight

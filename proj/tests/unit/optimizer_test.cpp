#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "relight/error.hpp"
#include "relight/optimizer.hpp"
#include "relight/scene.hpp"

namespace relight {
namespace {

TEST(Adam, FirstStepByHand) {
  // m = 0.1 g, v = 0.001 g^2; bias correction turns both back into g and g^2,
  // so the step is lr * g / (|g| + eps).
  AdamState s(1);
  const std::vector<double> g{0.02};
  const std::vector<double> d = s.update(g);
  EXPECT_NEAR(d[0], -1e-4 * 0.02 / (0.02 + 1e-8), 1e-18);
  EXPECT_EQ(s.step, 1);
  EXPECT_NEAR(s.m[0], 0.002, 1e-18);
  EXPECT_NEAR(s.v[0], 4e-7, 1e-20);
}

TEST(Adam, SecondStepByHand) {
  AdamState s(1, AdamConfig{0.01, 0.9, 0.999, 1e-8});
  s.update(std::vector<double>{1.0});
  const std::vector<double> d = s.update(std::vector<double>{-1.0});
  const double m = 0.9 * 0.1 - 0.1, v = 0.999 * 0.001 + 0.001;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(d[0], -0.01 * mhat / (std::sqrt(vhat) + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesTheParameter) {
  AdamState s(2);
  const std::vector<std::string> names{"ambient", "depth[3]"};
  try {
    s.update(std::vector<double>{0.1, std::numeric_limits<double>::quiet_NaN()}, names);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("depth[3]"), std::string::npos);
  }
}

FitParams start() { return FitParams{{LightDirection::from_angles(10.0, 50.0), 0.4, 0.5}, std::vector<double>(16, 0.0)}; }

TEST(AdamStep, ZeroGradientLeavesParamsUnchanged) {
  FitParams p = start();
  const FitParams before = p;
  GradientSet g;
  g.depth.assign(16, 0.0);
  AdamState s;
  adam_step(s, p, g, FreeParams{true, true, true, true});
  EXPECT_EQ(p.lighting.direction.vec(), before.lighting.direction.vec());
  EXPECT_EQ(p.lighting.ambient, before.lighting.ambient);
  EXPECT_EQ(p.lighting.directional, before.lighting.directional);
  EXPECT_EQ(p.depth, before.depth);
}

TEST(AdamStep, LightStaysUnitAndIntensitiesNonNegative) {
  FitParams p = start();
  p.lighting.ambient = 0.0;
  AdamState s(0, AdamConfig{0.05});
  GradientSet g;
  g.omega = {0.3, -0.8, 0.1};
  g.ambient = 5.0;  // pushes ambient below zero
  for (int k = 0; k < 20; ++k) {
    adam_step(s, p, g, FreeParams{true, true, false, false});
    EXPECT_NEAR(norm(p.lighting.direction.vec()), 1.0, 1e-12);
    EXPECT_GE(p.lighting.ambient, 0.0);
  }
  EXPECT_EQ(p.lighting.ambient, 0.0);
}

TEST(FreeParams, ParseAndPrint) {
  EXPECT_EQ(FreeParams::parse("omega,ambient").to_string(), "omega,ambient");
  EXPECT_TRUE(FreeParams::parse("light").omega);
  EXPECT_THROW(FreeParams::parse("albedo"), UsageError);
  EXPECT_THROW(FreeParams::parse(""), UsageError);
}

struct BumpFit {
  DepthMap depth;
  ImagePlane albedo;
  LightingParams truth;
  ImagePlane target;
};

BumpFit bump_fit(int n = 24) {
  SceneSpec spec;
  spec.kind = SceneKind::GaussianBump;
  spec.width = spec.height = n;
  DepthMap depth = make_scene(spec);
  ImagePlane albedo = ImagePlane::filled(n, n, 1, 0.65);
  const LightingParams truth{LightDirection::from_angles(30.0, 45.0), 0.5, 0.5};
  ImagePlane target = relight(depth, albedo, truth).image;
  return {std::move(depth), std::move(albedo), truth, std::move(target)};
}

TEST(Fit, ZeroBudgetReturnsInitialization) {
  const BumpFit b = bump_fit();
  const LightingParams init{LightDirection::from_angles(0.0, 60.0), 0.3, 0.5};
  const FitResult r = fit(FitProblem{b.target, b.depth, b.albedo, init, {}, FreeParams{true, true, false, false}, {},
                                     {}, {}, 0});
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.params.lighting.direction.vec(), init.direction.vec());
  EXPECT_EQ(r.params.lighting.ambient, 0.3);
  ASSERT_EQ(r.loss_trace.size(), 1u);
  EXPECT_GT(r.loss_trace[0], 0.0);
}

TEST(Fit, RecoversAmbientAlone) {
  const BumpFit b = bump_fit();
  LightingParams init = b.truth;
  init.ambient = 0.3;
  FitProblem p{b.target, b.depth, b.albedo, init, {}, FreeParams{false, true, false, false}, {}, {}, {}, 600};
  p.adam.lr = 5e-3;
  const FitResult r = fit(p);
  EXPECT_NEAR(r.params.lighting.ambient, 0.5, 1e-3);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front() * 1e-3);
}

TEST(Fit, LightFitReducesLossAndApproachesTruth) {
  const BumpFit b = bump_fit();
  LightingParams init = b.truth;
  init.direction = LightDirection::from_angles(45.0, 40.0);
  FitProblem p{b.target, b.depth, b.albedo, init, {}, FreeParams{true, false, false, false}, {}, {}, {}, 300};
  p.adam.lr = 5e-3;
  const FitResult r = fit(p);
  const double before = angle_between_deg(init.direction.vec(), b.truth.direction.vec());
  const double after = angle_between_deg(r.params.lighting.direction.vec(), b.truth.direction.vec());
  EXPECT_LT(after, before / 4.0);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front() / 10.0);
}

TEST(Fit, DepthStepMovesTowardTarget) {
  // Target bump is taller; one small step on depth must lower the loss.
  BumpFit b = bump_fit(16);
  SceneSpec tall;
  tall.kind = SceneKind::GaussianBump;
  tall.width = tall.height = 16;
  tall.bump_amplitude = 0.6;
  const ImagePlane target = relight(make_scene(tall), b.albedo, b.truth).image;
  FitProblem p{target, b.depth, b.albedo, b.truth, {}, FreeParams{false, false, false, true}, {}, {}, {}, 5};
  p.adam.lr = 1e-3;
  const FitResult r = fit(p);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(Fit, ToleranceStopsEarly) {
  const BumpFit b = bump_fit(16);
  FitProblem p{b.target, b.depth, b.albedo, b.truth, {}, FreeParams{false, true, false, false}, {}, {}, {}, 100, 1e-9};
  const FitResult r = fit(p);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.iterations, 100);
}

TEST(Fit, RejectsMismatchedTarget) {
  const BumpFit b = bump_fit(16);
  EXPECT_THROW(fit(FitProblem{ImagePlane::filled(8, 8, 1, 0.5), b.depth, b.albedo, b.truth, {},
                              FreeParams{true, false, false, false}}),
               DataError);
}

TEST(AngleBetween, Basics) {
  EXPECT_NEAR(angle_between_deg({1, 0, 0}, {0, 1, 0}), 90.0, 1e-12);
  EXPECT_EQ(angle_between_deg({0, 0, 1}, {0, 0, 1}), 0.0);
  EXPECT_NEAR(angle_between_deg(LightDirection::from_angles(0, 45).vec(), LightDirection::from_angles(0, 65).vec()),
              20.0, 1e-9);
}

}  // namespace
}  // namespace relight

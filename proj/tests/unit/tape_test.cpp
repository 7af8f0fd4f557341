#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "relight/tape.hpp"
#include "relight/vec3.hpp"

namespace relight::ad {
namespace {

// Checks d(out)/d(leaf) from one reverse sweep against central differences computed
// by replaying the tape with a perturbed leaf.
void expect_adjoints_match_replay(const Tape& tape, Slot out, const std::vector<Slot>& leaves, double tol = 1e-7) {
  std::vector<double> adj(tape.slot_count(), 0.0);
  adj[out] = 1.0;
  tape.backward(adj);
  const double h = 1e-6;
  for (Slot leaf : leaves) {
    std::vector<double> v(tape.values().begin(), tape.values().end());
    v[leaf] += h;
    tape.replay(v);
    const double up = v[out];
    v.assign(tape.values().begin(), tape.values().end());
    v[leaf] -= h;
    tape.replay(v);
    const double down = v[out];
    const double fd = (up - down) / (2.0 * h);
    EXPECT_NEAR(adj[leaf], fd, tol * std::max(1.0, std::abs(fd))) << "leaf slot " << leaf;
  }
}

TEST(Tape, ReplayReproducesRecordedValues) {
  Tape t;
  const Slot a = t.leaf(1.5), b = t.leaf(-0.25);
  const Slot c = t.mul(t.add(a, b), t.sub(a, t.neg(b)));
  std::vector<double> v(t.values().begin(), t.values().end());
  t.replay(v);
  EXPECT_EQ(v[c], t.value(c));
  EXPECT_EQ(t.value(c), (1.5 - 0.25) * (1.5 - 0.25));
}

TEST(Tape, Arithmetic) {
  Tape t;
  const Slot a = t.leaf(0.7), b = t.leaf(-1.3), k = t.constant(2.0);
  const Slot out = t.mul(t.add(t.mul(a, b), t.neg(a)), t.sub(k, b));
  expect_adjoints_match_replay(t, out, {a, b});
}

TEST(Tape, ClampHasZeroSubgradientAtKink) {
  Tape t;
  const Slot a = t.leaf(0.0);
  const Slot out = t.clamp_min0(a);
  std::vector<double> adj(t.slot_count(), 0.0);
  adj[out] = 1.0;
  t.backward(adj);
  EXPECT_EQ(adj[a], 0.0);

  Tape pos;
  const Slot p = pos.leaf(0.3);
  expect_adjoints_match_replay(pos, pos.clamp_min0(p), {p});
}

TEST(Tape, VectorPrimitives) {
  Tape t;
  const Slot3 a{t.leaf(0.3), t.leaf(-1.1), t.leaf(0.8)};
  const Slot3 b{t.leaf(1.2), t.leaf(0.4), t.leaf(-0.5)};
  const Slot3 c = t.cross3(a, b);
  const Slot3 n = t.normalize3(c);
  const Slot3 w{t.constant(0.2), t.constant(0.5), t.constant(0.9)};
  const Slot out = t.dot3(n, w);
  expect_adjoints_match_replay(t, out, {a.x, a.y, a.z, b.x, b.y, b.z});
}

TEST(Tape, Bilinear) {
  Tape t;
  const std::array<Slot, 4> taps{t.leaf(1.0), t.leaf(2.0), t.leaf(-3.0), t.leaf(0.5)};
  const Slot out = t.bilinear(taps, {0.1, 0.2, 0.3, 0.4});
  EXPECT_DOUBLE_EQ(t.value(out), 0.1 + 0.4 - 0.9 + 0.2);
  std::vector<double> adj(t.slot_count(), 0.0);
  adj[out] = 1.0;
  t.backward(adj);
  EXPECT_EQ(adj[taps[2]], 0.3);
}

TEST(Tape, RayMinDistanceRoutesThroughArgmin) {
  Tape t;
  const Slot3 o{t.leaf(0.1), t.leaf(0.2), t.leaf(-0.3)};
  const relight::Vec3 wv = relight::normalized({0.6, 0.3, 0.9});
  const Slot3 w{t.leaf(wv.x), t.leaf(wv.y), t.leaf(wv.z)};
  const std::vector<double> xy{0.5, 0.4, 1.0, 0.6, 1.5, 0.8};
  const std::vector<Slot> z{t.leaf(0.9), t.leaf(0.35), t.leaf(1.4)};
  const Slot d = t.ray_min_distance(o, w, z, xy);
  ASSERT_GE(t.nodes().back().tag, 0);
  // The adjoint of a non-minimizing sample is exactly zero.
  std::vector<double> adj(t.slot_count(), 0.0);
  adj[d] = 1.0;
  t.backward(adj);
  for (int j = 0; j < 3; ++j) {
    if (j != t.nodes().back().tag) EXPECT_EQ(adj[z[j]], 0.0);
  }
  expect_adjoints_match_replay(t, d, {o.x, o.y, o.z, w.x, w.y, w.z, z[0], z[1], z[2]});
}

TEST(Tape, RayMinDistanceWithoutSamplesIsSentinel) {
  Tape t;
  const Slot3 o{t.leaf(0), t.leaf(0), t.leaf(0)};
  const Slot3 w{t.leaf(0), t.leaf(0), t.leaf(1)};
  const Slot d = t.ray_min_distance(o, w, {}, {});
  EXPECT_TRUE(std::isinf(t.value(d)));
  EXPECT_EQ(t.nodes().back().tag, -1);
  const Slot m = t.shadow_sigmoid(d, 3.0);
  EXPECT_EQ(t.value(m), 1.0);
  std::vector<double> adj(t.slot_count(), 0.0);
  adj[m] = 1.0;
  t.backward(adj);
  for (double a : adj) EXPECT_TRUE(std::isfinite(a));
  EXPECT_EQ(adj[w.z], 0.0);
}

TEST(Tape, ShadowSigmoid) {
  Tape t;
  const Slot d = t.leaf(0.4);
  const Slot m = t.shadow_sigmoid(d, 2.5);
  expect_adjoints_match_replay(t, m, {d});

  Tape zero;
  const Slot z = zero.leaf(0.0);
  const Slot mz = zero.shadow_sigmoid(z, 2.5);
  std::vector<double> adj(zero.slot_count(), 0.0);
  adj[mz] = 1.0;
  zero.backward(adj);
  EXPECT_EQ(zero.value(mz), 0.0);
  EXPECT_EQ(adj[z], 0.0);
}

TEST(Tape, ZeroSeedGivesZeroAdjoints) {
  Tape t;
  const Slot a = t.leaf(2.0);
  t.mul(a, a);
  std::vector<double> adj(t.slot_count(), 0.0);
  t.backward(adj);
  for (double v : adj) EXPECT_EQ(v, 0.0);
}

TEST(Tape, ClearKeepsNothing) {
  Tape t;
  t.add(t.leaf(1), t.leaf(2));
  t.clear();
  EXPECT_EQ(t.slot_count(), 0u);
  EXPECT_TRUE(t.nodes().empty());
}

}  // namespace
}  // namespace relight::ad

#include "relight/tape.hpp"

#include <cassert>
#include <cmath>

#include "relight/shadow.hpp"
#include "relight/vec3.hpp"

namespace relight::ad {

namespace {

Vec3 load3(std::span<const double> v, std::span<const Slot> in, std::size_t at) {
  return {v[in[at]], v[in[at + 1]], v[in[at + 2]]};
}

void store3(std::span<double> v, Slot out, const Vec3& x) {
  v[out] = x.x;
  v[out + 1] = x.y;
  v[out + 2] = x.z;
}

void accumulate3(std::span<double> adj, std::span<const Slot> in, std::size_t at, const Vec3& g) {
  adj[in[at]] += g.x;
  adj[in[at + 1]] += g.y;
  adj[in[at + 2]] += g.z;
}

// Forward rule shared by recording and replay. Returns the argmin for RayMinDistance.
std::int32_t evaluate(const Node& n, std::span<const Slot> in, std::span<const double> aux, std::span<double> v) {
  switch (n.op) {
    case Op::Leaf:
    case Op::Constant:
      return 0;
    case Op::Add:
      v[n.out] = v[in[0]] + v[in[1]];
      return 0;
    case Op::Sub:
      v[n.out] = v[in[0]] - v[in[1]];
      return 0;
    case Op::Mul:
      v[n.out] = v[in[0]] * v[in[1]];
      return 0;
    case Op::Neg:
      v[n.out] = -v[in[0]];
      return 0;
    case Op::ClampMin0:
      v[n.out] = v[in[0]] > 0.0 ? v[in[0]] : 0.0;
      return 0;
    case Op::Dot3:
      v[n.out] = dot(load3(v, in, 0), load3(v, in, 3));
      return 0;
    case Op::Cross3:
      store3(v, n.out, cross(load3(v, in, 0), load3(v, in, 3)));
      return 0;
    case Op::Normalize3:
      store3(v, n.out, normalized(load3(v, in, 0)));
      return 0;
    case Op::Bilinear: {
      BilinearStencil s;
      for (int k = 0; k < 4; ++k) {
        s.index[k] = static_cast<std::uint32_t>(k);
        s.weight[k] = aux[k];
      }
      v[n.out] = bilinear_eval(s, [&](std::uint32_t k) { return v[in[k]]; });
      return 0;
    }
    case Op::RayMinDistance: {
      const Vec3 origin = load3(v, in, 0);
      const Vec3 w = load3(v, in, 3);
      double best = kUnoccluded;
      std::int32_t arg = -1;
      for (std::uint32_t j = 0; j + 6 < n.in_count; ++j) {
        const Vec3 s{aux[2 * j], aux[2 * j + 1], v[in[6 + j]]};
        const double d = norm(cross(s - origin, w));
        if (d < best) {
          best = d;
          arg = static_cast<std::int32_t>(j);
        }
      }
      v[n.out] = best;
      return arg;
    }
    case Op::ShadowSigmoid:
      v[n.out] = visibility(v[in[0]], aux[0]);
      return 0;
  }
  return 0;
}

}  // namespace

std::size_t output_count(Op op) {
  switch (op) {
    case Op::Cross3:
    case Op::Normalize3:
      return 3;
    default:
      return 1;
  }
}

Slot Tape::emit(Op op, std::span<const Slot> in, std::span<const double> aux, std::span<const double> out,
                std::int32_t tag) {
  Node n{op,
         static_cast<std::uint32_t>(inputs_.size()),
         static_cast<std::uint32_t>(in.size()),
         static_cast<Slot>(values_.size()),
         static_cast<std::uint32_t>(aux_.size()),
         static_cast<std::uint32_t>(aux.size()),
         tag};
  inputs_.insert(inputs_.end(), in.begin(), in.end());
  aux_.insert(aux_.end(), aux.begin(), aux.end());
  if (!out.empty()) {
    values_.insert(values_.end(), out.begin(), out.end());
  } else {
    values_.resize(values_.size() + output_count(op));
    n.tag = evaluate(n, node_inputs(n), node_aux(n), values_);
  }
  nodes_.push_back(n);
  return n.out;
}

Slot Tape::leaf(double value) { return emit(Op::Leaf, {}, {}, std::span<const double>(&value, 1)); }

Slot Tape::constant(double value) { return emit(Op::Constant, {}, {}, std::span<const double>(&value, 1)); }

Slot Tape::add(Slot a, Slot b) {
  const Slot in[] = {a, b};
  return emit(Op::Add, in, {}, {});
}

Slot Tape::sub(Slot a, Slot b) {
  const Slot in[] = {a, b};
  return emit(Op::Sub, in, {}, {});
}

Slot Tape::mul(Slot a, Slot b) {
  const Slot in[] = {a, b};
  return emit(Op::Mul, in, {}, {});
}

Slot Tape::neg(Slot a) { return emit(Op::Neg, std::span<const Slot>(&a, 1), {}, {}); }

Slot Tape::clamp_min0(Slot a) { return emit(Op::ClampMin0, std::span<const Slot>(&a, 1), {}, {}); }

Slot Tape::dot3(Slot3 a, Slot3 b) {
  const Slot in[] = {a.x, a.y, a.z, b.x, b.y, b.z};
  return emit(Op::Dot3, in, {}, {});
}

Slot3 Tape::cross3(Slot3 a, Slot3 b) {
  const Slot in[] = {a.x, a.y, a.z, b.x, b.y, b.z};
  const Slot o = emit(Op::Cross3, in, {}, {});
  return {o, o + 1, o + 2};
}

Slot3 Tape::normalize3(Slot3 a) {
  const Slot in[] = {a.x, a.y, a.z};
  const Slot o = emit(Op::Normalize3, in, {}, {});
  return {o, o + 1, o + 2};
}

Slot Tape::bilinear(const std::array<Slot, 4>& taps, const std::array<double, 4>& weights) {
  return emit(Op::Bilinear, taps, weights, {});
}

Slot Tape::ray_min_distance(Slot3 origin, Slot3 direction, std::span<const Slot> sample_z,
                            std::span<const double> sample_xy) {
  assert(sample_xy.size() == 2 * sample_z.size());
  const std::uint32_t in_begin = static_cast<std::uint32_t>(inputs_.size());
  inputs_.insert(inputs_.end(), {origin.x, origin.y, origin.z, direction.x, direction.y, direction.z});
  inputs_.insert(inputs_.end(), sample_z.begin(), sample_z.end());
  Node n{Op::RayMinDistance,
         in_begin,
         static_cast<std::uint32_t>(6 + sample_z.size()),
         static_cast<Slot>(values_.size()),
         static_cast<std::uint32_t>(aux_.size()),
         static_cast<std::uint32_t>(sample_xy.size()),
         -1};
  aux_.insert(aux_.end(), sample_xy.begin(), sample_xy.end());
  values_.push_back(0.0);
  n.tag = evaluate(n, node_inputs(n), node_aux(n), values_);
  nodes_.push_back(n);
  return n.out;
}

Slot Tape::shadow_sigmoid(Slot distance, double scale) {
  return emit(Op::ShadowSigmoid, std::span<const Slot>(&distance, 1), std::span<const double>(&scale, 1), {});
}

void Tape::clear() {
  values_.clear();
  nodes_.clear();
  inputs_.clear();
  aux_.clear();
}

void Tape::replay(std::span<double> values) const {
  assert(values.size() == values_.size());
  for (const Node& n : nodes_) evaluate(n, node_inputs(n), node_aux(n), values);
}

void Tape::backward(std::span<double> adj) const {
  assert(adj.size() == values_.size());
  const std::span<const double> v = values_;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& n = *it;
    const auto in = node_inputs(n);
    const auto aux = node_aux(n);
    switch (n.op) {
      case Op::Leaf:
      case Op::Constant:
        break;
      case Op::Add: {
        const double g = adj[n.out];
        adj[in[0]] += g;
        adj[in[1]] += g;
        break;
      }
      case Op::Sub: {
        const double g = adj[n.out];
        adj[in[0]] += g;
        adj[in[1]] -= g;
        break;
      }
      case Op::Mul: {
        const double g = adj[n.out];
        adj[in[0]] += g * v[in[1]];
        adj[in[1]] += g * v[in[0]];
        break;
      }
      case Op::Neg:
        adj[in[0]] -= adj[n.out];
        break;
      case Op::ClampMin0:
        if (v[in[0]] > 0.0) adj[in[0]] += adj[n.out];
        break;
      case Op::Dot3: {
        const double g = adj[n.out];
        accumulate3(adj, in, 0, load3(v, in, 3) * g);
        accumulate3(adj, in, 3, load3(v, in, 0) * g);
        break;
      }
      case Op::Cross3: {
        const Vec3 g{adj[n.out], adj[n.out + 1], adj[n.out + 2]};
        const Vec3 a = load3(v, in, 0);
        const Vec3 b = load3(v, in, 3);
        accumulate3(adj, in, 0, cross(b, g));
        accumulate3(adj, in, 3, cross(g, a));
        break;
      }
      case Op::Normalize3: {
        const Vec3 g{adj[n.out], adj[n.out + 1], adj[n.out + 2]};
        const Vec3 y{v[n.out], v[n.out + 1], v[n.out + 2]};
        const double len = norm(load3(v, in, 0));
        accumulate3(adj, in, 0, (g - y * dot(y, g)) / len);
        break;
      }
      case Op::Bilinear: {
        const double g = adj[n.out];
        for (int k = 0; k < 4; ++k) adj[in[k]] += g * aux[k];
        break;
      }
      case Op::RayMinDistance: {
        const double g = adj[n.out];
        const double d = v[n.out];
        if (n.tag < 0 || d == 0.0 || g == 0.0) break;
        const auto j = static_cast<std::size_t>(n.tag);
        const Vec3 origin = load3(v, in, 0);
        const Vec3 w = load3(v, in, 3);
        const Vec3 rel = Vec3{aux[2 * j], aux[2 * j + 1], v[in[6 + j]]} - origin;
        const Vec3 c_hat = cross(rel, w) / d;
        const Vec3 d_rel = cross(w, c_hat) * g;  // d|rel x w| / d rel
        const Vec3 d_w = cross(c_hat, rel) * g;
        adj[in[2]] -= d_rel.z;  // origin x/y are constants but may still be slots
        adj[in[0]] -= d_rel.x;
        adj[in[1]] -= d_rel.y;
        accumulate3(adj, in, 3, d_w);
        adj[in[6 + j]] += d_rel.z;
        break;
      }
      case Op::ShadowSigmoid:
        adj[in[0]] += adj[n.out] * visibility_slope(v[in[0]], aux[0]);
        break;
    }
  }
}

}  // namespace relight::ad

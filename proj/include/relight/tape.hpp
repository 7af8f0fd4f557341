#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace relight::ad {

/// Primitive operations the tape knows how to replay and differentiate.
enum class Op : std::uint8_t {
  Leaf,            // differentiable input
  Constant,        // non-differentiable input
  Add,
  Sub,
  Mul,
  Neg,
  ClampMin0,       // max(0, a); zero subgradient at 0
  Dot3,
  Cross3,          // 3 outputs
  Normalize3,      // 3 outputs
  Bilinear,        // 4 taps, weights in aux
  RayMinDistance,  // min_j |(s_j - o) x w| over samples; argmin kept in the node tag
  ShadowSigmoid,   // 1 - 4 e^{-kd} / (1 + e^{-kd})^2, k in aux
};

using Slot = std::uint32_t;

struct Slot3 {
  Slot x, y, z;
};

struct Node {
  Op op;
  std::uint32_t in_begin;
  std::uint32_t in_count;
  Slot out;  // outputs occupy [out, out + output_count(op))
  std::uint32_t aux_begin;
  std::uint32_t aux_count;
  std::int32_t tag;
};

/// Wengert list over scalar slots. Multi-output primitives write contiguous slots.
class Tape {
 public:
  Slot leaf(double value);
  Slot constant(double value);

  Slot add(Slot a, Slot b);
  Slot sub(Slot a, Slot b);
  Slot mul(Slot a, Slot b);
  Slot neg(Slot a);
  Slot clamp_min0(Slot a);
  Slot dot3(Slot3 a, Slot3 b);
  Slot3 cross3(Slot3 a, Slot3 b);
  Slot3 normalize3(Slot3 a);
  Slot bilinear(const std::array<Slot, 4>& taps, const std::array<double, 4>& weights);

  /// sample_z[j] pairs with (sample_xy[2j], sample_xy[2j+1]). With no samples the
  /// output is +inf and the tag is -1.
  Slot ray_min_distance(Slot3 origin, Slot3 direction, std::span<const Slot> sample_z,
                        std::span<const double> sample_xy);
  Slot shadow_sigmoid(Slot distance, double scale);

  double value(Slot s) const { return values_[s]; }
  std::span<const double> values() const { return values_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Slot> node_inputs(const Node& n) const {
    return std::span<const Slot>(inputs_).subspan(n.in_begin, n.in_count);
  }
  std::span<const double> node_aux(const Node& n) const {
    return std::span<const double>(aux_).subspan(n.aux_begin, n.aux_count);
  }
  std::size_t slot_count() const { return values_.size(); }

  /// Drops all records but keeps allocated capacity.
  void clear();

  /// Reverse sweep. `adjoint` holds one entry per slot, pre-loaded with the seed,
  /// and receives the accumulated adjoints.
  void backward(std::span<double> adjoint) const;

  /// Forward sweep: recomputes every non-input slot of `values` from the input slots
  /// (leaves and constants) already stored there.
  void replay(std::span<double> values) const;

 private:
  Slot emit(Op op, std::span<const Slot> in, std::span<const double> aux, std::span<const double> out,
            std::int32_t tag = 0);

  std::vector<double> values_;
  std::vector<Node> nodes_;
  std::vector<Slot> inputs_;
  std::vector<double> aux_;
};

std::size_t output_count(Op op);

}  // namespace relight::ad

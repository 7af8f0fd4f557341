#include "relight/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "relight/error.hpp"

namespace relight {

using ad::Slot;
using ad::Slot3;

void record_and_render(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                       const ShadowConfig& cfg, RecordedRender& out) {
  light.validate();
  if (albedo.width() != depth.width() || albedo.height() != depth.height()) {
    throw DataError("albedo dimensions do not match depth map");
  }
  if (!(light.direction.vec().z > 0.0)) throw DataError("light direction must point toward the camera side (z > 0)");
  if (depth.valid_count() == 0) throw DataError("cannot render: valid region is empty");
  const ResolvedShadowConfig rc = resolve(cfg, depth.pixel_spacing());

  ad::Tape& tape = out.tape;
  tape.clear();
  const int W = depth.width();
  const int H = depth.height();
  const double s = depth.pixel_spacing();
  const std::size_t n = depth.size();
  const int ch = albedo.channels();

  out.depth_slots.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.depth_slots[i] = tape.leaf(depth.values()[i]);
  out.albedo_slots.resize(albedo.values().size());
  for (std::size_t i = 0; i < albedo.values().size(); ++i) out.albedo_slots[i] = tape.leaf(albedo.values()[i]);
  const Vec3& w = light.direction.vec();
  out.omega_value = w;
  out.omega = {tape.leaf(w.x), tape.leaf(w.y), tape.leaf(w.z)};
  out.ambient = tape.leaf(light.ambient);
  out.directional = tape.leaf(light.directional);

  const Slot zero = tape.constant(0.0);
  const Slot3 up_normal{zero, zero, tape.constant(1.0)};

  // Surface heights z = -depth.
  std::vector<Slot> pz(n);
  for (std::size_t i = 0; i < n; ++i) pz[i] = tape.neg(out.depth_slots[i]);

  const RayPlanner planner(W, H, s, depth.mask(), light.direction, rc);
  std::vector<SampleSite> sites;
  std::vector<Slot> sample_z;
  std::vector<double> sample_xy;

  out.image_slots.assign(albedo.values().size(), zero);
  std::vector<double> image(albedo.values().size(), 0.0);

  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      if (!depth.valid(r, c)) continue;
      const std::size_t i = depth.index(r, c);

      // Normal.
      Slot3 normal = up_normal;
      const NormalStencil st = normal_stencil(depth.mask(), W, H, r, c);
      if (!st.degenerate()) {
        const Slot3 tx{tape.constant(pixel_world_x(st.col_hi, s) - pixel_world_x(st.col_lo, s)), zero,
                       tape.sub(pz[depth.index(r, st.col_hi)], pz[depth.index(r, st.col_lo)])};
        const Slot3 ty{zero, tape.constant(pixel_world_y(st.row_up, H, s) - pixel_world_y(st.row_down, H, s)),
                       tape.sub(pz[depth.index(st.row_up, c)], pz[depth.index(st.row_down, c)])};
        const Slot3 raw = tape.cross3(tx, ty);
        const Vec3 rv{tape.value(raw.x), tape.value(raw.y), tape.value(raw.z)};
        if (dot(rv, rv) != 0.0) normal = tape.normalize3(raw);
      }
      const Slot lam = tape.clamp_min0(tape.dot3(normal, out.omega));

      // Shadow ray.
      planner.plan(r, c, sites);
      sample_z.clear();
      sample_xy.clear();
      for (const SampleSite& site : sites) {
        const auto& idx = site.stencil.index;
        sample_z.push_back(tape.bilinear({pz[idx[0]], pz[idx[1]], pz[idx[2]], pz[idx[3]]}, site.stencil.weight));
        sample_xy.push_back(site.x);
        sample_xy.push_back(site.y);
      }
      const Slot3 origin{tape.constant(pixel_world_x(c, s)), tape.constant(pixel_world_y(r, H, s)), pz[i]};
      const Slot dmin = tape.ray_min_distance(origin, out.omega, sample_z, sample_xy);
      const Slot mask = tape.shadow_sigmoid(dmin, rc.distance_scale);

      const Slot shading = tape.add(out.ambient, tape.mul(tape.mul(mask, out.directional), lam));
      for (int k = 0; k < ch; ++k) {
        const std::size_t v = i * static_cast<std::size_t>(ch) + static_cast<std::size_t>(k);
        out.image_slots[v] = tape.mul(out.albedo_slots[v], shading);
        image[v] = tape.value(out.image_slots[v]);
      }
    }
  }
  out.image = ImagePlane(W, H, ch, std::move(image), std::vector<std::uint8_t>(depth.mask().begin(), depth.mask().end()));
}

RecordedRender record_and_render(const DepthMap& depth, const ImagePlane& albedo, const LightingParams& light,
                                 const ShadowConfig& cfg) {
  RecordedRender out;
  record_and_render(depth, albedo, light, cfg, out);
  return out;
}

GradientSet backward(const RecordedRender& rec, std::span<const double> seed) {
  if (seed.size() != rec.image_slots.size()) {
    throw DataError("seed has " + std::to_string(seed.size()) + " entries but the image has " +
                    std::to_string(rec.image_slots.size()));
  }
  std::vector<double> adj(rec.tape.slot_count(), 0.0);
  for (std::size_t k = 0; k < seed.size(); ++k) adj[rec.image_slots[k]] += seed[k];
  rec.tape.backward(adj);

  GradientSet g;
  g.depth.resize(rec.depth_slots.size());
  for (std::size_t i = 0; i < g.depth.size(); ++i) g.depth[i] = adj[rec.depth_slots[i]];
  g.albedo.resize(rec.albedo_slots.size());
  for (std::size_t i = 0; i < g.albedo.size(); ++i) g.albedo[i] = adj[rec.albedo_slots[i]];
  const Vec3 raw{adj[rec.omega.x], adj[rec.omega.y], adj[rec.omega.z]};
  const Vec3& w = rec.omega_value;
  g.omega = raw - w * dot(raw, w);
  g.ambient = adj[rec.ambient];
  g.directional = adj[rec.directional];
  return g;
}

std::size_t count_occluding(const ad::Tape& tape, double threshold) {
  const auto nodes = tape.nodes();
  std::size_t count = 0;
  for (const ad::Node& n : nodes) {
    if (n.op != ad::Op::ShadowSigmoid) continue;
    if (tape.value(n.out) < threshold) ++count;
  }
  return count;
}

ImageLoss mse_loss_to(const ImagePlane& target) {
  return [target](const ImagePlane& image) { return recon_loss_grad(image, target, target.mask()); };
}

double FdReport::max_rel_error_for(const std::string& prefix) const {
  double worst = 0.0;
  for (const FdEntry& e : entries) {
    if (!e.stable || e.name.rfind(prefix, 0) != 0) continue;
    worst = std::max(worst, e.truncation_limited ? e.extrapolated_rel_error : e.rel_error);
  }
  return worst;
}

namespace {

// Discrete state that must not change between perturbed evaluations.
struct BranchState {
  std::vector<int> argmin;
  std::vector<std::uint8_t> lit;

  bool operator==(const BranchState&) const = default;
};

struct Evaluation {
  double loss = 0.0;
  BranchState branches;
};

Evaluation evaluate(const FdScene& scene, const DepthMap& depth, const LightingParams& light, const SamplePlan& plan) {
  const RenderResult r = relight_planned(depth, scene.albedo, light, scene.shadow, plan);
  Evaluation e;
  e.loss = scene.loss(r.image).value;
  e.branches.argmin = r.trace.argmin;
  e.branches.lit.resize(r.normals.normals.size());
  for (std::size_t i = 0; i < e.branches.lit.size(); ++i) {
    e.branches.lit[i] = dot(r.normals.normals[i], light.direction.vec()) > 0.0 ? 1 : 0;
  }
  return e;
}

}  // namespace

FdReport finite_difference_check(const FdScene& scene, const FdParams& params, double h, double tol,
                                 double abs_floor) {
  if (!scene.loss) throw DataError("finite difference check needs a loss");
  const SamplePlan plan = plan_samples(scene.depth, scene.lighting.direction, scene.shadow);
  const Evaluation base = evaluate(scene, scene.depth, scene.lighting, plan);

  const RecordedRender rec = record_and_render(scene.depth, scene.albedo, scene.lighting, scene.shadow);
  const LossGradient lg = scene.loss(rec.image);
  const GradientSet grad = backward(rec, lg.d_pred);

  FdReport report;
  report.tolerance = tol;
  auto rel = [abs_floor](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), abs_floor});
  };
  // `at(delta)` evaluates the loss with the coordinate moved by delta.
  auto probe = [&](std::string name, double analytic, auto&& at) {
    const Evaluation plus = at(h), minus = at(-h);
    FdEntry e;
    e.name = std::move(name);
    e.analytic = analytic;
    e.numeric = (plus.loss - minus.loss) / (2.0 * h);
    e.stable = plus.branches == base.branches && minus.branches == base.branches;
    e.rel_error = rel(e.analytic, e.numeric);
    if (!e.stable) {
      ++report.excluded;
      report.entries.push_back(std::move(e));
      return;
    }
    double counted = e.rel_error;
    if (e.rel_error >= 0.5 * tol) {
      const Evaluation plus2 = at(2.0 * h), minus2 = at(-2.0 * h);
      if (plus2.branches == base.branches && minus2.branches == base.branches) {
        const double wide = (plus2.loss - minus2.loss) / (4.0 * h);
        const double truncation = std::abs(wide - e.numeric) / 3.0;
        e.truncation_limited = truncation > 0.5 * tol * std::max({std::abs(e.analytic), std::abs(e.numeric), abs_floor});
        e.extrapolated_rel_error = rel(e.analytic, (4.0 * e.numeric - wide) / 3.0);
        if (e.truncation_limited && e.extrapolated_rel_error < tol) {
          ++report.truncation_excluded;
          counted = e.extrapolated_rel_error;
        } else {
          e.truncation_limited = false;
        }
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, counted);
    report.entries.push_back(std::move(e));
  };

  std::vector<double> values(scene.depth.values().begin(), scene.depth.values().end());
  for (std::size_t p : params.depth_pixels) {
    if (p >= scene.depth.size()) throw DataError("finite difference pixel out of range");
    probe("depth[" + std::to_string(p) + "]", grad.depth[p], [&](double delta) {
      std::vector<double> v = values;
      v[p] += delta;
      return evaluate(scene, scene.depth.with_values(std::move(v)), scene.lighting, plan);
    });
  }
  if (params.ambient) {
    probe("ambient", grad.ambient, [&](double delta) {
      LightingParams l = scene.lighting;
      l.ambient += delta;
      return evaluate(scene, scene.depth, l, plan);
    });
  }
  if (params.directional) {
    probe("directional", grad.directional, [&](double delta) {
      LightingParams l = scene.lighting;
      l.directional += delta;
      return evaluate(scene, scene.depth, l, plan);
    });
  }
  if (params.omega_tangents) {
    const Vec3 w = scene.lighting.direction.vec();
    const Vec3 helper = std::abs(w.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 t1 = normalized(cross(w, helper));
    const Vec3 t2 = cross(w, t1);
    int k = 0;
    for (const Vec3& t : {t1, t2}) {
      probe("omega_t" + std::to_string(++k), dot(grad.omega, t), [&](double delta) {
        LightingParams l = scene.lighting;
        l.direction = LightDirection::from_vector(w + t * delta);
        return evaluate(scene, scene.depth, l, plan);
      });
    }
  }
  return report;
}

}  // namespace relight

#include "relight/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "relight/error.hpp"

namespace relight {

std::vector<double> AdamState::update(std::span<const double> grads, std::span<const std::string> names) {
  if (m.size() != grads.size()) throw DataError("optimizer state does not match the parameter count");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      const std::string name = i < names.size() ? names[i] : "parameter[" + std::to_string(i) + "]";
      throw DataError("non-finite gradient for " + name);
    }
  }
  ++step;
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  std::vector<double> delta(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    delta[i] = -config.lr * mhat / (std::sqrt(vhat) + config.eps);
  }
  return delta;
}

FreeParams FreeParams::parse(const std::string& text) {
  FreeParams f;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "omega" || item == "light") {
      f.omega = true;
    } else if (item == "ambient") {
      f.ambient = true;
    } else if (item == "directional") {
      f.directional = true;
    } else if (item == "depth") {
      f.depth = true;
    } else {
      throw UsageError("free parameter '" + item + "': expected omega, ambient, directional or depth");
    }
  }
  if (!f.any()) throw UsageError("free parameters: at least one is required");
  return f;
}

std::string FreeParams::to_string() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(omega, "omega");
  add(ambient, "ambient");
  add(directional, "directional");
  add(depth, "depth");
  return s;
}

void adam_step(AdamState& state, FitParams& params, const GradientSet& grads, const FreeParams& free) {
  std::vector<double> g;
  std::vector<std::string> names;
  if (free.omega) {
    g.insert(g.end(), {grads.omega.x, grads.omega.y, grads.omega.z});
    for (const char* n : {"omega.x", "omega.y", "omega.z"}) names.emplace_back(n);
  }
  if (free.ambient) {
    g.push_back(grads.ambient);
    names.emplace_back("ambient");
  }
  if (free.directional) {
    g.push_back(grads.directional);
    names.emplace_back("directional");
  }
  if (free.depth) {
    if (grads.depth.size() != params.depth.size()) throw DataError("depth gradient does not match depth map");
    g.insert(g.end(), grads.depth.begin(), grads.depth.end());
    for (std::size_t i = 0; i < grads.depth.size(); ++i) names.push_back("depth[" + std::to_string(i) + "]");
  }
  if (state.step == 0 && state.m.empty()) state = AdamState(g.size(), state.config);

  const std::vector<double> delta = state.update(g, names);
  std::size_t k = 0;
  if (free.omega) {
    const Vec3 w = params.lighting.direction.vec();
    Vec3 d{delta[0], delta[1], delta[2]};
    d = d - w * dot(d, w);
    params.lighting.direction = LightDirection::from_vector(w + d);
    k += 3;
  }
  if (free.ambient) params.lighting.ambient = std::max(0.0, params.lighting.ambient + delta[k++]);
  if (free.directional) params.lighting.directional = std::max(0.0, params.lighting.directional + delta[k++]);
  if (free.depth) {
    for (double& z : params.depth) z += delta[k++];
  }
}

LossGradient fit_loss(const ImagePlane& image, const ImagePlane& target, const LossWeights& weights,
                      const SsimParams& ssim) {
  LossGradient out;
  out.d_pred.assign(image.values().size(), 0.0);
  if (weights.recon != 0.0) {
    const LossGradient r = recon_loss_grad(image, target, target.mask());
    out.value += weights.recon * r.value;
    for (std::size_t i = 0; i < out.d_pred.size(); ++i) out.d_pred[i] += weights.recon * r.d_pred[i];
  }
  if (weights.dssim != 0.0) {
    const LossGradient d = dssim_loss_grad(image, target, ssim);
    out.value += weights.dssim * d.value;
    for (std::size_t i = 0; i < out.d_pred.size(); ++i) out.d_pred[i] += weights.dssim * d.d_pred[i];
  }
  return out;
}

FitResult fit(const FitProblem& problem) {
  if (!problem.free.any()) throw UsageError("fit needs at least one free parameter");
  if (problem.iterations < 0) throw UsageError("fit iteration budget must be >= 0");
  problem.weights.validate();
  if (problem.target.width() != problem.depth.width() || problem.target.height() != problem.depth.height() ||
      problem.target.channels() != problem.albedo.channels()) {
    throw DataError("fit target does not match the scene dimensions");
  }

  FitResult result;
  result.params.lighting = problem.initial;
  result.params.depth.assign(problem.depth.values().begin(), problem.depth.values().end());
  AdamState state(0, problem.adam);
  RecordedRender rec;

  auto evaluate = [&](int iteration) {
    record_and_render(problem.depth.with_values(result.params.depth), problem.albedo, result.params.lighting,
                      problem.shadow, rec);
    LossGradient lg = fit_loss(rec.image, problem.target, problem.weights, problem.ssim);
    if (!std::isfinite(lg.value)) throw DataError("fit diverged at iteration " + std::to_string(iteration));
    return lg;
  };

  for (int it = 0; it < problem.iterations; ++it) {
    const LossGradient lg = evaluate(it);
    if (!result.loss_trace.empty() && problem.tolerance > 0.0 &&
        std::abs(result.loss_trace.back() - lg.value) < problem.tolerance) {
      result.loss_trace.push_back(lg.value);
      result.converged = true;
      return result;
    }
    result.loss_trace.push_back(lg.value);
    adam_step(state, result.params, backward(rec, lg.d_pred), problem.free);
    result.iterations = it + 1;
  }
  result.loss_trace.push_back(evaluate(result.iterations).value);
  return result;
}

double angle_between_deg(const Vec3& a, const Vec3& b) {
  // atan2 keeps precision near 0 where acos does not.
  return std::atan2(norm(cross(a, b)), dot(a, b)) * 180.0 / std::numbers::pi;
}

}  // namespace relight

#include "relight/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "relight/error.hpp"

namespace relight {

namespace {

double parse_number(const std::string& field, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw UsageError("scene field '" + field + "': expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& field, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("scene field '" + field + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = s.find(sep, begin);
    out.push_back(s.substr(begin, pos - begin));
    if (pos == std::string::npos) break;
    begin = pos + 1;
  }
  return out;
}

}  // namespace

double SceneSpec::spacing() const {
  return pixel_spacing.value_or(4.0 / static_cast<double>(std::max(width, height)));
}

void SceneSpec::validate() const {
  if (kind == SceneKind::FromFile) return;
  if (width < 8 || height < 8) throw UsageError("scene field 'resolution': must be at least 8x8");
  if (pixel_spacing && !(*pixel_spacing > 0.0)) throw UsageError("scene field 'spacing': must be > 0");
  if (!(step_height > 0.0)) throw UsageError("scene field 'h': must be > 0");
  if (!(bump_amplitude > 0.0)) throw UsageError("scene field 'amp': must be > 0");
  if (!(bump_sigma > 0.0)) throw UsageError("scene field 'sigma': must be > 0");
}

SceneSpec parse_scene(const std::string& text) {
  SceneSpec spec;
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "flat") {
    spec.kind = SceneKind::Flat;
  } else if (kind == "step") {
    spec.kind = SceneKind::Step;
  } else if (kind == "gaussian_bump") {
    spec.kind = SceneKind::GaussianBump;
  } else if (kind == "nose_ridge") {
    spec.kind = SceneKind::NoseRidge;
  } else {
    throw UsageError("scene field 'kind': unknown scene '" + kind +
                     "' (expected flat, step, gaussian_bump or nose_ridge)");
  }
  if (colon == std::string::npos) {
    spec.validate();
    return spec;
  }

  const auto parts = split(text.substr(colon + 1), ',');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& part = parts[i];
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) {
      if (i != 0) throw UsageError("scene field '" + part + "': expected key=value");
      const std::size_t x = part.find('x');
      if (x == std::string::npos) {
        spec.width = spec.height = parse_int("resolution", part);
      } else {
        spec.width = parse_int("resolution", part.substr(0, x));
        spec.height = parse_int("resolution", part.substr(x + 1));
      }
      continue;
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "h") {
      spec.step_height = parse_number(key, value);
    } else if (key == "amp") {
      spec.bump_amplitude = parse_number(key, value);
    } else if (key == "sigma") {
      spec.bump_sigma = parse_number(key, value);
    } else if (key == "spacing") {
      spec.pixel_spacing = parse_number(key, value);
    } else {
      throw UsageError("scene field '" + key + "': unknown key");
    }
  }
  spec.validate();
  return spec;
}

double centred_x(int col, int width, double spacing) { return (col - (width - 1) / 2.0) * spacing; }

double centred_y(int row, int height, double spacing) { return ((height - 1) / 2.0 - row) * spacing; }

DepthMap make_scene(const SceneSpec& spec) {
  spec.validate();
  if (spec.kind == SceneKind::FromFile) throw UsageError("make_scene: file scenes are loaded with read_depth_pfm");
  const int W = spec.width;
  const int H = spec.height;
  const double s = spec.spacing();
  std::vector<double> depth(static_cast<std::size_t>(W) * static_cast<std::size_t>(H), 0.0);
  std::vector<std::uint8_t> valid(depth.size(), 1);

  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const double x = centred_x(c, W, s);
      const double y = centred_y(r, H, s);
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(W) + static_cast<std::size_t>(c);
      switch (spec.kind) {
        case SceneKind::Flat:
          depth[i] = 1.0;
          break;
        case SceneKind::Step:
          depth[i] = x >= 0.0 ? 0.0 : spec.step_height;
          break;
        case SceneKind::GaussianBump: {
          const double r2 = x * x + y * y;
          depth[i] = spec.bump_amplitude * (1.0 - std::exp(-r2 / (2.0 * spec.bump_sigma * spec.bump_sigma)));
          break;
        }
        case SceneKind::NoseRidge: {
          // Face ellipse with semi-axes 1.5 (x) and 1.8 (y) world units.
          const double ex = x / 1.5, ey = y / 1.8;
          const double rho2 = ex * ex + ey * ey;
          if (rho2 >= 0.95) {
            valid[i] = 0;
            break;
          }
          const double face = 0.6 * std::sqrt(1.0 - rho2);
          // Nose: narrow ridge along y, rising toward the tip at y = -0.25.
          const double along = std::clamp((0.55 - y) / 0.8, 0.0, 1.0);
          const double profile = along * std::exp(-std::pow((y + 0.25) / 0.35, 4.0));
          const double nose = 0.35 * profile * std::exp(-x * x / (2.0 * 0.12 * 0.12));
          depth[i] = 1.0 - (face + nose);
          break;
        }
        case SceneKind::FromFile:
          break;
      }
    }
  }
  return DepthMap(W, H, s, std::move(depth), std::move(valid));
}

}  // namespace relight

#include "relight/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "relight/checks.hpp"
#include "relight/error.hpp"
#include "relight/io.hpp"
#include "relight/optimizer.hpp"
#include "relight/scene.hpp"
#include "relight/shading.hpp"

namespace relight {

namespace {

using json = nlohmann::json;

constexpr double kDefaultAlbedo = 0.65;

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw UsageError("config field '" + field + "': " + msg);
}

// Reads typed members of one JSON object and rejects members it was never asked about.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) field_error(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::optional<double> number(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) field_error(name(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) field_error(name(key), "expected a finite number");
    return d;
  }

  std::optional<double> number_at_least(const std::string& key, double lo, bool strict) {
    const std::optional<double> d = number(key);
    if (d && (strict ? !(*d > lo) : !(*d >= lo))) {
      field_error(name(key), std::string("must be ") + (strict ? "> " : ">= ") + format(lo));
    }
    return d;
  }

  std::optional<int> integer(const std::string& key, int lo) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) field_error(name(key), "expected an integer");
    const auto i = v->get<long long>();
    if (i < lo || i > 1'000'000'000) field_error(name(key), "must be >= " + std::to_string(lo));
    return static_cast<int>(i);
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) field_error(name(key), "expected a string");
    return v->get<std::string>();
  }

  template <std::size_t N>
  std::optional<std::array<double, N>> numbers(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != N) field_error(name(key), "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t k = 0; k < N; ++k) {
      if (!(*v)[k].is_number()) field_error(name(key) + "[" + std::to_string(k) + "]", "expected a number");
      out[k] = (*v)[k].get<double>();
      if (!std::isfinite(out[k])) field_error(name(key) + "[" + std::to_string(k) + "]", "expected a finite number");
    }
    return out;
  }

  std::optional<ObjectReader> object(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return ObjectReader(*v, name(key));
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) field_error(name(it.key()), "unknown field");
    }
  }

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  static std::string format(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
  }

  const json* take(const std::string& key) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& obj_;
  std::string prefix_;
  std::set<std::string> used_;
};

OutOfBoundsPolicy parse_policy(const std::string& text, const std::string& field) {
  if (text == "terminate") return OutOfBoundsPolicy::Terminate;
  if (text == "skip") return OutOfBoundsPolicy::Skip;
  throw UsageError(field + ": expected 'terminate' or 'skip', got '" + text + "'");
}

void check_elevation(double el, const std::string& field) {
  if (!(el > 0.0 && el <= 90.0)) {
    throw UsageError(field + ": elevation must be in (0, 90] degrees, got " + std::to_string(el));
  }
}

void check_light_vec(const std::array<double, 3>& v, const std::string& field) {
  const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(len > 0.0)) throw UsageError(field + ": light vector must be nonzero");
  if (!(v[2] > 0.0)) throw UsageError(field + ": light vector must have z > 0 (light in front of the surface)");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  ObjectReader top(root, "");
  cfg.scene = top.string("scene");
  cfg.depth = top.string("depth");
  cfg.spacing = top.number_at_least("spacing", 0.0, true);
  cfg.albedo = top.string("albedo");
  cfg.out = top.string("out");
  cfg.workers = top.integer("workers", 0);
  cfg.gamma = top.number_at_least("gamma", 0.0, true);
  if (cfg.scene && cfg.depth) field_error("depth", "conflicts with 'scene'");

  if (auto l = top.object("lighting")) {
    cfg.azimuth_deg = l->number("azimuth_deg");
    cfg.elevation_deg = l->number("elevation_deg");
    if (cfg.elevation_deg) check_elevation(*cfg.elevation_deg, "config field 'lighting.elevation_deg'");
    if (cfg.azimuth_deg.has_value() != cfg.elevation_deg.has_value()) {
      field_error("lighting", "azimuth_deg and elevation_deg must be given together");
    }
    cfg.light_vec = l->numbers<3>("light_vec");
    if (cfg.light_vec) check_light_vec(*cfg.light_vec, "config field 'lighting.light_vec'");
    if (cfg.light_vec && cfg.azimuth_deg) field_error("lighting.light_vec", "conflicts with azimuth_deg/elevation_deg");
    cfg.ambient = l->number_at_least("ambient", 0.0, false);
    cfg.directional = l->number_at_least("directional", 0.0, false);
    l->finish();
  }
  if (auto s = top.object("shadow")) {
    if (auto m = s->integer("samples", 1)) cfg.shadow.samples = *m;
    cfg.shadow.start_offset = s->number_at_least("start_offset", 0.0, false);
    cfg.shadow.distance_scale = s->number_at_least("distance_scale", 0.0, true);
    if (auto p = s->string("out_of_bounds")) {
      cfg.shadow.out_of_bounds = parse_policy(*p, "config field 'shadow.out_of_bounds'");
    }
    s->finish();
  }
  if (auto w = top.object("loss")) {
    auto weight = [&](const char* key, double& dst) {
      if (auto v = w->number_at_least(key, 0.0, false)) dst = *v;
    };
    weight("depth", cfg.weights.depth);
    weight("albedo", cfg.weights.albedo);
    weight("ambient", cfg.weights.ambient);
    weight("light", cfg.weights.light);
    weight("recon", cfg.weights.recon);
    weight("dssim", cfg.weights.dssim);
    w->finish();
  }
  if (auto f = top.object("fit")) {
    cfg.target = f->string("target");
    cfg.free = f->string("free");
    if (cfg.free) {
      try {
        FreeParams::parse(*cfg.free);
      } catch (const UsageError& e) {
        field_error("fit.free", e.what());
      }
    }
    cfg.iters = f->integer("iters", 0);
    cfg.lr = f->number_at_least("lr", 0.0, true);
    cfg.tolerance = f->number_at_least("tolerance", 0.0, false);
    f->finish();
  }
  if (auto s = top.object("sweep")) {
    cfg.frames = s->integer("frames", 1);
    cfg.azimuth_range = s->numbers<2>("azimuth_range");
    cfg.elevation_range = s->numbers<2>("elevation_range");
    if (cfg.elevation_range) {
      check_elevation((*cfg.elevation_range)[0], "config field 'sweep.elevation_range[0]'");
      check_elevation((*cfg.elevation_range)[1], "config field 'sweep.elevation_range[1]'");
    }
    s->finish();
  }
  top.finish();
  return cfg;
}

namespace {

// Raw flag values; empty strings and unset optionals mean "not given".
struct Flags {
  std::string config;
  std::string depth;
  std::string scene;
  std::optional<double> spacing;
  std::string albedo;
  std::string light;
  std::string light_vec;
  std::optional<double> ambient;
  std::optional<double> directional;
  std::optional<int> samples;
  std::optional<double> start_offset;
  std::optional<double> distance_scale;
  std::string out_of_bounds;
  std::string out;
  std::optional<int> workers;
  std::optional<double> gamma;

  std::string target;
  std::string target_light;
  std::string free;
  std::optional<int> iters;
  std::optional<double> lr;
  std::optional<double> tolerance;

  std::optional<int> frames;
  std::string azimuth_range;
  std::string elevation_range;
};

std::vector<double> parse_list(const std::string& text, std::size_t count, const std::string& flag,
                               const char* shape) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(v)) {
      throw UsageError(flag + ": expected " + shape + ", got '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.size() != count) throw UsageError(flag + ": expected " + shape + ", got '" + text + "'");
  return out;
}

RunConfig merge(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw DataError("cannot open config '" + f.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_run_config(ss.str());
  }
  if (!f.depth.empty() && !f.scene.empty()) throw UsageError("conflicting flags: --depth and --scene");
  if (!f.light.empty() && !f.light_vec.empty()) throw UsageError("conflicting flags: --light and --light-vec");
  if (!f.depth.empty()) {
    cfg.depth = f.depth;
    cfg.scene.reset();
  }
  if (!f.scene.empty()) {
    cfg.scene = f.scene;
    cfg.depth.reset();
  }
  if (f.spacing) cfg.spacing = f.spacing;
  if (!f.albedo.empty()) cfg.albedo = f.albedo;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.light.empty()) {
    const auto v = parse_list(f.light, 2, "--light", "AZ,EL in degrees");
    check_elevation(v[1], "--light");
    cfg.azimuth_deg = v[0];
    cfg.elevation_deg = v[1];
    cfg.light_vec.reset();
  }
  if (!f.light_vec.empty()) {
    const auto v = parse_list(f.light_vec, 3, "--light-vec", "X,Y,Z");
    cfg.light_vec = std::array<double, 3>{v[0], v[1], v[2]};
    check_light_vec(*cfg.light_vec, "--light-vec");
    cfg.azimuth_deg.reset();
    cfg.elevation_deg.reset();
  }
  if (f.ambient) cfg.ambient = f.ambient;
  if (f.directional) cfg.directional = f.directional;
  if (f.samples) cfg.shadow.samples = *f.samples;
  if (f.start_offset) cfg.shadow.start_offset = f.start_offset;
  if (f.distance_scale) cfg.shadow.distance_scale = f.distance_scale;
  if (!f.out_of_bounds.empty()) cfg.shadow.out_of_bounds = parse_policy(f.out_of_bounds, "--out-of-bounds");
  if (f.workers) cfg.workers = f.workers;
  if (f.gamma) cfg.gamma = f.gamma;
  if (!f.target.empty()) cfg.target = f.target;
  if (!f.free.empty()) cfg.free = f.free;
  if (f.iters) cfg.iters = f.iters;
  if (f.lr) cfg.lr = f.lr;
  if (f.tolerance) cfg.tolerance = f.tolerance;
  if (f.frames) cfg.frames = f.frames;
  if (!f.azimuth_range.empty()) {
    const auto v = parse_list(f.azimuth_range, 2, "--azimuth-range", "FROM,TO in degrees");
    cfg.azimuth_range = std::array<double, 2>{v[0], v[1]};
  }
  if (!f.elevation_range.empty()) {
    const auto v = parse_list(f.elevation_range, 2, "--elevation-range", "FROM,TO in degrees");
    check_elevation(v[0], "--elevation-range");
    check_elevation(v[1], "--elevation-range");
    cfg.elevation_range = std::array<double, 2>{v[0], v[1]};
  }
  return cfg;
}

DepthMap load_depth(const RunConfig& cfg, const std::string& default_scene = "") {
  if (cfg.depth) {
    // Same default extent as the synthetic scenes: 4 world units along the wider side.
    if (cfg.spacing) return read_depth_pfm(*cfg.depth, *cfg.spacing);
    const PfmData probe = read_pfm(*cfg.depth);
    if (probe.channels != 1) throw DataError(*cfg.depth + ": expected 1-channel PFM for a depth map");
    return read_depth_pfm(*cfg.depth, 4.0 / std::max(probe.width, probe.height));
  }
  const std::string text = cfg.scene ? *cfg.scene : default_scene;
  if (text.empty()) throw UsageError("one of --depth or --scene is required");
  SceneSpec spec = parse_scene(text);
  if (cfg.spacing) spec.pixel_spacing = cfg.spacing;
  return make_scene(spec);
}

ImagePlane load_albedo(const RunConfig& cfg, const DepthMap& depth) {
  if (!cfg.albedo) return ImagePlane::filled(depth.width(), depth.height(), 1, kDefaultAlbedo);
  ImagePlane a = read_image_pfm(*cfg.albedo);
  if (a.width() != depth.width() || a.height() != depth.height()) {
    throw DataError("albedo is " + std::to_string(a.width()) + "x" + std::to_string(a.height()) + " but depth is " +
                    std::to_string(depth.width()) + "x" + std::to_string(depth.height()));
  }
  return a;
}

LightDirection light_direction(const RunConfig& cfg, const LightDirection& fallback) {
  if (cfg.light_vec) {
    const auto& v = *cfg.light_vec;
    return LightDirection::from_vector({v[0], v[1], v[2]});
  }
  if (cfg.azimuth_deg) return LightDirection::from_angles(*cfg.azimuth_deg, *cfg.elevation_deg);
  return fallback;
}

LightingParams lighting(const RunConfig& cfg, const LightDirection& fallback = LightDirection({0.0, 0.0, 1.0})) {
  LightingParams p;
  p.direction = light_direction(cfg, fallback);
  if (cfg.ambient) p.ambient = *cfg.ambient;
  if (cfg.directional) p.directional = *cfg.directional;
  p.validate();
  return p;
}

ExecOptions exec_options(const RunConfig& cfg) { return ExecOptions{cfg.workers.value_or(0)}; }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_image(const std::string& path, const ImagePlane& image, const PngEncoding& enc) {
  if (ends_with(path, ".pfm")) {
    write_image_pfm(path, image);
  } else {
    write_png(path, image, enc);
  }
}

PngEncoding encoding(const RunConfig& cfg, const PngEncoding& fallback) {
  return cfg.gamma ? PngEncoding{cfg.gamma} : fallback;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int cmd_relight(const RunConfig& cfg, std::ostream& out) {
  const DepthMap depth = load_depth(cfg);
  const ImagePlane albedo = load_albedo(cfg, depth);
  const LightingParams light = lighting(cfg);
  const RenderResult r = relight(depth, albedo, light, cfg.shadow, exec_options(cfg));
  const std::string path = cfg.out.value_or("relight.png");
  write_image(path, r.image, encoding(cfg, PngEncoding::srgb()));
  out << "wrote " << path << " (" << depth.width() << "x" << depth.height() << ", light az "
      << fixed(light.direction.azimuth_deg(), 2) << " el " << fixed(light.direction.elevation_deg(), 2) << ")\n";
  return kExitOk;
}

int cmd_mask(const RunConfig& cfg, std::ostream& out) {
  const DepthMap depth = load_depth(cfg);
  const LightDirection light = light_direction(cfg, LightDirection({0.0, 0.0, 1.0}));
  const ShadowMask mask = estimate_shadow_mask(depth, light, cfg.shadow, exec_options(cfg));
  std::size_t shadowed = 0;
  for (double v : mask.values) shadowed += v < 0.5 ? 1 : 0;
  const std::string path = cfg.out.value_or("mask.png");
  write_image(path, ImagePlane(mask.width, mask.height, 1, mask.values), encoding(cfg, PngEncoding::linear()));
  out << "wrote " << path << " (" << mask.width << "x" << mask.height << ", " << shadowed
      << " pixels below 0.5)\n";
  return kExitOk;
}

int cmd_normals(const RunConfig& cfg, std::ostream& out) {
  const DepthMap depth = load_depth(cfg);
  const NormalMap n = compute_normals(depth_to_points(depth));
  std::vector<double> rgb(n.normals.size() * 3, 0.0);
  const bool raw = cfg.out && ends_with(*cfg.out, ".pfm");
  for (std::size_t i = 0; i < n.normals.size(); ++i) {
    if (!n.valid[i]) continue;
    const Vec3& v = n.normals[i];
    const double c[3] = {v.x, v.y, v.z};
    for (int k = 0; k < 3; ++k) rgb[i * 3 + static_cast<std::size_t>(k)] = raw ? c[k] : 0.5 * c[k] + 0.5;
  }
  const std::string path = cfg.out.value_or("normals.png");
  write_image(path, ImagePlane(n.width, n.height, 3, std::move(rgb), n.valid), encoding(cfg, PngEncoding::linear()));
  out << "wrote " << path << " (" << n.width << "x" << n.height << ")\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const DepthMap depth = load_depth(cfg);
  const ImagePlane albedo = load_albedo(cfg, depth);
  const int frames = cfg.frames.value_or(36);
  const auto az = cfg.azimuth_range.value_or(std::array<double, 2>{0.0, 360.0});
  const auto el = cfg.elevation_range.value_or(std::array<double, 2>{45.0, 45.0});
  const std::filesystem::path dir = cfg.out.value_or("sweep");
  std::filesystem::create_directories(dir);
  const int digits = std::max(4, static_cast<int>(std::to_string(frames - 1).size()));

  json manifest = json::array();
  for (int k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / frames;
    RunConfig frame_cfg = cfg;
    frame_cfg.light_vec.reset();
    frame_cfg.azimuth_deg = az[0] + (az[1] - az[0]) * t;
    frame_cfg.elevation_deg = el[0] + (el[1] - el[0]) * t;
    const LightingParams light = lighting(frame_cfg);
    const RenderResult r = relight(depth, albedo, light, cfg.shadow, exec_options(cfg));
    std::ostringstream name;
    name << "frame_" << std::setw(digits) << std::setfill('0') << k << ".png";
    write_png((dir / name.str()).string(), r.image, encoding(cfg, PngEncoding::srgb()));
    const Vec3& w = light.direction.vec();
    manifest.push_back({{"frame", k},
                        {"azimuth_deg", *frame_cfg.azimuth_deg},
                        {"elevation_deg", *frame_cfg.elevation_deg},
                        {"light_vec", {w.x, w.y, w.z}}});
  }
  std::ofstream m(dir / "manifest.json");
  if (!m) throw DataError("cannot write " + (dir / "manifest.json").string());
  m << manifest.dump(2) << '\n';
  out << "wrote " << frames << " frames and manifest.json to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_fit(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const DepthMap depth = load_depth(cfg);
  const ImagePlane albedo = load_albedo(cfg, depth);
  const LightingParams initial = lighting(cfg, LightDirection::from_angles(0.0, 45.0));

  ImagePlane target;
  if (cfg.target && !flags.target_light.empty()) throw UsageError("conflicting flags: --target and --target-light");
  if (cfg.target) {
    target = read_image_pfm(*cfg.target);
  } else if (!flags.target_light.empty()) {
    const auto v = parse_list(flags.target_light, 2, "--target-light", "AZ,EL in degrees");
    check_elevation(v[1], "--target-light");
    LightingParams tl = initial;
    tl.direction = LightDirection::from_angles(v[0], v[1]);
    target = relight(depth, albedo, tl, cfg.shadow, exec_options(cfg)).image;
  } else {
    throw UsageError("fit needs --target PATH or --target-light AZ,EL");
  }

  AdamConfig adam;
  if (cfg.lr) adam.lr = *cfg.lr;
  FitProblem problem{target,
                     depth,
                     albedo,
                     initial,
                     cfg.shadow,
                     FreeParams::parse(cfg.free.value_or("omega")),
                     cfg.weights,
                     SsimParams{},
                     adam,
                     cfg.iters.value_or(2000),
                     cfg.tolerance.value_or(0.0)};
  const FitResult r = fit(problem);

  const LightingParams& p = r.params.lighting;
  const Vec3& w = p.direction.vec();
  json report = {{"free", problem.free.to_string()},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"lr", adam.lr},
                 {"lighting",
                  {{"azimuth_deg", p.direction.azimuth_deg()},
                   {"elevation_deg", p.direction.elevation_deg()},
                   {"light_vec", {w.x, w.y, w.z}},
                   {"ambient", p.ambient},
                   {"directional", p.directional}}},
                 {"loss_trace", r.loss_trace}};
  const std::string path = cfg.out.value_or("fit.json");
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << report.dump(2) << '\n';
  if (problem.free.depth) {
    const std::string depth_path = path + ".depth.pfm";
    write_depth_pfm(depth_path, depth.with_values(r.params.depth));
    out << "wrote " << depth_path << "\n";
  }
  out << "fit " << problem.free.to_string() << ": " << r.iterations << " steps, loss "
      << r.loss_trace.front() << " -> " << r.loss_trace.back() << "; light az "
      << fixed(p.direction.azimuth_deg(), 3) << " el " << fixed(p.direction.elevation_deg(), 3) << ", ambient "
      << fixed(p.ambient, 5) << ", directional " << fixed(p.directional, 5) << "\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const DepthMap depth = load_depth(cfg, "gaussian_bump:64");
  CheckOptions opts;
  opts.lighting = lighting(cfg, LightDirection::from_angles(0.0, 45.0));
  opts.shadow = cfg.shadow;
  opts.exec = exec_options(cfg);
  bool all = true;
  for (const GateResult& g : run_checks(depth, opts)) {
    all = all && g.passed;
    out << "gate " << g.id << " " << g.name << ": " << (g.passed ? "PASS" : "FAIL") << " (" << g.detail << ")\n";
  }
  out << (all ? "all gates passed\n" : "some gates failed\n");
  return all ? kExitOk : kExitCheckFailed;
}

void add_input_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON run config; flags override its values");
  cmd.add_option("--depth", f.depth, "depth map (1-channel PFM)");
  cmd.add_option("--scene", f.scene, "synthetic scene, e.g. step:128,h=1 or gaussian_bump:64");
  cmd.add_option("--spacing", f.spacing, "world units per pixel");
  cmd.add_option("--workers", f.workers, "worker threads (0 = all cores)");
}

void add_light_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--light", f.light, "light azimuth,elevation in degrees");
  cmd.add_option("--light-vec", f.light_vec, "light direction X,Y,Z (normalized)");
}

void add_shading_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--albedo", f.albedo, "albedo image (PFM, 1 or 3 channels); default constant 0.65");
  cmd.add_option("--ambient", f.ambient, "ambient intensity");
  cmd.add_option("--directional", f.directional, "directional intensity");
}

void add_shadow_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--samples", f.samples, "samples per shadow ray");
  cmd.add_option("--start-offset", f.start_offset, "world units skipped before the first sample");
  cmd.add_option("--distance-scale", f.distance_scale, "multiplier on the ray distance before the sigmoid");
  cmd.add_option("--out-of-bounds", f.out_of_bounds, "terminate | skip");
}

void add_output_flags(CLI::App& cmd, Flags& f, const char* help) {
  cmd.add_option("--out", f.out, help);
  cmd.add_option("--gamma", f.gamma, "PNG encoding gamma (default: sRGB for images, linear for data)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relighting with ray-traced soft shadows for height fields"};
  app.name("relight");
  app.require_subcommand(1);
  Flags f;

  CLI::App* relight_cmd = app.add_subcommand("relight", "render a relit image");
  CLI::App* mask_cmd = app.add_subcommand("mask", "write the soft shadow mask");
  CLI::App* normals_cmd = app.add_subcommand("normals", "write the normal map");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "render frames while rotating the light");
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit lighting and/or depth to a target image");
  CLI::App* check_cmd = app.add_subcommand("check", "run self-checks; exit 3 if any gate fails");

  for (CLI::App* cmd : {relight_cmd, mask_cmd, normals_cmd, sweep_cmd, fit_cmd, check_cmd}) add_input_flags(*cmd, f);
  for (CLI::App* cmd : {relight_cmd, mask_cmd, sweep_cmd, fit_cmd, check_cmd}) {
    add_light_flags(*cmd, f);
    add_shadow_flags(*cmd, f);
  }
  for (CLI::App* cmd : {relight_cmd, sweep_cmd, fit_cmd, check_cmd}) add_shading_flags(*cmd, f);
  add_output_flags(*relight_cmd, f, "output image (.png or .pfm)");
  add_output_flags(*mask_cmd, f, "output mask (.png or .pfm)");
  add_output_flags(*normals_cmd, f, "output normals (.png or .pfm)");
  add_output_flags(*sweep_cmd, f, "output directory");
  fit_cmd->add_option("--out", f.out, "output JSON report");

  sweep_cmd->add_option("--frames", f.frames, "number of frames");
  sweep_cmd->add_option("--azimuth-range", f.azimuth_range, "FROM,TO azimuth in degrees (TO excluded)");
  sweep_cmd->add_option("--elevation-range", f.elevation_range, "FROM,TO elevation in degrees (TO excluded)");

  fit_cmd->add_option("--target", f.target, "target image (PFM)");
  fit_cmd->add_option("--target-light", f.target_light, "render the target from the scene under AZ,EL");
  fit_cmd->add_option("--free", f.free, "comma-separated subset of omega,ambient,directional,depth");
  fit_cmd->add_option("--iters", f.iters, "iteration budget");
  fit_cmd->add_option("--lr", f.lr, "Adam learning rate");
  fit_cmd->add_option("--tolerance", f.tolerance, "stop when the loss changes by less than this");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const RunConfig cfg = merge(f);
    try {
      resolve(cfg.shadow, 1.0);
    } catch (const DataError& e) {
      throw UsageError(std::string("shadow settings: ") + e.what());
    }
    if (cfg.frames && *cfg.frames < 1) throw UsageError("--frames must be >= 1");
    if (relight_cmd->parsed()) return cmd_relight(cfg, out);
    if (mask_cmd->parsed()) return cmd_mask(cfg, out);
    if (normals_cmd->parsed()) return cmd_normals(cfg, out);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out);
    if (fit_cmd->parsed()) return cmd_fit(cfg, f, out);
    return cmd_check(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace relight

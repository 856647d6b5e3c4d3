#include "mmbat/radar/simulator.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mmbat/errors.hpp"
#include "mmbat/util/json_config.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::radar {
namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 unit_normal(const Plane& p) {
  const double n = norm(p.normal);
  if (!(n > 0.0)) throw ConfigError("ghost mirror plane normal must be non-zero");
  return {p.normal[0] / n, p.normal[1] / n, p.normal[2] / n};
}

double gaussian(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

std::size_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  return static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(rng));
}

// Isotropic Gaussian offset with its length capped at 2 sigma.
Vec3 truncated_jitter(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return {0.0, 0.0, 0.0};
  Vec3 d{gaussian(rng, sigma), gaussian(rng, sigma), gaussian(rng, sigma)};
  const double len = norm(d);
  if (len > 2.0 * sigma) {
    const double k = 2.0 * sigma / len;
    for (double& x : d) x *= k;
  }
  return d;
}

double intensity(std::mt19937_64& rng, const Vec3& p, const Vec3& origin, double log_sigma) {
  const double r = norm(sub(p, origin));
  return std::exp(gaussian(rng, log_sigma)) / std::max(r * r, 1e-6);
}

void push_point(PointFrame& frame, const Vec3& p, double doppler, double inten) {
  frame.data.insert(frame.data.end(), {p[0], p[1], p[2], doppler, inten});
}

// Core renderer over precomputed vertex positions (n_vertices x 3 each).
PointFrame render_vertices(std::span<const double> now, std::span<const double> prev, double dt,
                           const Vec3& origin, const NoiseConfig& noise, std::uint64_t seed) {
  const std::size_t nv = now.size() / 3;
  if (nv == 0) throw ContractError("render_frame needs a template with at least one vertex");
  if (!(dt > 0.0)) throw ContractError("render_frame requires dt > 0");
  noise.validate();

  std::mt19937_64 rng(seed);
  PointFrame frame;
  frame.channels = kDefaultChannels;
  std::uniform_int_distribution<std::size_t> pick(0, nv - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const std::size_t n_body = poisson(rng, noise.body_points_per_frame);
  for (std::size_t i = 0; i < n_body; ++i) {
    const std::size_t v = pick(rng);
    const Vec3 surface{now[v * 3], now[v * 3 + 1], now[v * 3 + 2]};
    const Vec3 vel{(now[v * 3] - prev[v * 3]) / dt, (now[v * 3 + 1] - prev[v * 3 + 1]) / dt,
                   (now[v * 3 + 2] - prev[v * 3 + 2]) / dt};
    const Vec3 d = truncated_jitter(rng, noise.position_jitter_sigma);
    const Vec3 p{surface[0] + d[0], surface[1] + d[1], surface[2] + d[2]};
    const double doppler = radial_velocity(p, vel, origin) + gaussian(rng, noise.doppler_noise_sigma);
    push_point(frame, p, doppler, intensity(rng, p, origin, noise.intensity_log_sigma));

    if (noise.ghost_probability > 0.0 && u01(rng) < noise.ghost_probability) {
      const Vec3 g = noise.ghost_mirror_plane.mirror(p);
      const Vec3 gv = noise.ghost_mirror_plane.mirror_direction(vel);
      const double gd = radial_velocity(g, gv, origin) + gaussian(rng, noise.doppler_noise_sigma);
      // Second bounce loses energy.
      push_point(frame, g, gd, 0.3 * intensity(rng, g, origin, noise.intensity_log_sigma));
    }
  }

  const std::size_t n_clutter = poisson(rng, noise.clutter_points_per_frame);
  const Box3& box = noise.clutter_region;
  for (std::size_t i = 0; i < n_clutter; ++i) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = box.min[a] + (box.max[a] - box.min[a]) * u01(rng);
    const double doppler = gaussian(rng, noise.doppler_noise_sigma);
    push_point(frame, p, doppler, intensity(rng, p, origin, noise.intensity_log_sigma));
  }
  return frame;
}

}  // namespace

bool Box3::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < min[a] || p[a] > max[a]) return false;
  }
  return true;
}

double Box3::volume() const {
  return (max[0] - min[0]) * (max[1] - min[1]) * (max[2] - min[2]);
}

double Plane::signed_distance(const Vec3& p) const {
  const Vec3 n = unit_normal(*this);
  return dot(n, p) - offset / norm(normal);
}

Vec3 Plane::mirror(const Vec3& p) const {
  const Vec3 n = unit_normal(*this);
  const double d = signed_distance(p);
  return {p[0] - 2.0 * d * n[0], p[1] - 2.0 * d * n[1], p[2] - 2.0 * d * n[2]};
}

Vec3 Plane::mirror_direction(const Vec3& v) const {
  const Vec3 n = unit_normal(*this);
  const double d = dot(n, v);
  return {v[0] - 2.0 * d * n[0], v[1] - 2.0 * d * n[1], v[2] - 2.0 * d * n[2]};
}

void NoiseConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("noise config: " + what); };
  if (!(body_points_per_frame >= 0.0)) fail("body_points_per_frame must be >= 0");
  if (!(clutter_points_per_frame >= 0.0)) fail("clutter_points_per_frame must be >= 0");
  if (!(ghost_probability >= 0.0 && ghost_probability <= 1.0)) fail("ghost_probability must be in [0, 1]");
  if (!(position_jitter_sigma >= 0.0)) fail("position_jitter_sigma must be >= 0");
  if (!(doppler_noise_sigma >= 0.0)) fail("doppler_noise_sigma must be >= 0");
  if (!(intensity_log_sigma >= 0.0)) fail("intensity_log_sigma must be >= 0");
  for (int a = 0; a < 3; ++a) {
    if (!(clutter_region.min[a] <= clutter_region.max[a])) fail("clutter_region min must not exceed max");
  }
  if (!(norm(ghost_mirror_plane.normal) > 0.0)) fail("ghost_mirror_plane normal must be non-zero");
}

NoiseConfig noiseless(double body_points_per_frame) {
  NoiseConfig c;
  c.body_points_per_frame = body_points_per_frame;
  c.clutter_points_per_frame = 0.0;
  c.ghost_probability = 0.0;
  c.position_jitter_sigma = 0.0;
  c.doppler_noise_sigma = 0.0;
  c.intensity_log_sigma = 0.0;
  return c;
}

double radial_velocity(const Vec3& p, const Vec3& v, const Vec3& radar_origin) {
  const Vec3 d = sub(p, radar_origin);
  const double r = norm(d);
  if (!(r > 0.0)) throw ContractError("radial_velocity is undefined at zero range");
  return dot(v, d) / r;
}

PointFrame render_frame(const body::BodyTemplate& tmpl, const body::BodyParams& params_now,
                        const body::BodyParams& params_prev, double dt, const Vec3& radar_origin,
                        const NoiseConfig& noise, std::uint64_t seed) {
  if (tmpl.n_vertices == 0 || tmpl.n_joints == 0) throw ContractError("render_frame needs a non-empty template");
  if (params_now.frames() != 1 || params_prev.frames() != 1) {
    throw DimensionError("render_frame expects single-frame body parameters");
  }
  const auto now = body::body_forward(tmpl, params_now).vertices;
  const auto prev = body::body_forward(tmpl, params_prev).vertices;
  return render_vertices(now.values(), prev.values(), dt, radar_origin, noise, seed);
}

RawSequence simulate_sequence(const body::BodyTemplate& tmpl, const SimulationSpec& spec) {
  spec.noise.validate();
  const std::size_t n = spec.motion.frame_count();
  const double dt = 1.0 / spec.motion.frame_rate;
  std::vector<double> times(n), prev_times(n);
  for (std::size_t i = 0; i < n; ++i) {
    times[i] = static_cast<double>(i) * dt;
    prev_times[i] = times[i] - dt;
  }
  const MotionGenerator gen(tmpl, spec.motion);
  body::BodyParams params = gen.at(times);
  const auto now = body::body_forward(tmpl, params);
  const auto prev = body::body_forward(tmpl, gen.at(prev_times));

  RawSequence seq;
  seq.frame_rate = spec.motion.frame_rate;
  seq.channels = kDefaultChannels;
  const std::size_t stride = tmpl.n_vertices * 3;
  for (std::size_t i = 0; i < n; ++i) {
    const auto vn = now.vertices.values().subspan(i * stride, stride);
    const auto vp = prev.vertices.values().subspan(i * stride, stride);
    PointFrame frame = render_vertices(vn, vp, dt, spec.radar_origin, spec.noise,
                                       util::derive_seed(spec.motion.seed, {0x72656e646572ULL, i}));
    frame.timestamp = times[i];
    seq.frames.push_back(std::move(frame));
  }
  seq.initial_box_center = Vec3{params.gamma.at(0), params.gamma.at(1), params.gamma.at(2)};
  seq.ground_truth = GroundTruth{std::move(params), now.joints};
  return seq;
}

void to_json(nlohmann::json& j, const NoiseConfig& c) {
  j = {
      {"body_points_per_frame", c.body_points_per_frame},
      {"clutter_points_per_frame", c.clutter_points_per_frame},
      {"clutter_region", {{"min", c.clutter_region.min}, {"max", c.clutter_region.max}}},
      {"ghost_probability", c.ghost_probability},
      {"ghost_mirror_plane", {{"normal", c.ghost_mirror_plane.normal}, {"offset", c.ghost_mirror_plane.offset}}},
      {"position_jitter_sigma", c.position_jitter_sigma},
      {"doppler_noise_sigma", c.doppler_noise_sigma},
      {"intensity_log_sigma", c.intensity_log_sigma},
  };
}

void from_json(const nlohmann::json& j, NoiseConfig& c) {
  util::require_known_keys(j,
                           {"body_points_per_frame", "clutter_points_per_frame", "clutter_region",
                            "ghost_probability", "ghost_mirror_plane", "position_jitter_sigma",
                            "doppler_noise_sigma", "intensity_log_sigma"},
                           "noise");
  util::read_optional(j, "body_points_per_frame", c.body_points_per_frame);
  util::read_optional(j, "clutter_points_per_frame", c.clutter_points_per_frame);
  if (auto it = j.find("clutter_region"); it != j.end()) {
    util::require_known_keys(*it, {"min", "max"}, "noise.clutter_region");
    util::read_optional(*it, "min", c.clutter_region.min);
    util::read_optional(*it, "max", c.clutter_region.max);
  }
  util::read_optional(j, "ghost_probability", c.ghost_probability);
  if (auto it = j.find("ghost_mirror_plane"); it != j.end()) {
    util::require_known_keys(*it, {"normal", "offset"}, "noise.ghost_mirror_plane");
    util::read_optional(*it, "normal", c.ghost_mirror_plane.normal);
    util::read_optional(*it, "offset", c.ghost_mirror_plane.offset);
  }
  util::read_optional(j, "position_jitter_sigma", c.position_jitter_sigma);
  util::read_optional(j, "doppler_noise_sigma", c.doppler_noise_sigma);
  util::read_optional(j, "intensity_log_sigma", c.intensity_log_sigma);
  c.validate();
}

void to_json(nlohmann::json& j, const SimulationSpec& s) {
  j = {
      {"motion",
       {{"kind", motion_kind_name(s.motion.kind)},
        {"duration", s.motion.duration},
        {"frame_rate", s.motion.frame_rate},
        {"seed", s.motion.seed},
        {"speed", s.motion.speed}}},
      {"noise", s.noise},
      {"radar_origin", s.radar_origin},
  };
}

}  // namespace mmbat::radar

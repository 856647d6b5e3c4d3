#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "mmbat/radar/motion.hpp"
#include "mmbat/radar/types.hpp"

namespace mmbat::radar {

struct Box3 {
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{0.0, 0.0, 0.0};

  bool contains(const Vec3& p) const;
  double volume() const;
};

/// Plane {x : normal . x = offset}; normal is normalized on use.
struct Plane {
  Vec3 normal{0.0, 1.0, 0.0};
  double offset = 6.0;

  Vec3 mirror(const Vec3& p) const;
  Vec3 mirror_direction(const Vec3& v) const;
  double signed_distance(const Vec3& p) const;
};

struct NoiseConfig {
  double body_points_per_frame = 200.0;   // Poisson mean
  double clutter_points_per_frame = 60.0;  // Poisson mean
  Box3 clutter_region{{-3.0, 0.5, -1.2}, {3.0, 6.0, 1.5}};
  double ghost_probability = 0.05;        // per body point
  Plane ghost_mirror_plane{};
  double position_jitter_sigma = 0.02;    // m; jitter is truncated at 2 sigma
  double doppler_noise_sigma = 0.05;      // m/s
  double intensity_log_sigma = 0.3;       // multiplicative log-normal spread

  void validate() const;
};

/// All-zero noise: body points only, exactly on the skinned vertices.
NoiseConfig noiseless(double body_points_per_frame = 200.0);

/// <v, (p - origin)> / |p - origin|; positive when receding.
double radial_velocity(const Vec3& p, const Vec3& v, const Vec3& radar_origin);

/// Renders one scan from two consecutive body states. Doppler of body points
/// comes from the finite-difference vertex velocity over `dt`.
PointFrame render_frame(const body::BodyTemplate& tmpl, const body::BodyParams& params_now,
                        const body::BodyParams& params_prev, double dt, const Vec3& radar_origin,
                        const NoiseConfig& noise, std::uint64_t seed);

struct SimulationSpec {
  MotionSpec motion;
  NoiseConfig noise;
  Vec3 radar_origin{0.0, 0.0, 0.0};
};

/// Animates the motion, renders every frame (frame seeds derived from the
/// motion seed and frame index) and attaches ground truth. The initial box
/// center is the ground-truth root translation of frame 0.
RawSequence simulate_sequence(const body::BodyTemplate& tmpl, const SimulationSpec& spec);

void to_json(nlohmann::json& j, const NoiseConfig& c);
void from_json(const nlohmann::json& j, NoiseConfig& c);
void to_json(nlohmann::json& j, const SimulationSpec& s);

}  // namespace mmbat::radar

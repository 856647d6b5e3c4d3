#include "mmbat/radar/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mmbat/body/rotation.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::radar {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCircleRadius = 1.2;

enum class Side { none, left, right };

bool has(const std::string& s, std::string_view part) { return s.find(part) != std::string::npos; }

Side side_of(const std::string& name) {
  if (name.rfind("left_", 0) == 0) return Side::left;
  if (name.rfind("right_", 0) == 0) return Side::right;
  return Side::none;
}

Eigen::Matrix3d rot_x(double a) { return body::axis_angle(Eigen::Vector3d::UnitX(), a); }
Eigen::Matrix3d rot_y(double a) { return body::axis_angle(Eigen::Vector3d::UnitY(), a); }
Eigen::Matrix3d rot_z(double a) { return body::axis_angle(Eigen::Vector3d::UnitZ(), a); }

// Per-kind gait frequency in Hz.
double base_frequency(MotionKind kind) {
  switch (kind) {
    case MotionKind::walk_line:
    case MotionKind::walk_circle: return 0.9;
    case MotionKind::arm_swing: return 0.5;
    case MotionKind::squat: return 0.4;
  }
  return 1.0;
}

}  // namespace

MotionKind parse_motion_kind(std::string_view name) {
  if (name == "walk_line") return MotionKind::walk_line;
  if (name == "walk_circle") return MotionKind::walk_circle;
  if (name == "arm_swing") return MotionKind::arm_swing;
  if (name == "squat") return MotionKind::squat;
  throw ConfigError("unknown motion kind '" + std::string(name) +
                    "' (expected walk_line, walk_circle, arm_swing or squat)");
}

std::string_view motion_kind_name(MotionKind kind) {
  switch (kind) {
    case MotionKind::walk_line: return "walk_line";
    case MotionKind::walk_circle: return "walk_circle";
    case MotionKind::arm_swing: return "arm_swing";
    case MotionKind::squat: return "squat";
  }
  return "unknown";
}

std::size_t MotionSpec::frame_count() const {
  if (!(duration > 0.0) || !(frame_rate > 0.0) || !std::isfinite(duration * frame_rate)) {
    throw ContractError("motion duration and frame rate must be positive");
  }
  const double n = std::floor(duration * frame_rate + 1e-9);
  if (n < 1.0) throw ContractError("motion is shorter than one frame");
  return static_cast<std::size_t>(n);
}

MotionGenerator::MotionGenerator(const body::BodyTemplate& tmpl, const MotionSpec& spec)
    : tmpl_(&tmpl), spec_(spec) {
  if (!(spec.speed >= 0.0) || !std::isfinite(spec.speed)) throw ContractError("motion speed must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  start_x_ = -1.0 + 2.0 * u01(rng);
  start_y_ = 2.5 + 1.5 * u01(rng);
  heading_ = 2.0 * kPi * u01(rng);
  phase_ = 2.0 * kPi * u01(rng);
  amplitude_ = 0.85 + 0.3 * u01(rng);
  std::normal_distribution<double> gauss(0.0, 0.7);
  beta_.resize(tmpl.n_shape);
  for (double& b : beta_) b = std::clamp(gauss(rng), -2.0, 2.0);
}

body::BodyParams MotionGenerator::at(std::span<const double> times) const {
  const body::BodyTemplate& t = *tmpl_;
  const std::size_t nf = times.size();
  const std::size_t nj = t.n_joints;
  std::vector<double> theta(nf * nj * 6), beta(nf * t.n_shape), gamma(nf * 3);

  const double freq = base_frequency(spec_.kind);
  const double a = amplitude_;
  const bool walking = spec_.kind == MotionKind::walk_line || spec_.kind == MotionKind::walk_circle;

  for (std::size_t f = 0; f < nf; ++f) {
    const double time = times[f];
    const double phi = 2.0 * kPi * freq * time + phase_;
    const double s = std::sin(phi);
    const double bend = 0.5 * (1.0 - std::cos(phi));  // 0..1 squat depth

    // Root trajectory and travel direction (angle in the ground plane).
    double gx = start_x_, gy = start_y_, gz = 0.0, direction = heading_;
    if (spec_.kind == MotionKind::walk_line) {
      gx += spec_.speed * time * std::cos(heading_);
      gy += spec_.speed * time * std::sin(heading_);
    } else if (spec_.kind == MotionKind::walk_circle) {
      const double alpha = heading_ + spec_.speed * time / kCircleRadius;
      gx = start_x_ + kCircleRadius * std::cos(alpha);
      gy = start_y_ + kCircleRadius * std::sin(alpha);
      direction = alpha + kPi / 2.0;
    } else if (spec_.kind == MotionKind::squat) {
      gz = -0.35 * a * bend;
    }
    gamma[f * 3 + 0] = gx;
    gamma[f * 3 + 1] = gy;
    gamma[f * 3 + 2] = gz;

    for (std::size_t j = 0; j < nj; ++j) {
      const std::string& name = t.joint_names[j];
      const Side side = side_of(name);
      const double sign = side == Side::right ? -1.0 : 1.0;
      Eigen::Matrix3d r = Eigen::Matrix3d::Identity();

      if (j == 0) {
        // The rest body faces -y; yaw it to face the travel direction.
        r = rot_z(direction + kPi / 2.0);
        if (walking) r = r * rot_z(0.05 * a * s);
      } else if (walking) {
        if (has(name, "hip") || name == "leg") r = rot_x(-0.45 * a * sign * s);
        else if (has(name, "knee")) r = rot_x(0.3 * a * (1.0 + std::sin(phi * sign + kPi / 3.0)));
        else if (has(name, "ankle")) r = rot_x(-0.15 * a * sign * s);
        else if (has(name, "shoulder")) r = rot_x(0.35 * a * sign * s);
        else if (has(name, "elbow")) r = rot_x(-(0.3 + 0.15 * sign * s) * a);
        else if (has(name, "spine") || has(name, "thorax")) r = rot_z(-0.04 * a * s);
        else if (has(name, "head")) r = rot_x(0.03 * std::sin(2.0 * phi));
      } else if (spec_.kind == MotionKind::arm_swing) {
        if (has(name, "shoulder")) r = rot_x(-1.0 * a * sign * s) * rot_y(0.15 * sign);
        else if (has(name, "elbow")) r = rot_x(-(0.4 + 0.3 * sign * s) * a);
        else if (has(name, "spine") || has(name, "thorax")) r = rot_z(0.05 * a * s);
        else if (has(name, "head")) r = rot_x(0.05 * s);
      } else {  // squat
        if (has(name, "hip") || name == "leg") r = rot_x(-0.9 * a * bend);
        else if (has(name, "knee")) r = rot_x(1.6 * a * bend);
        else if (has(name, "ankle")) r = rot_x(-0.7 * a * bend);
        else if (has(name, "shoulder")) r = rot_x(-0.9 * a * bend);
        else if (has(name, "spine") && side == Side::none) r = rot_x(-0.15 * a * bend);
      }
      const auto r6 = body::matrix_to_rot6d(r);
      std::copy(r6.begin(), r6.end(), theta.begin() + static_cast<std::ptrdiff_t>((f * nj + j) * 6));
    }
    std::copy(beta_.begin(), beta_.end(), beta.begin() + static_cast<std::ptrdiff_t>(f * t.n_shape));
  }
  return {ad::Tensor::from({nf, nj * 6}, std::move(theta)), ad::Tensor::from({nf, t.n_shape}, std::move(beta)),
          ad::Tensor::from({nf, 3}, std::move(gamma))};
}

body::BodyParams generate_motion(const body::BodyTemplate& tmpl, const MotionSpec& spec) {
  const std::size_t n = spec.frame_count();
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = static_cast<double>(i) / spec.frame_rate;
  return MotionGenerator(tmpl, spec).at(times);
}

}  // namespace mmbat::radar

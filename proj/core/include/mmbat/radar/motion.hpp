#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mmbat/body/body_model.hpp"

namespace mmbat::radar {

enum class MotionKind { walk_line, walk_circle, arm_swing, squat };

MotionKind parse_motion_kind(std::string_view name);
std::string_view motion_kind_name(MotionKind kind);

struct MotionSpec {
  MotionKind kind = MotionKind::walk_line;
  double duration = 10.0;    // seconds
  double frame_rate = 10.0;  // Hz
  std::uint64_t seed = 0;
  double speed = 1.0;        // m/s, walking kinds only

  std::size_t frame_count() const;
};

/// Continuous-time motion: smooth sinusoidal joint angles, constant-speed
/// root travel for the walking kinds. All randomness (start, heading, phase,
/// amplitudes, body shape) is drawn once from the seed at construction.
class MotionGenerator {
 public:
  MotionGenerator(const body::BodyTemplate& tmpl, const MotionSpec& spec);

  /// Parameters at arbitrary times; one row per entry of `times`.
  body::BodyParams at(std::span<const double> times) const;

 private:
  const body::BodyTemplate* tmpl_;
  MotionSpec spec_;
  double start_x_, start_y_, heading_, phase_, amplitude_;
  std::vector<double> beta_;
};

/// Samples `MotionSpec::frame_count()` frames at t_i = i / frame_rate.
body::BodyParams generate_motion(const body::BodyTemplate& tmpl, const MotionSpec& spec);

}  // namespace mmbat::radar

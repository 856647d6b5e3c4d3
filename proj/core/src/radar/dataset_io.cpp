#include "mmbat/radar/dataset_io.hpp"

#include <cmath>
#include <string>

#include "mmbat/errors.hpp"
#include "mmbat/util/binary_io.hpp"

namespace mmbat::radar {
namespace {

constexpr std::string_view kMagic = "MMRD";

void check_finite(std::span<const double> v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ContractError(what + " contains a non-finite value");
  }
}

}  // namespace

void RawSequence::validate() const {
  if (channels < kMinChannels) throw ContractError("point frames need at least 4 channels");
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) throw ContractError("frame rate must be positive");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const PointFrame& f = frames[i];
    const std::string where = "frame " + std::to_string(i);
    if (f.channels != channels) throw ContractError(where + " has a different channel count");
    if (f.data.size() % channels != 0) throw DimensionError(where + " payload is not a multiple of C");
    check_finite(f.data, where);
    if (!std::isfinite(f.timestamp)) throw ContractError(where + " timestamp is not finite");
    if (i > 0 && !(f.timestamp > frames[i - 1].timestamp)) {
      throw ContractError(where + " timestamp is not strictly increasing");
    }
  }
  if (ground_truth) {
    const GroundTruth& g = *ground_truth;
    const std::size_t n = frames.size();
    if (g.params.theta.rank() != 2 || g.params.beta.rank() != 2 || g.params.gamma.rank() != 2 ||
        g.joints.rank() != 3) {
      throw DimensionError("ground truth tensors have the wrong rank");
    }
    const std::size_t nj = g.joints.dim(1);
    if (g.params.theta.dim(0) != n || g.params.beta.dim(0) != n || g.params.gamma.dim(0) != n ||
        g.joints.dim(0) != n) {
      throw ContractError("ground truth must have one entry per frame");
    }
    if (g.params.theta.dim(1) != 6 * nj || g.params.gamma.dim(1) != 3 || g.joints.dim(2) != 3) {
      throw DimensionError("ground truth extents are inconsistent");
    }
    check_finite(g.params.theta.values(), "ground truth theta");
    check_finite(g.params.beta.values(), "ground truth beta");
    check_finite(g.params.gamma.values(), "ground truth gamma");
    check_finite(g.joints.values(), "ground truth joints");
  }
  if (initial_box_center) check_finite(*initial_box_center, "initial box center");
}

std::vector<std::uint8_t> encode_dataset(const RawSequence& seq) {
  seq.validate();
  util::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kDatasetVersion);
  w.u64(seq.frames.size());
  w.u32(static_cast<std::uint32_t>(seq.channels));
  w.f64(seq.frame_rate);
  for (const PointFrame& f : seq.frames) {
    w.u32(static_cast<std::uint32_t>(f.count()));
    w.f64s(f.data);
    w.f64(f.timestamp);
  }
  w.u8(seq.ground_truth ? 1 : 0);
  if (seq.ground_truth) {
    const GroundTruth& g = *seq.ground_truth;
    const std::size_t nj = g.n_joints(), nb = g.n_shape();
    w.u32(static_cast<std::uint32_t>(nj));
    w.u32(static_cast<std::uint32_t>(nb));
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      w.f64s(g.params.theta.values().subspan(i * 6 * nj, 6 * nj));
      w.f64s(g.params.beta.values().subspan(i * nb, nb));
      w.f64s(g.params.gamma.values().subspan(i * 3, 3));
      w.f64s(g.joints.values().subspan(i * 3 * nj, 3 * nj));
    }
  }
  w.u8(seq.initial_box_center ? 1 : 0);
  if (seq.initial_box_center) w.f64s(*seq.initial_box_center);
  return w.buffer();
}

RawSequence decode_dataset(std::vector<std::uint8_t> bytes) {
  util::ByteReader r(std::move(bytes));
  if (r.bytes(4) != kMagic) throw FormatError("not an MMRD dataset (bad magic)", 0);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  }
  RawSequence seq;
  const std::uint64_t n_frames = r.u64();
  const std::uint64_t channels_at = r.offset();
  seq.channels = r.u32();
  if (seq.channels < kMinChannels) throw FormatError("channel count below 4", channels_at);
  seq.frame_rate = r.f64();
  // Every frame costs at least 12 bytes, which bounds a corrupt count early.
  if (n_frames > r.remaining() / 12) throw FormatError("frame count exceeds file size", channels_at - 8);
  seq.frames.reserve(n_frames);
  for (std::uint64_t i = 0; i < n_frames; ++i) {
    const std::uint64_t at = r.offset();
    PointFrame f;
    f.channels = seq.channels;
    const std::uint64_t count = r.u32();
    if (count * seq.channels > r.remaining() / 8) throw FormatError("point payload truncated", at);
    f.data.resize(count * seq.channels);
    r.f64s(f.data);
    f.timestamp = r.f64();
    seq.frames.push_back(std::move(f));
  }
  const std::uint64_t gt_at = r.offset();
  const std::uint8_t has_gt = r.u8();
  if (has_gt > 1) throw FormatError("bad ground-truth flag", gt_at);
  if (has_gt) {
    const std::size_t nj = r.u32(), nb = r.u32();
    const std::size_t n = seq.frames.size();
    const std::size_t per_frame = 6 * nj + nb + 3 + 3 * nj;
    if (nj == 0 || (per_frame > 0 && n > r.remaining() / 8 / per_frame)) {
      throw FormatError("ground-truth block truncated", gt_at);
    }
    std::vector<double> theta(n * 6 * nj), beta(n * nb), gamma(n * 3), joints(n * 3 * nj);
    for (std::size_t i = 0; i < n; ++i) {
      r.f64s(std::span(theta).subspan(i * 6 * nj, 6 * nj));
      r.f64s(std::span(beta).subspan(i * nb, nb));
      r.f64s(std::span(gamma).subspan(i * 3, 3));
      r.f64s(std::span(joints).subspan(i * 3 * nj, 3 * nj));
    }
    seq.ground_truth = GroundTruth{{ad::Tensor::from({n, 6 * nj}, std::move(theta)),
                                    ad::Tensor::from({n, nb}, std::move(beta)),
                                    ad::Tensor::from({n, 3}, std::move(gamma))},
                                   ad::Tensor::from({n, nj, 3}, std::move(joints))};
  }
  const std::uint64_t box_at = r.offset();
  const std::uint8_t has_box = r.u8();
  if (has_box > 1) throw FormatError("bad initial-box flag", box_at);
  if (has_box) {
    Vec3 c;
    r.f64s(c);
    seq.initial_box_center = c;
  }
  if (!r.at_end()) throw FormatError("trailing bytes after dataset", r.offset());
  try {
    seq.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("dataset violates an invariant: ") + e.what(), r.offset());
  }
  return seq;
}

void write_dataset(const RawSequence& seq, const std::filesystem::path& path) {
  util::write_file_bytes(path, encode_dataset(seq));
}

RawSequence read_dataset(const std::filesystem::path& path) { return decode_dataset(util::read_file_bytes(path)); }

}  // namespace mmbat::radar

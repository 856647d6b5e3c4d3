#pragma once

#include <string>
#include <vector>

#include "mmbat/net/losses.hpp"
#include "mmbat/radar/types.hpp"

namespace mmbat::harness {

struct WindowRef {
  std::size_t sequence = 0;
  std::size_t start = 0;
};

/// Rows [start, start + count) along axis 0, as a constant tensor.
ad::Tensor take_rows(const ad::Tensor& t, std::size_t start, std::size_t count);
/// Concatenation along axis 0, as a constant tensor.
ad::Tensor stack_rows(const std::vector<ad::Tensor>& parts);

net::BodyEstimate take_frames(const net::BodyEstimate& e, std::size_t start, std::size_t count);
net::BodyEstimate stack_frames(const std::vector<net::BodyEstimate>& parts);

/// Body model evaluated on a sequence's ground-truth parameters. Throws
/// ContractError when the sequence has no ground truth or its stored joints
/// disagree with `tmpl` (data generated with another template).
net::BodyEstimate ground_truth_estimate(const body::BodyTemplate& tmpl, const radar::RawSequence& seq,
                                        const std::string& name);

/// Non-overlapping training windows (stride T) that also have the following
/// window available as the translation target: start + 2T <= length.
/// Sequences too short for one such window are reported in `warnings`.
std::vector<WindowRef> training_windows(const std::vector<radar::RawSequence>& data,
                                        const std::vector<std::size_t>& sequences, std::size_t window,
                                        const std::vector<std::string>& names, std::vector<std::string>& warnings);

/// Ground-truth root translations of a window as a T x 3 center list.
std::vector<double> truth_centers(const radar::RawSequence& seq, std::size_t start, std::size_t window);

}  // namespace mmbat::harness

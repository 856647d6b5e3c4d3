#include "mmbat/harness/windows.hpp"

#include <algorithm>
#include <cmath>

#include "mmbat/errors.hpp"

namespace mmbat::harness {

ad::Tensor take_rows(const ad::Tensor& t, std::size_t start, std::size_t count) {
  if (start + count > t.dim(0)) throw DimensionError("take_rows: range exceeds " + ad::shape_str(t.shape()));
  const std::size_t stride = t.dim(0) == 0 ? 0 : t.numel() / t.dim(0);
  ad::Shape s = t.shape();
  s[0] = count;
  const auto v = t.values().subspan(start * stride, count * stride);
  return ad::Tensor::from(s, std::vector<double>(v.begin(), v.end()));
}

ad::Tensor stack_rows(const std::vector<ad::Tensor>& parts) {
  if (parts.empty()) throw ContractError("stack_rows: no parts");
  ad::Shape s = parts.front().shape();
  s[0] = 0;
  std::vector<double> v;
  for (const auto& p : parts) {
    if (p.rank() != s.size() || !std::equal(s.begin() + 1, s.end(), p.shape().begin() + 1)) {
      throw DimensionError("stack_rows: mismatched part " + ad::shape_str(p.shape()));
    }
    s[0] += p.dim(0);
    v.insert(v.end(), p.values().begin(), p.values().end());
  }
  return ad::Tensor::from(s, std::move(v));
}

net::BodyEstimate take_frames(const net::BodyEstimate& e, std::size_t start, std::size_t count) {
  net::BodyEstimate o;
  o.params = {take_rows(e.params.theta, start, count), take_rows(e.params.beta, start, count),
              take_rows(e.params.gamma, start, count)};
  o.rotations = take_rows(e.rotations, start, count);
  o.joints = take_rows(e.joints, start, count);
  o.vertices = take_rows(e.vertices, start, count);
  return o;
}

net::BodyEstimate stack_frames(const std::vector<net::BodyEstimate>& parts) {
  auto collect = [&](auto get) {
    std::vector<ad::Tensor> ts;
    for (const auto& p : parts) ts.push_back(get(p));
    return stack_rows(ts);
  };
  net::BodyEstimate o;
  o.params.theta = collect([](const auto& p) { return p.params.theta; });
  o.params.beta = collect([](const auto& p) { return p.params.beta; });
  o.params.gamma = collect([](const auto& p) { return p.params.gamma; });
  o.rotations = collect([](const auto& p) { return p.rotations; });
  o.joints = collect([](const auto& p) { return p.joints; });
  o.vertices = collect([](const auto& p) { return p.vertices; });
  return o;
}

net::BodyEstimate ground_truth_estimate(const body::BodyTemplate& tmpl, const radar::RawSequence& seq,
                                        const std::string& name) {
  if (!seq.ground_truth) throw ContractError("sequence '" + name + "' has no ground truth");
  const radar::GroundTruth& gt = *seq.ground_truth;
  if (gt.n_joints() != tmpl.n_joints || gt.n_shape() != tmpl.n_shape) {
    throw ContractError("sequence '" + name + "' ground truth has " + std::to_string(gt.n_joints()) + " joints / " +
                        std::to_string(gt.n_shape()) + " shape coefficients; the body template has " +
                        std::to_string(tmpl.n_joints) + " / " + std::to_string(tmpl.n_shape));
  }
  net::BodyEstimate e = net::evaluate_body(tmpl, gt.params);
  double worst = 0.0;
  for (std::size_t i = 0; i < e.joints.numel(); ++i) worst = std::max(worst, std::abs(e.joints.at(i) - gt.joints.at(i)));
  if (worst > 1e-6) {
    throw ContractError("sequence '" + name + "' ground-truth joints do not match the configured body template");
  }
  return e;
}

std::vector<WindowRef> training_windows(const std::vector<radar::RawSequence>& data,
                                        const std::vector<std::size_t>& sequences, std::size_t window,
                                        const std::vector<std::string>& names, std::vector<std::string>& warnings) {
  std::vector<WindowRef> out;
  for (std::size_t s : sequences) {
    const std::size_t len = data[s].size();
    if (len < 2 * window) {
      warnings.push_back("skipping sequence '" + names[s] + "': " + std::to_string(len) +
                         " frames, training needs at least " + std::to_string(2 * window));
      continue;
    }
    for (std::size_t t = 0; t + 2 * window <= len; t += window) out.push_back({s, t});
  }
  return out;
}

std::vector<double> truth_centers(const radar::RawSequence& seq, std::size_t start, std::size_t window) {
  if (!seq.ground_truth) throw ContractError("ground-truth crop centers need ground truth");
  const auto g = seq.ground_truth->params.gamma.values();
  return {g.begin() + start * 3, g.begin() + (start + window) * 3};
}

}  // namespace mmbat::harness

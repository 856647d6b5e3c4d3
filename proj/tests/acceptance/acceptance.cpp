// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. Pass criterion numbers as arguments to run a
// subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/body/body_model.hpp"
#include "mmbat/body/rotation.hpp"
#include "mmbat/harness/evaluate.hpp"
#include "mmbat/harness/metrics.hpp"
#include "mmbat/harness/train.hpp"
#include "mmbat/net/attention.hpp"
#include "mmbat/net/backbone.hpp"
#include "mmbat/net/crop.hpp"
#include "mmbat/net/gru.hpp"
#include "mmbat/net/losses.hpp"
#include "mmbat/net/mmbat_net.hpp"
#include "mmbat/net/point_ops.hpp"
#include "mmbat/radar/simulator.hpp"

using namespace mmbat;
using ad::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Tensor param(ad::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return Tensor::from(shape, uniform(ad::shape_numel(shape), seed, lo, hi), true);
}

// Values bounded away from zero, for kinked or singular ops.
Tensor away_from_zero(ad::Shape shape, std::uint64_t seed) {
  auto v = uniform(ad::shape_numel(shape), seed, 0.2, 1.0);
  const auto s = uniform(v.size(), seed + 1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= s[i] < 0 ? -1.0 : 1.0;
  return Tensor::from(shape, v, true);
}

// Scalar probe with fixed random weights so no output entry is ignored.
Tensor probe(const Tensor& t, std::uint64_t seed = 99) {
  return ad::sum(ad::mul(t, Tensor::from(t.shape(), uniform(t.numel(), seed))));
}

/// Worst norm-wise relative error between analytic and central-difference
/// gradients over every input that requires grad.
double gradient_error(const std::function<Tensor()>& f, std::vector<Tensor> inputs, double h = 1e-5) {
  for (auto& t : inputs) t.zero_grad();
  ad::backward(f());
  double worst = 0.0;
  for (auto& x : inputs) {
    std::vector<double> analytic(x.numel(), 0.0);
    if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
    x.zero_grad();
    double diff = 0.0, na = 0.0, nn = 0.0;
    auto w = x.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + h;
      const double up = f().item();
      w[i] = keep - h;
      const double down = f().item();
      w[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff += (numeric - analytic[i]) * (numeric - analytic[i]);
      na += analytic[i] * analytic[i];
      nn += numeric * numeric;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-8}));
  }
  return worst;
}

std::vector<Tensor> weights_of(net::ParameterStore& store) {
  std::vector<Tensor> out;
  for (auto& p : store.parameters()) out.push_back(p.tensor);
  return out;
}

net::NetConfig micro_net() {
  net::NetConfig c;
  c.window = 2;
  c.points = 16;
  c.n_joints = 4;
  c.n_shape = 3;
  c.sa_stages = {{4, 0.3, 4, {8, 8}}, {4, 0.6, 4, {8, 16}}};
  c.global_mlp = {16};
  c.gru_hidden = 8;
  c.translation_hidden = {16, 8};
  c.skeleton_hidden = {16};
  c.fusion_width = 16;
  c.heads = 2;
  c.pose_hidden = {8};
  c.shape_hidden = {8};
  c.dropout = 0.0;
  return c;
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> errors;
  auto check = [&](const std::string& name, const std::function<Tensor()>& f, const std::vector<Tensor>& in) {
    errors[name] = gradient_error(f, in);
  };

  const auto a = param({3, 4}, 1), b = param({3, 4}, 2), row = param({4}, 3);
  const auto pos = param({3, 4}, 4, 0.5, 2.0), nz = away_from_zero({3, 4}, 5);
  check("add", [&] { return probe(ad::add(a, row)); }, {a, row});
  check("sub", [&] { return probe(ad::sub(a, b)); }, {a, b});
  check("mul", [&] { return probe(ad::mul(a, row)); }, {a, row});
  check("div", [&] { return probe(ad::div(a, pos)); }, {a, pos});
  check("scale", [&] { return probe(ad::scale(a, 1.7)); }, {a});
  check("add_scalar", [&] { return probe(ad::add_scalar(a, -0.3)); }, {a});
  check("neg", [&] { return probe(ad::neg(a)); }, {a});
  check("relu", [&] { return probe(ad::relu(nz)); }, {nz});
  check("sigmoid", [&] { return probe(ad::sigmoid(a)); }, {a});
  check("tanh", [&] { return probe(ad::tanh(a)); }, {a});
  check("abs", [&] { return probe(ad::abs(nz)); }, {nz});
  check("sqrt", [&] { return probe(ad::sqrt(pos)); }, {pos});
  check("square", [&] { return probe(ad::square(a)); }, {a});
  const auto c = param({3, 4}, 6, -0.9, 0.9);
  check("acos_clamped", [&] { return probe(ad::acos_clamped(c, -1.0 + 1e-7, 1.0 - 1e-7)); }, {c});

  const auto m = param({4, 5}, 7), ba = param({2, 3, 4}, 8), bb = param({2, 4, 2}, 9);
  check("matmul", [&] { return probe(ad::matmul(a, m)); }, {a, m});
  check("batched_matmul", [&] { return probe(ad::batched_matmul(ba, bb)); }, {ba, bb});
  check("transpose_last2", [&] { return probe(ad::transpose_last2(ba)); }, {ba});
  check("permute", [&] { return probe(ad::permute(ba, {2, 0, 1})); }, {ba});
  check("reshape", [&] { return probe(ad::reshape(ba, {4, 6})); }, {ba});
  check("broadcast_to", [&] { return probe(ad::broadcast_to(row, {3, 4})); }, {row});
  check("sum", [&] { return ad::square(ad::sum(a)); }, {a});
  check("mean", [&] { return ad::square(ad::mean(a)); }, {a});
  check("sum_axis", [&] { return probe(ad::sum_axis(ba, 1)); }, {ba});
  check("mean_axis", [&] { return probe(ad::mean_axis(ba, 0)); }, {ba});
  check("softmax", [&] { return probe(ad::softmax(ba, -1)); }, {ba});
  check("concat", [&] { return probe(ad::concat({a, b}, 1)); }, {a, b});
  check("slice", [&] { return probe(ad::slice(ba, 2, 1, 2)); }, {ba});
  check("gather_rows", [&] { return probe(ad::gather_rows(a, {0, 2, 2, 1})); }, {a});
  const auto lw = param({4, 3}, 10), lb = param({3}, 11);
  check("linear_layer", [&] { return probe(ad::linear_layer(ba, lw, lb)); }, {ba, lw, lb});
  check("dropout", [&] { return probe(ad::dropout(a, 0.3, true, 5)); }, {a});

  const auto r6 = param({5, 6}, 12);
  check("rot6d_to_matrix", [&] { return probe(body::rot6d_to_matrix(r6)); }, {r6});
  const auto r6b = param({5, 6}, 13);
  check("geodesic_distance",
        [&] { return probe(body::geodesic_distance(body::rot6d_to_matrix(r6), body::rot6d_to_matrix(r6b))); },
        {r6, r6b});
  const auto far = Tensor::from({3, 4}, uniform(12, 40, 3.0, 4.0));
  check("mean_l1", [&] { return net::mean_l1(a, far); }, {a});

  const auto tmpl = body::make_template(4, 40, 3, 0);
  auto theta_v = uniform(2 * 24, 14, -0.3, 0.3);
  for (std::size_t i = 0; i < 8; ++i) {
    theta_v[6 * i] += 1.0;
    theta_v[6 * i + 4] += 1.0;
  }
  const auto theta = Tensor::from({2, 24}, theta_v, true), beta = param({2, 3}, 15), gamma = param({2, 3}, 16);
  check("body_forward", [&] {
    const auto out = body::body_forward(tmpl, {theta, beta, gamma});
    return ad::add(probe(out.joints, 1), probe(out.vertices, 2));
  }, {theta, beta, gamma});

  net::ParameterStore store(3);
  const auto grouped = param({3, 5, 4}, 17), score = param({4, 1}, 18);
  check("score_aggregate", [&] { return probe(net::score_aggregate(grouped, score)); }, {grouped, score});

  const auto sa = net::SetAbstractionLayer::create(store, "sa", 2, {2, 0.5, 4, {6, 5}});
  net::PointSet ps;
  ps.frames = 1;
  ps.per_frame = 8;
  ps.positions = uniform(24, 19, -0.4, 0.4);
  ps.features = param({8, 2}, 20);
  auto sa_inputs = weights_of(store);
  sa_inputs.push_back(ps.features);
  check("set_abstraction", [&] { return probe(net::set_abstraction(ps, 3, sa).features); }, sa_inputs);

  net::ParameterStore gstore(4);
  const auto gru = net::BiGruWeights::create(gstore, "gru", 3, 4);
  const auto seq = param({2, 3, 3}, 21);
  auto gru_inputs = weights_of(gstore);
  gru_inputs.push_back(seq);
  check("gru", [&] { return probe(net::gru_forward(seq, gru.forward, false)); }, gru_inputs);
  check("bigru", [&] { return probe(net::bigru_forward(seq, gru, {})); }, gru_inputs);

  net::ParameterStore astore(5);
  const auto att = net::AttentionWeights::create(astore, "att", 6, 8, 2);
  const auto tokens = param({3, 4, 8}, 22), global = param({1, 2, 6}, 23), joints = param({1, 2, 4, 3}, 24);
  auto att_inputs = weights_of(astore);
  att_inputs.push_back(tokens);
  check("multi_head_attention", [&] { return probe(net::multi_head_attention(tokens, att)); }, att_inputs);
  att_inputs.back() = global;
  att_inputs.push_back(joints);
  check("fuse_and_attend", [&] { return probe(net::fuse_and_attend(global, joints, att).output); }, att_inputs);

  // End to end: every parameter of the micro network through l_total.
  const auto cfg = micro_net();
  net::MmbatNet model(cfg, tmpl);
  net::ProcessedSequence win;
  win.window = cfg.window;
  win.points = cfg.points;
  win.channels = cfg.channels;
  win.data = uniform(cfg.window * cfg.points * cfg.channels, 25, -0.5, 0.5);
  for (std::size_t i = 0; i < cfg.window * cfg.points; ++i) win.data[i * cfg.channels + 1] += 3.0;
  win.centers = {0.0, 3.0, 0.0, 0.0, 3.0, 0.0};
  const std::vector<net::ProcessedSequence> batch{win};
  auto truth_theta = uniform(2 * 24, 26, -0.3, 0.3);
  for (std::size_t i = 0; i < 8; ++i) {
    truth_theta[6 * i] += 1.0;
    truth_theta[6 * i + 4] += 1.0;
  }
  const body::BodyParams truth_params{Tensor::from({2, 24}, truth_theta), Tensor::from({2, 3}, uniform(6, 27)),
                                      Tensor::from({2, 3}, {0.1, 3.0, 0.0, 0.15, 3.05, 0.0})};
  const net::LossTargets targets{net::evaluate_body(tmpl, truth_params),
                                 Tensor::from({1, 2, 3}, {0.2, 3.1, 0.0, 0.25, 3.15, 0.0})};
  check("network l_total", [&] {
    const auto out = model.forward(batch, {});
    return net::compute_losses({out.body, out.translation, out.coarse_joints}, targets, cfg.loss_scales).l_total;
  }, weights_of(model.store()));

  const double elapsed = seconds_since(t0);
  auto worst = std::max_element(errors.begin(), errors.end(),
                                [](const auto& x, const auto& y) { return x.second < y.second; });
  const bool ok = worst->second < 1e-4 && elapsed < 60.0;
  return {ok, std::to_string(errors.size()) + " checks, worst " + worst->first + " " + fmt("%.2e", worst->second) +
                  " (< 1e-4), " + fmt("%.1f", elapsed) + " s (< 60 s)"};
}

// ---------------------------------------------------------------------------

double dist2(const double* a, const double* b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Recomputes every distance to the selected set from scratch at each step.
std::vector<std::size_t> fps_oracle(const std::vector<double>& pts, std::size_t k, std::size_t start) {
  const std::size_t n = pts.size() / 3;
  std::vector<std::size_t> picked{start};
  while (picked.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (auto s : picked) d = std::min(d, dist2(&pts[3 * i], &pts[3 * s]));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    picked.push_back(best);
  }
  return picked;
}

net::BallGroups ball_oracle(const std::vector<double>& pts, const std::vector<double>& ctr, double r,
                            std::size_t gs) {
  const std::size_t n = pts.size() / 3;
  net::BallGroups g;
  g.group_size = gs;
  for (std::size_t c = 0; c < ctr.size() / 3; ++c) {
    std::vector<std::size_t> inside;
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist2(&pts[3 * i], &ctr[3 * c]) <= r * r) inside.push_back(i);
      if (dist2(&pts[3 * i], &ctr[3 * c]) < dist2(&pts[3 * nearest], &ctr[3 * c])) nearest = i;
    }
    if (inside.size() > gs) inside.resize(gs);
    g.found.push_back(inside.size());
    if (inside.empty()) inside.push_back(nearest);
    const std::size_t first = inside.front();
    while (inside.size() < gs) inside.push_back(first);
    g.indices.insert(g.indices.end(), inside.begin(), inside.end());
  }
  return g;
}

Outcome point_op_oracles() {
  std::mt19937_64 rng(2024);
  std::size_t fps_bad = 0, ball_bad = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    std::vector<double> pts = uniform(3 * n, rng());
    // Some instances carry duplicated and grid-snapped points to exercise ties.
    if (inst % 4 == 0) {
      for (auto& v : pts) v = std::round(v * 2.0) / 2.0;
    }
    if (inst % 5 == 0 && n > 2) std::copy(pts.begin(), pts.begin() + 3, pts.end() - 3);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    if (net::farthest_point_sample(pts, k, start) != fps_oracle(pts, k, start)) ++fps_bad;

    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
    const auto centers = uniform(3 * m, rng());
    const double radius = std::uniform_real_distribution<double>(0.05, 1.2)(rng);
    const std::size_t gs = std::uniform_int_distribution<std::size_t>(1, 24)(rng);
    const auto got = net::ball_query(pts, centers, radius, gs);
    const auto want = ball_oracle(pts, centers, radius, gs);
    if (got.indices != want.indices || got.found != want.found) ++ball_bad;
  }
  return {fps_bad == 0 && ball_bad == 0, "200 instances: " + std::to_string(fps_bad) + " FPS and " +
                                             std::to_string(ball_bad) + " ball-query mismatches"};
}

// ---------------------------------------------------------------------------

Outcome rotation_suite() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  double ortho = 0.0, det = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 6> r6;
    for (auto& v : r6) v = g(rng);
    const Eigen::Matrix3d r = body::rot6d_to_matrix(r6);
    ortho = std::max(ortho, (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(r.determinant() - 1.0));
  }
  const double deg =
      body::geodesic_distance(body::axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2),
                              Eigen::Matrix3d::Identity()) *
      180.0 / std::numbers::pi;
  const bool ok = ortho < 1e-9 && det < 1e-9 && std::abs(deg - 90.0) <= 1e-3;
  return {ok, "max |R^T R - I| " + fmt("%.1e", ortho) + ", max |det - 1| " + fmt("%.1e", det) +
                  ", geodesic(Rz(90), I) " + fmt("%.6f", deg) + " deg"};
}

// ---------------------------------------------------------------------------

Tensor shifted(const Tensor& t, std::array<double, 3> d) {
  std::vector<double> v(t.values().begin(), t.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += d[i % 3];
  return Tensor::from(t.shape(), v);
}

Outcome metric_oracles() {
  const auto j = Tensor::from({4, 5, 3}, uniform(60, 30));
  const auto k = Tensor::from({4, 5, 3}, uniform(60, 31));
  const auto v = Tensor::from({4, 40, 3}, uniform(480, 32));
  const auto rot = body::rot6d_to_matrix(Tensor::from({20, 6}, uniform(120, 33)));
  const auto rot2 = body::rot6d_to_matrix(Tensor::from({20, 6}, uniform(120, 34)));

  const double five = harness::metric_mpjpe(shifted(j, {0.03, 0.04, 0.0}), j);
  const double zero = std::max({harness::metric_mpjpe(j, j), harness::metric_mpvpe(v, v), harness::metric_mte(j, j),
                                harness::metric_mpte(j, j)});
  const double self_rot = harness::metric_mpjre(rot, rot);

  // Independent loops.
  double pj = 0.0, te = 0.0;
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t n = 0; n < 5; ++n) {
      double s = 0.0;
      for (std::size_t a = 0; a < 3; ++a) s += std::pow(j.at((f * 5 + n) * 3 + a) - k.at((f * 5 + n) * 3 + a), 2);
      pj += std::sqrt(s);
      if (n == 0) te += std::sqrt(s);
    }
  }
  pj = 100.0 * pj / 20.0;
  te = 100.0 * te / 4.0;
  double re = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    Eigen::Matrix3d x, y;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        x(r, c) = rot.at(9 * i + 3 * r + c);
        y(r, c) = rot2.at(9 * i + 3 * r + c);
      }
    const double cosv = std::clamp(((x * y.transpose()).trace() - 1.0) / 2.0, -1.0 + 1e-7, 1.0 - 1e-7);
    re += std::acos(cosv);
  }
  re = re / 20.0 * 180.0 / std::numbers::pi;
  const double oracle_err =
      std::max({std::abs(harness::metric_mpjpe(j, k) - pj), std::abs(harness::metric_mte(j, k) - te),
                std::abs(harness::metric_mpjre(rot, rot2) - re)});

  const bool ok = fmt("%.2f", five) == "5.00" && std::abs(five - 5.0) < 1e-12 && zero == 0.0 && self_rot < 0.06 && oracle_err < 1e-9;
  return {ok, "offset MPJPE " + fmt("%.2f", five) + " cm (|d| " + fmt("%.0e", std::abs(five - 5.0)) + "), identical inputs " + fmt("%g", zero) + " cm / " +
                  fmt("%.4f", self_rot) + " deg, loop-oracle error " + fmt("%.1e", oracle_err)};
}

// ---------------------------------------------------------------------------

Outcome crop_contract() {
  radar::PointFrame edge;
  edge.timestamp = 0.0;
  // Two points exactly on the box faces and one just outside; Doppler carries the index.
  edge.data = {0.5, 0.0, 0.0, 0.0, 1.0, -0.5, 0.0, 1.5, 1.0, 1.0, 0.5 + 1e-9, 0.0, 0.0, 2.0, 1.0};
  const std::vector<double> center{0.0, 0.0, 0.0};
  const auto kept = net::crop_window(std::span(&edge, 1), center, 1, 2, 1);
  const bool boundary_ok = kept.data.size() == 10 && kept.data[3] == 0.0 && kept.data[8] == 1.0;

  radar::PointFrame few;
  few.timestamp = 0.0;
  for (int i = 0; i < 3; ++i) few.data.insert(few.data.end(), {0.1 * i, 0.0, 0.0, double(i), 1.0});
  bool profile_ok = true;
  for (std::uint64_t seed = 0; seed < 20 && profile_ok; ++seed) {
    const auto out = net::crop_window(std::span(&few, 1), center, 1, 8, seed);
    std::vector<int> order, count(3, 0);
    for (std::size_t i = 0; i < 8; ++i) order.push_back(static_cast<int>(out.data[5 * i + 3]));
    for (int o : order) ++count[static_cast<std::size_t>(o)];
    std::sort(count.begin(), count.end());
    profile_ok = count == std::vector<int>{2, 3, 3};
    for (std::size_t i = 1; i < 8; ++i) profile_ok = profile_ok && order[i] == (order[i - 1] + 1) % 3;
  }

  const auto tmpl = body::make_template(24, 300, 10, 0);
  radar::SimulationSpec s;
  s.motion.duration = 1.6;
  s.motion.seed = 5;
  const auto seq = radar::simulate_sequence(tmpl, s);
  std::vector<double> centers(seq.ground_truth->params.gamma.values().begin(),
                              seq.ground_truth->params.gamma.values().begin() + 24);
  const auto a = net::crop_window(seq.frames, centers, 8, 64, 77);
  const auto b = net::crop_window(seq.frames, centers, 8, 64, 77);
  const bool same = a == b;

  return {boundary_ok && profile_ok && same, std::string("half-extent point kept: ") + (boundary_ok ? "yes" : "no") +
                                                 ", 3 -> 8 cyclic profile {2,3,3}: " + (profile_ok ? "yes" : "no") +
                                                 ", equal seeds bitwise equal: " + (same ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

Outcome simulator_physics() {
  const auto tmpl = body::make_template(24, 600, 10, 0);
  radar::MotionSpec m;
  m.kind = radar::MotionKind::arm_swing;
  const auto params = radar::generate_motion(tmpl, m);
  const auto first = [&](std::size_t f) {
    return body::BodyParams{harness::take_rows(params.theta, f, 1), harness::take_rows(params.beta, f, 1),
                            harness::take_rows(params.gamma, f, 1)};
  };
  double max_doppler = 0.0;
  const auto noise = radar::noiseless(400.0);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto fr = radar::render_frame(tmpl, first(f), first(f), 0.1, {0.0, 0.0, 0.0}, noise, f);
    for (std::size_t i = 0; i < fr.count(); ++i) max_doppler = std::max(max_doppler, std::abs(fr.point(i)[radar::kDoppler]));
  }

  radar::NoiseConfig clutter = radar::noiseless(0.0);
  clutter.clutter_points_per_frame = 50.0;
  double total = 0.0;
  const int frames = 1000;
  for (int f = 0; f < frames; ++f) {
    total += static_cast<double>(
        radar::render_frame(tmpl, first(0), first(0), 0.1, {0.0, 0.0, 0.0}, clutter, 1000 + f).count());
  }
  const double mean = total / frames;
  const double se = std::sqrt(50.0 / frames);
  const bool ok = max_doppler < 1e-9 && std::abs(mean - 50.0) <= 3.0 * se;
  return {ok, "static max |Doppler| " + fmt("%.1e", max_doppler) + " m/s, clutter mean " + fmt("%.3f", mean) +
                  " vs 50 (3 SE = " + fmt("%.3f", 3.0 * se) + ")"};
}

// ---------------------------------------------------------------------------
// Desk-scale experiment shared by the remaining criteria.

harness::RunConfig desk_config() {
  harness::RunConfig c;
  c.seed = 0;
  c.body = {24, 600, 10, 0};
  auto& n = c.net;
  n.window = 8;
  n.points = 128;
  n.sa_stages = {{4, 0.2, 16, {16, 32}}, {16, 0.4, 16, {32, 64}}};
  n.global_mlp = {64};
  n.gru_hidden = 32;
  n.translation_hidden = {64, 32};
  n.skeleton_hidden = {64};
  n.fusion_width = 64;
  n.heads = 4;
  n.pose_hidden = {32};
  n.shape_hidden = {32};
  n.dropout = 0.0;
  auto& t = c.train;
  t.epochs = 1000;
  t.max_steps = 500;
  t.batch_size = 28;  // every training window of the set
  t.learning_rate = 5e-3;
  t.crop_jitter = 0.15;
  return c;
}

const std::vector<radar::RawSequence>& desk_data() {
  static const auto data = [] {
    const auto tmpl = body::make_template(desk_config().body);
    std::vector<radar::RawSequence> d;
    for (std::uint64_t i = 0; i < 4; ++i) {
      radar::SimulationSpec s;
      s.motion.kind = radar::MotionKind::walk_line;
      s.motion.duration = 6.4;
      s.motion.seed = 100 + i;
      d.push_back(radar::simulate_sequence(tmpl, s));
    }
    return d;
  }();
  return data;
}

struct DeskRun {
  harness::TrainResult trained;
  harness::MetricsReport predicted, oracle, initial;
  double seconds = 0.0;
};

const DeskRun& desk_run() {
  static const DeskRun run = [] {
    DeskRun r;
    const auto t0 = std::chrono::steady_clock::now();
    r.trained = harness::train(desk_config(), desk_data());
    r.predicted = harness::evaluate(r.trained.checkpoint, desk_data());
    harness::EvalOptions oracle;
    oracle.crop = harness::CropMode::oracle;
    r.oracle = harness::evaluate(r.trained.checkpoint, desk_data(), oracle);
    r.seconds = seconds_since(t0);
    auto frozen = desk_config();
    frozen.train.epochs = 0;
    r.initial = harness::evaluate(harness::train(frozen, desk_data()).checkpoint, desk_data());
    return r;
  }();
  return run;
}

Outcome desk_overfit() {
  const auto& r = desk_run();
  const auto& log = r.trained.log;
  if (log.empty()) return {false, "no training steps ran"};
  const double first = log.front().losses.l_total, last = log.back().losses.l_total;
  const double ratio = last / first;
  const double mpjpe = r.predicted.overall.mpjpe, oracle = r.oracle.overall.mpjpe;
  const bool ok = log.size() <= 500 && ratio <= 0.10 && mpjpe < 10.0 && oracle <= mpjpe && r.seconds < 600.0;
  return {ok, std::to_string(log.size()) + " steps, l_total " + fmt("%.3f", first) + " -> " + fmt("%.3f", last) +
                  " (" + fmt("%.1f", 100.0 * ratio) + "% <= 10%), MPJPE " + fmt("%.2f", mpjpe) +
                  " cm (< 10), oracle-crop MPJPE " + fmt("%.2f", oracle) + " cm (<= predicted), " +
                  fmt("%.0f", r.seconds) + " s (< 600 s)"};
}

Outcome multitask_signal() {
  const auto& r = desk_run();
  if (!r.predicted.overall.mpte || !r.initial.overall.mpte) return {false, "MPTE unavailable"};
  const double trained = *r.predicted.overall.mpte, initial = *r.initial.overall.mpte;
  return {trained < initial, "MPTE trained " + fmt("%.2f", trained) + " cm vs at initialization " +
                                 fmt("%.2f", initial) + " cm"};
}

// ---------------------------------------------------------------------------

std::string loss_csv(const std::vector<harness::StepLog>& log) {
  std::ostringstream out;
  out << harness::loss_csv_header() << "\n";
  for (const auto& s : log) out << harness::loss_csv_row(s) << "\n";
  return out.str();
}

Outcome determinism() {
  auto cfg = desk_config();
  cfg.train.max_steps = 12;
  cfg.train.batch_size = 8;
  auto run = [&] {
    const auto t = harness::train(cfg, desk_data());
    return std::make_pair(loss_csv(t.log), harness::evaluate(t.checkpoint, desk_data()).to_json().dump());
  };
  const auto a = run(), b = run();
  const bool runs_equal = a.first == b.first && a.second == b.second;

  const auto full = harness::train(cfg, desk_data());
  auto capped = cfg;
  capped.train.max_steps = 6;  // stops in the middle of the second epoch
  harness::TrainOptions resume;
  resume.resume = harness::train(capped, desk_data()).checkpoint;
  const auto resumed = harness::train(cfg, desk_data(), resume);
  const bool resume_equal =
      harness::encode_checkpoint(resumed.checkpoint) == harness::encode_checkpoint(full.checkpoint) &&
      loss_csv(resumed.log) ==
          loss_csv({full.log.end() - static_cast<std::ptrdiff_t>(resumed.log.size()), full.log.end()});
  return {runs_equal && resume_equal, std::string("repeat runs byte-identical: ") + (runs_equal ? "yes" : "no") +
                                          ", resume after step 6 of 12 bitwise equal: " +
                                          (resume_equal ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"point-op oracles", point_op_oracles},
      {"rotation suite", rotation_suite},
      {"metric oracles", metric_oracles},
      {"crop contract", crop_contract},
      {"simulator physics", simulator_physics},
      {"desk-scale overfit", desk_overfit},
      {"determinism", determinism},
      {"multi-task signal", multitask_signal},
  };
  std::vector<bool> wanted(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) wanted[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!wanted[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}

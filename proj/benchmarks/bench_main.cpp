#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/body/body_model.hpp"
#include "mmbat/body/body_template.hpp"
#include "mmbat/net/mmbat_net.hpp"
#include "mmbat/net/point_ops.hpp"

using namespace mmbat;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

net::NetConfig small_net() {
  net::NetConfig c;
  c.points = 128;
  c.sa_stages = {{4, 0.2, 16, {16, 32}}, {16, 0.4, 16, {32, 64}}};
  c.global_mlp = {64};
  c.gru_hidden = 32;
  c.translation_hidden = {64, 32};
  c.skeleton_hidden = {64};
  c.fusion_width = 64;
  c.heads = 4;
  c.pose_hidden = {32};
  c.shape_hidden = {32};
  return c;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = ad::Tensor::from({n, n}, random_values(n * n, 1));
  const auto b = ad::Tensor::from({n, n}, random_values(n * n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

static void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto va = random_values(n * n, 1), vb = random_values(n * n, 2);
  for (auto _ : state) {
    auto a = ad::Tensor::from({n, n}, va, true);
    auto b = ad::Tensor::from({n, n}, vb, true);
    ad::backward(ad::sum(ad::matmul(a, b)));
    benchmark::DoNotOptimize(a.grad().data());
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(128);

static void BM_FarthestPointSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_values(3 * n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(net::farthest_point_sample(pts, n / 4, 0));
}
BENCHMARK(BM_FarthestPointSample)->Arg(128)->Arg(1024);

static void BM_BallQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_values(3 * n, 4);
  const auto idx = net::farthest_point_sample(pts, n / 4, 0);
  std::vector<double> centers;
  for (auto i : idx) centers.insert(centers.end(), pts.begin() + 3 * i, pts.begin() + 3 * i + 3);
  for (auto _ : state) benchmark::DoNotOptimize(net::ball_query(pts, centers, 0.4, 16));
}
BENCHMARK(BM_BallQuery)->Arg(128)->Arg(1024);

static void BM_BodyForward(benchmark::State& state) {
  const auto tmpl = body::make_template(24, 600, 10, 0);
  const auto frames = static_cast<std::size_t>(state.range(0));
  const auto params = body::rest_params(tmpl, frames);
  for (auto _ : state) benchmark::DoNotOptimize(body::body_forward(tmpl, params));
}
BENCHMARK(BM_BodyForward)->Arg(1)->Arg(16);

static void BM_NetForward(benchmark::State& state) {
  const auto cfg = small_net();
  const auto tmpl = body::make_template(24, 600, 10, 0);
  const net::MmbatNet model(cfg, tmpl);
  net::ProcessedSequence seq;
  seq.window = cfg.window;
  seq.points = cfg.points;
  seq.channels = cfg.channels;
  seq.data = random_values(cfg.window * cfg.points * cfg.channels, 5);
  seq.centers.assign(3 * cfg.window, 0.0);
  const std::vector<net::ProcessedSequence> batch(static_cast<std::size_t>(state.range(0)), seq);
  const net::ForwardMode mode{};
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(batch, mode));
}
BENCHMARK(BM_NetForward)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

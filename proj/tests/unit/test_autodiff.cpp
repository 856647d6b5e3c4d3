#include <cmath>
#include <string>

#include "mmbat/autodiff/adam.hpp"
#include "mmbat/errors.hpp"
#include "support.hpp"

using namespace mmbat;
using ad::Tensor;
using test::gradient_error;
using test::random_tensor;

namespace {

std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a.at(i * k + p) * b.at(p * n + j);
  return c;
}

}  // namespace

TEST_CASE("matmul identity, zero and triple-loop oracle") {
  const auto a = random_tensor({3, 3}, 1, false);
  std::vector<double> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK(test::max_abs_diff(ad::matmul(Tensor::from({3, 3}, eye), a).values(), a.values()) == 0.0);
  const auto z = ad::matmul(Tensor::zeros({3, 3}), a);
  for (double v : z.values()) CHECK(v == 0.0);

  const auto x = random_tensor({2, 3}, 2, false);
  const auto y = random_tensor({3, 2}, 3, false);
  const auto oracle = naive_matmul(x, y);
  CHECK(test::max_abs_diff(ad::matmul(x, y).values(), oracle) < 1e-12);

  const auto big_a = random_tensor({37, 19}, 4, false);
  const auto big_b = random_tensor({19, 23}, 5, false);
  CHECK(test::max_abs_diff(ad::matmul(big_a, big_b).values(), naive_matmul(big_a, big_b)) < 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const auto a = Tensor::zeros({2, 3});
  const auto b = Tensor::zeros({2, 3});
  try {
    ad::matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(ad::shape_str({2, 3})) != std::string::npos);
  }
  CHECK_THROWS_AS(ad::matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2})), DimensionError);
}

TEST_CASE("elementwise values") {
  const auto x = Tensor::from({3}, {-1.0, 0.0, 2.0});
  const auto r = ad::elementwise(ad::OpCode::relu, x);
  CHECK(r.at(0) == 0.0);
  CHECK(r.at(1) == 0.0);
  CHECK(r.at(2) == 2.0);
  CHECK(ad::elementwise(ad::OpCode::sigmoid, Tensor::scalar(0.0)).item() == 0.5);
  CHECK(ad::elementwise(ad::OpCode::tanh, Tensor::scalar(0.0)).item() == 0.0);
  CHECK_THROWS_AS(ad::add(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), DimensionError);
  CHECK_THROWS_AS(ad::elementwise(ad::OpCode::add, x), ContractError);
}

TEST_CASE("elementwise gradients match finite differences") {
  const auto a = random_tensor({3, 4}, 10);
  const auto b = random_tensor({3, 4}, 11);
  const auto row = random_tensor({4}, 12);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::add(in[0], in[1])); }, {a, b}) < 1e-6);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::mul(in[0], ad::sigmoid(in[1]))); }, {a, b}) < 1e-4);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::mul(ad::tanh(in[0]), in[1])); }, {a, row}) < 1e-4);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::relu(in[0]))); }, {a}) < 1e-4);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::div(in[0], ad::add_scalar(ad::square(in[1]), 1.0))); },
                       {a, row}) < 1e-4);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::sub(ad::abs(in[0]), in[1])); }, {a, b}) < 1e-4);
  const auto pos = random_tensor({5}, 13, true, 0.5, 2.0);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::sqrt(in[0])); }, {pos}) < 1e-4);
  const auto inner = random_tensor({5}, 14, true, -0.9, 0.9);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::acos_clamped(in[0], -1.0, 1.0)); }, {inner}) < 1e-4);
}

TEST_CASE("acos_clamped has zero gradient where clamped") {
  auto x = Tensor::from({2}, {1.5, -2.0}, true);
  ad::backward(ad::sum(ad::acos_clamped(x, -1.0, 1.0)));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("softmax values, stability and oracle") {
  const auto u = ad::softmax(Tensor::from({3}, {0.0, 0.0, 0.0}), 0);
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto big = ad::softmax(Tensor::from({2}, {1000.0, 1000.0}), 0);
  CHECK(big.at(0) == 0.5);
  CHECK(big.at(1) == 0.5);

  const auto x = random_tensor({4}, 20, false, -3.0, 3.0);
  long double denom = 0.0L;
  for (double v : x.values()) denom += std::exp(static_cast<long double>(v));
  const auto s = ad::softmax(x, 0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double oracle = static_cast<double>(std::exp(static_cast<long double>(x.at(i))) / denom);
    CHECK(std::abs(s.at(i) - oracle) < 1e-12);
  }
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor({5, 7}, 100 + seed, false, -10.0, 10.0);
    const double c = test::uniform(1, 200 + seed, -50.0, 50.0)[0];
    for (std::ptrdiff_t axis : {0, 1}) {
      const auto s = ad::softmax(x, axis);
      const auto t = ad::softmax(ad::add_scalar(x, c), axis);
      CHECK(test::max_abs_diff(s.values(), t.values()) < 1e-12);
      const auto sums = ad::sum_axis(s, axis);
      for (double v : sums.values()) CHECK(std::abs(v - 1.0) < 1e-12);
      for (double v : s.values()) CHECK(v >= 0.0);
    }
  }
  const auto w = random_tensor({3, 4}, 30);
  const auto x = random_tensor({3, 4}, 31);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::mul(ad::softmax(in[0], 1), in[1])); }, {x, w}) < 1e-4);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::mul(ad::softmax(in[0], 0), in[1])); }, {x, w}) < 1e-4);
}

TEST_CASE("concat layout, identity and gradient routing") {
  const auto a = random_tensor({2, 3}, 40);
  const auto b = random_tensor({2, 5}, 41);
  const auto c = ad::concat_last_axis({a, b});
  REQUIRE(c.shape() == ad::Shape{2, 8});
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(c.at(r * 8 + j) == a.at(r * 3 + j));
    for (std::size_t j = 0; j < 5; ++j) CHECK(c.at(r * 8 + 3 + j) == b.at(r * 5 + j));
  }
  const auto single = ad::concat_last_axis({a});
  CHECK(single.shape() == a.shape());
  CHECK(test::max_abs_diff(single.values(), a.values()) == 0.0);

  auto ga = random_tensor({2, 3}, 42);
  auto gb = random_tensor({2, 5}, 43);
  ad::backward(ad::sum(ad::concat_last_axis({ga, gb})));
  for (double g : ga.grad()) CHECK(g == 1.0);
  for (double g : gb.grad()) CHECK(g == 1.0);
  const auto w = random_tensor({2, 8}, 44, false);
  CHECK(gradient_error([w](const auto& in) { return ad::sum(ad::mul(ad::concat_last_axis({in[0], in[1]}), w)); },
                       {ga, gb}) < 1e-6);
  CHECK_THROWS_AS(ad::concat_last_axis({Tensor::zeros({2, 3}), Tensor::zeros({3, 3})}), DimensionError);
}

TEST_CASE("linear layer identity, zero input and gradients") {
  const auto x = random_tensor({4, 3}, 50, false);
  const auto eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(test::max_abs_diff(ad::linear_layer(x, eye, Tensor::zeros({3})).values(), x.values()) == 0.0);
  const auto bias = random_tensor({2}, 51, false);
  const auto y = ad::linear_layer(Tensor::zeros({5, 3}), random_tensor({3, 2}, 52, false), bias);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t j = 0; j < 2; ++j) CHECK(y.at(r * 2 + j) == bias.at(j));

  const auto xi = random_tensor({2, 3, 4}, 53);
  const auto w = random_tensor({4, 5}, 54);
  const auto b = random_tensor({5}, 55);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::linear_layer(in[0], in[1], in[2]))); },
                       {xi, w, b}) < 1e-6);
  CHECK_THROWS_AS(ad::linear_layer(Tensor::zeros({2, 3}), Tensor::zeros({4, 5}), Tensor::zeros({5})), DimensionError);
}

TEST_CASE("dropout modes and survivor statistics") {
  const auto x = random_tensor({1000}, 60, false);
  CHECK(test::max_abs_diff(ad::dropout(x, 0.5, false, 1).values(), x.values()) == 0.0);
  CHECK(test::max_abs_diff(ad::dropout(x, 0.0, true, 1).values(), x.values()) == 0.0);
  CHECK(test::max_abs_diff(ad::dropout(x, 0.0, false, 1).values(), x.values()) == 0.0);
  CHECK_THROWS_AS(ad::dropout(x, 1.0, true, 1), ConfigError);
  CHECK_THROWS_AS(ad::dropout(x, -0.1, true, 1), ConfigError);

  const std::size_t n = 100000;
  const auto ones = Tensor::full({n}, 1.0);
  const auto d = ad::dropout(ones, 0.2, true, 7);
  std::size_t kept = 0;
  for (double v : d.values()) {
    if (v != 0.0) {
      ++kept;
      CHECK(v == doctest::Approx(1.25).epsilon(1e-15));
    }
  }
  const double sd = std::sqrt(static_cast<double>(n) * 0.8 * 0.2);
  CHECK(std::abs(static_cast<double>(kept) - 0.8 * static_cast<double>(n)) < 3.0 * sd);
  CHECK(test::max_abs_diff(ad::dropout(ones, 0.2, true, 7).values(), d.values()) == 0.0);
}

TEST_CASE("backward basics and contract") {
  auto x = random_tensor({3, 2}, 70);
  ad::backward(ad::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
  x.zero_grad();
  ad::backward(ad::sum(ad::mul(x, x)));
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(x.grad()[i] == 2.0 * x.at(i));
  CHECK_THROWS_AS(ad::backward(x), ContractError);

  auto c = random_tensor({3}, 71, false);
  auto y = random_tensor({3}, 72);
  ad::backward(ad::sum(ad::mul(c, y)));
  CHECK_FALSE(c.has_grad());
}

TEST_CASE("fan-out accumulates branch gradients") {
  const auto x = random_tensor({4}, 80);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::add(ad::mul(in[0], in[0]), ad::sigmoid(in[0]))); },
                       {x}) < 1e-4);
  auto y = Tensor::from({1}, {3.0}, true);
  ad::backward(ad::sum(ad::add(ad::scale(y, 2.0), ad::scale(y, 5.0))));
  CHECK(y.grad()[0] == 7.0);
}

TEST_CASE("composite MLP gradient matches finite differences") {
  const auto x = random_tensor({5, 4}, 90);
  const auto w1 = random_tensor({4, 8}, 91);
  const auto b1 = random_tensor({8}, 92);
  const auto w2 = random_tensor({8, 3}, 93);
  const auto b2 = random_tensor({3}, 94);
  const auto target = random_tensor({5, 3}, 95, false);
  auto f = [target](const std::vector<Tensor>& in) {
    const auto h = ad::tanh(ad::linear_layer(in[0], in[1], in[2]));
    const auto o = ad::softmax(ad::linear_layer(h, in[3], in[4]), 1);
    return ad::mean(ad::square(ad::sub(o, target)));
  };
  CHECK(gradient_error(f, {x, w1, b1, w2, b2}) < 1e-4);
}

TEST_CASE("shape ops gradients") {
  const auto x = random_tensor({2, 3, 4}, 100);
  const auto w = random_tensor({4, 3, 2}, 101, false);
  CHECK(gradient_error([w](const auto& in) { return ad::sum(ad::mul(ad::permute(in[0], {2, 1, 0}), w)); }, {x}) < 1e-6);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::reshape(in[0], {6, 4}))); }, {x}) < 1e-6);
  const auto wm = random_tensor({2, 4}, 102, false);
  CHECK(gradient_error([wm](const auto& in) { return ad::sum(ad::mul(ad::mean_axis(in[0], 1), wm)); }, {x}) < 1e-6);
  const auto r = random_tensor({4}, 103);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::broadcast_to(in[0], {3, 4}))); }, {r}) < 1e-6);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::gather_rows(in[0], {2, 0, 2}))); },
                       {random_tensor({3, 2}, 104)}) < 1e-6);
  const auto a = random_tensor({2, 3, 4}, 105);
  const auto b = random_tensor({2, 4, 5}, 106);
  CHECK(gradient_error([](const auto& in) { return ad::sum(ad::square(ad::batched_matmul(in[0], in[1]))); }, {a, b}) <
        1e-4);
}

TEST_CASE("determinism of values and gradients") {
  auto run = [] {
    auto w = random_tensor({6, 4}, 110);
    auto x = random_tensor({3, 6}, 111, false);
    const auto y = ad::dropout(ad::relu(ad::matmul(x, w)), 0.3, true, 99);
    ad::backward(ad::sum(ad::softmax(y, 1) * y));
    return std::make_pair(std::vector<double>(y.values().begin(), y.values().end()),
                          std::vector<double>(w.grad().begin(), w.grad().end()));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("graph order is topological and backward visits nodes once") {
  auto x = random_tensor({2}, 120);
  const auto y = ad::mul(x, x);
  const auto z = ad::add(y, ad::sigmoid(y));
  const auto loss = ad::sum(z);
  const auto g = ad::Graph::collect(loss);
  std::vector<std::uint64_t> seen;
  for (const auto& node : g.order()) {
    for (const auto& p : node->parents) {
      CHECK(std::find(seen.begin(), seen.end(), p->id) != seen.end());
    }
    CHECK(std::find(seen.begin(), seen.end(), node->id) == seen.end());
    seen.push_back(node->id);
  }
  CHECK(g.size() == 5);
}

TEST_CASE("adam first step, fixed point and errors") {
  ad::AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.decay = 0.0;
  std::vector<ad::NamedParameter> params{{"w", Tensor::from({3}, {0.5, -0.5, 2.0}, true)}};
  params[0].tensor.mutable_grad()[0] = 3.0;
  params[0].tensor.mutable_grad()[1] = -40.0;
  params[0].tensor.mutable_grad()[2] = 0.0;
  ad::AdamState st{cfg};
  ad::adam_step(params, st);
  CHECK(st.step_count == 1);
  CHECK(std::abs((params[0].tensor.at(0) - 0.5) + 1e-3) < 1e-9);
  CHECK(std::abs((params[0].tensor.at(1) + 0.5) - 1e-3) < 1e-9);
  CHECK(params[0].tensor.at(2) == 2.0);
  CHECK_FALSE(params[0].tensor.has_grad());
  CHECK(st.first_moment[0].size() == 3);

  CHECK_THROWS_WITH_AS(ad::adam_step(params, st), doctest::Contains("'w'"), ContractError);
}

TEST_CASE("adam trajectory on w^2 matches a scalar recurrence") {
  ad::AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.decay = 0.01;
  std::vector<ad::NamedParameter> params{{"w", Tensor::from({1}, {1.5}, true)}};
  ad::AdamState st{cfg};

  double w = 1.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 10; ++t) {
    ad::backward(ad::sum(ad::square(params[0].tensor)));
    ad::adam_step(params, st);

    const double g = 2.0 * w;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    w = w - 0.1 * mh / (std::sqrt(vh) + 1e-8) - 0.1 * 0.01 * w;
    CHECK(std::abs(params[0].tensor.at(0) - w) < 1e-12);
  }
  CHECK(st.step_count == 10);
}

#include <doctest.h>

#include "test_helpers.hpp"

#include "cfee/ppo/mlp.hpp"
#include "cfee/ppo/optimizer.hpp"

using namespace cfee;
using namespace cfee::ppo;

TEST_SUITE("mlp") {

TEST_CASE("zero network outputs zero") {
  const auto net = zero_params({5, {7, 3}, 2});
  CHECK(forward(net, test::uniform_vec(5, 101)).isZero());
}

TEST_CASE("identity single layer passes input through") {
  auto net = zero_params({4, {}, 4});
  net.layers[0].weight.setIdentity();
  const Eigen::VectorXd x = test::uniform_vec(4, 102);
  CHECK(forward(net, x) == x);
}

TEST_CASE("3-4-2 network against hand arithmetic") {
  Rng rng = make_rng(2);
  const auto net = init_params({3, {4}, 2}, rng, 1.0);
  auto params = net;
  std::uint64_t bias_seed = 120;
  for (auto& l : params.layers) l.bias = test::uniform_vec(l.bias.size(), bias_seed++);
  const Eigen::VectorXd x = test::uniform_vec(3, 103);
  const auto& W1 = params.layers[0].weight;
  const auto& W2 = params.layers[1].weight;
  Eigen::VectorXd h(4);
  for (int i = 0; i < 4; ++i) {
    double s = params.layers[0].bias(i);
    for (int j = 0; j < 3; ++j) s += W1(i, j) * x(j);
    h(i) = s > 0.0 ? s : 0.0;
  }
  const Eigen::VectorXd y = forward(params, x);
  for (int i = 0; i < 2; ++i) {
    double s = params.layers[1].bias(i);
    for (int j = 0; j < 4; ++j) s += W2(i, j) * h(j);
    CHECK(y(i) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("batched and single forward agree") {
  Rng rng = make_rng(4);
  const auto net = init_params({6, {8, 8}, 3}, rng, 1.0);
  const Eigen::MatrixXd X = test::uniform_mat(6, 5, 104);
  ForwardCache cache;
  const Eigen::MatrixXd Y = forward(net, X, &cache);
  for (int c = 0; c < 5; ++c) {
    CHECK(Y.col(c).isApprox(forward(net, Eigen::VectorXd(X.col(c))), 1e-14));
  }
}

TEST_CASE("orthogonal initialization") {
  Rng rng = make_rng(5);
  const auto net = init_params({6, {8}, 3}, rng, 0.01);
  const auto& W = net.layers[0].weight;  // 8 x 6, orthonormal columns times gain
  CHECK((W.transpose() * W).isApprox(2.0 * Eigen::MatrixXd::Identity(6, 6), 1e-10));
  const auto& V = net.layers[1].weight;  // 3 x 8, orthonormal rows times gain
  CHECK((V * V.transpose()).isApprox(1e-4 * Eigen::MatrixXd::Identity(3, 3), 1e-10));
  CHECK(net.layers[0].bias.isZero());
}

TEST_CASE("flatten round trip and parameter count") {
  Rng rng = make_rng(6);
  const auto net = init_params({3, {4, 5}, 2}, rng, 1.0);
  CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 5 + 5 + 5 * 2 + 2);
  const Eigen::VectorXd flat = flatten(net);
  CHECK(flat.size() == net.parameter_count());
  auto copy = zero_params(net.arch);
  unflatten(flat, copy);
  CHECK(flatten(copy) == flat);
  CHECK(flat(0) == net.layers[0].weight(0, 0));
  CHECK(flat(1) == net.layers[0].weight(1, 0));
}

TEST_CASE("linear net gradient is exact") {
  Rng rng = make_rng(7);
  const auto net = init_params({4, {}, 3}, rng, 1.0);
  const auto r = grad_check(net, 1e-9, rng);
  CHECK(r.passed);
  CHECK(r.max_rel_error <= 1e-9);
}

TEST_CASE("backward equals the analytic linear gradient") {
  Rng rng = make_rng(8);
  const auto net = init_params({3, {}, 2}, rng, 1.0);
  const Eigen::MatrixXd X = test::uniform_mat(3, 4, 105);
  ForwardCache cache;
  forward(net, X, &cache);
  const Eigen::MatrixXd G = test::uniform_mat(2, 4, 106);
  const auto grad = backward(net, cache, G);
  CHECK(grad.layers[0].weight.isApprox(G * X.transpose(), 1e-14));
  CHECK(grad.layers[0].bias.isApprox(G.rowwise().sum(), 1e-14));
}

TEST_CASE("random two-hidden-layer nets pass finite differences") {
  Rng rng = make_rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto net = init_params({3, {5, 4}, 2}, rng, 1.0);
    CHECK(net.parameter_count() <= 100);
    const auto r = grad_check(net, 1e-4, rng);
    INFO("net " << i << " worst index " << r.worst_index);
    CHECK(r.passed);
  }
}

}  // TEST_SUITE

TEST_SUITE("optimizer") {

TEST_CASE("adam first step moves each coordinate by the learning rate") {
  Optimizer opt(OptimizerKind::kAdam, 0.01, 3);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 1e-3;
  opt.step(p, g);
  // minimizes: moves against the gradient
  CHECK(p(0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p(1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p(2) == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("sgd step") {
  Optimizer opt(OptimizerKind::kSgd, 0.1, 2);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
  opt.step(p, Eigen::VectorXd::Constant(2, 2.0));
  CHECK(p.isApprox(Eigen::VectorXd::Constant(2, 0.8)));
}

TEST_CASE("adam minimizes a quadratic") {
  Optimizer opt(OptimizerKind::kAdam, 0.05, 2);
  Eigen::VectorXd p(2);
  p << 3.0, -2.0;
  for (int i = 0; i < 2000; ++i) opt.step(p, 2.0 * p);
  CHECK(p.norm() < 1e-2);
}

TEST_CASE("gradient norm clipping") {
  Eigen::VectorXd g(2);
  g << 3.0, 4.0;
  CHECK(clip_grad_norm(g, 0.5) == doctest::Approx(5.0));
  CHECK(g.norm() == doctest::Approx(0.5));
  Eigen::VectorXd small(1);
  small << 0.1;
  clip_grad_norm(small, 0.5);
  CHECK(small(0) == 0.1);
  clip_grad_norm(g, 0.0);
  CHECK(g.norm() == doctest::Approx(0.5));
}

TEST_CASE("optimizer names") {
  CHECK(parse_optimizer("adam") == OptimizerKind::kAdam);
  CHECK(parse_optimizer("sgd") == OptimizerKind::kSgd);
  CHECK_THROWS(parse_optimizer("rmsprop"));
}

}  // TEST_SUITE

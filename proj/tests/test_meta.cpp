#include <doctest.h>

#include <cmath>

#include "ocda/meta.hpp"
#include "ocda/tasks.hpp"
#include "testutil.hpp"

using namespace ocda;
using namespace ocda::test;

namespace {

QuadraticObjective hand_quadratic_a() {
  return QuadraticObjective({{2.0, 0.3, -0.1}, {0.3, 1.5, 0.2}, {-0.1, 0.2, 1.1}},
                            {0.4, -0.7, 0.9});
}

QuadraticObjective hand_quadratic_b() {
  return QuadraticObjective({{1.2, -0.2, 0.0}, {-0.2, 0.8, 0.1}, {0.0, 0.1, 2.0}},
                            {-0.3, 0.5, 0.2});
}

Task make_mlp_task(const DomainPtr& d, int shots, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "mlp-task");
  return sample_standard_task(d, shots, rng);
}

}  // namespace

TEST_CASE("inner_adapt is a fixed point at stationary parameters") {
  // Huge-margin linear model: probabilities saturate, gradient is exactly 0.
  const ModelSpec spec = build_mlp({2}, {}, 3);
  ParameterVector p = init_params(spec, 0);
  for (auto& v : p.values) v = 0.0;
  ExampleBatch support{Tensor<double>({2, 2}), {0, 1}};
  support.features[0] = 1.0;
  support.features[1] = 0.0;
  support.features[2] = 0.0;
  support.features[3] = 1.0;
  p.range("layer0.weight")[0] = 2000.0;   // class 0 reads feature 0
  p.range("layer0.weight")[3] = 2000.0;   // class 1 reads feature 1
  p.range("layer0.weight")[4] = -2000.0;
  p.range("layer0.weight")[5] = -2000.0;
  const GradientVector g = gradient(spec, p, support);
  for (double x : g.values) CHECK(x == 0.0);
  const ParameterVector phi = inner_adapt(spec, p, support, 0.01, 1);
  CHECK(phi.values == p.values);
}

TEST_CASE("inner_adapt on a quadratic matches the closed-form step") {
  const QuadraticObjective q = hand_quadratic_a();
  const std::vector<double> theta = {1.0, 2.0, -1.5};
  const double alpha = 0.05;
  const auto phi = inner_adapt_obj(q, theta, alpha, 1);
  const auto g = q.grad(theta);
  for (int i = 0; i < 3; ++i) {
    CHECK(phi[i] == doctest::Approx(theta[i] - alpha * g[i]).epsilon(1e-15));
  }
}

TEST_CASE("inner_adapt with k=2 equals two k=1 applications") {
  const ModelSpec spec = build_mlp({4}, {5}, 3, LayerKind::Tanh);
  const ParameterVector p = init_params(spec, 31);
  const ExampleBatch support = random_batch(spec, 6, 32);
  const ParameterVector two = inner_adapt(spec, p, support, 0.02, 2);
  const ParameterVector once = inner_adapt(spec, p, support, 0.02, 1);
  const ParameterVector twice = inner_adapt(spec, once, support, 0.02, 1);
  CHECK(two.values == twice.values);
}

TEST_CASE("meta_gradient with alpha=0 equals the plain query gradient") {
  const DomainPtr d = make_synthetic_domain("mg0", 3, 10, {4}, 41);
  const Task task = make_mlp_task(d, 2, 42);
  const ModelSpec spec = build_mlp({4}, {6}, 3, LayerKind::Tanh);
  const ParameterVector p = init_params(spec, 43);
  const GradientVector mg = meta_gradient(spec, p, task, 0.0, 1);
  const GradientVector qg = gradient(spec, p, task.query_batch());
  CHECK(mg.values == qg.values);
  const GradientVector fo = meta_gradient_first_order(spec, p, task, 0.0, 1);
  CHECK(fo.values == qg.values);
}

TEST_CASE("meta_gradient on quadratics matches (I - aA_S) A_Q (phi - c_Q)") {
  const QuadraticObjective s = hand_quadratic_a();
  const QuadraticObjective q = hand_quadratic_b();
  const std::vector<double> theta = {0.8, -0.2, 1.4};
  const double alpha = 0.07;

  const auto got = meta_gradient_obj(s, q, theta, alpha, 1);

  const auto phi = inner_adapt_obj(s, theta, alpha, 1);
  const auto gq_phi = q.grad(phi);              // A_Q (phi - c_Q)
  const auto hs_gq = s.hvp(theta, gq_phi);      // A_S A_Q (phi - c_Q)
  for (int i = 0; i < 3; ++i) {
    CHECK(got[i] == doctest::Approx(gq_phi[i] - alpha * hs_gq[i]).epsilon(1e-13));
  }

  const auto fo = meta_gradient_first_order_obj(s, q, theta, alpha, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(fo[i] == doctest::Approx(gq_phi[i]).epsilon(1e-13));
  }
}

TEST_CASE("meta_gradient matches finite differences of the composite objective") {
  const DomainPtr d = make_synthetic_domain("mgfd", 4, 12, {5}, 51);
  Rng task_rng = Rng::stream(52, "task");
  const Task task = sample_standard_task(d, 1, task_rng);
  const ModelSpec spec = build_mlp({5}, {7}, 4, LayerKind::Tanh);
  const ParameterVector p = init_params(spec, 53);
  const double alpha = 0.01;

  for (int steps : {1, 2}) {
    const GradientVector mg = meta_gradient(spec, p, task, alpha, steps);
    DatasetLoss support(spec, task.support_batch());
    DatasetLoss query(spec, task.query_batch());
    auto composite = [&](std::span<const double> t) {
      return query.value(inner_adapt_obj(support, t, alpha, steps));
    };
    Rng coord_rng = Rng::stream(54, "coords");
    for (int i = 0; i < 20; ++i) {
      const std::size_t idx = coord_rng.below(p.values.size());
      std::vector<double> theta = p.values;
      const double h = 1e-5;
      theta[idx] += h;
      const double fp = composite(theta);
      theta[idx] -= 2.0 * h;
      const double fm = composite(theta);
      const double fd = (fp - fm) / (2.0 * h);
      CHECK(rel_err(mg.values[idx], fd, 1e-4) < 1e-5);
    }
  }
}

TEST_CASE("first-order gradient differs from the exact one by O(alpha)") {
  const DomainPtr d = make_synthetic_domain("fo", 3, 10, {4}, 61);
  const Task task = make_mlp_task(d, 2, 62);
  const ModelSpec spec = build_mlp({4}, {6}, 3, LayerKind::Tanh);
  const ParameterVector p = init_params(spec, 63);
  const double alpha = 0.01;
  const GradientVector exact = meta_gradient(spec, p, task, alpha, 1);
  const GradientVector fo = meta_gradient_first_order(spec, p, task, alpha, 1);
  std::vector<double> diff(exact.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = exact.values[i] - fo.values[i];
  const double norm = l2_norm(diff);
  CHECK(norm > 0.0);
  // The gap is alpha * H_S grad_Q(phi); bound it by a small multiple of alpha.
  CHECK(norm < 50.0 * alpha);

  const GradientVector exact_half = meta_gradient(spec, p, task, alpha / 2.0, 1);
  const GradientVector fo_half = meta_gradient_first_order(spec, p, task, alpha / 2.0, 1);
  std::vector<double> diff_half(exact.values.size());
  for (std::size_t i = 0; i < diff_half.size(); ++i) {
    diff_half[i] = exact_half.values[i] - fo_half.values[i];
  }
  CHECK(l2_norm(diff_half) == doctest::Approx(norm / 2.0).epsilon(0.25));
}

TEST_CASE("adam_step leaves parameters untouched on zero gradient") {
  const ModelSpec spec = build_mlp({3}, {}, 2);
  HyperParams hp;
  hp.weight_decay = 0.0;

  // Fresh state: zero moments, zero gradient, no movement.
  TrainState state = make_train_state(init_params(spec, 71));
  const TrainState next = adam_step(state, zeros_like(state.params), hp);
  CHECK(next.params.values == state.params.values);
  CHECK(next.iteration == 1);

  // Existing moments decay toward zero under further zero gradients.
  TrainState loaded = make_train_state(init_params(spec, 71));
  loaded.adam_m.values[0] = 0.5;
  loaded.adam_v.values[0] = 0.25;
  const TrainState decayed = adam_step(loaded, zeros_like(loaded.params), hp);
  CHECK(std::abs(decayed.adam_m.values[0]) < 0.5);
  CHECK(decayed.adam_v.values[0] < 0.25);
}

TEST_CASE("first adam step moves by ~lr in the gradient direction") {
  const ModelSpec spec = build_mlp({3}, {}, 2);
  TrainState state = make_train_state(init_params(spec, 72));
  HyperParams hp;
  hp.outer_lr = 0.001;
  hp.weight_decay = 0.0;
  GradientVector g = zeros_like(state.params);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = (i % 2 == 0) ? 0.2 : -0.4;
  const TrainState next = adam_step(state, g, hp);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double step = state.params.values[i] - next.params.values[i];
    CHECK(step * g.values[i] > 0.0);
    CHECK(std::abs(step) == doctest::Approx(hp.outer_lr).epsilon(1e-4));
  }
}

TEST_CASE("adam trajectory matches the frozen hand-executed transcript") {
  const ModelSpec spec = build_mlp({1}, {}, 2);  // 2 weights + 2 biases; use first two coords
  HyperParams hp;
  hp.outer_lr = 0.01;
  hp.adam_beta1 = 0.9;
  hp.adam_beta2 = 0.999;
  hp.adam_eps = 1e-8;

  const double grads[3][2] = {{0.1, -0.2}, {-0.05, 0.15}, {0.2, 0.0}};
  const double expected_nowd[3][2] = {{0.49000000099999991, -0.29000000049999997},
                                      {0.48733663094033908, -0.28910675047648021},
                                      {0.48075551543513811, -0.28841626562817346}};
  const double expected_wd[3][2] = {{0.4900000006666666, -0.29000000043478258},
                                    {0.48334920063577808, -0.28753658519871211},
                                    {0.4752235505715115, -0.28494081594549936}};

  for (bool with_wd : {false, true}) {
    hp.weight_decay = with_wd ? 0.1 : 0.0;
    TrainState state = make_train_state(init_params(spec, 0));
    state.params.values.assign({0.5, -0.3, 0.0, 0.0});
    for (int step = 0; step < 3; ++step) {
      GradientVector g = zeros_like(state.params);
      g.values[0] = grads[step][0];
      g.values[1] = grads[step][1];
      state = adam_step(state, g, hp);
      const auto& expected = with_wd ? expected_wd[step] : expected_nowd[step];
      CHECK(state.params.values[0] == doctest::Approx(expected[0]).epsilon(1e-15));
      CHECK(state.params.values[1] == doctest::Approx(expected[1]).epsilon(1e-15));
    }
    CHECK(state.iteration == 3);
  }
}

TEST_CASE("train with zero budget returns the initial parameters") {
  const ModelSpec spec = build_mlp({4}, {5}, 3, LayerKind::Relu);
  std::vector<DomainPtr> domains = {make_synthetic_domain("t0", 3, 10, {4}, 81)};
  HyperParams hp;
  hp.max_iterations = 0;
  hp.meta_batch_size = 1;
  const TrainResult result = train(spec, hp, domains, domains, Strategy::Standard, {}, 5);
  CHECK(result.history.records.empty());
  CHECK(result.params.values == init_params(spec, 5).values);
}

TEST_CASE("train is bitwise deterministic for a fixed seed") {
  const ModelSpec spec = build_mlp({4}, {5}, 3, LayerKind::Relu);
  std::vector<DomainPtr> train_domains = {make_synthetic_domain("a", 3, 12, {4}, 91),
                                          make_synthetic_domain("b", 3, 12, {4}, 92),
                                          make_synthetic_domain("c", 3, 12, {4}, 93)};
  std::vector<DomainPtr> val_domains = {make_synthetic_domain("v", 3, 12, {4}, 94)};
  HyperParams hp;
  hp.max_iterations = 24;
  hp.eval_interval = 6;
  hp.meta_batch_size = 2;
  hp.shots = 2;

  const TrainResult r1 = train(spec, hp, train_domains, val_domains, Strategy::Ocda, 1, 7);
  const TrainResult r2 = train(spec, hp, train_domains, val_domains, Strategy::Ocda, 1, 7);
  CHECK(r1.params.values == r2.params.values);
  REQUIRE(r1.history.records.size() == r2.history.records.size());
  CHECK(r1.history.records.size() == 4);
  for (std::size_t i = 0; i < r1.history.records.size(); ++i) {
    CHECK(r1.history.records[i].iteration == r2.history.records[i].iteration);
    CHECK(r1.history.records[i].train_loss == r2.history.records[i].train_loss);
    CHECK(r1.history.records[i].val_loss == r2.history.records[i].val_loss);
    CHECK(r1.history.records[i].val_accuracy == r2.history.records[i].val_accuracy);
  }
  CHECK(r1.history.to_csv() == r2.history.to_csv());
}

TEST_CASE("one train iteration with |I|=1 is adam_step of the task meta-gradient") {
  const ModelSpec spec = build_mlp({4}, {5}, 3, LayerKind::Tanh);
  std::vector<DomainPtr> domains = {make_synthetic_domain("only", 3, 12, {4}, 95)};
  HyperParams hp;
  hp.max_iterations = 1;
  hp.meta_batch_size = 1;
  hp.shots = 2;
  const std::uint64_t seed = 11;
  const TrainResult result = train(spec, hp, domains, {}, Strategy::Standard, {}, seed);

  // Replay the loop by hand with the same streams.
  Rng domain_rng = Rng::stream(seed, "train.domains");
  Rng task_rng = Rng::stream(seed, "train.tasks");
  (void)domain_rng.sample_without_replacement(1, 1);
  const Task task = sample_standard_task(domains[0], hp.shots, task_rng);
  const GradientVector mg =
      meta_gradient(spec, init_params(spec, seed), task, hp.inner_lr, hp.inner_steps);
  TrainState state = make_train_state(init_params(spec, seed));
  state = adam_step(state, mg, hp);
  CHECK(result.params.values == state.params.values);
}

TEST_CASE("hyperparameter validation rejects contradictions") {
  HyperParams hp;
  hp.inner_lr = -1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = HyperParams{};
  hp.adam_beta1 = 1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = HyperParams{};
  const ModelSpec spec = build_mlp({4}, {}, 3);
  std::vector<DomainPtr> domains = {make_synthetic_domain("x", 3, 10, {4}, 96)};
  CHECK_THROWS_AS(train(spec, hp, domains, {}, Strategy::Ocda, {}, 1), ConfigError);
  hp.meta_batch_size = 5;
  CHECK_THROWS_AS(train(spec, hp, domains, {}, Strategy::Standard, {}, 1), ConfigError);
}

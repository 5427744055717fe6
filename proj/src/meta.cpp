#include "ocda/meta.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

#include "src/engine.hpp"

namespace ocda {

void HyperParams::validate() const {
  if (inner_lr <= 0.0 || outer_lr <= 0.0) throw ConfigError("learning rates must be positive");
  if (inner_steps < 1) throw ConfigError("inner_steps must be >= 1");
  if (shots < 1) throw ConfigError("shots must be >= 1");
  if (meta_batch_size < 1) throw ConfigError("meta_batch_size must be >= 1");
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be >= 1");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

TrainState make_train_state(const ParameterVector& initial) {
  TrainState s;
  s.params = initial;
  s.adam_m = zeros_like(initial);
  s.adam_v = zeros_like(initial);
  s.iteration = 0;
  s.best_validation_loss = std::numeric_limits<double>::infinity();
  s.iterations_since_best = 0;
  return s;
}

std::string to_string(Strategy s) { return s == Strategy::Standard ? "standard" : "ocda"; }

namespace {
int g_parallelism = 1;
}

void set_parallelism(int threads) {
  if (threads < 1) throw ConfigError("parallelism degree must be >= 1");
  g_parallelism = threads;
}

int parallelism() { return g_parallelism; }

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "iteration,train_loss,val_loss,val_acc\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.iteration), r.train_loss, r.val_loss, r.val_accuracy);
    os << buf;
  }
  return os.str();
}

// --- Objective-level core ---------------------------------------------------

std::vector<double> inner_adapt_obj(const Objective& support, std::span<const double> theta,
                                    double alpha, int steps) {
  std::vector<double> phi(theta.begin(), theta.end());
  for (int s = 0; s < steps; ++s) {
    const auto g = support.grad(phi);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= alpha * g[i];
  }
  return phi;
}

namespace {

// Exact reverse pass through the k-step inner loop. phi_{j+1} = phi_j -
// alpha grad_S(phi_j) has Jacobian I - alpha H_S(phi_j); the transpose
// products are realized with one Hessian-vector product per step.
std::vector<double> meta_gradient_core(const Objective& support, const Objective& query,
                                       std::span<const double> theta, double alpha, int steps,
                                       double* query_loss_out) {
  std::vector<std::vector<double>> trajectory;
  trajectory.reserve(steps + 1);
  trajectory.emplace_back(theta.begin(), theta.end());
  for (int s = 0; s < steps; ++s) {
    const auto& phi = trajectory.back();
    const auto g = support.grad(phi);
    std::vector<double> next(phi);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= alpha * g[i];
    trajectory.push_back(std::move(next));
  }
  std::vector<double> v;
  if (query_loss_out) {
    auto [loss, grad] = query.value_and_grad(trajectory.back());
    *query_loss_out = loss;
    v = std::move(grad);
  } else {
    v = query.grad(trajectory.back());
  }
  for (int s = steps - 1; s >= 0; --s) {
    const auto hv = support.hvp(trajectory[s], v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= alpha * hv[i];
  }
  return v;
}

}  // namespace

std::vector<double> meta_gradient_obj(const Objective& support, const Objective& query,
                                      std::span<const double> theta, double alpha, int steps) {
  return meta_gradient_core(support, query, theta, alpha, steps, nullptr);
}

std::vector<double> meta_gradient_first_order_obj(const Objective& support,
                                                  const Objective& query,
                                                  std::span<const double> theta, double alpha,
                                                  int steps) {
  return query.grad(inner_adapt_obj(support, theta, alpha, steps));
}

// --- Spec-surface operations ------------------------------------------------

ParameterVector inner_adapt(const ModelSpec& spec, const ParameterVector& params,
                            const ExampleBatch& support, double alpha, int steps) {
  if (steps < 1) throw ConfigError("inner_adapt needs steps >= 1");
  DatasetLoss loss(spec, support);
  ParameterVector phi{params.layout, inner_adapt_obj(loss, params.values, alpha, steps)};
  require_finite(phi, "inner_adapt");
  return phi;
}

GradientVector meta_gradient(const ModelSpec& spec, const ParameterVector& params,
                             const Task& task, double alpha, int steps) {
  DatasetLoss support(spec, task.support_batch());
  DatasetLoss query(spec, task.query_batch());
  GradientVector g{params.layout, meta_gradient_obj(support, query, params.values, alpha, steps)};
  require_finite(g, "meta_gradient");
  return g;
}

GradientVector meta_gradient_first_order(const ModelSpec& spec, const ParameterVector& params,
                                         const Task& task, double alpha, int steps) {
  DatasetLoss support(spec, task.support_batch());
  DatasetLoss query(spec, task.query_batch());
  GradientVector g{params.layout,
                   meta_gradient_first_order_obj(support, query, params.values, alpha, steps)};
  require_finite(g, "meta_gradient_first_order");
  return g;
}

TrainState adam_step(const TrainState& state, const GradientVector& grad, const HyperParams& hp) {
  require_same_layout(state.params, grad, "adam_step");
  TrainState next = state;
  next.iteration = state.iteration + 1;
  const double t = static_cast<double>(next.iteration);
  const double bc1 = 1.0 - std::pow(hp.adam_beta1, t);
  const double bc2 = 1.0 - std::pow(hp.adam_beta2, t);
  for (std::size_t i = 0; i < next.params.values.size(); ++i) {
    double g = grad.values[i];
    if (!hp.decoupled_decay) g += hp.weight_decay * state.params.values[i];
    next.adam_m.values[i] = hp.adam_beta1 * state.adam_m.values[i] + (1.0 - hp.adam_beta1) * g;
    next.adam_v.values[i] =
        hp.adam_beta2 * state.adam_v.values[i] + (1.0 - hp.adam_beta2) * g * g;
    const double mhat = next.adam_m.values[i] / bc1;
    const double vhat = next.adam_v.values[i] / bc2;
    double update = hp.outer_lr * mhat / (std::sqrt(vhat) + hp.adam_eps);
    if (hp.decoupled_decay) update += hp.outer_lr * hp.weight_decay * state.params.values[i];
    next.params.values[i] = state.params.values[i] - update;
  }
  require_finite(next.params, "adam_step");
  return next;
}

namespace {

double batch_accuracy(const ModelSpec& spec, const ParameterVector& params,
                      const ExampleBatch& batch) {
  const auto pred = engine::predict(spec, params, batch.features);
  const int n = pred.probabilities.dim(1);
  int correct = 0;
  for (std::size_t b = 0; b < batch.labels.size(); ++b) {
    const double* row = pred.probabilities.ptr() + b * n;
    int arg = 0;
    for (int c = 1; c < n; ++c) {
      if (row[c] > row[arg]) arg = c;
    }
    if (arg == batch.labels[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.labels.size());
}

Task sample_by_strategy(const DomainPtr& domain, Strategy strategy, std::optional<int> normal,
                        int shots, Rng& rng) {
  if (strategy == Strategy::Ocda) return sample_ocda_task(domain, *normal, shots, rng);
  return sample_standard_task(domain, shots, rng);
}

}  // namespace

TrainResult train(const ModelSpec& spec, const HyperParams& hp,
                  const std::vector<DomainPtr>& train_domains,
                  const std::vector<DomainPtr>& val_domains, Strategy strategy,
                  std::optional<int> normal_class, std::uint64_t seed,
                  const TrainObserver& observer) {
  hp.validate();
  if (strategy == Strategy::Ocda && !normal_class) {
    throw ConfigError("ocda strategy requires a normal_class");
  }
  if (train_domains.empty()) throw ConfigError("no training domains");
  if (hp.meta_batch_size > static_cast<int>(train_domains.size())) {
    throw ConfigError("meta_batch_size exceeds the number of training domains");
  }

  Rng domain_rng = Rng::stream(seed, "train.domains");
  Rng task_rng = Rng::stream(seed, "train.tasks");
  Rng eval_rng = Rng::stream(seed, "train.eval");

  TrainState state = make_train_state(init_params(spec, seed));
  ParameterVector best_params = state.params;
  std::int64_t best_iteration = 0;
  TrainHistory history;
  double train_loss_acc = 0.0;
  int train_loss_n = 0;

  for (int iter = 0; iter < hp.max_iterations; ++iter) {
    auto picks = domain_rng.sample_without_replacement(train_domains.size(), hp.meta_batch_size);
    // Fixed reduction order: ascending domain id.
    std::sort(picks.begin(), picks.end(), [&](int a, int b) {
      return train_domains[a]->domain_id < train_domains[b]->domain_id;
    });
    // Tasks are sampled serially so the rng stream is schedule-independent;
    // gradients may be computed concurrently and are reduced in pick order.
    std::vector<Task> tasks;
    tasks.reserve(picks.size());
    for (int pick : picks) {
      tasks.push_back(
          sample_by_strategy(train_domains[pick], strategy, normal_class, hp.shots, task_rng));
    }
    std::vector<std::vector<double>> grads(tasks.size());
    std::vector<double> qlosses(tasks.size(), 0.0);
    auto run_task = [&](std::size_t t) {
      DatasetLoss support(spec, tasks[t].support_batch());
      DatasetLoss query(spec, tasks[t].query_batch());
      grads[t] = meta_gradient_core(support, query, state.params.values, hp.inner_lr,
                                    hp.inner_steps, &qlosses[t]);
    };
    if (g_parallelism > 1 && tasks.size() > 1) {
      std::vector<std::future<void>> futures;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        futures.push_back(std::async(std::launch::async, run_task, t));
      }
      for (auto& f : futures) f.get();
    } else {
      for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    }
    GradientVector avg = zeros_like(state.params);
    double batch_query_loss = 0.0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      batch_query_loss += qlosses[t];
      for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += grads[t][i];
    }
    const double inv_batch = 1.0 / hp.meta_batch_size;
    for (auto& v : avg.values) v *= inv_batch;
    state = adam_step(state, avg, hp);
    train_loss_acc += batch_query_loss * inv_batch;
    train_loss_n += 1;

    if ((iter + 1) % hp.eval_interval == 0 && !val_domains.empty()) {
      double val_loss = 0.0;
      double val_acc = 0.0;
      for (const auto& domain : val_domains) {
        const Task task = sample_by_strategy(domain, strategy, normal_class, hp.shots, eval_rng);
        const ParameterVector phi =
            inner_adapt(spec, state.params, task.support_batch(), hp.inner_lr, hp.inner_steps);
        const ExampleBatch qb = task.query_batch();
        val_loss += evaluate_loss(spec, phi, qb).loss;
        val_acc += batch_accuracy(spec, phi, qb);
      }
      val_loss /= static_cast<double>(val_domains.size());
      val_acc /= static_cast<double>(val_domains.size());
      EvalRecord rec{state.iteration, train_loss_acc / std::max(train_loss_n, 1), val_loss,
                     val_acc};
      history.records.push_back(rec);
      if (observer) observer(rec);
      train_loss_acc = 0.0;
      train_loss_n = 0;
      if (val_loss < state.best_validation_loss) {
        state.best_validation_loss = val_loss;
        state.iterations_since_best = 0;
        best_params = state.params;
        best_iteration = state.iteration;
      } else {
        state.iterations_since_best += 1;
        if (state.iterations_since_best >= hp.early_stop_patience) break;
      }
    }
  }

  if (history.records.empty()) {
    best_params = state.params;
    best_iteration = state.iteration;
  }
  return {std::move(best_params), std::move(history),      state.iteration,
          best_iteration,         std::move(state.adam_m), std::move(state.adam_v)};
}

}  // namespace ocda

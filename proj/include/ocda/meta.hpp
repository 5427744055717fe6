#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ocda/diffcore.hpp"
#include "ocda/tasks.hpp"

namespace ocda {

struct HyperParams {
  double inner_lr = 0.01;        // alpha
  double outer_lr = 0.001;       // beta
  int inner_steps = 1;           // k
  int shots = 1;                 // K
  int meta_batch_size = 4;       // |I|
  int max_iterations = 30000;
  double weight_decay = 1e-5;    // coupled L2, folded into the gradient
  bool decoupled_decay = false;  // documented alternative, default off
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int early_stop_patience = 10;  // evaluations without improvement
  int eval_interval = 250;       // iterations between validation evaluations
  int batch_size = 100;          // plain (non-meta) training only

  void validate() const;  // throws ConfigError
};

struct TrainState {
  ParameterVector params;
  GradientVector adam_m;
  GradientVector adam_v;
  std::int64_t iteration = 0;
  double best_validation_loss = 0.0;
  int iterations_since_best = 0;
};

TrainState make_train_state(const ParameterVector& initial);

struct EvalRecord {
  std::int64_t iteration = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EvalRecord> records;  // iterations strictly increasing

  std::string to_csv() const;  // iteration,train_loss,val_loss,val_acc
};

enum class Strategy { Standard, Ocda };
std::string to_string(Strategy s);

// Process-wide degree for per-task meta-gradient evaluation inside a
// meta-batch. Reduction order stays fixed, so results match the serial run
// bitwise for any degree.
void set_parallelism(int threads);
int parallelism();

// --- Objective-level core -------------------------------------------------
// The bi-level machinery is written against Objective so closed-form
// surrogates exercise the same code path as dataset losses.

// k full-batch gradient descent steps with step size alpha.
std::vector<double> inner_adapt_obj(const Objective& support, std::span<const double> theta,
                                    double alpha, int steps);

// Exact gradient of theta -> query(adapt(theta)). Reverse pass multiplies by
// (I - alpha * H_support(phi_j)) per step via Hessian-vector products.
std::vector<double> meta_gradient_obj(const Objective& support, const Objective& query,
                                      std::span<const double> theta, double alpha, int steps);

// First-order baseline: query gradient at phi, adaptation treated as constant.
std::vector<double> meta_gradient_first_order_obj(const Objective& support,
                                                  const Objective& query,
                                                  std::span<const double> theta,
                                                  double alpha, int steps);

// --- Spec-surface operations ----------------------------------------------

ParameterVector inner_adapt(const ModelSpec& spec, const ParameterVector& params,
                            const ExampleBatch& support, double alpha, int steps);

GradientVector meta_gradient(const ModelSpec& spec, const ParameterVector& params,
                             const Task& task, double alpha, int steps);

GradientVector meta_gradient_first_order(const ModelSpec& spec, const ParameterVector& params,
                                         const Task& task, double alpha, int steps);

// One Adam step with bias correction; coupled L2 weight decay is added to the
// gradient before the moment updates (decoupled mode subtracts lr*wd*theta
// after the Adam update instead). Increments state.iteration.
TrainState adam_step(const TrainState& state, const GradientVector& grad, const HyperParams& hp);

struct TrainResult {
  ParameterVector params;  // best-validation checkpoint
  TrainHistory history;
  std::int64_t iterations_run = 0;
  std::int64_t best_iteration = 0;
  GradientVector adam_m;  // final optimizer state
  GradientVector adam_v;
};

using TrainObserver = std::function<void(const EvalRecord&)>;

// Algorithm-1 loop: sample |I| domains without replacement, one task per
// domain via the strategy, average per-task exact meta-gradients in ascending
// domain-id order, Adam-update theta. Evaluates post-adaptation query
// loss/accuracy on validation domains every eval_interval iterations and
// early-stops on the validation loss.
TrainResult train(const ModelSpec& spec, const HyperParams& hp,
                  const std::vector<DomainPtr>& train_domains,
                  const std::vector<DomainPtr>& val_domains, Strategy strategy,
                  std::optional<int> normal_class, std::uint64_t seed,
                  const TrainObserver& observer = {});

}  // namespace ocda

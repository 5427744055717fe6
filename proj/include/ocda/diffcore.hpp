#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ocda/model.hpp"
#include "ocda/params.hpp"
#include "ocda/tensor.hpp"

namespace ocda {

// A materialized labeled batch: features stacked along the leading dimension.
struct ExampleBatch {
  Tensor<double> features;  // shape {B, ...per-example shape}
  std::vector<int> labels;

  std::size_t count() const { return labels.size(); }
};

struct LossReport {
  double loss = 0.0;          // mean over example_count examples
  std::size_t example_count = 0;
};

// Mean categorical cross-entropy of the model's softmax outputs, fused with
// log-sum-exp. Summation over examples is in ascending index order.
LossReport evaluate_loss(const ModelSpec& spec, const ParameterVector& params,
                         const ExampleBatch& data);

// Exact gradient of evaluate_loss with respect to params (reverse mode).
GradientVector gradient(const ModelSpec& spec, const ParameterVector& params,
                        const ExampleBatch& data);

// Exact Hessian-vector product H*v where H is the Hessian of evaluate_loss,
// computed forward-over-reverse without materializing H.
GradientVector hessian_vector_product(const ModelSpec& spec, const ParameterVector& params,
                                      const ExampleBatch& data, const GradientVector& v);

// Central-difference fallback (grad(p + eps v) - grad(p - eps v)) / (2 eps);
// cross-check only, never the primary path.
GradientVector hvp_finite_difference(const ModelSpec& spec, const ParameterVector& params,
                                     const ExampleBatch& data, const GradientVector& v,
                                     double eps = 1e-4);

// A differentiable scalar function of a flat parameter vector. The meta level
// optimizes through this interface so the second-order machinery can also be
// exercised on closed-form surrogates.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> p) const = 0;
  virtual std::vector<double> grad(std::span<const double> p) const = 0;
  virtual std::vector<double> hvp(std::span<const double> p, std::span<const double> v) const = 0;
  virtual std::pair<double, std::vector<double>> value_and_grad(std::span<const double> p) const {
    return {value(p), grad(p)};
  }
};

// Dataset loss (spec, data) as an Objective over the flat parameters.
class DatasetLoss final : public Objective {
 public:
  DatasetLoss(const ModelSpec& spec, ExampleBatch batch);

  std::size_t dim() const override { return dim_; }
  double value(std::span<const double> p) const override;
  std::vector<double> grad(std::span<const double> p) const override;
  std::vector<double> hvp(std::span<const double> p, std::span<const double> v) const override;
  std::pair<double, std::vector<double>> value_and_grad(std::span<const double> p) const override;

 private:
  const ModelSpec* spec_;
  ExampleBatch batch_;
  std::size_t dim_;
};

}  // namespace ocda

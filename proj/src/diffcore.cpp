#include "ocda/diffcore.hpp"

#include <cmath>

#include "src/engine.hpp"

namespace ocda {

namespace {

void validate_batch(const ModelSpec& spec, const ExampleBatch& batch) {
  if (batch.labels.empty() || batch.features.size() == 0) {
    throw EmptyDataset("loss evaluation needs at least one example");
  }
  const Shape& fs = batch.features.shape;
  if (fs.empty() || fs[0] != static_cast<int>(batch.labels.size())) {
    throw ShapeError("feature batch dimension disagrees with label count");
  }
  Shape per_example(fs.begin() + 1, fs.end());
  if (per_example != spec.input_shape) {
    throw ShapeError("feature shape does not match the model input shape");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= spec.class_count) {
      throw LabelError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(spec.class_count) + ")");
    }
  }
}

void validate_params(const ModelSpec& spec, const ParameterVector& params) {
  if (!params.layout) throw LayoutError("parameter vector has no layout");
  const auto slots = param_slots(spec);
  std::size_t total = 0;
  for (const auto& s : slots) total += s.size;
  if (params.values.size() != total) {
    throw LayoutError("parameter vector length does not match the architecture");
  }
}

Tensor<Dual> dual_input(const Tensor<double>& x) {
  Tensor<Dual> out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = Dual{x[i], 0.0};
  return out;
}

}  // namespace

namespace engine {

double eval_loss(const ModelSpec& spec, std::span<const double> params,
                 const Tensor<double>& features, const std::vector<int>& labels) {
  const auto fp = forward_logits(spec, params, features, /*keep_caches=*/false);
  return mean_cross_entropy<double>(*fp.logits, labels, nullptr);
}

std::vector<double> loss_grad(const ModelSpec& spec, std::span<const double> params,
                              const Tensor<double>& features, const std::vector<int>& labels,
                              double* loss_out) {
  const auto fp = forward_logits(spec, params, features);
  Tensor<double> dlogits(fp.logits->shape);
  const double loss = mean_cross_entropy(*fp.logits, labels, &dlogits);
  if (loss_out) *loss_out = loss;
  return backward_params(spec, params, features, fp, std::move(dlogits));
}

std::vector<double> hvp(const ModelSpec& spec, std::span<const double> params,
                        std::span<const double> tangent, const Tensor<double>& features,
                        const std::vector<int>& labels) {
  std::vector<Dual> dual_params(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    dual_params[i] = Dual{params[i], tangent[i]};
  }
  const Tensor<Dual> input = dual_input(features);
  const auto fp = forward_logits<Dual>(spec, dual_params, input);
  Tensor<Dual> dlogits(fp.logits->shape);
  mean_cross_entropy<Dual>(*fp.logits, labels, &dlogits);
  const auto grads = backward_params<Dual>(spec, dual_params, input, fp, std::move(dlogits));
  std::vector<double> out(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) out[i] = grads[i].d;
  return out;
}

PredictionBatch predict(const ModelSpec& spec, const ParameterVector& params,
                        const Tensor<double>& batch) {
  if (batch.size() == 0) throw EmptyDataset("forward needs at least one example");
  const Shape& fs = batch.shape;
  Shape per_example(fs.begin() + 1, fs.end());
  if (per_example != spec.input_shape) {
    throw ShapeError("feature shape does not match the model input shape");
  }
  validate_params(spec, params);
  const auto fp = forward_logits<double>(spec, params.values, batch, /*keep_caches=*/false);
  const int b = fp.logits->dim(0);
  const int n = fp.logits->dim(1);
  PredictionBatch pred{Tensor<double>(Shape{b, n})};
  for (int i = 0; i < b; ++i) {
    const double* row = fp.logits->ptr() + static_cast<std::size_t>(i) * n;
    double* out = pred.probabilities.ptr() + static_cast<std::size_t>(i) * n;
    double m = row[0];
    for (int c = 1; c < n; ++c) m = std::max(m, row[c]);
    double sum = 0.0;
    for (int c = 0; c < n; ++c) sum += (out[c] = std::exp(row[c] - m));
    for (int c = 0; c < n; ++c) out[c] /= sum;
  }
  return pred;
}

}  // namespace engine

LossReport evaluate_loss(const ModelSpec& spec, const ParameterVector& params,
                         const ExampleBatch& data) {
  validate_batch(spec, data);
  validate_params(spec, params);
  const double loss = engine::eval_loss(spec, params.values, data.features, data.labels);
  if (!std::isfinite(loss)) throw NumericError("loss is not finite");
  return {loss, data.count()};
}

GradientVector gradient(const ModelSpec& spec, const ParameterVector& params,
                        const ExampleBatch& data) {
  validate_batch(spec, data);
  validate_params(spec, params);
  GradientVector g{params.layout,
                   engine::loss_grad(spec, params.values, data.features, data.labels, nullptr)};
  require_finite(g, "gradient");
  return g;
}

GradientVector hessian_vector_product(const ModelSpec& spec, const ParameterVector& params,
                                      const ExampleBatch& data, const GradientVector& v) {
  validate_batch(spec, data);
  validate_params(spec, params);
  require_same_layout(params, v, "hessian_vector_product");
  GradientVector out{params.layout,
                     engine::hvp(spec, params.values, v.values, data.features, data.labels)};
  require_finite(out, "hessian_vector_product");
  return out;
}

GradientVector hvp_finite_difference(const ModelSpec& spec, const ParameterVector& params,
                                     const ExampleBatch& data, const GradientVector& v,
                                     double eps) {
  validate_batch(spec, data);
  validate_params(spec, params);
  require_same_layout(params, v, "hvp_finite_difference");
  ParameterVector plus = params;
  ParameterVector minus = params;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    plus.values[i] += eps * v.values[i];
    minus.values[i] -= eps * v.values[i];
  }
  const auto gp = engine::loss_grad(spec, plus.values, data.features, data.labels, nullptr);
  const auto gm = engine::loss_grad(spec, minus.values, data.features, data.labels, nullptr);
  GradientVector out = zeros_like(params);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (gp[i] - gm[i]) / (2.0 * eps);
  }
  return out;
}

DatasetLoss::DatasetLoss(const ModelSpec& spec, ExampleBatch batch)
    : spec_(&spec), batch_(std::move(batch)) {
  validate_batch(spec, batch_);
  std::size_t total = 0;
  for (const auto& s : param_slots(spec)) total += s.size;
  dim_ = total;
}

double DatasetLoss::value(std::span<const double> p) const {
  return engine::eval_loss(*spec_, p, batch_.features, batch_.labels);
}

std::vector<double> DatasetLoss::grad(std::span<const double> p) const {
  return engine::loss_grad(*spec_, p, batch_.features, batch_.labels, nullptr);
}

std::vector<double> DatasetLoss::hvp(std::span<const double> p,
                                     std::span<const double> v) const {
  return engine::hvp(*spec_, p, v, batch_.features, batch_.labels);
}

std::pair<double, std::vector<double>> DatasetLoss::value_and_grad(
    std::span<const double> p) const {
  double loss = 0.0;
  auto g = engine::loss_grad(*spec_, p, batch_.features, batch_.labels, &loss);
  return {loss, std::move(g)};
}

}  // namespace ocda

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ocda/meta.hpp"

namespace ocda {

struct AlignmentReport {
  double inner_product = 0.0;     // grad_S . grad_Q
  double support_grad_norm = 0.0;
  double query_grad_norm = 0.0;
  double cosine = 0.0;            // in [-1, 1]; 0 when either norm vanishes
};

// Second-order Taylor approximation of the k=1 meta-gradient:
// grad_Q(theta) - alpha * [H_Q(theta) grad_S(theta) + H_S(theta) grad_Q(theta)].
std::vector<double> taylor_approx_gradient_obj(const Objective& support, const Objective& query,
                                               std::span<const double> theta, double alpha);

GradientVector taylor_approx_gradient(const ModelSpec& spec, const ParameterVector& params,
                                      const Task& task, double alpha);

struct ResidualPoint {
  double alpha = 0.0;
  double residual_norm = 0.0;  // ||meta_gradient - taylor_approx_gradient||_2
};

// Measured residual curve over a positive decreasing alpha list.
std::vector<ResidualPoint> residual_scaling(const ModelSpec& spec, const ParameterVector& params,
                                            const Task& task, const std::vector<double>& alphas);
std::vector<ResidualPoint> residual_scaling_obj(const Objective& support, const Objective& query,
                                                std::span<const double> theta,
                                                const std::vector<double>& alphas);

AlignmentReport gradient_alignment(const ModelSpec& spec, const ParameterVector& params,
                                   const Task& task);
AlignmentReport gradient_alignment_obj(const Objective& support, const Objective& query,
                                       std::span<const double> theta);

std::string residuals_to_csv(const std::vector<ResidualPoint>& pts);  // alpha,residual_norm,ratio

}  // namespace ocda

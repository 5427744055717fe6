#include "ocda/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ocda {

std::vector<double> taylor_approx_gradient_obj(const Objective& support, const Objective& query,
                                               std::span<const double> theta, double alpha) {
  auto gq = query.grad(theta);
  if (alpha == 0.0) return gq;
  const auto gs = support.grad(theta);
  const auto hq_gs = query.hvp(theta, gs);
  const auto hs_gq = support.hvp(theta, gq);
  for (std::size_t i = 0; i < gq.size(); ++i) {
    gq[i] -= alpha * (hq_gs[i] + hs_gq[i]);
  }
  return gq;
}

GradientVector taylor_approx_gradient(const ModelSpec& spec, const ParameterVector& params,
                                      const Task& task, double alpha) {
  DatasetLoss support(spec, task.support_batch());
  DatasetLoss query(spec, task.query_batch());
  GradientVector g{params.layout,
                   taylor_approx_gradient_obj(support, query, params.values, alpha)};
  require_finite(g, "taylor_approx_gradient");
  return g;
}

std::vector<ResidualPoint> residual_scaling_obj(const Objective& support, const Objective& query,
                                                std::span<const double> theta,
                                                const std::vector<double>& alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] < 0.0) throw ConfigError("alpha list must be nonnegative");
    if (i > 0 && alphas[i] > alphas[i - 1]) throw ConfigError("alpha list must be decreasing");
  }
  std::vector<ResidualPoint> out;
  for (double alpha : alphas) {
    const auto exact = meta_gradient_obj(support, query, theta, alpha, 1);
    const auto approx = taylor_approx_gradient_obj(support, query, theta, alpha);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
      const double d = exact[i] - approx[i];
      norm2 += d * d;
    }
    out.push_back({alpha, std::sqrt(norm2)});
  }
  return out;
}

std::vector<ResidualPoint> residual_scaling(const ModelSpec& spec, const ParameterVector& params,
                                            const Task& task, const std::vector<double>& alphas) {
  DatasetLoss support(spec, task.support_batch());
  DatasetLoss query(spec, task.query_batch());
  return residual_scaling_obj(support, query, params.values, alphas);
}

AlignmentReport gradient_alignment_obj(const Objective& support, const Objective& query,
                                       std::span<const double> theta) {
  const auto gs = support.grad(theta);
  const auto gq = query.grad(theta);
  AlignmentReport r;
  double ns = 0.0;
  double nq = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    r.inner_product += gs[i] * gq[i];
    ns += gs[i] * gs[i];
    nq += gq[i] * gq[i];
  }
  r.support_grad_norm = std::sqrt(ns);
  r.query_grad_norm = std::sqrt(nq);
  if (r.support_grad_norm > 0.0 && r.query_grad_norm > 0.0) {
    r.cosine = r.inner_product / (r.support_grad_norm * r.query_grad_norm);
    r.cosine = std::clamp(r.cosine, -1.0, 1.0);
  }
  return r;
}

AlignmentReport gradient_alignment(const ModelSpec& spec, const ParameterVector& params,
                                   const Task& task) {
  DatasetLoss support(spec, task.support_batch());
  DatasetLoss query(spec, task.query_batch());
  return gradient_alignment_obj(support, query, params.values);
}

std::string residuals_to_csv(const std::vector<ResidualPoint>& pts) {
  std::ostringstream os;
  os << "alpha,residual_norm,ratio\n";
  char buf[128];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i + 1 < pts.size() && pts[i + 1].residual_norm > 0.0) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pts[i].alpha, pts[i].residual_norm,
                    pts[i].residual_norm / pts[i + 1].residual_norm);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,\n", pts[i].alpha, pts[i].residual_norm);
    }
    os << buf;
  }
  return os.str();
}

}  // namespace ocda

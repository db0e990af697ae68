#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "itl/diffcore/params.hpp"

namespace itl {

/// Scalar objective built on a fresh tape from bound parameters.
using ScalarObjective = std::function<ad::Var(ad::Tape&, const BoundParams&)>;

struct GradCheckOptions {
  double epsilon = 1e-6;
  /// Relative error is |a - n| / max(|a|, |n|, denominator_floor). The floor
  /// keeps central-difference round-off on near-zero gradients from reading
  /// as a large relative error.
  double denominator_floor = 1e-4;
  /// Test hook: mutate the analytic gradients before comparison.
  std::function<void(ParamSet&)> corrupt_analytic;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::map<std::string, double> per_param;  // max relative error per tensor
  std::size_t evaluated = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double evaluate_objective(const ScalarObjective& f, const ParamSet& params) {
  ad::Tape tape;
  const BoundParams bound = bind_params(tape, params);
  const ad::Var out = f(tape, bound);
  const Tensor& v = out.value();
  if (v.rows() != 1 || v.cols() != 1) throw invalid_input("grad_check: objective must return a 1x1 tensor, got " + v.shape_string());
  return v[0];
}

/// Compares reverse-mode gradients with central differences
/// (f(x + eps) - f(x - eps)) / (2 eps), entry by entry.
inline GradCheckReport grad_check(const ScalarObjective& f, const ParamSet& params, const GradCheckOptions& opt = {}) {
  if (!(opt.epsilon > 0.0) || opt.epsilon > 1e-3) throw invalid_input("grad_check: epsilon must lie in (0, 1e-3]");

  ParamSet analytic;
  {
    ad::Tape tape;
    const BoundParams bound = bind_params(tape, params);
    const ad::Var out = f(tape, bound);
    const Tensor& v = out.value();
    if (v.rows() != 1 || v.cols() != 1) throw invalid_input("grad_check: objective must return a 1x1 tensor, got " + v.shape_string());
    if (tape.requires_grad(out)) {
      tape.backward(out);
      analytic = collect_grads(tape, bound);
    } else {
      for (const auto& [name, t] : params) analytic.emplace(name, Tensor(t.rows(), t.cols()));
    }
  }
  if (opt.corrupt_analytic) opt.corrupt_analytic(analytic);

  GradCheckReport report;
  ParamSet probe = params;
  for (auto& [name, tensor] : probe) {
    double worst = 0.0;
    const Tensor& a = analytic.at(name);
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double orig = tensor[i];
      tensor[i] = orig + opt.epsilon;
      const double fp = evaluate_objective(f, probe);
      tensor[i] = orig - opt.epsilon;
      const double fm = evaluate_objective(f, probe);
      tensor[i] = orig;
      const double numeric = (fp - fm) / (2.0 * opt.epsilon);
      const double err = relative_error(a[i], numeric, opt.denominator_floor);
      worst = std::max(worst, err);
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = name;
        report.worst_index = i;
      }
      ++report.evaluated;
    }
    report.per_param[name] = worst;
  }
  return report;
}

}  // namespace itl

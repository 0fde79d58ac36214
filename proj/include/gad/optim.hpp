#pragma once

#include <cmath>

#include "gad/params.hpp"

namespace gad {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(const ParamVector& like, AdamOptions options = {})
      : options_(options), first_(like.zeros_like()), second_(like.zeros_like()) {}

  void step(ParamVector& params, const ParamVector& grads) {
    if (!params.same_layout(grads) || !params.same_layout(first_)) {
      throw Error(ErrorCode::DimensionMismatch, "optimizer: parameter layout mismatch");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    auto p = params.values();
    auto g = grads.values();
    auto m = first_.values();
    auto v = second_.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }

  long steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  AdamOptions options_;
  ParamVector first_;
  ParamVector second_;
  long t_ = 0;
};

}  // namespace gad

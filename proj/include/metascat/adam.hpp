#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace metascat {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double learning_rate = 1e-2;

  explicit AdamState(Eigen::Index n = 0, double lr = 1e-2)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)), learning_rate(lr) {}
};

// One bias-corrected Adam update in place.
inline void adam_step(AdamState& state, const Eigen::VectorXd& grad, Eigen::VectorXd& params,
                      const AdamOptions& opts = {}) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.step;
  state.m = opts.beta1 * state.m + (1.0 - opts.beta1) * grad;
  state.v = opts.beta2 * state.v + (1.0 - opts.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.step));
  params -= (state.learning_rate / c1) * state.m.cwiseQuotient(
                ((state.v / c2).cwiseSqrt().array() + opts.epsilon).matrix());
}

}  // namespace metascat

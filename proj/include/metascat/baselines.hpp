#pragma once

#include "metascat/calibrate.hpp"
#include "metascat/dataset.hpp"

namespace metascat {

// Affine per-coefficient benchmark: S_hat = s0 + tau^T c, real and imaginary
// parts regressed independently on the 0/1 configuration vector.
struct LinearModel {
  PortSelection selection;
  int n_meta = 0;
  std::vector<Complex> intercept;   // row-major over (rx, tx)
  std::vector<VectorXc> weights;    // tau per coefficient, length n_meta

  MatrixXc predict(const MetaConfig& config) const;
  // 2(N_S + 1) reals per coefficient
  long parameter_count() const {
    return static_cast<long>(intercept.size()) * 2 * (n_meta + 1);
  }
};

LinearModel fit_linear(const Dataset& data, const PortSelection& sel);

struct MlpOptions {
  int n_layers = 5;      // fully connected ReLU layers
  int width_factor = 6;  // hidden width M = width_factor * n_meta
  double learning_rate = 1e-3;
  int batch_size = 10;
  double train_fraction = 0.75;
  int patience_epochs = 3;
  int max_epochs = 400;
  std::uint64_t seed = 1;
  double eps = 1e-12;
};

// Fully connected benchmark: n ReLU layers of width M, linear output of
// (re, im) pairs per coefficient with one shared output bias pair.
struct MLPModel {
  PortSelection selection;
  int n_meta = 0;
  int width = 0;
  int n_layers = 0;
  std::vector<Eigen::MatrixXd> w;  // w[0]: M x N_S, hidden: M x M, last: 2*ncoeff x M
  std::vector<Eigen::VectorXd> b;  // hidden biases
  Eigen::Vector2d out_bias = Eigen::Vector2d::Zero();

  int n_coefficients() const { return static_cast<int>(selection.rx.size() * selection.tx.size()); }
  MatrixXc predict(const MetaConfig& config) const;
  long parameter_count() const;
};

MLPModel fit_mlp(const Dataset& data, const PortSelection& sel, const MlpOptions& opts = {});

}  // namespace metascat

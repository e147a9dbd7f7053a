#include "metascat/baselines.hpp"

#include <cmath>

#include "metascat/adam.hpp"
#include "metascat/costs.hpp"
#include "metascat/rng.hpp"

namespace metascat {

MatrixXc LinearModel::predict(const MetaConfig& config) const {
  if (config.size() != n_meta) throw std::invalid_argument("LinearModel: config length mismatch");
  MatrixXc out(selection.rx.size(), selection.tx.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < selection.rx.size(); ++r) {
    for (std::size_t t = 0; t < selection.tx.size(); ++t, ++k) {
      Complex v = intercept[k];
      for (int m = 0; m < n_meta; ++m)
        if (config.bits[m]) v += weights[k](m);
      out(r, t) = v;
    }
  }
  return out;
}

LinearModel fit_linear(const Dataset& data, const PortSelection& sel) {
  if (data.header.phaseless)
    throw std::invalid_argument("fit_linear: linear baseline has no phaseless mode");
  if (data.records.empty()) throw std::invalid_argument("fit_linear: empty dataset");

  const int n = data.size();
  const int ns = data.header.n_meta;
  Eigen::MatrixXd design(n, ns + 1);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (int m = 0; m < ns; ++m) design(i, 1 + m) = data.records[i].config.bits[m] ? 1.0 : 0.0;
  }
  // minimum-norm least squares, shared factorization for every coefficient
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);

  const int ncoeff = static_cast<int>(sel.rx.size() * sel.tx.size());
  Eigen::MatrixXd rhs_re(n, ncoeff), rhs_im(n, ncoeff);
  for (int i = 0; i < n; ++i) {
    const MatrixXc sub = sel.extract(data.records[i].complex_values());
    int k = 0;
    for (std::size_t r = 0; r < sel.rx.size(); ++r)
      for (std::size_t t = 0; t < sel.tx.size(); ++t, ++k) {
        rhs_re(i, k) = sub(r, t).real();
        rhs_im(i, k) = sub(r, t).imag();
      }
  }
  const Eigen::MatrixXd beta_re = cod.solve(rhs_re);
  const Eigen::MatrixXd beta_im = cod.solve(rhs_im);

  LinearModel model;
  model.selection = sel;
  model.n_meta = ns;
  model.intercept.resize(ncoeff);
  model.weights.resize(ncoeff);
  for (int k = 0; k < ncoeff; ++k) {
    model.intercept[k] = Complex(beta_re(0, k), beta_im(0, k));
    model.weights[k].resize(ns);
    for (int m = 0; m < ns; ++m)
      model.weights[k](m) = Complex(beta_re(1 + m, k), beta_im(1 + m, k));
  }
  return model;
}

long MLPModel::parameter_count() const {
  long count = 0;
  for (const auto& m : w) count += static_cast<long>(m.size());
  for (const auto& v : b) count += static_cast<long>(v.size());
  return count + 2;  // shared output bias pair
}

namespace {

Eigen::VectorXd config_input(const MetaConfig& config) {
  Eigen::VectorXd x(config.size());
  for (int i = 0; i < config.size(); ++i) x(i) = config.bits[i] ? 1.0 : 0.0;
  return x;
}

MatrixXc output_to_matrix(const Eigen::VectorXd& out, const PortSelection& sel,
                          const Eigen::Vector2d& bias) {
  MatrixXc pred(sel.rx.size(), sel.tx.size());
  int k = 0;
  for (std::size_t r = 0; r < sel.rx.size(); ++r)
    for (std::size_t t = 0; t < sel.tx.size(); ++t, ++k)
      pred(r, t) = Complex(out(2 * k) + bias(0), out(2 * k + 1) + bias(1));
  return pred;
}

struct MlpWorkspace {
  std::vector<Eigen::VectorXd> pre;   // pre-activations per layer
  std::vector<Eigen::VectorXd> post;  // post-ReLU activations
  Eigen::VectorXd out;
};

void mlp_forward(const MLPModel& net, const Eigen::VectorXd& x, MlpWorkspace& ws) {
  const int nl = net.n_layers;
  ws.pre.resize(nl);
  ws.post.resize(nl);
  const Eigen::VectorXd* input = &x;
  for (int l = 0; l < nl; ++l) {
    ws.pre[l] = net.w[l] * (*input) + net.b[l];
    ws.post[l] = ws.pre[l].cwiseMax(0.0);
    input = &ws.post[l];
  }
  ws.out = net.w[nl] * (*input);
}

}  // namespace

MatrixXc MLPModel::predict(const MetaConfig& config) const {
  if (config.size() != n_meta) throw std::invalid_argument("MLPModel: config length mismatch");
  MlpWorkspace ws;
  mlp_forward(*this, config_input(config), ws);
  return output_to_matrix(ws.out, selection, out_bias);
}

MLPModel fit_mlp(const Dataset& data, const PortSelection& sel, const MlpOptions& opts) {
  if (data.header.phaseless)
    throw std::invalid_argument("fit_mlp: benchmark requires complex calibration data");
  if (data.records.empty()) throw std::invalid_argument("fit_mlp: empty dataset");

  const int ns = data.header.n_meta;
  const int m = opts.width_factor * ns;
  const int ncoeff = static_cast<int>(sel.rx.size() * sel.tx.size());

  MLPModel net;
  net.selection = sel;
  net.n_meta = ns;
  net.width = m;
  net.n_layers = opts.n_layers;
  net.w.resize(opts.n_layers + 1);
  net.b.resize(opts.n_layers);

  // He-style fan-in uniform init
  Rng rng(derive_seed(opts.seed, 0x6d6c70));
  auto init_matrix = [&](Eigen::MatrixXd& mat, int rows, int cols) {
    mat.resize(rows, cols);
    const double a = std::sqrt(6.0 / cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) mat(r, c) = a * (2.0 * rng.uniform() - 1.0);
  };
  for (int l = 0; l < opts.n_layers; ++l) {
    init_matrix(net.w[l], m, l == 0 ? ns : m);
    net.b[l] = Eigen::VectorXd::Zero(m);
  }
  init_matrix(net.w[opts.n_layers], 2 * ncoeff, m);
  net.out_bias.setZero();

  // targets
  std::vector<MatrixXc> targets;
  targets.reserve(data.size());
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(data.size());
  for (const auto& rec : data.records) {
    targets.push_back(sel.extract(rec.complex_values()));
    inputs.push_back(config_input(rec.config));
  }

  const int n_total = data.size();
  int n_train = std::max(1, static_cast<int>(std::floor(opts.train_fraction * n_total)));
  n_train = std::min(n_train, n_total);
  const int n_val = n_total - n_train;

  const CostSpec cost_spec = CostSpec::coherent();
  MlpWorkspace ws;

  auto eval_cost = [&](const MLPModel& model, int begin, int count) {
    std::vector<MatrixXc> y, yh;
    y.reserve(count);
    yh.reserve(count);
    for (int i = begin; i < begin + count; ++i) {
      mlp_forward(model, inputs[i], ws);
      yh.push_back(output_to_matrix(ws.out, sel, model.out_bias));
      y.push_back(targets[i]);
    }
    return evaluate_cost(y, yh, cost_spec, opts.eps).value;
  };

  // flatten parameters for Adam
  long n_params = net.parameter_count();
  auto pack = [&](const MLPModel& model) {
    Eigen::VectorXd v(n_params);
    long off = 0;
    for (const auto& mat : model.w) {
      std::copy(mat.data(), mat.data() + mat.size(), v.data() + off);
      off += mat.size();
    }
    for (const auto& vec : model.b) {
      std::copy(vec.data(), vec.data() + vec.size(), v.data() + off);
      off += vec.size();
    }
    v(off++) = model.out_bias(0);
    v(off++) = model.out_bias(1);
    return v;
  };
  auto unpack = [&](const Eigen::VectorXd& v, MLPModel& model) {
    long off = 0;
    for (auto& mat : model.w) {
      std::copy(v.data() + off, v.data() + off + mat.size(), mat.data());
      off += mat.size();
    }
    for (auto& vec : model.b) {
      std::copy(v.data() + off, v.data() + off + vec.size(), vec.data());
      off += vec.size();
    }
    model.out_bias(0) = v(off++);
    model.out_bias(1) = v(off++);
  };

  Eigen::VectorXd theta = pack(net);
  AdamState adam(theta.size(), opts.learning_rate);
  Rng shuffle_rng(derive_seed(opts.seed, 0x736831));

  double best_val = n_val > 0 ? eval_cost(net, n_train, n_val) : eval_cost(net, 0, n_train);
  Eigen::VectorXd best_theta = theta;
  int epochs_since_best = 0;

  std::vector<int> order(n_train);
  for (int i = 0; i < n_train; ++i) order[i] = i;

  std::vector<MlpWorkspace> batch_ws(opts.batch_size);
  Eigen::VectorXd grad(theta.size());

  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    for (int i = n_train - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

    for (int start = 0; start + opts.batch_size <= n_train || start == 0; start += opts.batch_size) {
      const int bsize = std::min(opts.batch_size, n_train - start);
      if (bsize <= 0) break;
      unpack(theta, net);

      std::vector<MatrixXc> y, yh;
      y.reserve(bsize);
      yh.reserve(bsize);
      for (int i = 0; i < bsize; ++i) {
        mlp_forward(net, inputs[order[start + i]], batch_ws[i]);
        yh.push_back(output_to_matrix(batch_ws[i].out, sel, net.out_bias));
        y.push_back(targets[order[start + i]]);
      }
      const BatchCost bc = evaluate_cost(y, yh, cost_spec, opts.eps);
      const std::vector<MatrixXc> gy = cost_gradient(y, yh, cost_spec, opts.eps, bc.theta);

      // backprop, accumulated over the batch
      std::vector<Eigen::MatrixXd> gw(net.w.size());
      std::vector<Eigen::VectorXd> gb(net.b.size());
      for (std::size_t l = 0; l < net.w.size(); ++l) gw[l].setZero(net.w[l].rows(), net.w[l].cols());
      for (std::size_t l = 0; l < net.b.size(); ++l) gb[l].setZero(net.b[l].size());
      Eigen::Vector2d g_out_bias = Eigen::Vector2d::Zero();

      for (int i = 0; i < bsize; ++i) {
        Eigen::VectorXd g_out(2 * ncoeff);
        int k = 0;
        for (std::size_t r = 0; r < sel.rx.size(); ++r)
          for (std::size_t t = 0; t < sel.tx.size(); ++t, ++k) {
            g_out(2 * k) = gy[i](r, t).real();
            g_out(2 * k + 1) = gy[i](r, t).imag();
            g_out_bias(0) += gy[i](r, t).real();
            g_out_bias(1) += gy[i](r, t).imag();
          }
        const MlpWorkspace& w_i = batch_ws[i];
        gw[opts.n_layers] += g_out * w_i.post[opts.n_layers - 1].transpose();
        Eigen::VectorXd delta = net.w[opts.n_layers].transpose() * g_out;
        for (int l = opts.n_layers - 1; l >= 0; --l) {
          delta = (w_i.pre[l].array() > 0.0).select(delta, 0.0);
          gb[l] += delta;
          if (l > 0)
            gw[l] += delta * w_i.post[l - 1].transpose();
          else
            gw[l] += delta * inputs[order[start + i]].transpose();
          if (l > 0) delta = net.w[l].transpose() * delta;
        }
      }

      long off = 0;
      for (const auto& mat : gw) {
        std::copy(mat.data(), mat.data() + mat.size(), grad.data() + off);
        off += mat.size();
      }
      for (const auto& vec : gb) {
        std::copy(vec.data(), vec.data() + vec.size(), grad.data() + off);
        off += vec.size();
      }
      grad(off++) = g_out_bias(0);
      grad(off++) = g_out_bias(1);

      adam_step(adam, grad, theta);
      if (bsize < opts.batch_size) break;
    }

    unpack(theta, net);
    const double vc = n_val > 0 ? eval_cost(net, n_train, n_val) : eval_cost(net, 0, n_train);
    if (vc < best_val) {
      best_val = vc;
      best_theta = theta;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= opts.patience_epochs) {
      break;
    }
  }

  unpack(best_theta, net);
  return net;
}

}  // namespace metascat

#include "metascat/calibrate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "metascat/adam.hpp"
#include "metascat/rng.hpp"

namespace metascat {

PilotSet PilotSet::gaussian(int n_tx, std::uint64_t seed) {
  PilotSet p;
  p.seed = seed;
  p.canonical = false;
  p.x.resize(n_tx, n_tx);
  Rng rng(derive_seed(seed, 0x70696c));
  for (Eigen::Index c = 0; c < p.x.cols(); ++c)
    for (Eigen::Index r = 0; r < p.x.rows(); ++r) p.x(r, c) = rng.complex_normal();
  return p;
}

PilotSet PilotSet::canonical_basis(int n_tx) {
  PilotSet p;
  p.canonical = true;
  p.x = MatrixXc::Identity(n_tx, n_tx);
  return p;
}

PortRoles PortSelection::roles() const {
  PortRoles r;
  r.n_antennas = static_cast<int>(cavity_ports.size());
  r.tx_ports = tx;
  r.rx_ports = rx;
  r.validate();
  return r;
}

PortSelection PortSelection::full(int n_antennas) {
  PortSelection s;
  for (int i = 0; i < n_antennas; ++i) {
    s.cavity_ports.push_back(i);
    s.tx.push_back(i);
    s.rx.push_back(i);
  }
  return s;
}

PortSelection PortSelection::single(int tx_port, int rx_port) {
  PortSelection s;
  if (tx_port == rx_port) {
    s.cavity_ports = {tx_port};
    s.tx = {0};
    s.rx = {0};
  } else {
    s.cavity_ports = {std::min(tx_port, rx_port), std::max(tx_port, rx_port)};
    s.tx = {tx_port < rx_port ? 0 : 1};
    s.rx = {tx_port < rx_port ? 1 : 0};
  }
  return s;
}

PortSelection PortSelection::from_name(const std::string& name, int n_antennas) {
  if (name == "full") return full(n_antennas);
  if (name == "h22") {
    if (n_antennas != 4) throw std::invalid_argument("h22 selection requires 4 antennas");
    PortSelection s;
    s.cavity_ports = {0, 1, 2, 3};
    s.tx = {0, 1};
    s.rx = {2, 3};
    return s;
  }
  // "sRC": single coefficient, 1-based receive/transmit ports
  if ((name.size() == 3) && (name[0] == 's' || name[0] == 'S') && std::isdigit(name[1]) &&
      std::isdigit(name[2])) {
    const int r = name[1] - '1';
    const int t = name[2] - '1';
    if (r < 0 || r >= n_antennas || t < 0 || t >= n_antennas)
      throw std::invalid_argument("coefficient selection out of range: " + name);
    return single(t, r);
  }
  throw std::invalid_argument("unknown coefficient selection: " + name);
}

std::string PortSelection::name() const {
  // reconstruct the canonical names used by the CLI
  const int n = static_cast<int>(cavity_ports.size());
  const PortSelection f = full(n);
  if (cavity_ports == f.cavity_ports && tx == f.tx && rx == f.rx && n > 1) return "full";
  if (n == 4 && tx == std::vector<int>{0, 1} && rx == std::vector<int>{2, 3}) return "h22";
  if (tx.size() == 1 && rx.size() == 1)
    return "s" + std::to_string(cavity_ports[rx[0]] + 1) + std::to_string(cavity_ports[tx[0]] + 1);
  return "custom";
}

MatrixXc PortSelection::extract(const MatrixXc& full_matrix) const {
  MatrixXc out(rx.size(), tx.size());
  for (std::size_t r = 0; r < rx.size(); ++r)
    for (std::size_t t = 0; t < tx.size(); ++t)
      out(r, t) = full_matrix(cavity_ports[rx[r]], cavity_ports[tx[t]]);
  return out;
}

Eigen::MatrixXd PortSelection::extract_abs(const Eigen::MatrixXd& full_matrix) const {
  Eigen::MatrixXd out(rx.size(), tx.size());
  for (std::size_t r = 0; r < rx.size(); ++r)
    for (std::size_t t = 0; t < tx.size(); ++t)
      out(r, t) = full_matrix(cavity_ports[rx[r]], cavity_ports[tx[t]]);
  return out;
}

MaskArray PortSelection::extract_mask(const MaskArray& full_mask) const {
  MaskArray out(rx.size(), tx.size());
  for (std::size_t r = 0; r < rx.size(); ++r)
    for (std::size_t t = 0; t < tx.size(); ++t)
      out(r, t) = full_mask(cavity_ports[rx[r]], cavity_ports[tx[t]]);
  return out;
}

std::string PortSelection::coefficient_label(int r, int t) const {
  return "S" + std::to_string(cavity_ports[rx[r]] + 1) + std::to_string(cavity_ports[tx[t]] + 1);
}

Eigen::VectorXd pack_params(const CompactModelParams& p) {
  Eigen::VectorXd v(p.parameter_count());
  v(0) = p.alpha_a.real();
  v(1) = p.alpha_a.imag();
  v(2) = p.alpha_0.real();
  v(3) = p.alpha_0.imag();
  v(4) = p.alpha_1.real();
  v(5) = p.alpha_1.imag();
  for (std::size_t i = 0; i < p.coupling.size(); ++i) {
    v(6 + 2 * i) = p.coupling[i].real();
    v(7 + 2 * i) = p.coupling[i].imag();
  }
  return v;
}

CompactModelParams unpack_params(const Eigen::VectorXd& v, int n_antennas, int n_meta) {
  CompactModelParams p(n_antennas, n_meta);
  if (v.size() != p.parameter_count())
    throw std::invalid_argument("unpack_params: wrong parameter vector length");
  p.alpha_a = Complex(v(0), v(1));
  p.alpha_0 = Complex(v(2), v(3));
  p.alpha_1 = Complex(v(4), v(5));
  for (std::size_t i = 0; i < p.coupling.size(); ++i)
    p.coupling[i] = Complex(v(6 + 2 * i), v(7 + 2 * i));
  return p;
}

MatrixXc CalibratedModel::predict(const MetaConfig& config) const {
  return scattering_block(params, config, roles()).entries;
}

std::vector<CalibSample> build_samples(const Dataset& data, const PortSelection& sel,
                                       const CostSpec& cost, const PilotSet& pilots) {
  if (data.records.empty()) throw std::invalid_argument("build_samples: empty dataset");
  std::vector<CalibSample> samples;
  samples.reserve(data.records.size());
  for (const auto& rec : data.records) {
    CalibSample s;
    s.config = rec.config;
    switch (cost.kind) {
      case CostKind::coherent: {
        s.target = sel.extract(rec.complex_values()) * pilots.x;
        break;
      }
      case CostKind::phaseless: {
        if (rec.phaseless()) {
          // Magnitude-only storage: only canonical pilots are consistent,
          // since |S x| cannot be formed from |S| for a mixing pilot.
          if (!pilots.canonical)
            throw std::invalid_argument(
                "build_samples: magnitude-only dataset supports canonical pilots only");
          s.target = sel.extract_abs(rec.magnitudes).cast<Complex>();
        } else {
          s.target = (sel.extract(rec.complex_values()) * pilots.x).cwiseAbs().cast<Complex>();
        }
        break;
      }
      case CostKind::masked: {
        s.target = sel.extract(rec.complex_values());
        break;
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

namespace {

struct ForwardState {
  std::vector<StagedInverse> staged;
  std::vector<MatrixXc> yhat;
};

// Antenna model-indices whose W^{-1} columns the adjoint needs.
std::vector<int> needed_ports(const PortSelection& sel) {
  std::vector<int> u = sel.rx;
  u.insert(u.end(), sel.tx.begin(), sel.tx.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

void forward_pass(const CompactModelParams& params, const std::vector<CalibSample>& samples,
                  std::span<const int> idx, const PortSelection& sel, const PilotSet& pilots,
                  const CostSpec& cost, ForwardState& fs, bool keep_staged) {
  const int na = static_cast<int>(sel.cavity_ports.size());
  fs.yhat.clear();
  fs.staged.clear();
  fs.yhat.reserve(idx.size());
  if (keep_staged) fs.staged.reserve(idx.size());
  MatrixXc h(sel.rx.size(), sel.tx.size());
  for (int id : idx) {
    const CalibSample& smp = samples[id];
    const MatrixXc w = assemble_interaction_matrix(params, smp.config);
    StagedInverse staged(w, na, smp.config);
    const MatrixXc& aa = staged.antenna_block();
    for (std::size_t r = 0; r < sel.rx.size(); ++r)
      for (std::size_t t = 0; t < sel.tx.size(); ++t) h(r, t) = aa(sel.rx[r], sel.tx[t]);
    fs.yhat.push_back(cost.kind == CostKind::masked ? h : MatrixXc(h * pilots.x));
    if (keep_staged) fs.staged.push_back(std::move(staged));
  }
}

double cost_and_grad(const CompactModelParams& params, const std::vector<CalibSample>& samples,
                     std::span<const int> idx, const PortSelection& sel, const PilotSet& pilots,
                     const CostSpec& cost, double eps, Eigen::VectorXd* grad,
                     std::optional<double> fixed_theta) {
  if (idx.empty()) throw std::invalid_argument("model cost: empty batch");
  std::vector<MatrixXc> targets;
  targets.reserve(idx.size());
  for (int id : idx) targets.push_back(samples[id].target);

  ForwardState fs;
  forward_pass(params, samples, idx, sel, pilots, cost, fs, grad != nullptr);

  const std::span<const MatrixXc> y(targets);
  const std::span<const MatrixXc> yh(fs.yhat);
  BatchCost bc = fixed_theta ? evaluate_cost_fixed_phase(y, yh, cost, eps, *fixed_theta)
                             : evaluate_cost(y, yh, cost, eps);
  if (!grad) return bc.value;

  const std::vector<MatrixXc> gy = cost_gradient(y, yh, cost, eps, bc.theta);

  const int n = params.size();
  const int na = params.n_antennas;
  const std::vector<int> ports = needed_ports(sel);
  std::vector<int> col_of(na, -1);
  for (std::size_t i = 0; i < ports.size(); ++i) col_of[ports[i]] = static_cast<int>(i);

  Complex g_alpha_a(0, 0), g_alpha_0(0, 0), g_alpha_1(0, 0);
  std::vector<Complex> g_coupling(params.coupling.size(), Complex(0, 0));

  MatrixXc k_r(n, sel.rx.size());
  MatrixXc k_t(n, sel.tx.size());
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const CalibSample& smp = samples[idx[b]];
    // columns of W^{-1} at the utilized antenna ports
    const MatrixXc k_cols = fs.staged[b].antenna_columns(ports);
    for (std::size_t r = 0; r < sel.rx.size(); ++r) k_r.col(r) = k_cols.col(col_of[sel.rx[r]]);
    for (std::size_t t = 0; t < sel.tx.size(); ++t) k_t.col(t) = k_cols.col(col_of[sel.tx[t]]);

    const MatrixXc gs =
        cost.kind == CostKind::masked ? gy[b] : MatrixXc(gy[b] * pilots.x.adjoint());
    const MatrixXc gw = -(k_r.conjugate() * gs * k_t.conjugate().transpose());

    for (int i = 0; i < na; ++i) g_alpha_a += gw(i, i);
    for (int m = 0; m < params.n_meta; ++m) {
      const int i = na + m;
      (smp.config.bits[m] ? g_alpha_1 : g_alpha_0) += gw(i, i);
    }
    std::size_t t_idx = 0;
    for (int i = 0; i < n; ++i) {
      g_coupling[t_idx++] += gw(i, i);
      for (int j = i + 1; j < n; ++j) g_coupling[t_idx++] += gw(i, j) + gw(j, i);
    }
  }

  grad->resize(params.parameter_count());
  (*grad)(0) = g_alpha_a.real();
  (*grad)(1) = g_alpha_a.imag();
  (*grad)(2) = g_alpha_0.real();
  (*grad)(3) = g_alpha_0.imag();
  (*grad)(4) = g_alpha_1.real();
  (*grad)(5) = g_alpha_1.imag();
  for (std::size_t i = 0; i < g_coupling.size(); ++i) {
    (*grad)(6 + 2 * i) = g_coupling[i].real();
    (*grad)(7 + 2 * i) = g_coupling[i].imag();
  }
  return bc.value;
}

std::vector<int> iota_indices(std::size_t n) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

}  // namespace

double model_gradient(const CompactModelParams& params, std::span<const CalibSample> batch,
                      const PortSelection& sel, const PilotSet& pilots, const CostSpec& cost,
                      double eps, Eigen::VectorXd& grad_out) {
  std::vector<CalibSample> samples(batch.begin(), batch.end());
  const std::vector<int> idx = iota_indices(samples.size());
  return cost_and_grad(params, samples, idx, sel, pilots, cost, eps, &grad_out, {});
}

double model_cost(const CompactModelParams& params, std::span<const CalibSample> batch,
                  const PortSelection& sel, const PilotSet& pilots, const CostSpec& cost,
                  double eps, std::optional<double> fixed_theta) {
  std::vector<CalibSample> samples(batch.begin(), batch.end());
  const std::vector<int> idx = iota_indices(samples.size());
  return cost_and_grad(params, samples, idx, sel, pilots, cost, eps, nullptr, fixed_theta);
}

CalibratedModel calibrate(const Dataset& data, const PortSelection& sel, const CostSpec& cost,
                          const PilotSet& pilots, const TrainOptions& opts,
                          const ProgressFn& progress) {
  if (data.records.empty()) throw std::invalid_argument("calibrate: empty dataset");
  if (cost.kind != CostKind::phaseless && data.header.phaseless)
    throw std::invalid_argument("calibrate: phaseless dataset requires the phaseless cost");
  const int na = static_cast<int>(sel.cavity_ports.size());
  const int ns = data.header.n_meta;
  sel.roles();  // validates

  CostSpec effective = cost;
  if (cost.kind == CostKind::masked && data.header.mask && cost.mask.size() == 0)
    effective.mask = sel.extract_mask(*data.header.mask);
  effective.validate(static_cast<Eigen::Index>(sel.rx.size()),
                     static_cast<Eigen::Index>(sel.tx.size()));

  const std::vector<CalibSample> samples = build_samples(data, sel, effective, pilots);

  // deterministic split: leading 8/9 train, trailing 1/9 validation
  const int n_total = static_cast<int>(samples.size());
  int n_train = static_cast<int>(std::floor(opts.train_fraction * n_total));
  n_train = std::max(1, std::min(n_train, n_total));
  const int n_val = n_total - n_train;
  std::vector<int> train_idx = iota_indices(n_train);
  std::vector<int> val_idx(n_val);
  for (int i = 0; i < n_val; ++i) val_idx[i] = n_train + i;
  if (n_val == 0) val_idx = train_idx;  // degenerate tiny datasets

  // init: truncated normal over every real learnable
  CompactModelParams init(na, ns);
  Eigen::VectorXd theta_vec(init.parameter_count());
  Rng init_rng(derive_seed(opts.seed, 0x696e69));
  for (Eigen::Index i = 0; i < theta_vec.size(); ++i)
    theta_vec(i) = init_rng.truncated_normal(0.0, opts.init_std, 2.0);

  const int batch = std::min<int>(opts.effective_batch(cost.kind), n_train);
  AdamState adam(theta_vec.size(), opts.lr_init);
  Rng shuffle_rng(derive_seed(opts.seed, 0x736866));

  auto val_cost = [&](const CompactModelParams& p) {
    return cost_and_grad(p, samples, val_idx, sel, pilots, effective, opts.eps, nullptr, {});
  };

  CompactModelParams params = unpack_params(theta_vec, na, ns);
  double best_val = val_cost(params);
  Eigen::VectorXd best_params = theta_vec;
  long best_iter = 0;
  long last_decay_iter = 0;

  TrainingReport report;
  report.trace.push_back({0, std::numeric_limits<double>::quiet_NaN(), best_val, adam.learning_rate});
  if (progress) progress(report.trace.back());

  std::vector<int> order = train_idx;
  int cursor = n_train;  // force initial shuffle
  Eigen::VectorXd grad(theta_vec.size());
  std::vector<int> batch_idx(batch);

  long iter = 0;
  while (iter < opts.max_iterations) {
    ++iter;
    if (cursor + batch > n_train) {
      for (int i = n_train - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
      cursor = 0;
    }
    for (int i = 0; i < batch; ++i) batch_idx[i] = order[cursor + i];
    cursor += batch;

    params = unpack_params(theta_vec, na, ns);
    const double train_cost =
        cost_and_grad(params, samples, batch_idx, sel, pilots, effective, opts.eps, &grad, {});
    adam_step(adam, grad, theta_vec);

    if (iter % opts.val_interval == 0 || iter == opts.max_iterations) {
      params = unpack_params(theta_vec, na, ns);
      const double vc = val_cost(params);
      if (vc < best_val) {
        best_val = vc;
        best_params = theta_vec;
        best_iter = iter;
      }
      report.trace.push_back({iter, train_cost, vc, adam.learning_rate});
      if (progress) progress(report.trace.back());

      if (iter - std::max(best_iter, last_decay_iter) >= opts.lr_plateau_iters &&
          adam.learning_rate > opts.lr_floor) {
        adam.learning_rate = std::max(adam.learning_rate * opts.lr_decay, opts.lr_floor);
        last_decay_iter = iter;
      }
      if (iter - best_iter >= opts.patience_iters) break;
    }
  }

  CalibratedModel model;
  model.params = unpack_params(best_params, na, ns);
  model.selection = sel;
  model.pilots = pilots;
  model.cost = effective;
  model.report = std::move(report);
  model.report.iterations = iter;
  model.report.best_validation_cost = best_val;
  model.train_provenance = data.header.provenance;
  return model;
}

}  // namespace metascat

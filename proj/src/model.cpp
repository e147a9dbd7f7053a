#include "metascat/model.hpp"

namespace metascat {

MatrixXc assemble_interaction_matrix(const CompactModelParams& params, const MetaConfig& config) {
  if (config.size() != params.n_meta)
    throw std::invalid_argument("assemble_interaction_matrix: config length " +
                                std::to_string(config.size()) + " does not match n_meta " +
                                std::to_string(params.n_meta));
  const int n = params.size();
  MatrixXc w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) w(i, j) = w(j, i) = params.coupling_at(i, j);
  for (int i = 0; i < params.n_antennas; ++i) w(i, i) += params.alpha_a;
  for (int m = 0; m < params.n_meta; ++m) {
    const int i = params.n_antennas + m;
    w(i, i) += config.bits[m] ? params.alpha_1 : params.alpha_0;
  }
  return w;
}

namespace {

// cheap condition estimate from the U factor's diagonal spread
void check_pivot(const Eigen::PartialPivLU<MatrixXc>& lu, const char* stage, double cond_limit) {
  const auto diag = lu.matrixLU().diagonal();
  double lo = std::abs(diag(0)), hi = lo;
  for (Eigen::Index i = 1; i < diag.size(); ++i) {
    const double d = std::abs(diag(i));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double rc = hi > 0.0 ? lo / hi : 0.0;
  if (!(rc > 1.0 / cond_limit)) throw SingularPivotError(stage, rc);
}

}  // namespace

StagedInverse::StagedInverse(const MatrixXc& w, int n_antennas, const MetaConfig& config,
                             double cond_limit) {
  n_ = static_cast<int>(w.rows());
  n_antennas_ = n_antennas;
  if (w.cols() != n_) throw std::invalid_argument("StagedInverse: W must be square");
  if (n_antennas_ <= 0 || n_antennas_ > n_)
    throw std::invalid_argument("StagedInverse: invalid antenna count");
  if (config.size() != n_ - n_antennas_)
    throw std::invalid_argument("StagedInverse: config length does not match meta-atom count");

  // Group indices: antennas, then state-0 meta-atoms, then state-1.
  perm_.reserve(n_);
  for (int i = 0; i < n_antennas_; ++i) perm_.push_back(i);
  for (int m = 0; m < config.size(); ++m)
    if (config.bits[m] == 0) perm_.push_back(n_antennas_ + m);
  n_zero_ = static_cast<int>(perm_.size()) - n_antennas_;
  for (int m = 0; m < config.size(); ++m)
    if (config.bits[m] == 1) perm_.push_back(n_antennas_ + m);
  n_one_ = n_ - n_antennas_ - n_zero_;

  MatrixXc wp(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) wp(i, j) = w(perm_[i], perm_[j]);

  const int np = n_antennas_ + n_zero_;  // size after stage 1

  // Stage 1: eliminate the state-1 block.
  MatrixXc m1;
  if (n_one_ > 0) {
    lu_one_.compute(wp.bottomRightCorner(n_one_, n_one_));
    check_pivot(lu_one_, "state-1 pivot block", cond_limit);
    w_po_ = wp.topRightCorner(np, n_one_);
    m1 = wp.topLeftCorner(np, np) - w_po_ * lu_one_.solve(w_po_.transpose());
  } else {
    m1 = wp;
  }

  // Stage 2: eliminate the state-0 block.
  MatrixXc m2;
  if (n_zero_ > 0) {
    lu_zero_.compute(m1.bottomRightCorner(n_zero_, n_zero_));
    check_pivot(lu_zero_, "state-0 pivot block", cond_limit);
    m1_az_ = m1.topRightCorner(n_antennas_, n_zero_);
    m2 = m1.topLeftCorner(n_antennas_, n_antennas_) - m1_az_ * lu_zero_.solve(m1_az_.transpose());
  } else {
    m2 = m1;
  }

  // Stage 3: invert the antenna-sized Schur complement.
  lu_ant_.compute(m2);
  check_pivot(lu_ant_, "antenna pivot block", cond_limit);
  antenna_block_ = lu_ant_.solve(MatrixXc::Identity(n_antennas_, n_antennas_));
}

VectorXc StagedInverse::solve(const VectorXc& rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("StagedInverse::solve: size mismatch");
  const int np = n_antennas_ + n_zero_;

  VectorXc b(n_);
  for (int i = 0; i < n_; ++i) b(i) = rhs(perm_[i]);

  // Stage-1 forward: reduce the rhs onto the (A, Z) block.
  VectorXc g1;
  VectorXc h = b.head(np);
  if (n_one_ > 0) {
    g1 = lu_one_.solve(b.tail(n_one_));
    h -= w_po_ * g1;
  }

  // Stage-2 forward.
  VectorXc g0;
  VectorXc ha = h.head(n_antennas_);
  if (n_zero_ > 0) {
    g0 = lu_zero_.solve(h.tail(n_zero_));
    ha -= m1_az_ * g0;
  }

  VectorXc xp(n_);
  xp.head(n_antennas_) = lu_ant_.solve(ha);
  if (n_zero_ > 0)
    xp.segment(n_antennas_, n_zero_) =
        g0 - lu_zero_.solve(m1_az_.transpose() * xp.head(n_antennas_));
  if (n_one_ > 0) xp.tail(n_one_) = g1 - lu_one_.solve(w_po_.transpose() * xp.head(np));

  VectorXc x(n_);
  for (int i = 0; i < n_; ++i) x(perm_[i]) = xp(i);
  return x;
}

MatrixXc StagedInverse::antenna_columns(const std::vector<int>& ports) const {
  const int k = static_cast<int>(ports.size());
  const int np = n_antennas_ + n_zero_;
  MatrixXc xa(n_antennas_, k);
  for (int c = 0; c < k; ++c) {
    if (ports[c] < 0 || ports[c] >= n_antennas_)
      throw std::invalid_argument("antenna_columns: port out of range");
    xa.col(c) = antenna_block_.col(ports[c]);
  }
  MatrixXc xp(np, k);
  xp.topRows(n_antennas_) = xa;
  if (n_zero_ > 0) xp.bottomRows(n_zero_) = -lu_zero_.solve(m1_az_.transpose() * xa);

  MatrixXc out(n_, k);
  for (int i = 0; i < np; ++i) out.row(perm_[i]) = xp.row(i);
  if (n_one_ > 0) {
    const MatrixXc xo = -lu_one_.solve(w_po_.transpose() * xp);
    for (int i = 0; i < n_one_; ++i) out.row(perm_[np + i]) = xo.row(i);
  }
  return out;
}

ScatteringMatrix scattering_block(const CompactModelParams& params, const MetaConfig& config,
                                  const PortRoles& roles) {
  roles.validate();
  if (roles.n_antennas != params.n_antennas)
    throw std::invalid_argument("scattering_block: roles antenna count does not match params");
  const MatrixXc w = assemble_interaction_matrix(params, config);
  StagedInverse staged(w, params.n_antennas, config);
  const MatrixXc& aa = staged.antenna_block();

  ScatteringMatrix s;
  s.roles = roles;
  s.entries.resize(roles.n_rx(), roles.n_tx());
  for (int r = 0; r < roles.n_rx(); ++r)
    for (int t = 0; t < roles.n_tx(); ++t) s.entries(r, t) = aa(roles.rx_ports[r], roles.tx_ports[t]);
  return s;
}

MatrixXc apply_pilots(const ScatteringMatrix& h, const MatrixXc& pilots) {
  if (h.entries.cols() != pilots.rows())
    throw std::invalid_argument("apply_pilots: pilot rows must equal tx count");
  return h.entries * pilots;
}

}  // namespace metascat

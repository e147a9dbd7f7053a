#include "metascat/metrics.hpp"

#include <cmath>

namespace metascat {

namespace {

constexpr double kZetaCapDb = 120.0;

struct Centered {
  std::vector<Complex> t;
  std::vector<Complex> p;
};

double zeta_from_centered(const Centered& c) {
  Complex acc(0, 0);
  for (std::size_t i = 0; i < c.t.size(); ++i) acc += std::conj(c.p[i]) * c.t[i];
  const double theta = acc == Complex(0, 0) ? 0.0 : std::arg(acc);
  const Complex rot = std::polar(1.0, theta);
  double var_true = 0.0, var_res = 0.0;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    var_true += std::norm(c.t[i]);
    var_res += std::norm(c.t[i] - rot * c.p[i]);
  }
  var_true /= static_cast<double>(c.t.size());
  var_res /= static_cast<double>(c.t.size());
  if (var_res == 0.0 || var_res <= var_true * 1e-12) return kZetaCapDb;
  return std::min(10.0 * std::log10(var_true / var_res), kZetaCapDb);
}

double alignment_theta(const Centered& c) {
  Complex acc(0, 0);
  for (std::size_t i = 0; i < c.t.size(); ++i) acc += std::conj(c.p[i]) * c.t[i];
  return acc == Complex(0, 0) ? 0.0 : std::arg(acc);
}

Centered center(std::span<const Complex> t, std::span<const Complex> p) {
  Complex mt(0, 0), mp(0, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mp += p[i];
  }
  mt /= static_cast<double>(t.size());
  mp /= static_cast<double>(p.size());
  Centered c;
  c.t.reserve(t.size());
  c.p.reserve(p.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    c.t.push_back(t[i] - mt);
    c.p.push_back(p[i] - mp);
  }
  return c;
}

}  // namespace

double zeta_db(std::span<const Complex> true_series, std::span<const Complex> pred_series) {
  if (true_series.size() != pred_series.size())
    throw std::invalid_argument("zeta_db: series lengths differ");
  if (true_series.size() < 2) throw std::invalid_argument("zeta_db: need at least 2 samples");
  return zeta_from_centered(center(true_series, pred_series));
}

double zeta_joint_db(std::span<const MatrixXc> true_series, std::span<const MatrixXc> pred_series) {
  if (true_series.size() != pred_series.size())
    throw std::invalid_argument("zeta_joint_db: series lengths differ");
  if (true_series.size() < 2) throw std::invalid_argument("zeta_joint_db: need at least 2 samples");
  const Eigen::Index rows = true_series[0].rows(), cols = true_series[0].cols();

  // center each coefficient over the series, then share one alignment phase
  Centered all;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::vector<Complex> t, p;
      t.reserve(true_series.size());
      p.reserve(pred_series.size());
      for (std::size_t i = 0; i < true_series.size(); ++i) {
        t.push_back(true_series[i](r, c));
        p.push_back(pred_series[i](r, c));
      }
      Centered one = center(t, p);
      all.t.insert(all.t.end(), one.t.begin(), one.t.end());
      all.p.insert(all.p.end(), one.p.begin(), one.p.end());
    }
  }
  return zeta_from_centered(all);
}

ZetaReport zeta_report(const PortSelection& sel, std::span<const MatrixXc> truth,
                       std::span<const MatrixXc> pred) {
  if (truth.size() != pred.size() || truth.size() < 2)
    throw std::invalid_argument("zeta_report: need matching series of length >= 2");
  ZetaReport rep;
  rep.n_eval = static_cast<int>(truth.size());
  double siso_sum = 0.0;
  int siso_count = 0;
  for (std::size_t t = 0; t < sel.tx.size(); ++t) {
    for (std::size_t r = 0; r < sel.rx.size(); ++r) {
      std::vector<Complex> ts, ps;
      ts.reserve(truth.size());
      ps.reserve(pred.size());
      for (std::size_t i = 0; i < truth.size(); ++i) {
        ts.push_back(truth[i](r, t));
        ps.push_back(pred[i](r, t));
      }
      const Centered c = center(ts, ps);
      rep.labels.push_back(sel.coefficient_label(static_cast<int>(r), static_cast<int>(t)));
      rep.alignment_theta.push_back(alignment_theta(c));
      rep.zeta.push_back(zeta_from_centered(c));
      if (sel.cavity_ports[sel.rx[r]] != sel.cavity_ports[sel.tx[t]]) {
        siso_sum += rep.zeta.back();
        ++siso_count;
      }
    }
  }
  if (siso_count == 0) {  // reflection-only selection
    for (double z : rep.zeta) siso_sum += z;
    siso_count = static_cast<int>(rep.zeta.size());
  }
  rep.zeta_siso = siso_sum / siso_count;
  return rep;
}

double mi_lower_bound(double snr_linear, double zeta_linear) {
  if (!(snr_linear > 0.0) || !(zeta_linear > 0.0))
    throw std::invalid_argument("mi_lower_bound: snr and zeta must be positive");
  return std::log2(1.0 + 1.0 / (1.0 / snr_linear + 1.0 / zeta_linear));
}

OffsetCorrection offset_correct(const CalibratedModel& model, const MetaConfig& reference_config,
                                const MatrixXc& reference_measurement,
                                const MaskArray& included_mask) {
  const MatrixXc pred = model.predict(reference_config);
  if (reference_measurement.rows() != pred.rows() || reference_measurement.cols() != pred.cols() ||
      included_mask.rows() != pred.rows() || included_mask.cols() != pred.cols())
    throw std::invalid_argument("offset_correct: shape mismatch");

  OffsetCorrection oc;
  oc.corrected = !included_mask;
  oc.delta = MatrixXc::Zero(pred.rows(), pred.cols());
  bool any = false;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
      if (!oc.corrected(r, c)) continue;
      const Complex m = reference_measurement(r, c);
      if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
        throw std::invalid_argument("offset_correct: reference lacks a masked coefficient");
      oc.delta(r, c) = m - pred(r, c);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("offset_correct: mask excludes nothing to correct");
  return oc;
}

}  // namespace metascat

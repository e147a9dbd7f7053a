#include "metascat/gradcheck.hpp"

#include <cmath>

#include "metascat/cavity.hpp"
#include "metascat/costs.hpp"
#include "metascat/rng.hpp"

namespace metascat {

double finite_difference_check(std::uint64_t seed, CostKind kind, int n_antennas, int n_meta,
                               int batch, double step) {
  Rng rng(derive_seed(seed, 0x6664));
  const CompactModelParams params = sample_compact_params(n_antennas, n_meta, derive_seed(seed, 1));
  const PortSelection sel = PortSelection::full(n_antennas);
  const PilotSet pilots = PilotSet::gaussian(n_antennas, derive_seed(seed, 2));

  CostSpec spec;
  spec.kind = kind;
  if (kind == CostKind::masked) {
    // exclude one coefficient, keep the rest
    spec.mask = MaskArray::Constant(n_antennas, n_antennas, true);
    spec.mask(n_antennas - 1, n_antennas - 1) = false;
  }

  // random targets at the scale of the model output keep the cost generic
  std::vector<CalibSample> samples;
  for (int b = 0; b < batch; ++b) {
    CalibSample s;
    s.config.bits.resize(n_meta);
    for (auto& bit : s.config.bits) bit = rng.bernoulli() ? 1 : 0;
    const MatrixXc h = scattering_block(params, s.config, sel.roles()).entries;
    MatrixXc y = kind == CostKind::masked ? h : MatrixXc(h * pilots.x);
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index r = 0; r < y.rows(); ++r)
        y(r, c) += 0.5 * std::abs(y(r, c)) * rng.complex_normal() + 0.05 * rng.complex_normal();
    if (kind == CostKind::phaseless) y = y.cwiseAbs().cast<Complex>();
    s.target = std::move(y);
    samples.push_back(std::move(s));
  }

  const double eps = 1e-12;
  Eigen::VectorXd analytic;
  model_gradient(params, samples, sel, pilots, spec, eps, analytic);

  // freeze the alignment phase at the base point for the differenced cost
  std::vector<MatrixXc> y0, yh0;
  for (const auto& s : samples) {
    y0.push_back(s.target);
    const MatrixXc h = scattering_block(params, s.config, sel.roles()).entries;
    yh0.push_back(kind == CostKind::masked ? h : MatrixXc(h * pilots.x));
  }
  const double theta0 = evaluate_cost(y0, yh0, spec, eps).theta;

  Eigen::VectorXd base = pack_params(params);
  Eigen::VectorXd fd(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Eigen::VectorXd plus = base, minus = base;
    plus(i) += step;
    minus(i) -= step;
    const double cp = model_cost(unpack_params(plus, n_antennas, n_meta), samples, sel, pilots,
                                 spec, eps, theta0);
    const double cm = model_cost(unpack_params(minus, n_antennas, n_meta), samples, sel, pilots,
                                 spec, eps, theta0);
    fd(i) = (cp - cm) / (2.0 * step);
  }

  const double scale = analytic.cwiseAbs().maxCoeff();
  return (fd - analytic).cwiseAbs().maxCoeff() / scale;
}

}  // namespace metascat

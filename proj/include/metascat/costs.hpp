#pragma once

#include <span>
#include <vector>

#include "metascat/types.hpp"

namespace metascat {

enum class CostKind { coherent, phaseless, masked };

const char* cost_kind_name(CostKind kind);
CostKind cost_kind_from_name(const std::string& name);

// Cost selector. For the masked kind, `mask` marks the scattering
// coefficients included in calibration (true = included).
struct CostSpec {
  CostKind kind = CostKind::coherent;
  MaskArray mask;

  static CostSpec coherent() { return CostSpec{CostKind::coherent, {}}; }
  static CostSpec phaseless() { return CostSpec{CostKind::phaseless, {}}; }
  static CostSpec masked(MaskArray m) { return CostSpec{CostKind::masked, std::move(m)}; }

  void validate(Eigen::Index rows, Eigen::Index cols) const;
};

// Least-squares-optimal alignment phase: arg(sum conj(yhat) y) over the
// included entries, 0 when the sum vanishes. Minimizes the quadratic
// alignment error; it is substituted for the L1 minimizer inside the cost
// and held constant in the backward pass.
double optimal_global_phase(const MatrixXc& y, const MatrixXc& yhat,
                            const MaskArray* mask = nullptr);

struct BatchCost {
  double value = 0.0;
  double theta = 0.0;
};

// Mean smoothed-modulus cost over every included entry of a batch:
//   coherent:  mean |y - e^{i theta} yhat|_eps, theta the alignment phase
//   phaseless: mean ||y| - |yhat|_eps|_eps  (targets may be magnitudes)
//   masked:    coherent restricted to mask-included entries
// with |z|_eps = sqrt(|z|^2 + eps^2). The mean runs over pilots, batch
// configurations and included coefficients together.
BatchCost evaluate_cost(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                        const CostSpec& spec, double eps);

// Same cost with the alignment phase pinned; used by the finite-difference
// oracle, which must difference the phase-frozen objective the gradient is
// exact for.
BatchCost evaluate_cost_fixed_phase(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                                    const CostSpec& spec, double eps, double theta);

// d(cost)/d(yhat) as gradient matrices g = dC/dRe + i dC/dIm, with the
// alignment phase held at `theta`.
std::vector<MatrixXc> cost_gradient(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                                    const CostSpec& spec, double eps, double theta);

// Single-matrix convenience form.
double cost(const MatrixXc& y, const MatrixXc& yhat, const CostSpec& spec, double eps = 1e-12);

}  // namespace metascat

#pragma once

#include <span>
#include <string>
#include <vector>

#include "metascat/calibrate.hpp"
#include "metascat/types.hpp"

namespace metascat {

// Accuracy in dB: variance of the true series over the variance of the
// residual after aligning the prediction by a single global phase
// theta = arg(sum conj(pred) true) of the mean-centered series. Capped at
// +120 dB when the residual variance underflows.
double zeta_db(std::span<const Complex> true_series, std::span<const Complex> pred_series);

// As zeta_db but with one alignment phase shared by all coefficients of a
// matrix series; sensitive to wrong relative phases between coefficients.
double zeta_joint_db(std::span<const MatrixXc> true_series, std::span<const MatrixXc> pred_series);

struct ZetaReport {
  std::vector<std::string> labels;      // coefficient labels, e.g. "S31"
  std::vector<double> zeta;             // dB, per coefficient
  std::vector<double> alignment_theta;  // global phase used per coefficient
  double zeta_siso = 0.0;               // dB average over transmission coefficients
  int n_eval = 0;
};

// Per-coefficient zeta over an evaluation series of coefficient matrices
// (true vs predicted, same selection). zeta_siso averages the dB values of
// the transmission coefficients (distinct tx/rx cavity ports).
ZetaReport zeta_report(const PortSelection& sel, std::span<const MatrixXc> truth,
                       std::span<const MatrixXc> pred);

// Mutual-information lower bound log2(1 + 1/(1/SNR + 1/zeta)), bits; both
// arguments linear (not dB), +infinity allowed.
double mi_lower_bound(double snr_linear, double zeta_linear);

// Constant additive correction for coefficients excluded from calibration,
// fixed by one reference measurement: delta = measured - predicted at the
// reference configuration on the excluded entries.
struct OffsetCorrection {
  MatrixXc delta;
  MaskArray corrected;  // true where the correction applies

  MatrixXc apply(const MatrixXc& pred) const {
    MatrixXc out = pred;
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      for (Eigen::Index r = 0; r < out.rows(); ++r)
        if (corrected(r, c)) out(r, c) += delta(r, c);
    return out;
  }
};

// `included_mask` is the calibration mask (true = included); the correction
// targets its complement.
OffsetCorrection offset_correct(const CalibratedModel& model, const MetaConfig& reference_config,
                                const MatrixXc& reference_measurement,
                                const MaskArray& included_mask);

}  // namespace metascat

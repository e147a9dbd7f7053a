#include "metascat/costs.hpp"

#include <cmath>

namespace metascat {

const char* cost_kind_name(CostKind kind) {
  switch (kind) {
    case CostKind::coherent: return "coherent";
    case CostKind::phaseless: return "phaseless";
    case CostKind::masked: return "masked";
  }
  return "?";
}

CostKind cost_kind_from_name(const std::string& name) {
  if (name == "coherent") return CostKind::coherent;
  if (name == "phaseless") return CostKind::phaseless;
  if (name == "masked") return CostKind::masked;
  throw std::invalid_argument("unknown cost kind: " + name);
}

void CostSpec::validate(Eigen::Index rows, Eigen::Index cols) const {
  if (kind != CostKind::masked) return;
  if (mask.rows() != rows || mask.cols() != cols)
    throw std::invalid_argument("CostSpec: mask shape does not match coefficients");
  if (!mask.any()) throw std::invalid_argument("CostSpec: mask excludes every coefficient");
}

namespace {

bool included(const CostSpec& spec, Eigen::Index r, Eigen::Index c) {
  return spec.kind != CostKind::masked || spec.mask(r, c);
}

double batch_phase(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                   const CostSpec& spec) {
  Complex acc(0.0, 0.0);
  for (std::size_t b = 0; b < y.size(); ++b)
    for (Eigen::Index c = 0; c < y[b].cols(); ++c)
      for (Eigen::Index r = 0; r < y[b].rows(); ++r)
        if (included(spec, r, c)) acc += std::conj(yhat[b](r, c)) * y[b](r, c);
  return acc == Complex(0.0, 0.0) ? 0.0 : std::arg(acc);
}

void check_shapes(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                  const CostSpec& spec) {
  if (y.size() != yhat.size() || y.empty())
    throw std::invalid_argument("cost: batch sizes differ or batch is empty");
  for (std::size_t b = 0; b < y.size(); ++b)
    if (y[b].rows() != yhat[b].rows() || y[b].cols() != yhat[b].cols())
      throw std::invalid_argument("cost: shapes of Y and Yhat differ");
  spec.validate(y[0].rows(), y[0].cols());
}

}  // namespace

double optimal_global_phase(const MatrixXc& y, const MatrixXc& yhat, const MaskArray* mask) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols())
    throw std::invalid_argument("optimal_global_phase: shape mismatch");
  CostSpec spec = mask ? CostSpec::masked(*mask) : CostSpec::coherent();
  return batch_phase(std::span<const MatrixXc>(&y, 1), std::span<const MatrixXc>(&yhat, 1), spec);
}

BatchCost evaluate_cost_fixed_phase(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                                    const CostSpec& spec, double eps, double theta) {
  check_shapes(y, yhat, spec);
  const Complex rot = std::polar(1.0, theta);
  double sum = 0.0;
  long count = 0;
  for (std::size_t b = 0; b < y.size(); ++b) {
    for (Eigen::Index c = 0; c < y[b].cols(); ++c) {
      for (Eigen::Index r = 0; r < y[b].rows(); ++r) {
        if (!included(spec, r, c)) continue;
        ++count;
        if (spec.kind == CostKind::phaseless) {
          const double mh = std::sqrt(std::norm(yhat[b](r, c)) + eps * eps);
          const double d = std::abs(y[b](r, c)) - mh;
          sum += std::sqrt(d * d + eps * eps);
        } else {
          sum += std::sqrt(std::norm(y[b](r, c) - rot * yhat[b](r, c)) + eps * eps);
        }
      }
    }
  }
  return BatchCost{sum / static_cast<double>(count), theta};
}

BatchCost evaluate_cost(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                        const CostSpec& spec, double eps) {
  check_shapes(y, yhat, spec);
  const double theta = spec.kind == CostKind::phaseless ? 0.0 : batch_phase(y, yhat, spec);
  return evaluate_cost_fixed_phase(y, yhat, spec, eps, theta);
}

std::vector<MatrixXc> cost_gradient(std::span<const MatrixXc> y, std::span<const MatrixXc> yhat,
                                    const CostSpec& spec, double eps, double theta) {
  check_shapes(y, yhat, spec);
  long count = 0;
  for (std::size_t b = 0; b < y.size(); ++b)
    for (Eigen::Index c = 0; c < y[b].cols(); ++c)
      for (Eigen::Index r = 0; r < y[b].rows(); ++r)
        if (included(spec, r, c)) ++count;

  const double inv_count = 1.0 / static_cast<double>(count);
  const Complex rot = std::polar(1.0, theta);
  std::vector<MatrixXc> grads(y.size());
  for (std::size_t b = 0; b < y.size(); ++b) {
    grads[b] = MatrixXc::Zero(y[b].rows(), y[b].cols());
    for (Eigen::Index c = 0; c < y[b].cols(); ++c) {
      for (Eigen::Index r = 0; r < y[b].rows(); ++r) {
        if (!included(spec, r, c)) continue;
        if (spec.kind == CostKind::phaseless) {
          const Complex yh = yhat[b](r, c);
          const double mh = std::sqrt(std::norm(yh) + eps * eps);
          const double d = std::abs(y[b](r, c)) - mh;
          const double o = std::sqrt(d * d + eps * eps);
          grads[b](r, c) = -inv_count * (d / o) * (yh / mh);
        } else {
          const Complex res = y[b](r, c) - rot * yhat[b](r, c);
          const double m = std::sqrt(std::norm(res) + eps * eps);
          grads[b](r, c) = -inv_count * std::conj(rot) * res / m;
        }
      }
    }
  }
  return grads;
}

double cost(const MatrixXc& y, const MatrixXc& yhat, const CostSpec& spec, double eps) {
  return evaluate_cost(std::span<const MatrixXc>(&y, 1), std::span<const MatrixXc>(&yhat, 1), spec,
                       eps)
      .value;
}

}  // namespace metascat

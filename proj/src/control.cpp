#include "metascat/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metascat {

VectorXc focus_wavefront(const VectorXc& t) {
  const double n = t.norm();
  if (n == 0.0) throw std::invalid_argument("focus_wavefront: zero transmission vector");
  return t.conjugate() / n;
}

double deposited_energy(const VectorXc& t, const VectorXc& psi) {
  if (t.size() != psi.size()) throw std::invalid_argument("deposited_energy: size mismatch");
  const Complex field = (t.transpose() * psi)(0, 0);
  return std::norm(field);
}

AbsorbResult absorb_wavefront(const MatrixXc& s_full) {
  if (s_full.rows() != s_full.cols())
    throw std::invalid_argument("absorb_wavefront: scattering matrix must be square");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(s_full.adjoint() * s_full);
  AbsorbResult res;
  res.wavefront = es.eigenvectors().col(0);  // eigenvalues ascending
  res.reflected_power = es.eigenvalues()(0);
  return res;
}

double reflected_power(const MatrixXc& s, const VectorXc& psi) {
  return (s * psi).squaredNorm();
}

VectorXc transmission_vector(const MatrixXc& s_full, int port) {
  if (port < 0 || port >= s_full.rows())
    throw std::invalid_argument("transmission_vector: port out of range");
  VectorXc t(s_full.cols() - 1);
  int k = 0;
  for (Eigen::Index j = 0; j < s_full.cols(); ++j)
    if (j != port) t(k++) = s_full(port, j);
  return t;
}

BestConfig select_best_config(const PredictFn& predict, std::span<const MetaConfig> pool,
                              ControlObjective objective, int focus_port) {
  if (pool.empty()) throw std::invalid_argument("select_best_config: empty pool");
  BestConfig best;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const MatrixXc s = predict(pool[i]);
    double value;
    if (objective == ControlObjective::focus) {
      value = transmission_vector(s, focus_port).squaredNorm();  // deposited by the optimal wavefront
      if (best.index < 0 || value > best.value) {
        best = {static_cast<int>(i), pool[i], value};
      }
    } else {
      value = absorb_wavefront(s).reflected_power;
      if (best.index < 0 || value < best.value) {
        best = {static_cast<int>(i), pool[i], value};
      }
    }
  }
  return best;
}

namespace {

// nearest-rank percentile of sorted data
double percentile(const std::vector<double>& sorted, double p) {
  const double pos = (static_cast<double>(sorted.size()) - 1.0) * p / 100.0;
  return sorted[static_cast<std::size_t>(std::llround(pos))];
}

}  // namespace

Constellation qpsk_select_values(std::span<const Complex> pool_values) {
  const std::size_t n = pool_values.size();
  if (n < 4) throw std::invalid_argument("qpsk_select: pool must contain at least 4 values");

  Complex mean(0, 0);
  for (const auto& v : pool_values) mean += v;
  mean /= static_cast<double>(n);
  std::vector<Complex> z(n);
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = pool_values[i] - mean;
    mags[i] = std::abs(z[i]);
  }
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());

  constexpr int n_radii = 16;
  constexpr int n_phases = 64;
  const Complex quarter(0.0, 1.0);  // e^{i pi/2}

  Constellation best;
  best.evm = std::numeric_limits<double>::infinity();
  std::array<int, 4> pick{};
  int best_phase_idx = 0;

  for (int ri = 0; ri < n_radii; ++ri) {
    const double rho = percentile(sorted, 50.0 + 45.0 * ri / (n_radii - 1));
    if (rho <= 0.0) continue;
    for (int pi_idx = 0; pi_idx < n_phases; ++pi_idx) {
      const double theta = 2.0 * M_PI * pi_idx / n_phases;
      Complex target = std::polar(rho, theta);
      double obj = 0.0;
      std::array<int, 4> used{-1, -1, -1, -1};
      for (int k = 0; k < 4; ++k) {
        double bd = std::numeric_limits<double>::infinity();
        int bi = -1;
        for (std::size_t i = 0; i < n; ++i) {
          if (static_cast<int>(i) == used[0] || static_cast<int>(i) == used[1] ||
              static_cast<int>(i) == used[2] || static_cast<int>(i) == used[3])
            continue;
          const double d = std::norm(z[i] - target);
          if (d < bd) {
            bd = d;
            bi = static_cast<int>(i);
          }
        }
        used[k] = bi;
        obj += bd;
        target *= quarter;
      }
      obj /= rho * rho;
      if (obj < best.evm) {
        best.evm = obj;
        best.radius = rho;
        best_phase_idx = pi_idx;
        pick = used;
      }
    }
  }

  // the four label rotations of a constellation are near-degenerate; anchor
  // the labeling on the largest-magnitude point (lowest pool index on ties)
  // so the result is canonical, in particular under pool negation
  int star = 0;
  for (int k = 1; k < 4; ++k) {
    if (mags[pick[k]] > mags[pick[star]] ||
        (mags[pick[k]] == mags[pick[star]] && pick[k] < pick[star]))
      star = k;
  }
  std::array<int, 4> rotated;
  for (int k = 0; k < 4; ++k) rotated[k] = pick[(k + star) % 4];
  best.theta = 2.0 * M_PI * ((best_phase_idx + star * n_phases / 4) % n_phases) / n_phases;

  best.evm = std::sqrt(best.evm);
  for (int k = 0; k < 4; ++k) {
    best.pool_indices[k] = rotated[k];
    best.points[k] = z[rotated[k]];
  }
  return best;
}

Constellation qpsk_select(const PredictFn& predict, std::span<const MetaConfig> pool, int tx_port,
                          int rx_port) {
  if (pool.size() < 4) throw std::invalid_argument("qpsk_select: pool must contain at least 4 configs");
  std::vector<Complex> values;
  values.reserve(pool.size());
  for (const auto& c : pool) values.push_back(predict(c)(rx_port, tx_port));
  Constellation con = qpsk_select_values(values);
  for (int k = 0; k < 4; ++k) con.configs[k] = pool[con.pool_indices[k]];
  return con;
}

ConstellationFit constellation_fit(const std::array<Complex, 4>& points) {
  // least-squares rho e^{i theta}: zeta* = sum_k w_k (-i)^k / 4
  Complex acc(0, 0);
  Complex basis(1, 0);
  const Complex minus_quarter(0.0, -1.0);
  for (int k = 0; k < 4; ++k) {
    acc += points[k] * basis;
    basis *= minus_quarter;
  }
  acc /= 4.0;

  ConstellationFit fit;
  fit.radius = std::abs(acc);
  fit.theta = std::arg(acc);
  if (fit.radius == 0.0) throw std::invalid_argument("constellation_fit: degenerate points");

  double obj = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double target_phase = fit.theta + k * M_PI_2;
    const Complex target = std::polar(fit.radius, target_phase);
    obj += std::norm(points[k] - target);
    double dphi = std::arg(points[k]) - target_phase;
    while (dphi > M_PI) dphi -= 2.0 * M_PI;
    while (dphi < -M_PI) dphi += 2.0 * M_PI;
    fit.max_phase_error = std::max(fit.max_phase_error, std::abs(dphi));
  }
  fit.evm = std::sqrt(obj / (fit.radius * fit.radius));
  return fit;
}

}  // namespace metascat

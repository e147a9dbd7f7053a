#pragma once

#include <array>
#include <functional>
#include <span>

#include "metascat/types.hpp"

namespace metascat {

// Phase conjugation: psi = conj(t)/||t||_2, the optimal unit wavefront for
// depositing energy at the port with transmission vector t.
VectorXc focus_wavefront(const VectorXc& t);

// |t^T psi|^2: energy deposited at the output port by a unit wavefront.
double deposited_energy(const VectorXc& t, const VectorXc& psi);

struct AbsorbResult {
  VectorXc wavefront;      // eigenvector of S^dag S for the smallest eigenvalue
  double reflected_power;  // the associated eigenvalue s_1
};

// Wavefront minimizing the reflected power R = ||S psi||^2 over unit inputs.
AbsorbResult absorb_wavefront(const MatrixXc& s_full);

double reflected_power(const MatrixXc& s, const VectorXc& psi);

// Transmission vector into `port` from the remaining antennas, read out of a
// full scattering matrix (row `port`, columns in ascending port order).
VectorXc transmission_vector(const MatrixXc& s_full, int port);

using PredictFn = std::function<MatrixXc(const MetaConfig&)>;

enum class ControlObjective { focus, absorb };

struct BestConfig {
  int index = -1;
  MetaConfig config;
  double value = 0.0;  // predicted deposited energy (focus) or s_1 (absorb)
};

// Evaluates the predictor on every pool configuration and picks the argmax
// deposited energy (focus) or argmin s_1 (absorb); ties resolve to the
// lowest pool index. `focus_port` is ignored for the absorb objective.
BestConfig select_best_config(const PredictFn& predict, std::span<const MetaConfig> pool,
                              ControlObjective objective, int focus_port = 0);

// QPSK constellation: four configurations whose centered coefficient values
// sit at quadrature phases of common amplitude. Labels follow Gray order
// '00','01','11','10' at theta + k*pi/2.
struct Constellation {
  std::array<int, 4> pool_indices{};
  std::array<MetaConfig, 4> configs;
  std::array<Complex, 4> points;  // centered values S_ji - <S_ji>
  double radius = 0.0;
  double theta = 0.0;
  double evm = 0.0;  // sqrt( sum_k |z_k - rho e^{i(theta + k pi/2)}|^2 / rho^2 )
};

// Deterministic search over 16 candidate radii (50th-95th percentile of the
// centered magnitudes) and 64 base phases; for each, the nearest unused pool
// point is assigned to each target greedily.
Constellation qpsk_select_values(std::span<const Complex> pool_values);

Constellation qpsk_select(const PredictFn& predict, std::span<const MetaConfig> pool, int tx_port,
                          int rx_port);

// Best-fit QPSK targets for four points (free rho, theta): used to score a
// selected constellation against ground-truth values.
struct ConstellationFit {
  double evm = 0.0;
  double max_phase_error = 0.0;  // radians, worst of the four points
  double theta = 0.0;
  double radius = 0.0;
};

ConstellationFit constellation_fit(const std::array<Complex, 4>& points);

}  // namespace metascat

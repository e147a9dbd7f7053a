#pragma once

#include <functional>
#include <optional>

#include "metascat/costs.hpp"
#include "metascat/dataset.hpp"
#include "metascat/model.hpp"

namespace metascat {

// Pilot excitations: one column per pilot, reused for every configuration.
struct PilotSet {
  MatrixXc x;  // n_tx x n_pilots
  std::uint64_t seed = 0;
  bool canonical = false;

  // N_T pilots with i.i.d. standard complex normal entries.
  static PilotSet gaussian(int n_tx, std::uint64_t seed);
  // Canonical basis pilots (identity); phaseless calibration cannot recover
  // relative phases from these.
  static PilotSet canonical_basis(int n_tx);
};

// Mapping from measured cavity ports to the model's "utilized antennas".
// cavity_ports lists which measured ports the model represents; tx/rx index
// into cavity_ports.
struct PortSelection {
  std::vector<int> cavity_ports;
  std::vector<int> tx;  // model indices
  std::vector<int> rx;

  PortRoles roles() const;
  static PortSelection full(int n_antennas);
  // Single transmission coefficient S(rx_port, tx_port): a two-antenna model.
  static PortSelection single(int tx_port, int rx_port);
  static PortSelection from_name(const std::string& name, int n_antennas);
  std::string name() const;

  // rx x tx sub-matrix of a full measured matrix.
  MatrixXc extract(const MatrixXc& full) const;
  Eigen::MatrixXd extract_abs(const Eigen::MatrixXd& full) const;
  MaskArray extract_mask(const MaskArray& full) const;
  // coefficient label like "S31" (1-based cavity ports) for reporting
  std::string coefficient_label(int r, int t) const;
};

struct TrainOptions {
  int batch_size = 0;           // 0: 1000 coherent/masked, 10000 phaseless
  double lr_init = 1e-2;
  double lr_decay = 0.5;        // halve on plateau
  int lr_plateau_iters = 2500;  // iterations without improvement before decay
  double lr_floor = 1e-4;
  int patience_iters = 7500;    // stop when no improvement this long
  int val_interval = 50;        // iterations between validation evaluations
  double train_fraction = 8.0 / 9.0;
  double init_std = 0.2;        // truncated normal, resampled beyond 2 std
  long max_iterations = 200000;
  std::uint64_t seed = 1;
  double eps = 1e-12;           // smoothed-modulus epsilon

  int effective_batch(CostKind kind) const {
    if (batch_size > 0) return batch_size;
    return kind == CostKind::phaseless ? 10000 : 1000;
  }
};

struct TraceRow {
  long iteration;
  double train_cost;
  double validation_cost;
  double learning_rate;
};

struct TrainingReport {
  long iterations = 0;
  double best_validation_cost = 0.0;
  std::vector<TraceRow> trace;
};

struct CalibratedModel {
  CompactModelParams params;
  PortSelection selection;
  PilotSet pilots;
  CostSpec cost;
  TrainingReport report;
  std::string train_provenance;  // hash of the dataset used for calibration

  PortRoles roles() const { return selection.roles(); }
  // Predicted rx x tx coefficient matrix for one configuration.
  MatrixXc predict(const MetaConfig& config) const;
};

// Flat real parameter vector: [Re/Im alpha_a, alpha_0, alpha_1, then the
// upper-triangle coupling entries row-major]; one entry pair per symmetric
// coupling parameter.
Eigen::VectorXd pack_params(const CompactModelParams& p);
CompactModelParams unpack_params(const Eigen::VectorXd& v, int n_antennas, int n_meta);

// A calibration sample: configuration plus the target signal matrix. For
// phaseless data the target carries magnitudes in the real part.
struct CalibSample {
  MetaConfig config;
  MatrixXc target;
};

// Targets for a cost kind: pilot projections Y = H X for coherent/phaseless
// (magnitudes for phaseless), raw coefficient matrices for masked.
std::vector<CalibSample> build_samples(const Dataset& data, const PortSelection& sel,
                                       const CostSpec& cost, const PilotSet& pilots);

// Batch cost and its gradient with respect to every real learnable,
// differentiated through the staged inversion via the analytic adjoint
// d(W^{-1}) = -W^{-1} dW W^{-1}.
double model_gradient(const CompactModelParams& params, std::span<const CalibSample> batch,
                      const PortSelection& sel, const PilotSet& pilots, const CostSpec& cost,
                      double eps, Eigen::VectorXd& grad_out);

// Batch cost only (no gradient); theta optionally pinned for the
// finite-difference oracle.
double model_cost(const CompactModelParams& params, std::span<const CalibSample> batch,
                  const PortSelection& sel, const PilotSet& pilots, const CostSpec& cost,
                  double eps, std::optional<double> fixed_theta = {});

using ProgressFn = std::function<void(const TraceRow&)>;

CalibratedModel calibrate(const Dataset& data, const PortSelection& sel, const CostSpec& cost,
                          const PilotSet& pilots, const TrainOptions& opts,
                          const ProgressFn& progress = nullptr);

}  // namespace metascat

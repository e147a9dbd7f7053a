#pragma once

#include "metascat/baselines.hpp"
#include "metascat/cavity.hpp"
#include "metascat/metrics.hpp"

namespace metascat {

enum class ModelKind { physical, linear, mlp };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct SweepCell {
  int n_data = 0;
  ModelKind model = ModelKind::physical;
  std::string coeff_set;
  double zeta_siso_db = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  // CSV schema: n_data,model,coeff_set,zeta_siso_db,seed,seconds
  std::string to_csv(bool with_seconds = true) const;
};

struct SweepOptions {
  TrainOptions train;
  MlpOptions mlp;
  int n_eval = 200;
  std::uint64_t pilot_seed = 11;
};

// Trains each model kind at each N_data on nested prefixes of one master
// dataset and scores zeta_SISO on a shared held-out evaluation set. Failed
// cells are marked rather than aborting the sweep.
SweepResult ndata_sweep(const GroundTruth& truth, const std::vector<int>& grid,
                        const std::vector<ModelKind>& models,
                        const std::vector<std::string>& coeff_sets, std::uint64_t seed,
                        const SweepOptions& opts);

}  // namespace metascat

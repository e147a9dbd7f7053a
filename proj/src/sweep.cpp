#include "metascat/sweep.hpp"

#include <chrono>
#include <cmath>

#include "metascat/rng.hpp"
#include "metascat/util.hpp"

namespace metascat {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::physical: return "physical";
    case ModelKind::linear: return "linear";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "physical") return ModelKind::physical;
  if (name == "linear") return ModelKind::linear;
  if (name == "mlp") return ModelKind::mlp;
  throw std::invalid_argument("unknown model kind: " + name);
}

std::string SweepResult::to_csv(bool with_seconds) const {
  std::string out = with_seconds ? "n_data,model,coeff_set,zeta_siso_db,seed,seconds\n"
                                 : "n_data,model,coeff_set,zeta_siso_db,seed\n";
  for (const auto& c : cells) {
    out += std::to_string(c.n_data);
    out += ',';
    out += model_kind_name(c.model);
    out += ',';
    out += c.coeff_set;
    out += ',';
    out += c.failed ? "nan" : format_double(c.zeta_siso_db);
    out += ',';
    out += std::to_string(c.seed);
    if (with_seconds) {
      out += ',';
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", c.seconds);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SweepResult ndata_sweep(const GroundTruth& truth, const std::vector<int>& grid,
                        const std::vector<ModelKind>& models,
                        const std::vector<std::string>& coeff_sets, std::uint64_t seed,
                        const SweepOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("ndata_sweep: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw std::invalid_argument("ndata_sweep: grid must be ascending");

  const int n_max = grid.back();
  const Dataset master = generate_dataset(truth, n_max, seed);

  // held-out evaluation set, disjoint from every training prefix
  std::vector<MetaConfig> train_configs;
  train_configs.reserve(master.records.size());
  for (const auto& r : master.records) train_configs.push_back(r.config);
  const std::vector<MetaConfig> eval_configs =
      random_configs_excluding(truth.n_meta(), opts.n_eval, derive_seed(seed, 0x65766131),
                               train_configs);
  std::vector<MatrixXc> eval_truth;
  eval_truth.reserve(eval_configs.size());
  for (const auto& c : eval_configs) eval_truth.push_back(truth.measure(c).entries);

  SweepResult result;
  for (const auto& set_name : coeff_sets) {
    const PortSelection sel = PortSelection::from_name(set_name, truth.n_antennas());
    std::vector<MatrixXc> truth_sub;
    truth_sub.reserve(eval_truth.size());
    for (const auto& m : eval_truth) truth_sub.push_back(sel.extract(m));

    for (ModelKind kind : models) {
      for (int n_data : grid) {
        SweepCell cell;
        cell.n_data = n_data;
        cell.model = kind;
        cell.coeff_set = set_name;
        cell.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const Dataset prefix = master.prefix(n_data);
          std::vector<MatrixXc> pred;
          pred.reserve(eval_configs.size());
          switch (kind) {
            case ModelKind::physical: {
              TrainOptions train = opts.train;
              train.seed = derive_seed(seed, 0x747261, n_data);
              const PilotSet pilots =
                  PilotSet::gaussian(static_cast<int>(sel.tx.size()), opts.pilot_seed);
              const CalibratedModel model =
                  calibrate(prefix, sel, CostSpec::coherent(), pilots, train);
              for (const auto& c : eval_configs) pred.push_back(model.predict(c));
              break;
            }
            case ModelKind::linear: {
              const LinearModel model = fit_linear(prefix, sel);
              for (const auto& c : eval_configs) pred.push_back(model.predict(c));
              break;
            }
            case ModelKind::mlp: {
              MlpOptions mo = opts.mlp;
              mo.seed = derive_seed(seed, 0x6d6c32, n_data);
              const MLPModel model = fit_mlp(prefix, sel, mo);
              for (const auto& c : eval_configs) pred.push_back(model.predict(c));
              break;
            }
          }
          cell.zeta_siso_db = zeta_report(sel, truth_sub, pred).zeta_siso;
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        cell.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

}  // namespace metascat

#pragma once

#include <map>
#include <optional>
#include <string>

#include "metascat/baselines.hpp"
#include "metascat/calibrate.hpp"
#include "metascat/cavity.hpp"
#include "metascat/dataset.hpp"

namespace metascat {

inline constexpr const char* kVersionString = "0.1.0";

// JSON Lines: one header object, then one record object per line. Doubles
// are written with 17 significant digits so round trips are value-exact.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// Tagged model checkpoint (physical | linear | mlp).
struct Checkpoint {
  enum class Kind { physical, linear, mlp };
  Kind kind = Kind::physical;
  std::optional<CalibratedModel> physical;
  std::optional<LinearModel> linear;
  std::optional<MLPModel> mlp;

  static Checkpoint from(CalibratedModel m);
  static Checkpoint from(LinearModel m);
  static Checkpoint from(MLPModel m);

  const PortSelection& selection() const;
  MatrixXc predict(const MetaConfig& config) const;
  std::string train_provenance() const;
  const char* kind_name() const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void save_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

// Run manifest written beside every CLI output: inputs, seeds and versions,
// no timestamps, so identical runs produce identical bytes.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::string config_hash;
  std::map<std::string, std::string> inputs;  // name -> provenance/hash
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
};

void write_manifest(const Manifest& m, const std::string& path);

std::string mask_to_rows(const MaskArray& mask);        // rows joined with ','
MaskArray mask_from_rows(const std::string& rows, int n_cols);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace metascat

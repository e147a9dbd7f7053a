#pragma once

#include <optional>
#include <vector>

#include "metascat/types.hpp"

namespace metascat {

struct DatasetHeader {
  int version = 1;
  int n_antennas = 0;
  int n_meta = 0;
  PortRoles roles;
  double frequency_hz = 0.0;
  bool phaseless = false;
  std::optional<MaskArray> mask;  // true = included in calibration data
  std::string provenance;         // generator hash (ground truth + seed)
  std::uint64_t seed = 0;
};

// One (configuration, measurement) pair. Phaseless records carry only the
// coefficient magnitudes; asking them for complex values is an error.
struct DatasetRecord {
  MetaConfig config;
  MatrixXc values;             // complex measurement; empty when phaseless
  Eigen::MatrixXd magnitudes;  // phaseless measurement; empty otherwise

  bool phaseless() const { return values.size() == 0; }

  const MatrixXc& complex_values() const {
    if (phaseless()) throw std::logic_error("dataset record is phaseless: no phase information");
    return values;
  }

  Eigen::MatrixXd abs() const { return phaseless() ? magnitudes : Eigen::MatrixXd(values.cwiseAbs()); }
};

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetRecord> records;

  int size() const { return static_cast<int>(records.size()); }

  // First n records; the nested prefixes used by the data-scaling sweep.
  Dataset prefix(int n) const {
    Dataset d;
    d.header = header;
    d.records.assign(records.begin(), records.begin() + std::min<std::size_t>(n, records.size()));
    return d;
  }
};

}  // namespace metascat

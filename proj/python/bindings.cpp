#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metascat/baselines.hpp"
#include "metascat/calibrate.hpp"
#include "metascat/cavity.hpp"
#include "metascat/cli.hpp"
#include "metascat/control.hpp"
#include "metascat/gradcheck.hpp"
#include "metascat/io.hpp"
#include "metascat/metrics.hpp"
#include "metascat/sweep.hpp"

namespace py = pybind11;
using namespace metascat;

namespace {

MetaConfig config_from_object(const py::object& obj) {
  if (py::isinstance<MetaConfig>(obj)) return obj.cast<MetaConfig>();
  if (py::isinstance<py::str>(obj)) return MetaConfig::from_string(obj.cast<std::string>());
  return MetaConfig(obj.cast<std::vector<std::uint8_t>>());
}

MaskArray mask_from_bool_array(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& m) {
  return m.array();
}

}  // namespace

PYBIND11_MODULE(_metascat, m) {
  m.doc() = "Compact interaction-matrix models of metasurface-programmable scattering systems";

  py::class_<MetaConfig>(m, "MetaConfig")
      .def(py::init([](const py::object& obj) { return config_from_object(obj); }))
      .def_static("from_string", &MetaConfig::from_string)
      .def("__str__", &MetaConfig::to_string)
      .def("__len__", &MetaConfig::size)
      .def("__eq__", [](const MetaConfig& a, const MetaConfig& b) { return a == b; })
      .def_readwrite("bits", &MetaConfig::bits);

  py::class_<PortRoles>(m, "PortRoles")
      .def(py::init<>())
      .def_static("full", &PortRoles::full)
      .def_readwrite("n_antennas", &PortRoles::n_antennas)
      .def_readwrite("tx_ports", &PortRoles::tx_ports)
      .def_readwrite("rx_ports", &PortRoles::rx_ports);

  py::class_<CompactModelParams>(m, "CompactModelParams")
      .def(py::init<int, int>(), py::arg("n_antennas"), py::arg("n_meta"))
      .def_readwrite("alpha_a", &CompactModelParams::alpha_a)
      .def_readwrite("alpha_0", &CompactModelParams::alpha_0)
      .def_readwrite("alpha_1", &CompactModelParams::alpha_1)
      .def_property_readonly("n_antennas", [](const CompactModelParams& p) { return p.n_antennas; })
      .def_property_readonly("n_meta", [](const CompactModelParams& p) { return p.n_meta; })
      .def("coupling_matrix", &CompactModelParams::coupling_matrix)
      .def("set_coupling", [](CompactModelParams& p, int i, int j,
                              Complex v) { p.coupling_at(i, j) = v; })
      .def("parameter_count", &CompactModelParams::parameter_count);

  py::class_<ScatteringMatrix>(m, "ScatteringMatrix")
      .def_readonly("entries", &ScatteringMatrix::entries)
      .def_readonly("frequency_hz", &ScatteringMatrix::frequency_hz);

  m.def(
      "assemble_interaction_matrix",
      [](const CompactModelParams& p, const py::object& c) {
        return assemble_interaction_matrix(p, config_from_object(c));
      },
      py::arg("params"), py::arg("config"));
  m.def(
      "scattering_block",
      [](const CompactModelParams& p, const py::object& c, const PortRoles& r) {
        return scattering_block(p, config_from_object(c), r).entries;
      },
      py::arg("params"), py::arg("config"), py::arg("roles"),
      "rx x tx block of the inverted interaction matrix (staged elimination)");
  m.def("apply_pilots", [](const MatrixXc& h, const MatrixXc& x) { return MatrixXc(h * x); });

  m.def("sample_compact_params", &sample_compact_params, py::arg("n_antennas"), py::arg("n_meta"),
        py::arg("seed"));

  py::class_<CavitySpec>(m, "CavitySpec")
      .def(py::init<>())
      .def_readwrite("n_antennas", &CavitySpec::n_antennas)
      .def_readwrite("n_meta", &CavitySpec::n_meta)
      .def_readwrite("n_env", &CavitySpec::n_env)
      .def_readwrite("frequency_hz", &CavitySpec::frequency_hz)
      .def_readwrite("min_separation_m", &CavitySpec::min_separation_m)
      .def_readwrite("seed", &CavitySpec::seed);

  m.def("greens_coupling", &greens_coupling);
  m.def("lorentzian_polarizability", &lorentzian_polarizability);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_static("dipole", &GroundTruth::dipole)
      .def_static("hidden_compact", &GroundTruth::hidden_compact, py::arg("params"),
                  py::arg("frequency_hz") = 0.0, py::arg("seed") = 0)
      .def_property_readonly("n_antennas", &GroundTruth::n_antennas)
      .def_property_readonly("n_meta", &GroundTruth::n_meta)
      .def(
          "measure",
          [](const GroundTruth& t, const py::object& c, std::optional<double> snr,
             std::uint64_t noise_seed) {
            return t.measure(config_from_object(c), snr, noise_seed).entries;
          },
          py::arg("config"), py::arg("noise_snr_db") = std::nullopt, py::arg("noise_seed") = 0);

  py::class_<DatasetRecord>(m, "DatasetRecord")
      .def_readonly("config", &DatasetRecord::config)
      .def("phaseless", &DatasetRecord::phaseless)
      .def("complex_values", [](const DatasetRecord& r) { return r.complex_values(); })
      .def("abs", &DatasetRecord::abs);

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def("__getitem__",
           [](const Dataset& d, int i) {
             if (i < 0 || i >= d.size()) throw py::index_error();
             return d.records[i];
           })
      .def("prefix", &Dataset::prefix)
      .def_property_readonly("phaseless", [](const Dataset& d) { return d.header.phaseless; })
      .def_property_readonly("provenance", [](const Dataset& d) { return d.header.provenance; });

  m.def(
      "generate_dataset",
      [](const GroundTruth& truth, int n_data, std::uint64_t seed, bool phaseless,
         std::optional<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> mask,
         std::optional<double> snr) {
        std::optional<MaskArray> m2;
        if (mask) m2 = mask_from_bool_array(*mask);
        return generate_dataset(truth, n_data, seed, phaseless, m2, snr);
      },
      py::arg("truth"), py::arg("n_data"), py::arg("seed"), py::arg("phaseless") = false,
      py::arg("mask") = std::nullopt, py::arg("noise_snr_db") = std::nullopt);
  m.def("save_dataset", &save_dataset);
  m.def("load_dataset", &load_dataset);

  py::class_<PortSelection>(m, "PortSelection")
      .def_static("full", &PortSelection::full)
      .def_static("single", &PortSelection::single, py::arg("tx_port"), py::arg("rx_port"))
      .def_static("from_name", &PortSelection::from_name, py::arg("name"), py::arg("n_antennas"))
      .def("name", &PortSelection::name)
      .def("extract", &PortSelection::extract);

  py::class_<PilotSet>(m, "PilotSet")
      .def_static("gaussian", &PilotSet::gaussian, py::arg("n_tx"), py::arg("seed"))
      .def_static("canonical_basis", &PilotSet::canonical_basis, py::arg("n_tx"))
      .def_readonly("x", &PilotSet::x);

  py::enum_<CostKind>(m, "CostKind")
      .value("coherent", CostKind::coherent)
      .value("phaseless", CostKind::phaseless)
      .value("masked", CostKind::masked);

  py::class_<CostSpec>(m, "CostSpec")
      .def_static("coherent", &CostSpec::coherent)
      .def_static("phaseless", &CostSpec::phaseless)
      .def_static("masked",
                  [](const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask) {
                    return CostSpec::masked(mask_from_bool_array(mask));
                  })
      .def_readonly("kind", &CostSpec::kind);

  py::class_<TrainOptions>(m, "TrainOptions")
      .def(py::init<>())
      .def_readwrite("batch_size", &TrainOptions::batch_size)
      .def_readwrite("lr_init", &TrainOptions::lr_init)
      .def_readwrite("lr_decay", &TrainOptions::lr_decay)
      .def_readwrite("lr_plateau_iters", &TrainOptions::lr_plateau_iters)
      .def_readwrite("lr_floor", &TrainOptions::lr_floor)
      .def_readwrite("patience_iters", &TrainOptions::patience_iters)
      .def_readwrite("val_interval", &TrainOptions::val_interval)
      .def_readwrite("train_fraction", &TrainOptions::train_fraction)
      .def_readwrite("init_std", &TrainOptions::init_std)
      .def_readwrite("max_iterations", &TrainOptions::max_iterations)
      .def_readwrite("seed", &TrainOptions::seed);

  py::class_<TrainingReport>(m, "TrainingReport")
      .def_readonly("iterations", &TrainingReport::iterations)
      .def_readonly("best_validation_cost", &TrainingReport::best_validation_cost);

  py::class_<CalibratedModel>(m, "CalibratedModel")
      .def_readonly("params", &CalibratedModel::params)
      .def_readonly("report", &CalibratedModel::report)
      .def("predict", [](const CalibratedModel& mdl, const py::object& c) {
        return mdl.predict(config_from_object(c));
      });

  m.def("calibrate", &calibrate, py::arg("dataset"), py::arg("selection"), py::arg("cost"),
        py::arg("pilots"), py::arg("options"), py::arg("progress") = nullptr,
        "Fit the compact physical model to a dataset with Adam and analytic adjoints");

  py::class_<LinearModel>(m, "LinearModel").def("predict", [](const LinearModel& mdl, const py::object& c) {
    return mdl.predict(config_from_object(c));
  });
  py::class_<MLPModel>(m, "MLPModel")
      .def("parameter_count", &MLPModel::parameter_count)
      .def("predict", [](const MLPModel& mdl, const py::object& c) {
        return mdl.predict(config_from_object(c));
      });
  py::class_<MlpOptions>(m, "MlpOptions")
      .def(py::init<>())
      .def_readwrite("max_epochs", &MlpOptions::max_epochs)
      .def_readwrite("seed", &MlpOptions::seed);
  m.def("fit_linear", &fit_linear);
  m.def("fit_mlp", &fit_mlp, py::arg("dataset"), py::arg("selection"),
        py::arg("options") = MlpOptions{});

  m.def("zeta_db", [](const std::vector<Complex>& t, const std::vector<Complex>& p) {
    return zeta_db(t, p);
  });
  m.def("zeta_joint_db",
        [](const std::vector<MatrixXc>& t, const std::vector<MatrixXc>& p) {
          return zeta_joint_db(t, p);
        });
  m.def("mi_lower_bound", &mi_lower_bound, py::arg("snr_linear"), py::arg("zeta_linear"));

  m.def("focus_wavefront", &focus_wavefront);
  m.def("deposited_energy", &deposited_energy);
  m.def("absorb_wavefront", [](const MatrixXc& s) {
    const AbsorbResult r = absorb_wavefront(s);
    return py::make_tuple(r.wavefront, r.reflected_power);
  });
  m.def("reflected_power", &reflected_power);
  m.def("qpsk_select_values", [](const std::vector<Complex>& values) {
    const Constellation c = qpsk_select_values(values);
    py::dict out;
    out["pool_indices"] = c.pool_indices;
    out["points"] = c.points;
    out["radius"] = c.radius;
    out["theta"] = c.theta;
    out["evm"] = c.evm;
    return out;
  });

  m.def("finite_difference_check", &finite_difference_check, py::arg("seed"), py::arg("kind"),
        py::arg("n_antennas") = 2, py::arg("n_meta") = 3, py::arg("batch") = 4,
        py::arg("step") = 1e-6);

  m.def("run_cli", &run_cli, "Invoke the metascat command line in-process");
}

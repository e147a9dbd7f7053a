#include "metascat/cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "metascat/control.hpp"
#include "metascat/gradcheck.hpp"
#include "metascat/io.hpp"
#include "metascat/metrics.hpp"
#include "metascat/rng.hpp"
#include "metascat/sweep.hpp"
#include "metascat/tomlmini.hpp"
#include "metascat/util.hpp"

namespace metascat {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stoi(p));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stod(p));
  return out;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  return (fs::path(out_dir) / name).string();
}

void prepare_out(const std::string& out_dir) {
  if (out_dir.empty()) throw std::runtime_error("--out is required");
  fs::create_directories(out_dir);
}

void emit_manifest(const std::string& out_dir, Manifest m) {
  for (auto& o : m.outputs) o = fs::path(o).filename().string();
  // the output location is not part of the run's identity
  std::vector<std::string> args;
  for (std::size_t i = 0; i < m.args.size(); ++i) {
    if (m.args[i] == "--out") {
      ++i;
      continue;
    }
    args.push_back(m.args[i]);
  }
  m.args = std::move(args);
  write_manifest(m, out_path(out_dir, "manifest.json"));
}

CavitySpec cavity_from_config(const TomlConfig& cfg) {
  CavitySpec s;
  s.n_antennas = static_cast<int>(cfg.get_int("cavity", "n_antennas", s.n_antennas));
  s.n_meta = static_cast<int>(cfg.get_int("cavity", "n_meta", s.n_meta));
  s.n_env = static_cast<int>(cfg.get_int("cavity", "n_env", s.n_env));
  const auto box = cfg.get_number_array("cavity", "box");
  if (box.size() == 3) s.box = Eigen::Vector3d(box[0], box[1], box[2]);
  s.frequency_hz = cfg.get_number("cavity", "frequency_hz", s.frequency_hz);
  s.f_res_0_hz = cfg.get_number("cavity", "f_res_0_hz", s.f_res_0_hz);
  s.f_res_1_hz = cfg.get_number("cavity", "f_res_1_hz", s.f_res_1_hz);
  s.gamma_hz = cfg.get_number("cavity", "gamma_hz", s.gamma_hz);
  s.chi = cfg.get_number("cavity", "chi", s.chi);
  s.env_re_mean = cfg.get_number("cavity", "env_re_mean", s.env_re_mean);
  s.env_re_spread = cfg.get_number("cavity", "env_re_spread", s.env_re_spread);
  s.env_loss_mean = cfg.get_number("cavity", "env_loss_mean", s.env_loss_mean);
  s.env_loss_spread = cfg.get_number("cavity", "env_loss_spread", s.env_loss_spread);
  s.loss_sign = cfg.get_number("cavity", "loss_sign", s.loss_sign);
  const auto ant = cfg.get_number_array("cavity", "antenna_inv_alpha_over_k");
  if (ant.size() == 2) s.antenna_inv_alpha_over_k = Complex(ant[0], ant[1]);
  s.min_separation_m = cfg.get_number("cavity", "min_separation_m", s.min_separation_m);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("cavity", "seed", static_cast<long>(s.seed)));
  return s;
}

TrainOptions train_from_config(const TomlConfig& cfg) {
  TrainOptions t;
  t.batch_size = static_cast<int>(cfg.get_int("train", "batch_size", t.batch_size));
  t.lr_init = cfg.get_number("train", "lr_init", t.lr_init);
  t.lr_decay = cfg.get_number("train", "lr_decay", t.lr_decay);
  t.lr_plateau_iters = static_cast<int>(cfg.get_int("train", "lr_plateau_iters", t.lr_plateau_iters));
  t.lr_floor = cfg.get_number("train", "lr_floor", t.lr_floor);
  t.patience_iters = static_cast<int>(cfg.get_int("train", "patience_iters", t.patience_iters));
  t.val_interval = static_cast<int>(cfg.get_int("train", "val_interval", t.val_interval));
  t.train_fraction = cfg.get_number("train", "train_fraction", t.train_fraction);
  t.init_std = cfg.get_number("train", "init_std", t.init_std);
  t.max_iterations = cfg.get_int("train", "max_iterations", t.max_iterations);
  t.eps = cfg.get_number("train", "eps", t.eps);
  return t;
}

MlpOptions mlp_from_config(const TomlConfig& cfg) {
  MlpOptions m;
  m.n_layers = static_cast<int>(cfg.get_int("mlp", "n_layers", m.n_layers));
  m.width_factor = static_cast<int>(cfg.get_int("mlp", "width_factor", m.width_factor));
  m.learning_rate = cfg.get_number("mlp", "learning_rate", m.learning_rate);
  m.batch_size = static_cast<int>(cfg.get_int("mlp", "batch_size", m.batch_size));
  m.train_fraction = cfg.get_number("mlp", "train_fraction", m.train_fraction);
  m.patience_epochs = static_cast<int>(cfg.get_int("mlp", "patience_epochs", m.patience_epochs));
  m.max_epochs = static_cast<int>(cfg.get_int("mlp", "max_epochs", m.max_epochs));
  return m;
}

std::string csv_training_trace(const TrainingReport& report) {
  std::string out = "iteration,train_cost,validation_cost,lr\n";
  for (const auto& row : report.trace) {
    out += std::to_string(row.iteration);
    out += ',';
    out += std::isnan(row.train_cost) ? "nan" : format_double(row.train_cost);
    out += ',';
    out += format_double(row.validation_cost);
    out += ',';
    out += format_double(row.learning_rate);
    out += '\n';
  }
  return out;
}

VectorXc uniform_wavefront(int n) {
  return VectorXc::Constant(n, Complex(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
};

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"metascat: calibration and wave control for metasurface-programmable scattering"};
  app.require_subcommand(1);

  // ---- gen-cavity ----
  CommonArgs gc;
  std::string gc_mode = "dipole-cavity";
  std::uint64_t gc_hidden_seed = 0;
  auto* gen_cavity = app.add_subcommand("gen-cavity", "Build a ground-truth system and save it");
  gen_cavity->add_option("--config", gc.config_path, "experiment config (TOML)");
  gen_cavity->add_option("--mode", gc_mode, "dipole-cavity | hidden-compact");
  gen_cavity->add_option("--seed", gc.seed, "placement / parameter seed");
  gen_cavity->add_option("--hidden-seed", gc_hidden_seed, "seed for concealed compact parameters");
  gen_cavity->add_option("--out", gc.out_dir, "output directory")->required();

  // ---- gen-dataset ----
  CommonArgs gd;
  std::string gd_truth;
  int gd_ndata = 1000;
  bool gd_phaseless = false;
  std::string gd_mask;
  double gd_snr = 0.0;
  bool gd_has_snr = false;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Measure random configurations");
  gen_dataset->add_option("--truth", gd_truth, "ground-truth file from gen-cavity")->required();
  gen_dataset->add_option("--ndata", gd_ndata, "number of records");
  gen_dataset->add_option("--seed", gd.seed, "configuration / noise seed");
  gen_dataset->add_flag("--phaseless", gd_phaseless, "store magnitudes only");
  gen_dataset->add_option("--mask", gd_mask, "included coefficients as bit rows, e.g. 1100,1100,1111,1111");
  gen_dataset->add_option("--snr", gd_snr, "measurement SNR in dB")->each([&](const std::string&) {
    gd_has_snr = true;
  });
  gen_dataset->add_option("--out", gd.out_dir, "output directory")->required();

  // ---- calibrate ----
  CommonArgs ca;
  std::string ca_dataset, ca_cost = "coherent", ca_ports = "full", ca_pilots = "gaussian";
  std::string ca_mask;
  std::uint64_t ca_pilot_seed = 11;
  long ca_max_iters = -1;
  int ca_batch = -1;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit the physical model to a dataset");
  calibrate_cmd->add_option("--dataset", ca_dataset, "calibration dataset (JSONL)")->required();
  calibrate_cmd->add_option("--config", ca.config_path, "experiment config (TOML)");
  calibrate_cmd->add_option("--cost", ca_cost, "coherent | phaseless | masked");
  calibrate_cmd->add_option("--ports", ca_ports, "full | h22 | sRC (e.g. s31)");
  calibrate_cmd->add_option("--pilots", ca_pilots, "gaussian | canonical");
  calibrate_cmd->add_option("--pilot-seed", ca_pilot_seed, "pilot draw seed");
  calibrate_cmd->add_option("--mask", ca_mask, "override dataset mask (bit rows)");
  calibrate_cmd->add_option("--seed", ca.seed, "init / shuffle seed");
  calibrate_cmd->add_option("--max-iters", ca_max_iters, "iteration cap override");
  calibrate_cmd->add_option("--batch-size", ca_batch, "batch size override");
  calibrate_cmd->add_option("--out", ca.out_dir, "output directory")->required();

  // ---- evaluate ----
  CommonArgs ev;
  std::string ev_model, ev_dataset;
  bool ev_allow_training = false;
  bool ev_offset_first = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on unseen configurations");
  evaluate_cmd->add_option("--model", ev_model, "model checkpoint")->required();
  evaluate_cmd->add_option("--dataset", ev_dataset, "evaluation dataset (complex)")->required();
  evaluate_cmd->add_flag("--allow-training-eval", ev_allow_training,
                         "permit evaluating on the calibration data");
  evaluate_cmd->add_flag("--offset-from-first", ev_offset_first,
                         "masked models: fix the constant offset from the first record");
  evaluate_cmd->add_option("--out", ev.out_dir, "output directory")->required();

  // ---- sweep ----
  CommonArgs sw;
  std::string sw_truth, sw_grid = "25,50,100,200,400,800";
  std::string sw_models = "physical", sw_sets = "full";
  std::uint64_t sw_pilot_seed = 11;
  int sw_neval = 200;
  auto* sweep_cmd = app.add_subcommand("sweep", "zeta_SISO vs calibration set size");
  sweep_cmd->add_option("--truth", sw_truth, "ground-truth file")->required();
  sweep_cmd->add_option("--config", sw.config_path, "experiment config (TOML)");
  sweep_cmd->add_option("--grid", sw_grid, "ascending N_data values, comma separated");
  sweep_cmd->add_option("--models", sw_models, "physical,linear,mlp");
  sweep_cmd->add_option("--coeff-sets", sw_sets, "full,h22,s31,...");
  sweep_cmd->add_option("--seed", sw.seed, "dataset seed");
  sweep_cmd->add_option("--pilot-seed", sw_pilot_seed, "pilot seed for physical cells");
  sweep_cmd->add_option("--n-eval", sw_neval, "held-out evaluation configs");
  sweep_cmd->add_option("--out", sw.out_dir, "output directory")->required();

  // ---- control ----
  CommonArgs co;
  std::string co_model, co_truth, co_objective = "focus";
  int co_port = 1, co_tx = 2, co_rx = 4, co_nconfigs = 50, co_pool = 10000;
  std::uint64_t co_pool_seed = 31, co_eval_seed = 47;
  auto* control_cmd = app.add_subcommand("control", "Model-based coherent wave control");
  control_cmd->add_option("--model", co_model, "model checkpoint (full-S)")->required();
  control_cmd->add_option("--truth", co_truth, "ground-truth file")->required();
  control_cmd->add_option("--objective", co_objective, "focus | absorb | qpsk");
  control_cmd->add_option("--port", co_port, "focus target port (1-based)");
  control_cmd->add_option("--tx", co_tx, "qpsk transmit port (1-based)");
  control_cmd->add_option("--rx", co_rx, "qpsk receive port (1-based)");
  control_cmd->add_option("--nconfigs", co_nconfigs, "unseen configurations to score");
  control_cmd->add_option("--pool", co_pool, "configuration pool size");
  control_cmd->add_option("--pool-seed", co_pool_seed, "pool seed");
  control_cmd->add_option("--eval-seed", co_eval_seed, "unseen-config seed");
  control_cmd->add_option("--out", co.out_dir, "output directory")->required();

  // ---- gradcheck ----
  std::uint64_t gr_seed = 7;
  std::string gr_out;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck_cmd->add_option("--seed", gr_seed, "instance seed");
  gradcheck_cmd->add_option("--out", gr_out, "optional output directory");

  // ---- mi-curve ----
  std::string mi_zeta = "10,30", mi_snr = "-10:40:101", mi_out;
  auto* mi_cmd = app.add_subcommand("mi-curve", "Mutual-information lower bound vs SNR");
  mi_cmd->add_option("--zeta-db", mi_zeta, "zeta values in dB, comma separated");
  mi_cmd->add_option("--snr-db", mi_snr, "SNR range start:stop:count in dB");
  mi_cmd->add_option("--out", mi_out, "output directory")->required();

  std::vector<const char*> argv;
  argv.push_back("metascat");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (*gen_cavity) {
      prepare_out(gc.out_dir);
      const TomlConfig cfg = gc.config_path.empty() ? TomlConfig() : TomlConfig::parse_file(gc.config_path);
      if (cfg.has("cavity", "mode") && !gen_cavity->count("--mode"))
        gc_mode = cfg.get_string("cavity", "mode", gc_mode);
      GroundTruth truth = [&] {
        if (gc_mode == "dipole-cavity") {
          CavitySpec spec = cavity_from_config(cfg);
          if (gen_cavity->count("--seed")) spec.seed = gc.seed;
          return GroundTruth::dipole(spec);
        }
        if (gc_mode == "hidden-compact") {
          const int na = static_cast<int>(cfg.get_int("cavity", "n_antennas", 4));
          const int ns = static_cast<int>(cfg.get_int("cavity", "n_meta", 16));
          const double f = cfg.get_number("cavity", "frequency_hz", 5.2e9);
          const std::uint64_t s = gc_hidden_seed ? gc_hidden_seed : gc.seed;
          return GroundTruth::hidden_compact(sample_compact_params(na, ns, s), f, s);
        }
        throw std::runtime_error("gen-cavity: unknown mode '" + gc_mode + "'");
      }();
      save_ground_truth(truth, out_path(gc.out_dir, "truth.json"));
      Manifest m{"gen-cavity", args,
                 hex64(fnv1a64(cfg.canonical_string() + ";" + gc_mode + ";" + std::to_string(gc.seed))),
                 {{"truth", truth.provenance_hash()}},
                 gc.seed,
                 {"truth.json"}};
      emit_manifest(gc.out_dir, std::move(m));
      std::cout << "gen-cavity: wrote " << out_path(gc.out_dir, "truth.json") << "\n";
      return 0;
    }

    if (*gen_dataset) {
      prepare_out(gd.out_dir);
      const GroundTruth truth = load_ground_truth(gd_truth);
      std::optional<MaskArray> mask;
      if (!gd_mask.empty()) mask = mask_from_rows(gd_mask, truth.n_antennas());
      std::optional<double> snr;
      if (gd_has_snr) snr = gd_snr;
      const Dataset data = generate_dataset(truth, gd_ndata, gd.seed, gd_phaseless, mask, snr);
      save_dataset(data, out_path(gd.out_dir, "dataset.jsonl"));
      Manifest m{"gen-dataset", args,
                 hex64(fnv1a64(truth.provenance_hash() + ";" + std::to_string(gd_ndata) + ";" +
                               std::to_string(gd.seed) + ";" + gd_mask + ";" +
                               (gd_phaseless ? "pl" : "cx"))),
                 {{"truth", truth.provenance_hash()}, {"dataset", data.header.provenance}},
                 gd.seed,
                 {"dataset.jsonl"}};
      emit_manifest(gd.out_dir, std::move(m));
      std::cout << "gen-dataset: " << data.size() << " records -> "
                << out_path(gd.out_dir, "dataset.jsonl") << "\n";
      return 0;
    }

    if (*calibrate_cmd) {
      prepare_out(ca.out_dir);
      const TomlConfig cfg = ca.config_path.empty() ? TomlConfig() : TomlConfig::parse_file(ca.config_path);
      Dataset data = load_dataset(ca_dataset);
      if (!ca_mask.empty()) data.header.mask = mask_from_rows(ca_mask, data.header.n_antennas);

      const PortSelection sel = PortSelection::from_name(ca_ports, data.header.n_antennas);
      CostSpec cost;
      cost.kind = cost_kind_from_name(ca_cost);
      if (cost.kind == CostKind::masked && !data.header.mask)
        throw std::runtime_error("calibrate: masked cost needs a dataset mask or --mask");

      PilotSet pilots = ca_pilots == "canonical"
                            ? PilotSet::canonical_basis(static_cast<int>(sel.tx.size()))
                            : PilotSet::gaussian(static_cast<int>(sel.tx.size()), ca_pilot_seed);

      TrainOptions opts = train_from_config(cfg);
      opts.seed = ca.seed;
      if (ca_max_iters >= 0) opts.max_iterations = ca_max_iters;
      if (ca_batch >= 0) opts.batch_size = ca_batch;

      const CalibratedModel model = calibrate(data, sel, cost, pilots, opts);
      save_checkpoint(Checkpoint::from(model), out_path(ca.out_dir, "model.json"));
      write_text_file(out_path(ca.out_dir, "training.csv"), csv_training_trace(model.report));

      Manifest m{"calibrate", args,
                 hex64(fnv1a64(cfg.canonical_string() + ";" + data.header.provenance + ";" +
                               ca_cost + ";" + ca_ports + ";" + ca_pilots + ";" +
                               std::to_string(ca_pilot_seed) + ";" + std::to_string(ca.seed))),
                 {{"dataset", data.header.provenance}},
                 ca.seed,
                 {"model.json", "training.csv"}};
      emit_manifest(ca.out_dir, std::move(m));
      std::cout << "calibrate: best validation cost "
                << format_double(model.report.best_validation_cost) << " after "
                << model.report.iterations << " iterations\n";
      return 0;
    }

    if (*evaluate_cmd) {
      prepare_out(ev.out_dir);
      const Checkpoint ckpt = load_checkpoint(ev_model);
      const Dataset data = load_dataset(ev_dataset);
      if (data.header.phaseless)
        throw std::runtime_error("evaluate: needs complex ground truth, dataset is phaseless");
      if (!ev_allow_training && !ckpt.train_provenance().empty() &&
          ckpt.train_provenance() == data.header.provenance)
        throw std::runtime_error(
            "evaluate: dataset matches the model's calibration data; evaluation must use unseen "
            "configurations (pass --allow-training-eval to override)");

      const PortSelection& sel = ckpt.selection();
      std::size_t first = 0;
      std::optional<OffsetCorrection> offset;
      if (ev_offset_first) {
        if (ckpt.kind != Checkpoint::Kind::physical || ckpt.physical->cost.kind != CostKind::masked)
          throw std::runtime_error("evaluate: --offset-from-first applies to masked physical models");
        offset = offset_correct(*ckpt.physical, data.records[0].config,
                                sel.extract(data.records[0].complex_values()),
                                ckpt.physical->cost.mask);
        first = 1;
      }

      std::vector<MatrixXc> truth_series, pred_series;
      for (std::size_t i = first; i < data.records.size(); ++i) {
        truth_series.push_back(sel.extract(data.records[i].complex_values()));
        MatrixXc pred = ckpt.predict(data.records[i].config);
        if (offset) pred = offset->apply(pred);
        pred_series.push_back(std::move(pred));
      }
      const ZetaReport rep = zeta_report(sel, truth_series, pred_series);

      std::string csv = "coefficient,zeta_db,n_eval\n";
      for (std::size_t i = 0; i < rep.labels.size(); ++i)
        csv += rep.labels[i] + "," + format_double(rep.zeta[i]) + "," + std::to_string(rep.n_eval) +
               "\n";
      csv += "zeta_siso," + format_double(rep.zeta_siso) + "," + std::to_string(rep.n_eval) + "\n";
      if (rep.labels.size() > 1)
        csv += "zeta_joint," + format_double(zeta_joint_db(truth_series, pred_series)) + "," +
               std::to_string(rep.n_eval) + "\n";
      write_text_file(out_path(ev.out_dir, "zeta.csv"), csv);

      Manifest m{"evaluate", args,
                 hex64(fnv1a64(data.header.provenance + ";" + ckpt.train_provenance() + ";" +
                               (ev_offset_first ? "offset" : "plain"))),
                 {{"dataset", data.header.provenance}, {"model", ckpt.train_provenance()}},
                 0,
                 {"zeta.csv"}};
      emit_manifest(ev.out_dir, std::move(m));
      std::cout << "evaluate: zeta_siso " << format_double(rep.zeta_siso) << " dB over "
                << rep.n_eval << " configs\n";
      return 0;
    }

    if (*sweep_cmd) {
      prepare_out(sw.out_dir);
      const TomlConfig cfg = sw.config_path.empty() ? TomlConfig() : TomlConfig::parse_file(sw.config_path);
      const GroundTruth truth = load_ground_truth(sw_truth);
      SweepOptions opts;
      opts.train = train_from_config(cfg);
      opts.mlp = mlp_from_config(cfg);
      opts.n_eval = sw_neval;
      opts.pilot_seed = sw_pilot_seed;
      std::vector<ModelKind> kinds;
      for (const auto& name : split(sw_models, ',')) kinds.push_back(model_kind_from_name(name));
      const std::vector<std::string> sets = split(sw_sets, ',');
      const SweepResult result =
          ndata_sweep(truth, parse_int_list(sw_grid), kinds, sets, sw.seed, opts);
      write_text_file(out_path(sw.out_dir, "sweep.csv"), result.to_csv());
      Manifest m{"sweep", args,
                 hex64(fnv1a64(cfg.canonical_string() + ";" + truth.provenance_hash() + ";" +
                               sw_grid + ";" + sw_models + ";" + sw_sets + ";" +
                               std::to_string(sw.seed))),
                 {{"truth", truth.provenance_hash()}},
                 sw.seed,
                 {"sweep.csv"}};
      emit_manifest(sw.out_dir, std::move(m));
      std::cout << "sweep: " << result.cells.size() << " cells -> "
                << out_path(sw.out_dir, "sweep.csv") << "\n";
      return 0;
    }

    if (*control_cmd) {
      prepare_out(co.out_dir);
      const Checkpoint ckpt = load_checkpoint(co_model);
      const GroundTruth truth = load_ground_truth(co_truth);
      const int na = truth.n_antennas();
      if (ckpt.selection().name() != "full")
        throw std::runtime_error("control: requires a model calibrated for the full scattering matrix");
      const PredictFn predict = [&](const MetaConfig& c) { return ckpt.predict(c); };

      const std::vector<MetaConfig> pool = random_configs(truth.n_meta(), co_pool, co_pool_seed);
      const std::vector<MetaConfig> unseen =
          random_configs(truth.n_meta(), co_nconfigs, co_eval_seed);

      Manifest m{"control", args,
                 hex64(fnv1a64(truth.provenance_hash() + ";" + co_objective + ";" +
                               std::to_string(co_port) + ";" + std::to_string(co_pool) + ";" +
                               std::to_string(co_pool_seed) + ";" + std::to_string(co_eval_seed))),
                 {{"truth", truth.provenance_hash()}, {"model", ckpt.train_provenance()}},
                 co_pool_seed,
                 {}};

      if (co_objective == "focus" || co_objective == "absorb") {
        const bool focus = co_objective == "focus";
        const int port = co_port - 1;
        if (focus && (port < 0 || port >= na))
          throw std::runtime_error("control: --port out of range");
        std::string csv = "config_index,optimal,model,uniform\n";
        double sum_opt = 0, sum_model = 0, sum_uni = 0;
        for (std::size_t i = 0; i < unseen.size(); ++i) {
          const MatrixXc s_true = truth.measure(unseen[i]).entries;
          const MatrixXc s_model = predict(unseen[i]);
          double v_opt, v_model, v_uni;
          if (focus) {
            const VectorXc t = transmission_vector(s_true, port);
            v_opt = deposited_energy(t, focus_wavefront(t));
            v_model = deposited_energy(t, focus_wavefront(transmission_vector(s_model, port)));
            v_uni = deposited_energy(t, uniform_wavefront(static_cast<int>(t.size())));
          } else {
            v_opt = absorb_wavefront(s_true).reflected_power;
            v_model = reflected_power(s_true, absorb_wavefront(s_model).wavefront);
            v_uni = reflected_power(s_true, uniform_wavefront(na));
          }
          sum_opt += v_opt;
          sum_model += v_model;
          sum_uni += v_uni;
          csv += std::to_string(i) + "," + format_double(v_opt) + "," + format_double(v_model) +
                 "," + format_double(v_uni) + "\n";
        }
        write_text_file(out_path(co.out_dir, "control.csv"), csv);

        // joint configuration + wavefront control over the pool
        const ControlObjective obj = focus ? ControlObjective::focus : ControlObjective::absorb;
        const BestConfig chosen = select_best_config(predict, pool, obj, port);
        const PredictFn true_fn = [&](const MetaConfig& c) { return truth.measure(c).entries; };
        const BestConfig ideal = select_best_config(true_fn, pool, obj, port);
        double chosen_true;
        if (focus) {
          chosen_true = transmission_vector(truth.measure(chosen.config).entries, port).squaredNorm();
        } else {
          chosen_true = absorb_wavefront(truth.measure(chosen.config).entries).reflected_power;
        }
        std::ostringstream js;
        js << "{\"objective\":\"" << co_objective << "\",\"mean_optimal\":"
           << format_double(sum_opt / unseen.size())
           << ",\"mean_model\":" << format_double(sum_model / unseen.size())
           << ",\"mean_uniform\":" << format_double(sum_uni / unseen.size())
           << ",\"pool_size\":" << pool.size() << ",\"model_choice_index\":" << chosen.index
           << ",\"model_choice_predicted\":" << format_double(chosen.value)
           << ",\"model_choice_true\":" << format_double(chosen_true)
           << ",\"ideal_choice_index\":" << ideal.index
           << ",\"ideal_choice_true\":" << format_double(ideal.value) << "}\n";
        write_text_file(out_path(co.out_dir, "control_summary.json"), js.str());
        m.outputs = {"control.csv", "control_summary.json"};
        emit_manifest(co.out_dir, std::move(m));
        std::cout << "control " << co_objective << ": mean model/optimal "
                  << format_double(focus ? sum_model / sum_opt : sum_opt / sum_model) << "\n";
        return 0;
      }

      if (co_objective == "qpsk") {
        const int tx = co_tx - 1, rx = co_rx - 1;
        if (tx < 0 || tx >= na || rx < 0 || rx >= na)
          throw std::runtime_error("control: qpsk ports out of range");
        const Constellation con = qpsk_select(predict, pool, tx, rx);

        // replay the chosen configurations on the ground truth
        Complex true_mean(0, 0);
        std::vector<Complex> true_vals(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
          true_vals[i] = truth.measure(pool[i]).entries(rx, tx);
          true_mean += true_vals[i];
        }
        true_mean /= static_cast<double>(pool.size());
        std::array<Complex, 4> true_points;
        for (int k = 0; k < 4; ++k) true_points[k] = true_vals[con.pool_indices[k]] - true_mean;
        const ConstellationFit replay = constellation_fit(true_points);

        std::ostringstream js;
        js << "{\"tx_port\":" << co_tx << ",\"rx_port\":" << co_rx << ",\"labels\":[\"00\",\"01\",\"11\",\"10\"],";
        js << "\"configs\":[";
        for (int k = 0; k < 4; ++k) {
          if (k) js << ',';
          js << '"' << con.configs[k].to_string() << '"';
        }
        js << "],\"model_points\":[";
        for (int k = 0; k < 4; ++k) {
          if (k) js << ',';
          js << '[' << format_double(con.points[k].real()) << ',' << format_double(con.points[k].imag()) << ']';
        }
        js << "],\"true_points\":[";
        for (int k = 0; k < 4; ++k) {
          if (k) js << ',';
          js << '[' << format_double(true_points[k].real()) << ',' << format_double(true_points[k].imag()) << ']';
        }
        js << "],\"radius\":" << format_double(con.radius) << ",\"theta\":" << format_double(con.theta)
           << ",\"evm_model\":" << format_double(con.evm)
           << ",\"evm_true\":" << format_double(replay.evm)
           << ",\"max_phase_error_deg\":" << format_double(replay.max_phase_error * 180.0 / M_PI)
           << "}\n";
        write_text_file(out_path(co.out_dir, "constellation.json"), js.str());
        m.outputs = {"constellation.json"};
        emit_manifest(co.out_dir, std::move(m));
        std::cout << "control qpsk: true EVM " << format_double(replay.evm) << ", max phase error "
                  << format_double(replay.max_phase_error * 180.0 / M_PI) << " deg\n";
        return 0;
      }
      throw std::runtime_error("control: unknown objective '" + co_objective + "'");
    }

    if (*gradcheck_cmd) {
      double worst = 0.0;
      std::ostringstream line;
      line << "gradcheck";
      for (CostKind kind : {CostKind::coherent, CostKind::phaseless, CostKind::masked}) {
        const double dev = finite_difference_check(gr_seed, kind);
        worst = std::max(worst, dev);
        line << ' ' << cost_kind_name(kind) << '=' << format_double(dev);
      }
      line << " max_rel_dev=" << format_double(worst) << '\n';
      std::cout << line.str();
      if (!gr_out.empty()) {
        prepare_out(gr_out);
        write_text_file(out_path(gr_out, "gradcheck.txt"), line.str());
        Manifest m{"gradcheck", args, hex64(fnv1a64("gradcheck;" + std::to_string(gr_seed))),
                   {},  gr_seed, {"gradcheck.txt"}};
        emit_manifest(gr_out, std::move(m));
      }
      return worst <= 1e-5 ? 0 : 1;
    }

    if (*mi_cmd) {
      prepare_out(mi_out);
      const std::vector<double> zetas = parse_double_list(mi_zeta);
      const auto range = split(mi_snr, ':');
      if (range.size() != 3) throw std::runtime_error("mi-curve: --snr-db must be start:stop:count");
      const double start = std::stod(range[0]), stop = std::stod(range[1]);
      const int count = std::stoi(range[2]);
      if (count < 2) throw std::runtime_error("mi-curve: need at least 2 SNR points");
      std::string csv = "snr_db,zeta_db,mi_bits\n";
      for (double z_db : zetas) {
        for (int i = 0; i < count; ++i) {
          const double snr_db = start + (stop - start) * i / (count - 1);
          const double mi = mi_lower_bound(std::pow(10.0, snr_db / 10.0), std::pow(10.0, z_db / 10.0));
          csv += format_double(snr_db) + "," + format_double(z_db) + "," + format_double(mi) + "\n";
        }
      }
      write_text_file(out_path(mi_out, "mi.csv"), csv);
      Manifest m{"mi-curve", args, hex64(fnv1a64("mi;" + mi_zeta + ";" + mi_snr)), {}, 0, {"mi.csv"}};
      emit_manifest(mi_out, std::move(m));
      std::cout << "mi-curve: wrote " << out_path(mi_out, "mi.csv") << "\n";
      return 0;
    }

    throw std::runtime_error("no subcommand given");
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace metascat

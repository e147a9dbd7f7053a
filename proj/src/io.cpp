#include "metascat/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metascat/util.hpp"

namespace metascat {

using nlohmann::json;

namespace {

std::string jnum(double v) { return format_double(v); }

std::string jcomplex(const Complex& c) { return "[" + jnum(c.real()) + "," + jnum(c.imag()) + "]"; }

std::string jstring(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string jcomplex_matrix(const MatrixXc& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out.push_back(',');
    out.push_back('[');
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += jcomplex(m(r, c));
    }
    out.push_back(']');
  }
  out.push_back(']');
  return out;
}

std::string jreal_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out.push_back(',');
    out.push_back('[');
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += jnum(m(r, c));
    }
    out.push_back(']');
  }
  out.push_back(']');
  return out;
}

std::string jint_array(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(v[i]);
  }
  out.push_back(']');
  return out;
}

Complex parse_complex(const json& j) { return Complex(j.at(0).get<double>(), j.at(1).get<double>()); }

MatrixXc parse_complex_matrix(const json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j.at(0).size() : 0;
  MatrixXc m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = parse_complex(j.at(r).at(c));
  return m;
}

Eigen::MatrixXd parse_real_matrix(const json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j.at(0).size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

std::string selection_json(const PortSelection& sel) {
  return "\"cavity_ports\":" + jint_array(sel.cavity_ports) + ",\"tx\":" + jint_array(sel.tx) +
         ",\"rx\":" + jint_array(sel.rx);
}

PortSelection parse_selection(const json& j) {
  PortSelection sel;
  sel.cavity_ports = j.at("cavity_ports").get<std::vector<int>>();
  sel.tx = j.at("tx").get<std::vector<int>>();
  sel.rx = j.at("rx").get<std::vector<int>>();
  return sel;
}

}  // namespace

std::string mask_to_rows(const MaskArray& mask) {
  std::string out;
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    if (r) out.push_back(',');
    for (Eigen::Index c = 0; c < mask.cols(); ++c) out.push_back(mask(r, c) ? '1' : '0');
  }
  return out;
}

MaskArray mask_from_rows(const std::string& rows, int n_cols) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : rows) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  MaskArray mask(parts.size(), n_cols);
  for (std::size_t r = 0; r < parts.size(); ++r) {
    if (static_cast<int>(parts[r].size()) != n_cols)
      throw std::invalid_argument("mask row " + std::to_string(r) + " must have " +
                                  std::to_string(n_cols) + " bits");
    for (int c = 0; c < n_cols; ++c) {
      if (parts[r][c] != '0' && parts[r][c] != '1')
        throw std::invalid_argument("mask rows must contain only 0/1");
      mask(r, c) = parts[r][c] == '1';
    }
  }
  return mask;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << contents;
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ostringstream os;
  const auto& h = data.header;
  os << "{\"format\":\"metascat-dataset\",\"version\":" << h.version
     << ",\"n_antennas\":" << h.n_antennas << ",\"n_meta\":" << h.n_meta
     << ",\"tx_ports\":" << jint_array(h.roles.tx_ports)
     << ",\"rx_ports\":" << jint_array(h.roles.rx_ports)
     << ",\"frequency_hz\":" << jnum(h.frequency_hz)
     << ",\"phaseless\":" << (h.phaseless ? "true" : "false") << ",\"mask\":"
     << (h.mask ? jstring(mask_to_rows(*h.mask)) : std::string("null"))
     << ",\"provenance\":" << jstring(h.provenance) << ",\"seed\":" << h.seed << "}\n";
  for (const auto& rec : data.records) {
    os << "{\"config\":" << jstring(rec.config.to_string());
    if (rec.phaseless())
      os << ",\"s_abs\":" << jreal_matrix(rec.magnitudes);
    else
      os << ",\"s\":" << jcomplex_matrix(rec.values);
    os << "}\n";
  }
  write_text_file(path, os.str());
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  Dataset data;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset parse error at line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    try {
      if (line_no == 1) {
        if (j.value("format", "") != "metascat-dataset")
          throw std::runtime_error("not a metascat dataset");
        const int version = j.at("version").get<int>();
        if (version != 1)
          throw std::runtime_error("unsupported dataset version " + std::to_string(version) +
                                   " (supported: 1)");
        auto& h = data.header;
        h.version = version;
        h.n_antennas = j.at("n_antennas").get<int>();
        h.n_meta = j.at("n_meta").get<int>();
        h.roles.n_antennas = h.n_antennas;
        h.roles.tx_ports = j.at("tx_ports").get<std::vector<int>>();
        h.roles.rx_ports = j.at("rx_ports").get<std::vector<int>>();
        h.frequency_hz = j.at("frequency_hz").get<double>();
        h.phaseless = j.at("phaseless").get<bool>();
        if (!j.at("mask").is_null())
          h.mask = mask_from_rows(j.at("mask").get<std::string>(), h.roles.n_tx());
        h.provenance = j.at("provenance").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
      } else {
        DatasetRecord rec;
        rec.config = MetaConfig::from_string(j.at("config").get<std::string>());
        if (static_cast<int>(rec.config.bits.size()) != data.header.n_meta)
          throw std::runtime_error("config length does not match header n_meta");
        if (data.header.phaseless)
          rec.magnitudes = parse_real_matrix(j.at("s_abs"));
        else
          rec.values = parse_complex_matrix(j.at("s"));
        data.records.push_back(std::move(rec));
      }
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset error at line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (line_no == 0) throw std::runtime_error("dataset is empty: " + path);
  return data;
}

Checkpoint Checkpoint::from(CalibratedModel m) {
  Checkpoint c;
  c.kind = Kind::physical;
  c.physical = std::move(m);
  return c;
}

Checkpoint Checkpoint::from(LinearModel m) {
  Checkpoint c;
  c.kind = Kind::linear;
  c.linear = std::move(m);
  return c;
}

Checkpoint Checkpoint::from(MLPModel m) {
  Checkpoint c;
  c.kind = Kind::mlp;
  c.mlp = std::move(m);
  return c;
}

const PortSelection& Checkpoint::selection() const {
  switch (kind) {
    case Kind::physical: return physical->selection;
    case Kind::linear: return linear->selection;
    case Kind::mlp: return mlp->selection;
  }
  throw std::logic_error("Checkpoint: bad kind");
}

MatrixXc Checkpoint::predict(const MetaConfig& config) const {
  switch (kind) {
    case Kind::physical: return physical->predict(config);
    case Kind::linear: return linear->predict(config);
    case Kind::mlp: return mlp->predict(config);
  }
  throw std::logic_error("Checkpoint: bad kind");
}

std::string Checkpoint::train_provenance() const {
  return kind == Kind::physical ? physical->train_provenance : std::string();
}

const char* Checkpoint::kind_name() const {
  switch (kind) {
    case Kind::physical: return "physical";
    case Kind::linear: return "linear";
    case Kind::mlp: return "mlp";
  }
  return "?";
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ostringstream os;
  os << "{\"format\":\"metascat-checkpoint\",\"version\":1,\"kind\":\"" << ckpt.kind_name() << "\",";
  switch (ckpt.kind) {
    case Checkpoint::Kind::physical: {
      const CalibratedModel& m = *ckpt.physical;
      os << "\"n_antennas\":" << m.params.n_antennas << ",\"n_meta\":" << m.params.n_meta << ","
         << selection_json(m.selection) << ",\"alpha_a\":" << jcomplex(m.params.alpha_a)
         << ",\"alpha_0\":" << jcomplex(m.params.alpha_0)
         << ",\"alpha_1\":" << jcomplex(m.params.alpha_1) << ",\"coupling\":[";
      for (std::size_t i = 0; i < m.params.coupling.size(); ++i) {
        if (i) os << ',';
        os << jcomplex(m.params.coupling[i]);
      }
      os << "],\"pilots\":{\"canonical\":" << (m.pilots.canonical ? "true" : "false")
         << ",\"seed\":" << m.pilots.seed << ",\"x\":" << jcomplex_matrix(m.pilots.x) << "}"
         << ",\"cost\":{\"kind\":\"" << cost_kind_name(m.cost.kind) << "\",\"mask\":"
         << (m.cost.kind == CostKind::masked ? jstring(mask_to_rows(m.cost.mask))
                                             : std::string("null"))
         << "},\"training\":{\"iterations\":" << m.report.iterations
         << ",\"best_validation_cost\":" << jnum(m.report.best_validation_cost) << "}"
         << ",\"train_provenance\":" << jstring(m.train_provenance);
      break;
    }
    case Checkpoint::Kind::linear: {
      const LinearModel& m = *ckpt.linear;
      os << "\"n_meta\":" << m.n_meta << "," << selection_json(m.selection) << ",\"intercept\":[";
      for (std::size_t i = 0; i < m.intercept.size(); ++i) {
        if (i) os << ',';
        os << jcomplex(m.intercept[i]);
      }
      os << "],\"weights\":[";
      for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (i) os << ',';
        os << '[';
        for (Eigen::Index k = 0; k < m.weights[i].size(); ++k) {
          if (k) os << ',';
          os << jcomplex(m.weights[i](k));
        }
        os << ']';
      }
      os << ']';
      break;
    }
    case Checkpoint::Kind::mlp: {
      const MLPModel& m = *ckpt.mlp;
      os << "\"n_meta\":" << m.n_meta << ",\"width\":" << m.width << ",\"n_layers\":" << m.n_layers
         << "," << selection_json(m.selection) << ",\"w\":[";
      for (std::size_t l = 0; l < m.w.size(); ++l) {
        if (l) os << ',';
        os << jreal_matrix(m.w[l]);
      }
      os << "],\"b\":[";
      for (std::size_t l = 0; l < m.b.size(); ++l) {
        if (l) os << ',';
        os << '[';
        for (Eigen::Index k = 0; k < m.b[l].size(); ++k) {
          if (k) os << ',';
          os << jnum(m.b[l](k));
        }
        os << ']';
      }
      os << "],\"out_bias\":[" << jnum(m.out_bias(0)) << ',' << jnum(m.out_bias(1)) << ']';
      break;
    }
  }
  os << "}\n";
  write_text_file(path, os.str());
}

Checkpoint load_checkpoint(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
  }
  if (j.value("format", "") != "metascat-checkpoint")
    throw std::runtime_error("not a metascat checkpoint: " + path);
  const std::string kind = j.at("kind").get<std::string>();

  if (kind == "physical") {
    CalibratedModel m;
    const int na = j.at("n_antennas").get<int>();
    const int ns = j.at("n_meta").get<int>();
    m.params = CompactModelParams(na, ns);
    m.params.alpha_a = parse_complex(j.at("alpha_a"));
    m.params.alpha_0 = parse_complex(j.at("alpha_0"));
    m.params.alpha_1 = parse_complex(j.at("alpha_1"));
    const auto& cj = j.at("coupling");
    const int expected = CompactModelParams::coupling_size(na + ns);
    if (static_cast<int>(cj.size()) != expected)
      throw std::runtime_error("checkpoint coupling list has " + std::to_string(cj.size()) +
                               " entries, expected (N+1)N/2 = " + std::to_string(expected));
    for (int i = 0; i < expected; ++i) m.params.coupling[i] = parse_complex(cj.at(i));
    m.selection = parse_selection(j);
    m.pilots.canonical = j.at("pilots").at("canonical").get<bool>();
    m.pilots.seed = j.at("pilots").at("seed").get<std::uint64_t>();
    m.pilots.x = parse_complex_matrix(j.at("pilots").at("x"));
    m.cost.kind = cost_kind_from_name(j.at("cost").at("kind").get<std::string>());
    if (!j.at("cost").at("mask").is_null())
      m.cost.mask = mask_from_rows(j.at("cost").at("mask").get<std::string>(),
                                   static_cast<int>(m.selection.tx.size()));
    m.report.iterations = j.at("training").at("iterations").get<long>();
    m.report.best_validation_cost = j.at("training").at("best_validation_cost").get<double>();
    m.train_provenance = j.at("train_provenance").get<std::string>();
    return Checkpoint::from(std::move(m));
  }
  if (kind == "linear") {
    LinearModel m;
    m.n_meta = j.at("n_meta").get<int>();
    m.selection = parse_selection(j);
    for (const auto& e : j.at("intercept")) m.intercept.push_back(parse_complex(e));
    for (const auto& wj : j.at("weights")) {
      VectorXc w(wj.size());
      for (std::size_t k = 0; k < wj.size(); ++k) w(k) = parse_complex(wj.at(k));
      m.weights.push_back(std::move(w));
    }
    return Checkpoint::from(std::move(m));
  }
  if (kind == "mlp") {
    MLPModel m;
    m.n_meta = j.at("n_meta").get<int>();
    m.width = j.at("width").get<int>();
    m.n_layers = j.at("n_layers").get<int>();
    m.selection = parse_selection(j);
    for (const auto& wj : j.at("w")) m.w.push_back(parse_real_matrix(wj));
    for (const auto& bj : j.at("b")) {
      Eigen::VectorXd b(bj.size());
      for (std::size_t k = 0; k < bj.size(); ++k) b(k) = bj.at(k).get<double>();
      m.b.push_back(std::move(b));
    }
    m.out_bias(0) = j.at("out_bias").at(0).get<double>();
    m.out_bias(1) = j.at("out_bias").at(1).get<double>();
    return Checkpoint::from(std::move(m));
  }
  throw std::runtime_error("unknown checkpoint kind: " + kind);
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
  std::ostringstream os;
  if (truth.kind() == GroundTruth::Kind::dipole_cavity) {
    const CavitySpec& s = truth.cavity_->spec;
    os << "{\"format\":\"metascat-truth\",\"version\":1,\"kind\":\"dipole-cavity\""
       << ",\"n_antennas\":" << s.n_antennas << ",\"n_meta\":" << s.n_meta
       << ",\"n_env\":" << s.n_env << ",\"box\":[" << jnum(s.box.x()) << ',' << jnum(s.box.y())
       << ',' << jnum(s.box.z()) << "],\"frequency_hz\":" << jnum(s.frequency_hz)
       << ",\"f_res_0_hz\":" << jnum(s.f_res_0_hz) << ",\"f_res_1_hz\":" << jnum(s.f_res_1_hz)
       << ",\"gamma_hz\":" << jnum(s.gamma_hz) << ",\"chi\":" << jnum(s.chi)
       << ",\"env_re_mean\":" << jnum(s.env_re_mean) << ",\"env_re_spread\":" << jnum(s.env_re_spread)
       << ",\"env_loss_mean\":" << jnum(s.env_loss_mean)
       << ",\"env_loss_spread\":" << jnum(s.env_loss_spread) << ",\"loss_sign\":" << jnum(s.loss_sign)
       << ",\"antenna_inv_alpha_over_k\":" << jcomplex(s.antenna_inv_alpha_over_k)
       << ",\"min_separation_m\":" << jnum(s.min_separation_m) << ",\"seed\":" << s.seed << "}\n";
  } else {
    const CompactModelParams& p = *truth.hidden_params_;
    os << "{\"format\":\"metascat-truth\",\"version\":1,\"kind\":\"hidden-compact\""
       << ",\"n_antennas\":" << p.n_antennas << ",\"n_meta\":" << p.n_meta
       << ",\"frequency_hz\":" << jnum(truth.hidden_frequency_hz_)
       << ",\"seed\":" << truth.hidden_seed_ << ",\"alpha_a\":" << jcomplex(p.alpha_a)
       << ",\"alpha_0\":" << jcomplex(p.alpha_0) << ",\"alpha_1\":" << jcomplex(p.alpha_1)
       << ",\"coupling\":[";
    for (std::size_t i = 0; i < p.coupling.size(); ++i) {
      if (i) os << ',';
      os << jcomplex(p.coupling[i]);
    }
    os << "]}\n";
  }
  write_text_file(path, os.str());
}

GroundTruth load_ground_truth(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error("truth parse error in " + path + ": " + e.what());
  }
  if (j.value("format", "") != "metascat-truth")
    throw std::runtime_error("not a metascat ground-truth file: " + path);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dipole-cavity") {
    CavitySpec s;
    s.n_antennas = j.at("n_antennas").get<int>();
    s.n_meta = j.at("n_meta").get<int>();
    s.n_env = j.at("n_env").get<int>();
    s.box = Eigen::Vector3d(j.at("box").at(0).get<double>(), j.at("box").at(1).get<double>(),
                            j.at("box").at(2).get<double>());
    s.frequency_hz = j.at("frequency_hz").get<double>();
    s.f_res_0_hz = j.at("f_res_0_hz").get<double>();
    s.f_res_1_hz = j.at("f_res_1_hz").get<double>();
    s.gamma_hz = j.at("gamma_hz").get<double>();
    s.chi = j.at("chi").get<double>();
    s.env_re_mean = j.at("env_re_mean").get<double>();
    s.env_re_spread = j.at("env_re_spread").get<double>();
    s.env_loss_mean = j.at("env_loss_mean").get<double>();
    s.env_loss_spread = j.at("env_loss_spread").get<double>();
    s.loss_sign = j.at("loss_sign").get<double>();
    s.antenna_inv_alpha_over_k = parse_complex(j.at("antenna_inv_alpha_over_k"));
    s.min_separation_m = j.at("min_separation_m").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return GroundTruth::dipole(s);
  }
  if (kind == "hidden-compact") {
    const int na = j.at("n_antennas").get<int>();
    const int ns = j.at("n_meta").get<int>();
    CompactModelParams p(na, ns);
    p.alpha_a = parse_complex(j.at("alpha_a"));
    p.alpha_0 = parse_complex(j.at("alpha_0"));
    p.alpha_1 = parse_complex(j.at("alpha_1"));
    const auto& cj = j.at("coupling");
    if (static_cast<int>(cj.size()) != CompactModelParams::coupling_size(na + ns))
      throw std::runtime_error("truth coupling list length mismatch");
    for (std::size_t i = 0; i < cj.size(); ++i) p.coupling[i] = parse_complex(cj.at(i));
    return GroundTruth::hidden_compact(std::move(p), j.at("frequency_hz").get<double>(),
                                       j.at("seed").get<std::uint64_t>());
  }
  throw std::runtime_error("unknown ground-truth kind: " + kind);
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::ostringstream os;
  os << "{\"command\":" << jstring(m.command) << ",\"args\":[";
  for (std::size_t i = 0; i < m.args.size(); ++i) {
    if (i) os << ',';
    os << jstring(m.args[i]);
  }
  os << "],\"config_hash\":" << jstring(m.config_hash) << ",\"inputs\":{";
  bool first = true;
  for (const auto& [k, v] : m.inputs) {
    if (!first) os << ',';
    first = false;
    os << jstring(k) << ':' << jstring(v);
  }
  os << "},\"seed\":" << m.seed << ",\"version\":" << jstring(kVersionString) << ",\"outputs\":[";
  for (std::size_t i = 0; i < m.outputs.size(); ++i) {
    if (i) os << ',';
    os << jstring(m.outputs[i]);
  }
  os << "]}\n";
  write_text_file(path, os.str());
}

}  // namespace metascat

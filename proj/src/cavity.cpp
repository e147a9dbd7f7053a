#include "metascat/cavity.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "metascat/model.hpp"
#include "metascat/rng.hpp"
#include "metascat/util.hpp"

namespace metascat {

void CavitySpec::validate() const {
  if (n_antennas < 0 || n_meta < 0 || n_env < 0)
    throw std::invalid_argument("CavitySpec: entity counts must be >= 0");
  if (min_separation_m <= 0.0) throw std::invalid_argument("CavitySpec: min_separation must be > 0");
  if (gamma_hz <= 0.0) throw std::invalid_argument("CavitySpec: gamma must be > 0");
  if (frequency_hz <= 0.0) throw std::invalid_argument("CavitySpec: frequency must be > 0");
}

std::string CavitySpec::canonical_string() const {
  std::ostringstream os;
  os << "cavity;" << n_antennas << ";" << n_meta << ";" << n_env << ";" << format_double(box.x())
     << ";" << format_double(box.y()) << ";" << format_double(box.z()) << ";"
     << format_double(frequency_hz) << ";" << format_double(f_res_0_hz) << ";"
     << format_double(f_res_1_hz) << ";" << format_double(gamma_hz) << ";" << format_double(chi)
     << ";" << format_double(env_re_mean) << ";" << format_double(env_re_spread) << ";"
     << format_double(env_loss_mean) << ";" << format_double(env_loss_spread) << ";"
     << format_double(loss_sign) << ";" << format_double(antenna_inv_alpha_over_k.real()) << ";"
     << format_double(antenna_inv_alpha_over_k.imag()) << ";" << format_double(min_separation_m)
     << ";" << seed;
  return os.str();
}

Complex greens_coupling(const Eigen::Vector3d& ri, const Eigen::Vector3d& rj, double k) {
  const double r = (ri - rj).norm();
  if (r == 0.0) throw std::invalid_argument("greens_coupling: coincident points");
  return std::polar(1.0 / r, k * r);
}

Complex lorentzian_polarizability(double f, double f_res, double gamma, double chi) {
  if (gamma <= 0.0) throw std::invalid_argument("lorentzian_polarizability: gamma must be > 0");
  return chi * f_res * f_res / Complex(f_res * f_res - f * f, -gamma * f);
}

Complex CavityInstance::meta_inv_alpha(int state) const {
  const double f_res = state ? spec.f_res_1_hz : spec.f_res_0_hz;
  return 1.0 / lorentzian_polarizability(spec.frequency_hz, f_res, spec.gamma_hz, spec.chi);
}

CavityInstance build_cavity(const CavitySpec& spec) {
  spec.validate();
  CavityInstance inst;
  inst.spec = spec;
  inst.k = 2.0 * M_PI * spec.frequency_hz / kSpeedOfLight;

  Rng rng(derive_seed(spec.seed, 0x706f73));  // placement stream
  const int total = spec.n_antennas + spec.n_meta + spec.n_env;
  const int retry_cap = 20000;
  inst.positions.reserve(total);
  for (int i = 0; i < total; ++i) {  // antennas first, then meta-atoms, then env
    bool placed = false;
    for (int attempt = 0; attempt < retry_cap && !placed; ++attempt) {
      Eigen::Vector3d p(rng.uniform() * spec.box.x(), rng.uniform() * spec.box.y(),
                        rng.uniform() * spec.box.z());
      placed = true;
      for (const auto& q : inst.positions) {
        if ((p - q).norm() < spec.min_separation_m) {
          placed = false;
          break;
        }
      }
      if (placed) inst.positions.push_back(p);
    }
    if (!placed)
      throw std::runtime_error("build_cavity: placement failed after retry cap; placed " +
                               std::to_string(inst.positions.size()) + " of " +
                               std::to_string(total) + " entities");
  }

  inst.antenna_inv_alpha = spec.antenna_inv_alpha_over_k * inst.k;
  Rng env_rng(derive_seed(spec.seed, 0x656e76));
  inst.env_inv_alpha.reserve(spec.n_env);
  for (int i = 0; i < spec.n_env; ++i) {
    const double re = (spec.env_re_mean + spec.env_re_spread * env_rng.normal()) * inst.k;
    const double loss = spec.env_loss_mean + std::abs(spec.env_loss_spread * env_rng.normal());
    inst.env_inv_alpha.push_back(Complex(re, spec.loss_sign * loss * inst.k));
  }
  return inst;
}

namespace {

void add_measurement_noise(MatrixXc& s, double snr_db, std::uint64_t noise_seed) {
  const double mean_power = s.cwiseAbs2().mean();
  const double sigma = std::sqrt(mean_power / std::pow(10.0, snr_db / 10.0));
  Rng rng(derive_seed(noise_seed, 0x6e6f69));
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) s(r, c) += sigma * rng.complex_normal();
}

}  // namespace

ScatteringMatrix measure(const CavityInstance& cavity, const MetaConfig& config,
                         std::optional<double> noise_snr_db, std::uint64_t noise_seed) {
  if (config.size() != cavity.spec.n_meta)
    throw std::invalid_argument("measure: config length does not match meta-atom count");
  const int n = cavity.total_entities();
  const int na = cavity.spec.n_antennas;

  MatrixXc m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex g = -greens_coupling(cavity.positions[i], cavity.positions[j], cavity.k);
      m(i, j) = m(j, i) = g;
    }
  }
  for (int i = 0; i < na; ++i) m(i, i) = cavity.antenna_inv_alpha;
  for (int s = 0; s < cavity.spec.n_meta; ++s)
    m(na + s, na + s) = cavity.meta_inv_alpha(config.bits[s]);
  for (int e = 0; e < cavity.spec.n_env; ++e)
    m(na + cavity.spec.n_meta + e, na + cavity.spec.n_meta + e) = cavity.env_inv_alpha[e];

  Eigen::PartialPivLU<MatrixXc> lu(m);
  if (!(lu.rcond() > 1e-14)) throw std::runtime_error("measure: full dipole matrix is singular");

  MatrixXc rhs = MatrixXc::Zero(n, na);
  for (int i = 0; i < na; ++i) rhs(i, i) = 1.0;
  const MatrixXc cols = lu.solve(rhs);

  ScatteringMatrix s;
  s.roles = PortRoles::full(na);
  s.frequency_hz = cavity.spec.frequency_hz;
  s.entries = cols.topRows(na);
  if (noise_snr_db) add_measurement_noise(s.entries, *noise_snr_db, noise_seed);
  return s;
}

CompactModelParams sample_compact_params(int n_antennas, int n_meta, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x686964));
  CompactModelParams p(n_antennas, n_meta);
  const int n = p.size();
  p.alpha_a = Complex(1.0, 0.35) + 0.25 * rng.complex_normal();
  p.alpha_0 = Complex(0.9, 0.3) + 0.2 * rng.complex_normal();
  p.alpha_1 = Complex(-0.9, 0.3) + 0.2 * rng.complex_normal();
  // couplings strong enough that switching meta-atom states modulates the
  // antenna block deeply, as in a reverberant cavity
  const double off_scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      p.coupling_at(i, j) = (i == j) ? 0.25 * rng.complex_normal() : off_scale * rng.complex_normal();
    }
  }
  return p;
}

CompactModelParams reduced_compact_params(const CavityInstance& cavity) {
  const int na = cavity.spec.n_antennas;
  const int ns = cavity.spec.n_meta;
  const int ne = cavity.spec.n_env;
  const int np = na + ns;

  // off-diagonal couplings between all entities
  MatrixXc g = MatrixXc::Zero(np + ne, np + ne);
  for (int i = 0; i < np + ne; ++i)
    for (int j = i + 1; j < np + ne; ++j)
      g(i, j) = g(j, i) = -greens_coupling(cavity.positions[i], cavity.positions[j], cavity.k);

  CompactModelParams p(na, ns);
  p.alpha_a = cavity.antenna_inv_alpha;
  p.alpha_0 = cavity.meta_inv_alpha(0);
  p.alpha_1 = cavity.meta_inv_alpha(1);

  // eliminate the environment: C = G_PP - G_PE (D_E + G_EE)^{-1} G_EP
  MatrixXc coupling = g.topLeftCorner(np, np);
  if (ne > 0) {
    MatrixXc env = g.bottomRightCorner(ne, ne);
    for (int e = 0; e < ne; ++e) env(e, e) = cavity.env_inv_alpha[e];
    const MatrixXc cross = g.topRightCorner(np, ne);
    coupling -= cross * Eigen::PartialPivLU<MatrixXc>(env).solve(cross.transpose());
  }
  for (int i = 0; i < np; ++i)
    for (int j = i; j < np; ++j) p.coupling_at(i, j) = coupling(i, j);
  return p;
}

GroundTruth GroundTruth::dipole(const CavitySpec& spec) {
  GroundTruth t;
  t.kind_ = Kind::dipole_cavity;
  t.cavity_ = std::make_shared<CavityInstance>(build_cavity(spec));
  t.provenance_ = hex64(fnv1a64(spec.canonical_string()));
  return t;
}

GroundTruth GroundTruth::hidden_compact(CompactModelParams params, double frequency_hz,
                                        std::uint64_t seed) {
  GroundTruth t;
  t.kind_ = Kind::hidden_compact;
  t.hidden_params_ = std::make_shared<CompactModelParams>(std::move(params));
  t.hidden_frequency_hz_ = frequency_hz;
  t.hidden_seed_ = seed;
  std::ostringstream os;
  os << "hidden-compact;" << t.hidden_params_->n_antennas << ";" << t.hidden_params_->n_meta << ";"
     << seed;
  for (const auto& c : t.hidden_params_->coupling)
    os << ";" << format_double(c.real()) << "," << format_double(c.imag());
  t.provenance_ = hex64(fnv1a64(os.str()));
  return t;
}

int GroundTruth::n_antennas() const {
  return kind_ == Kind::dipole_cavity ? cavity_->spec.n_antennas : hidden_params_->n_antennas;
}

int GroundTruth::n_meta() const {
  return kind_ == Kind::dipole_cavity ? cavity_->spec.n_meta : hidden_params_->n_meta;
}

double GroundTruth::frequency_hz() const {
  return kind_ == Kind::dipole_cavity ? cavity_->spec.frequency_hz : hidden_frequency_hz_;
}

const CavityInstance& GroundTruth::cavity() const {
  if (kind_ != Kind::dipole_cavity)
    throw std::logic_error("GroundTruth: no cavity instance in hidden-compact mode");
  return *cavity_;
}

ScatteringMatrix GroundTruth::measure(const MetaConfig& config, std::optional<double> noise_snr_db,
                                      std::uint64_t noise_seed) const {
  if (kind_ == Kind::dipole_cavity)
    return metascat::measure(*cavity_, config, noise_snr_db, noise_seed);

  ScatteringMatrix s =
      scattering_block(*hidden_params_, config, PortRoles::full(hidden_params_->n_antennas));
  s.frequency_hz = hidden_frequency_hz_;
  if (noise_snr_db) {
    const double mean_power = s.entries.cwiseAbs2().mean();
    const double sigma = std::sqrt(mean_power / std::pow(10.0, *noise_snr_db / 10.0));
    Rng rng(derive_seed(noise_seed, 0x6e6f69));
    for (Eigen::Index c = 0; c < s.entries.cols(); ++c)
      for (Eigen::Index r = 0; r < s.entries.rows(); ++r)
        s.entries(r, c) += sigma * rng.complex_normal();
  }
  return s;
}

Dataset generate_dataset(const GroundTruth& truth, int n_data, std::uint64_t seed, bool phaseless,
                         std::optional<MaskArray> mask, std::optional<double> noise_snr_db) {
  if (n_data < 1) throw std::invalid_argument("generate_dataset: n_data must be >= 1");
  const int na = truth.n_antennas();
  if (mask && (mask->rows() != na || mask->cols() != na))
    throw std::invalid_argument("generate_dataset: mask shape must be n_antennas x n_antennas");

  Dataset d;
  d.header.n_antennas = na;
  d.header.n_meta = truth.n_meta();
  d.header.roles = PortRoles::full(na);
  d.header.frequency_hz = truth.frequency_hz();
  d.header.phaseless = phaseless;
  d.header.mask = std::move(mask);
  d.header.seed = seed;
  d.header.provenance = hex64(fnv1a64(truth.provenance_hash() + ";" + std::to_string(seed) + ";" +
                                      std::to_string(n_data) + ";" + (phaseless ? "1" : "0")));

  d.records.reserve(n_data);
  for (int i = 0; i < n_data; ++i) {
    Rng rng(derive_seed(seed, 0x636667, static_cast<std::uint64_t>(i)));
    MetaConfig config;
    config.bits.resize(truth.n_meta());
    for (auto& b : config.bits) b = rng.bernoulli() ? 1 : 0;

    const ScatteringMatrix s =
        truth.measure(config, noise_snr_db, derive_seed(seed, 0x6e7365, static_cast<std::uint64_t>(i)));
    DatasetRecord rec;
    rec.config = std::move(config);
    if (phaseless)
      rec.magnitudes = s.entries.cwiseAbs();
    else
      rec.values = s.entries;
    d.records.push_back(std::move(rec));
  }
  return d;
}

std::vector<MetaConfig> random_configs(int n_meta, int count, std::uint64_t seed) {
  std::vector<MetaConfig> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x65766c, static_cast<std::uint64_t>(i)));
    MetaConfig c;
    c.bits.resize(n_meta);
    for (auto& b : c.bits) b = rng.bernoulli() ? 1 : 0;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<MetaConfig> random_configs_excluding(int n_meta, int count, std::uint64_t seed,
                                                 const std::vector<MetaConfig>& exclude) {
  std::unordered_set<std::string> seen;
  for (const auto& c : exclude) seen.insert(c.to_string());
  std::vector<MetaConfig> out;
  out.reserve(count);
  std::uint64_t i = 0;
  while (static_cast<int>(out.size()) < count) {
    Rng rng(derive_seed(seed, 0x65766c, i++));
    MetaConfig c;
    c.bits.resize(n_meta);
    for (auto& b : c.bits) b = rng.bernoulli() ? 1 : 0;
    const std::string key = c.to_string();
    if (seen.insert(key).second) out.push_back(std::move(c));
    if (i > 100ULL * static_cast<std::uint64_t>(count) + 100000ULL)
      throw std::runtime_error("random_configs_excluding: configuration space exhausted");
  }
  return out;
}

}  // namespace metascat

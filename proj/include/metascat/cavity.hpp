#pragma once

#include <memory>
#include <optional>

#include "metascat/dataset.hpp"
#include "metascat/types.hpp"

namespace metascat {

inline constexpr double kSpeedOfLight = 299792458.0;

// Desk-scale virtual cavity:  antennas, binary-tunable meta-atoms and fixed
// environment scatterers as coupled point dipoles in a box.
struct CavitySpec {
  int n_antennas = 4;
  int n_meta = 16;
  int n_env = 64;
  Eigen::Vector3d box{0.4, 0.4, 0.4};  // meters
  double frequency_hz = 5.2e9;

  // Meta-atom Lorentzian response per binary state. The dipoles stand for
  // coarse-grained scatterer sections, so their polarizability scale is a
  // model parameter rather than a single-atom bound.
  double f_res_0_hz = 5.0e9;
  double f_res_1_hz = 5.4e9;
  double gamma_hz = 0.3e9;
  double chi = 1.0e-3;  // meters

  // Environment dipoles: inverse polarizability in units of the wavenumber
  // k. Re part ~ N(mean, spread); Im part = loss_sign * (loss_mean +
  // |loss_spread * N|) so every environment dipole dissipates.
  double env_re_mean = 0.0;
  double env_re_spread = 0.5;
  double env_loss_mean = 0.3;
  double env_loss_spread = 0.15;
  double loss_sign = -1.0;

  Complex antenna_inv_alpha_over_k{0.05, -0.25};

  double min_separation_m = 0.03;
  std::uint64_t seed = 1;

  void validate() const;
  std::string canonical_string() const;  // stable field dump for hashing
};

// Placed dipole system; a deterministic function of (spec, seed).
struct CavityInstance {
  CavitySpec spec;
  double k = 0.0;  // rad/m
  std::vector<Eigen::Vector3d> positions;  // antennas, then meta-atoms, then environment
  Complex antenna_inv_alpha;
  std::vector<Complex> env_inv_alpha;

  int total_entities() const { return spec.n_antennas + spec.n_meta + spec.n_env; }
  Complex meta_inv_alpha(int state) const;
};

// Scalar free-space coupling g = exp(ikr)/r (constants absorbed).
Complex greens_coupling(const Eigen::Vector3d& ri, const Eigen::Vector3d& rj, double k);

// alpha = chi f_res^2 / (f_res^2 - f^2 - i gamma f).
Complex lorentzian_polarizability(double f, double f_res, double gamma, double chi);

CavityInstance build_cavity(const CavitySpec& spec);

// Full coupled-dipole solve: diagonal 1/alpha, off-diagonal -g, then the
// antenna block of the inverse. Optional additive complex Gaussian noise
// with per-entry variance mean(|S|^2) / 10^(snr_db/10).
ScatteringMatrix measure(const CavityInstance& cavity, const MetaConfig& config,
                         std::optional<double> noise_snr_db = {}, std::uint64_t noise_seed = 0);

// Randomly drawn compact-model parameters suitable as a concealed ground
// truth: well-conditioned interaction matrix with strongly separated
// meta-atom states.
CompactModelParams sample_compact_params(int n_antennas, int n_meta, std::uint64_t seed);

// Exact reduced-basis representation of a dipole cavity: the environment
// block is eliminated by a Schur complement, leaving local inverse
// polarizabilities plus a configuration-independent coupling matrix whose
// diagonal carries the reverberation. scattering_block on the result equals
// measure() on the cavity.
CompactModelParams reduced_compact_params(const CavityInstance& cavity);

// Ground truth behind the measurement API: either the dipole cavity or a
// concealed compact model (for exact-recovery testing). The concealed
// parameters are not exposed through the measurement interface.
class GroundTruth {
 public:
  enum class Kind { dipole_cavity, hidden_compact };

  static GroundTruth dipole(const CavitySpec& spec);
  static GroundTruth hidden_compact(CompactModelParams params, double frequency_hz = 0.0,
                                    std::uint64_t seed = 0);

  Kind kind() const { return kind_; }
  int n_antennas() const;
  int n_meta() const;
  double frequency_hz() const;
  std::string provenance_hash() const { return provenance_; }

  ScatteringMatrix measure(const MetaConfig& config, std::optional<double> noise_snr_db = {},
                           std::uint64_t noise_seed = 0) const;

  const CavityInstance& cavity() const;

 private:
  GroundTruth() = default;

  Kind kind_ = Kind::dipole_cavity;
  std::shared_ptr<const CavityInstance> cavity_;
  std::shared_ptr<const CompactModelParams> hidden_params_;
  double hidden_frequency_hz_ = 0.0;
  std::uint64_t hidden_seed_ = 0;
  std::string provenance_;

  friend void save_ground_truth(const GroundTruth&, const std::string&);
  friend GroundTruth load_ground_truth(const std::string&);
};

// i.i.d. Bernoulli(1/2) configurations with per-record RNG streams, measured
// through the ground truth. Masked coefficients are flagged in the header;
// phaseless datasets keep magnitudes only.
Dataset generate_dataset(const GroundTruth& truth, int n_data, std::uint64_t seed,
                         bool phaseless = false, std::optional<MaskArray> mask = {},
                         std::optional<double> noise_snr_db = {});

// Random configurations avoiding a given set (for held-out evaluation).
std::vector<MetaConfig> random_configs(int n_meta, int count, std::uint64_t seed);
std::vector<MetaConfig> random_configs_excluding(int n_meta, int count, std::uint64_t seed,
                                                 const std::vector<MetaConfig>& exclude);

}  // namespace metascat

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metascat {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Binary metasurface configuration, one bit per meta-atom, index 0 first.
struct MetaConfig {
  std::vector<std::uint8_t> bits;

  MetaConfig() = default;
  explicit MetaConfig(std::vector<std::uint8_t> b) : bits(std::move(b)) { validate(); }

  int size() const { return static_cast<int>(bits.size()); }

  void validate() const {
    for (auto b : bits)
      if (b > 1) throw std::invalid_argument("MetaConfig: entries must be 0 or 1");
  }

  static MetaConfig from_string(const std::string& s) {
    MetaConfig c;
    c.bits.reserve(s.size());
    for (char ch : s) {
      if (ch != '0' && ch != '1')
        throw std::invalid_argument("MetaConfig: bitstring must contain only 0/1");
      c.bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return c;
  }

  std::string to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
    return s;
  }

  bool operator==(const MetaConfig& o) const { return bits == o.bits; }
};

// Which antenna ports transmit and which receive. Indices refer to the
// antenna block (0 .. n_antennas-1) of the interaction matrix.
struct PortRoles {
  int n_antennas = 0;
  std::vector<int> tx_ports;
  std::vector<int> rx_ports;

  int n_tx() const { return static_cast<int>(tx_ports.size()); }
  int n_rx() const { return static_cast<int>(rx_ports.size()); }

  void validate() const {
    if (n_antennas <= 0) throw std::invalid_argument("PortRoles: n_antennas must be positive");
    if (tx_ports.empty() || rx_ports.empty())
      throw std::invalid_argument("PortRoles: tx_ports and rx_ports must be non-empty");
    for (int p : tx_ports)
      if (p < 0 || p >= n_antennas) throw std::invalid_argument("PortRoles: tx port out of range");
    for (int p : rx_ports)
      if (p < 0 || p >= n_antennas) throw std::invalid_argument("PortRoles: rx port out of range");
  }

  // All antennas both transmit and receive (full scattering matrix).
  static PortRoles full(int n_antennas) {
    PortRoles r;
    r.n_antennas = n_antennas;
    for (int i = 0; i < n_antennas; ++i) {
      r.tx_ports.push_back(i);
      r.rx_ports.push_back(i);
    }
    return r;
  }

  bool operator==(const PortRoles& o) const {
    return n_antennas == o.n_antennas && tx_ports == o.tx_ports && rx_ports == o.rx_ports;
  }
};

// Learnable compact model: three local parameters plus a symmetric complex
// coupling matrix stored as its upper triangle (row-major, diagonal included).
struct CompactModelParams {
  int n_antennas = 0;
  int n_meta = 0;
  Complex alpha_a{0.0, 0.0};
  Complex alpha_0{0.0, 0.0};
  Complex alpha_1{0.0, 0.0};
  std::vector<Complex> coupling;  // (N+1)N/2 entries, N = n_antennas + n_meta

  CompactModelParams() = default;
  CompactModelParams(int na, int ns) : n_antennas(na), n_meta(ns) {
    coupling.assign(static_cast<std::size_t>(coupling_size(na + ns)), Complex(0.0, 0.0));
  }

  int size() const { return n_antennas + n_meta; }

  static int coupling_size(int n) { return (n + 1) * n / 2; }

  // Index of (i,j), i <= j, in the row-major upper triangle.
  int triangle_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const int n = size();
    return i * n - i * (i - 1) / 2 + (j - i);
  }

  Complex coupling_at(int i, int j) const { return coupling[triangle_index(i, j)]; }
  Complex& coupling_at(int i, int j) { return coupling[triangle_index(i, j)]; }

  MatrixXc coupling_matrix() const {
    const int n = size();
    MatrixXc c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) c(i, j) = c(j, i) = coupling_at(i, j);
    return c;
  }

  // Real learnables: 2*(3 + (N+1)N/2).
  int parameter_count() const { return 2 * (3 + coupling_size(size())); }
};

// Complex transfer matrix between rx and tx ports of a system.
struct ScatteringMatrix {
  MatrixXc entries;  // n_rx x n_tx
  PortRoles roles;
  double frequency_hz = 0.0;  // 0 when untagged

  void validate() const {
    roles.validate();
    if (entries.rows() != roles.n_rx() || entries.cols() != roles.n_tx())
      throw std::invalid_argument("ScatteringMatrix: dimensions do not match roles");
    if (!entries.allFinite())
      throw std::invalid_argument("ScatteringMatrix: entries must be finite");
  }
};

}  // namespace metascat

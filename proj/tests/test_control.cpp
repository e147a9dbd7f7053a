#include <doctest.h>

#include <cmath>

#include "metascat/control.hpp"
#include "metascat/rng.hpp"

using namespace metascat;

namespace {

VectorXc random_unit(int n, Rng& rng) {
  VectorXc v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

}  // namespace

TEST_CASE("focus wavefront closed forms") {
  VectorXc t(3);
  t << Complex(1, 0), Complex(0, 0), Complex(0, 0);
  VectorXc psi = focus_wavefront(t);
  CHECK((psi - t).norm() <= 1e-15);
  CHECK(deposited_energy(t, psi) == doctest::Approx(1.0).epsilon(1e-12));

  VectorXc t2(2);
  t2 << Complex(1, 0), Complex(0, 1);
  psi = focus_wavefront(t2);
  CHECK(std::abs(psi(0) - Complex(1, 0) / std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(psi(1) - Complex(0, -1) / std::sqrt(2.0)) <= 1e-15);
  CHECK(deposited_energy(t2, psi) == doctest::Approx(2.0).epsilon(1e-12));

  // destructive uniform case
  VectorXc t3(3);
  t3 << Complex(1, 0), Complex(-1, 0), Complex(0, 0);
  const VectorXc uni = VectorXc::Constant(3, Complex(1.0 / std::sqrt(3.0), 0));
  CHECK(deposited_energy(t3, uni) <= 1e-15);
  CHECK(deposited_energy(t3, focus_wavefront(t3)) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(focus_wavefront(VectorXc::Zero(3)), std::invalid_argument);
}

TEST_CASE("phase conjugation optimality (Cauchy-Schwarz)") {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    VectorXc tv(4);
    for (int i = 0; i < 4; ++i) tv(i) = rng.complex_normal();
    const double best = tv.squaredNorm();
    const VectorXc psi_rand = random_unit(4, rng);
    CHECK(deposited_energy(tv, psi_rand) <= best + 1e-12);
    CHECK(deposited_energy(tv, focus_wavefront(tv)) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("absorption wavefront") {
  MatrixXc s = MatrixXc::Zero(2, 2);
  s(0, 0) = 0.1;
  s(1, 1) = 0.9;
  const AbsorbResult res = absorb_wavefront(s);
  CHECK(res.reflected_power == doctest::Approx(0.01).epsilon(1e-10));
  CHECK(std::abs(res.wavefront(0)) == doctest::Approx(1.0).epsilon(1e-10));

  // unitary S reflects everything for every unit wavefront
  Rng rng(6);
  MatrixXc q(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i, j) = rng.complex_normal();
  const Eigen::HouseholderQR<MatrixXc> qr(q);
  const MatrixXc u = qr.householderQ();
  const AbsorbResult ur = absorb_wavefront(u);
  CHECK(ur.reflected_power == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(reflected_power(u, random_unit(3, rng)) == doctest::Approx(1.0).epsilon(1e-10));

  MatrixXc bad(2, 3);
  CHECK_THROWS_AS(absorb_wavefront(bad), std::invalid_argument);
}

TEST_CASE("eigen-minimality of the absorption wavefront") {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    MatrixXc s(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s(i, j) = 0.4 * rng.complex_normal();
    const AbsorbResult res = absorb_wavefront(s);
    CHECK(std::abs(reflected_power(s, res.wavefront) - res.reflected_power) <= 1e-10);
    // random probes can't do better
    for (int probe = 0; probe < 5; ++probe)
      CHECK(reflected_power(s, random_unit(4, rng)) >= res.reflected_power - 1e-12);
  }
}

TEST_CASE("select_best_config") {
  // synthetic predictor: a diagonal scattering matrix driven by the config bits
  const auto predict = [](const MetaConfig& c) {
    MatrixXc s = MatrixXc::Zero(2, 2);
    double v = 0.1;
    for (std::size_t i = 0; i < c.bits.size(); ++i) v += c.bits[i] * (0.2 + 0.1 * i);
    s(0, 1) = s(1, 0) = v;  // transmission
    s(0, 0) = s(1, 1) = 0.5 - 0.1 * v;
    return s;
  };
  std::vector<MetaConfig> pool;
  pool.push_back(MetaConfig::from_string("00"));
  pool.push_back(MetaConfig::from_string("10"));
  pool.push_back(MetaConfig::from_string("11"));
  pool.push_back(MetaConfig::from_string("01"));

  const BestConfig focus = select_best_config(predict, pool, ControlObjective::focus, 0);
  CHECK(focus.index == 2);  // both bits on maximizes the transmission

  // pool of one
  std::vector<MetaConfig> one{MetaConfig::from_string("01")};
  CHECK(select_best_config(predict, one, ControlObjective::focus, 0).index == 0);

  // permutation invariance up to the tie-break
  std::vector<MetaConfig> shuffled{pool[2], pool[0], pool[3], pool[1]};
  CHECK(select_best_config(predict, shuffled, ControlObjective::focus, 0).config ==
        focus.config);

  std::vector<MetaConfig> empty;
  CHECK_THROWS_AS(select_best_config(predict, empty, ControlObjective::focus, 0),
                  std::invalid_argument);
}

TEST_CASE("qpsk planted constellation is recovered exactly") {
  // pool of 20: 4 planted quadrature points at radius rho (the 95th
  // percentile lands on them) plus paired clutter that keeps the mean at 0
  const double rho = 2.0;
  std::vector<Complex> values;
  Rng rng(8);
  for (int i = 0; i < 8; ++i) {
    const Complex z = 0.35 * rng.complex_normal();
    values.push_back(z);
    values.push_back(-z);  // pairs keep the pool mean exactly at the origin
  }
  values.push_back(Complex(rho, 0));
  values.push_back(Complex(0, rho));
  values.push_back(Complex(-rho, 0));
  values.push_back(Complex(0, -rho));

  const Constellation con = qpsk_select_values(values);
  CHECK(con.evm <= 1e-10);
  CHECK(con.radius == doctest::Approx(rho).epsilon(1e-12));
  CHECK(con.pool_indices[0] == 16);
  CHECK(con.pool_indices[1] == 17);
  CHECK(con.pool_indices[2] == 18);
  CHECK(con.pool_indices[3] == 19);

  // returned phases, after subtracting theta, sit at k*pi/2
  for (int k = 0; k < 4; ++k) {
    double dphi = std::arg(con.points[k]) - (con.theta + k * M_PI_2);
    while (dphi > M_PI) dphi -= 2 * M_PI;
    while (dphi < -M_PI) dphi += 2 * M_PI;
    CHECK(std::abs(dphi) <= 1e-10);
  }

  std::vector<Complex> tiny{Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
  CHECK_THROWS_AS(qpsk_select_values(tiny), std::invalid_argument);
}

TEST_CASE("qpsk constellation symmetry under pool negation") {
  Rng rng(9);
  std::vector<Complex> values;
  for (int i = 0; i < 64; ++i) values.push_back(rng.complex_normal());
  const Constellation a = qpsk_select_values(values);
  std::vector<Complex> negated;
  for (const auto& v : values) negated.push_back(-v);
  const Constellation b = qpsk_select_values(negated);
  CHECK(a.pool_indices == b.pool_indices);
  CHECK(a.radius == doctest::Approx(b.radius).epsilon(1e-12));
  const double dtheta = std::fmod(std::abs(a.theta - b.theta), 2 * M_PI);
  CHECK(std::abs(dtheta - M_PI) <= 1e-9);
  CHECK(a.evm == doctest::Approx(b.evm).epsilon(1e-9));
}

TEST_CASE("constellation replay fit") {
  const double rho = 0.7, theta = 0.3;
  std::array<Complex, 4> pts;
  for (int k = 0; k < 4; ++k) pts[k] = std::polar(rho, theta + k * M_PI_2);
  const ConstellationFit fit = constellation_fit(pts);
  CHECK(fit.evm <= 1e-12);
  CHECK(fit.radius == doctest::Approx(rho).epsilon(1e-12));
  CHECK(fit.theta == doctest::Approx(theta).epsilon(1e-12));
  CHECK(fit.max_phase_error <= 1e-12);
}

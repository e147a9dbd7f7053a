#include <doctest.h>

#include <cmath>

#include "metascat/metrics.hpp"
#include "metascat/rng.hpp"

using namespace metascat;

namespace {

std::vector<Complex> random_series(int n, Rng& rng) {
  std::vector<Complex> s(n);
  for (auto& v : s) v = rng.complex_normal();
  return s;
}

}  // namespace

TEST_CASE("zeta basics") {
  Rng rng(1);
  const auto t = random_series(100, rng);

  CHECK(zeta_db(t, t) == 120.0);  // exact prediction hits the cap

  // constant predictor at the mean: 0 dB
  Complex mean(0, 0);
  for (const auto& v : t) mean += v;
  mean /= 100.0;
  std::vector<Complex> flat(100, mean);
  CHECK(std::abs(zeta_db(t, flat)) <= 1e-9);

  std::vector<Complex> short_series{Complex(1, 0)};
  CHECK_THROWS_AS(zeta_db(short_series, short_series), std::invalid_argument);
}

TEST_CASE("zeta with noise at a known variance ratio") {
  Rng rng(22);
  const int n = 10000;
  auto t = random_series(n, rng);
  std::vector<Complex> pred(n);
  // Var(noise) = Var(true)/10 -> 10 dB
  for (int i = 0; i < n; ++i) pred[i] = t[i] + std::sqrt(0.1) * rng.complex_normal();
  const double z = zeta_db(t, pred);
  CHECK(z == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("zeta invariances") {
  Rng rng(33);
  const auto t = random_series(500, rng);
  std::vector<Complex> pred(500);
  for (int i = 0; i < 500; ++i) pred[i] = t[i] + 0.1 * rng.complex_normal();
  const double base = zeta_db(t, pred);

  // common complex scale on both series
  const Complex scale(1.7, -2.3);
  std::vector<Complex> ts(500), ps(500);
  for (int i = 0; i < 500; ++i) {
    ts[i] = scale * t[i];
    ps[i] = scale * pred[i];
  }
  CHECK(zeta_db(ts, ps) == doctest::Approx(base).epsilon(1e-12));

  // common additive constant on both series
  for (int i = 0; i < 500; ++i) {
    ts[i] = t[i] + Complex(5, -7);
    ps[i] = pred[i] + Complex(5, -7);
  }
  CHECK(zeta_db(ts, ps) == doctest::Approx(base).epsilon(1e-12));

  // prediction rotated by a global phase: unchanged
  for (int i = 0; i < 500; ++i) ps[i] = std::polar(1.0, 0.9) * pred[i];
  CHECK(zeta_db(t, ps) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("joint zeta punishes wrong relative phases") {
  Rng rng(44);
  const int n = 200;
  std::vector<MatrixXc> t(n), good(n), bad(n);
  for (int i = 0; i < n; ++i) {
    MatrixXc m(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = rng.complex_normal();
    t[i] = m;
    good[i] = std::polar(1.0, 0.4) * m;  // one shared phase: fine
    bad[i] = m;
    bad[i](0, 0) *= std::polar(1.0, 2.0);  // per-coefficient phase: not fine
    bad[i](1, 0) *= std::polar(1.0, -1.2);
  }
  CHECK(zeta_joint_db(t, good) == 120.0);
  CHECK(zeta_joint_db(t, bad) < 10.0);
}

TEST_CASE("mi lower bound") {
  CHECK(mi_lower_bound(10.0, 10.0) == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(mi_lower_bound(3.0, inf) == doctest::Approx(std::log2(4.0)).epsilon(1e-12));
  CHECK(mi_lower_bound(inf, 1000.0) == doctest::Approx(std::log2(1001.0)).epsilon(1e-12));
  CHECK_THROWS_AS(mi_lower_bound(-1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(mi_lower_bound(10.0, 0.0), std::invalid_argument);

  // monotone in both arguments
  double prev = 0.0;
  for (double s : {0.1, 1.0, 10.0, 100.0}) {
    const double v = mi_lower_bound(s, 50.0);
    CHECK(v > prev);
    prev = v;
  }
  prev = 0.0;
  for (double z : {0.1, 1.0, 10.0, 100.0}) {
    const double v = mi_lower_bound(50.0, z);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("mi curve reproduces the qualitative crossing structure") {
  // low SNR: curves for different zeta overlap; high SNR: zeta-limited plateaus
  const double z10 = std::pow(10.0, 1.0), z30 = std::pow(10.0, 3.0);
  const double low_snr = std::pow(10.0, -2.0);
  CHECK(std::abs(mi_lower_bound(low_snr, z10) - mi_lower_bound(low_snr, z30)) < 0.01);
  const double high_snr = std::pow(10.0, 6.0);
  CHECK(mi_lower_bound(high_snr, z30) - mi_lower_bound(high_snr, z10) > 5.0);
  CHECK(mi_lower_bound(high_snr, z10) == doctest::Approx(std::log2(1 + z10)).epsilon(0.01));
}

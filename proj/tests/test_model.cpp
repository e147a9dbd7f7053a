#include <doctest.h>

#include "metascat/model.hpp"
#include "metascat/rng.hpp"

using namespace metascat;

namespace {

CompactModelParams two_entity_params(Complex alpha_a, Complex alpha_0, Complex alpha_1,
                                     const MatrixXc& c) {
  CompactModelParams p(1, 1);
  p.alpha_a = alpha_a;
  p.alpha_0 = alpha_0;
  p.alpha_1 = alpha_1;
  p.coupling_at(0, 0) = c(0, 0);
  p.coupling_at(0, 1) = c(0, 1);
  p.coupling_at(1, 1) = c(1, 1);
  return p;
}

CompactModelParams random_params(int na, int ns, std::uint64_t seed, double coupling_scale = 0.4) {
  Rng rng(seed);
  CompactModelParams p(na, ns);
  p.alpha_a = Complex(1.5, 0.2) + 0.3 * rng.complex_normal();
  p.alpha_0 = Complex(1.1, -0.4) + 0.3 * rng.complex_normal();
  p.alpha_1 = Complex(-1.2, 0.5) + 0.3 * rng.complex_normal();
  for (int i = 0; i < p.size(); ++i)
    for (int j = i; j < p.size(); ++j) p.coupling_at(i, j) = coupling_scale * rng.complex_normal();
  return p;
}

MetaConfig random_config(int ns, Rng& rng) {
  MetaConfig c;
  c.bits.resize(ns);
  for (auto& b : c.bits) b = rng.bernoulli() ? 1 : 0;
  return c;
}

}  // namespace

TEST_CASE("interaction matrix assembly") {
  MatrixXc c(2, 2);
  c << 0, 1, 1, 0;
  auto p = two_entity_params(2.0, 3.0, 5.0, c);

  MetaConfig c0 = MetaConfig::from_string("0");
  MatrixXc w = assemble_interaction_matrix(p, c0);
  CHECK(w(0, 0) == Complex(2, 0));
  CHECK(w(0, 1) == Complex(1, 0));
  CHECK(w(1, 0) == Complex(1, 0));
  CHECK(w(1, 1) == Complex(3, 0));

  // state flip changes exactly one diagonal entry
  MatrixXc w1 = assemble_interaction_matrix(p, MetaConfig::from_string("1"));
  CHECK(w1(1, 1) == Complex(5, 0));
  int diffs = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (w(i, j) != w1(i, j)) ++diffs;
  CHECK(diffs == 1);

  // diagonal reverberation term adds to the local term
  MatrixXc c2(2, 2);
  c2 << 0.5, 1, 1, -0.5;
  auto p2 = two_entity_params(2.0, 3.0, 5.0, c2);
  MatrixXc w2 = assemble_interaction_matrix(p2, c0);
  CHECK(w2(0, 0) == Complex(2.5, 0));
  CHECK(w2(1, 1) == Complex(2.5, 0));

  CHECK_THROWS_AS(assemble_interaction_matrix(p, MetaConfig::from_string("01")),
                  std::invalid_argument);
}

TEST_CASE("configuration locality across many flips") {
  Rng rng(99);
  auto p = random_params(2, 6, 5);
  MetaConfig base = random_config(6, rng);
  const MatrixXc w0 = assemble_interaction_matrix(p, base);
  for (int flip = 0; flip < 6; ++flip) {
    MetaConfig c = base;
    c.bits[flip] ^= 1;
    const MatrixXc w1 = assemble_interaction_matrix(p, c);
    int diffs = 0;
    for (int i = 0; i < p.size(); ++i)
      for (int j = 0; j < p.size(); ++j)
        if (w0(i, j) != w1(i, j)) ++diffs;
    CHECK(diffs == 1);
    CHECK(w0(2 + flip, 2 + flip) != w1(2 + flip, 2 + flip));
  }
}

TEST_CASE("parameter count identity") {
  for (int na : {1, 2, 4}) {
    for (int ns : {1, 3, 16}) {
      CompactModelParams p(na, ns);
      const int n = na + ns;
      CHECK(p.parameter_count() == 2 * (3 + (n + 1) * n / 2));
      CHECK(static_cast<int>(p.coupling.size()) == (n + 1) * n / 2);
    }
  }
}

TEST_CASE("scattering block closed forms") {
  MatrixXc c(2, 2);
  c << 0, 1, 1, 0;
  // W = [[2,1],[1,2]]: alpha_0 = 2 with zero diagonal coupling
  auto p = two_entity_params(2.0, 2.0, 5.0, c);
  auto s = scattering_block(p, MetaConfig::from_string("0"), PortRoles::full(1));
  CHECK(std::abs(s.entries(0, 0) - Complex(2.0 / 3.0, 0)) < 1e-15);

  // diagonal case W = diag(2,4) -> S = 0.5
  MatrixXc cz = MatrixXc::Zero(2, 2);
  auto pd = two_entity_params(2.0, 4.0, 5.0, cz);
  auto sd = scattering_block(pd, MetaConfig::from_string("0"), PortRoles::full(1));
  CHECK(std::abs(sd.entries(0, 0) - Complex(0.5, 0)) < 1e-15);
}

TEST_CASE("staged elimination matches the full-inverse oracle") {
  Rng rng(1234);
  // random symmetric complex 6x6, N_A=2, meta-atoms split across both states
  auto p = random_params(2, 4, 7);
  MetaConfig cfg = MetaConfig::from_string("0101");
  const MatrixXc w = assemble_interaction_matrix(p, cfg);
  const MatrixXc full_inv = w.inverse();
  auto s = scattering_block(p, cfg, PortRoles::full(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(s.entries(i, j) - full_inv(i, j)) <= 1e-12 * std::abs(full_inv(i, j)));

  // 200 random instances, N <= 20
  for (int t = 0; t < 200; ++t) {
    const int na = 1 + rng.uniform_int(4);
    const int ns = 1 + rng.uniform_int(20 - na);
    auto params = random_params(na, ns, 1000 + t);
    MetaConfig config = random_config(ns, rng);
    const MatrixXc wt = assemble_interaction_matrix(params, config);
    const MatrixXc inv = wt.inverse();
    auto st = scattering_block(params, config, PortRoles::full(na));
    double max_rel = 0;
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j)
        max_rel = std::max(max_rel, std::abs(st.entries(i, j) - inv(i, j)) / std::abs(inv(i, j)));
    CHECK(max_rel <= 1e-10);
  }
}

TEST_CASE("reciprocity of the scattering block") {
  Rng rng(55);
  for (int t = 0; t < 20; ++t) {
    auto p = random_params(3, 5, 300 + t);
    MetaConfig cfg = random_config(5, rng);
    auto s = scattering_block(p, cfg, PortRoles::full(3));
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        CHECK(std::abs(s.entries(i, j) - s.entries(j, i)) <=
              1e-12 * std::max(1.0, std::abs(s.entries(i, j))));
  }
}

TEST_CASE("staged solve applies the inverse") {
  Rng rng(77);
  auto p = random_params(2, 5, 42);
  MetaConfig cfg = MetaConfig::from_string("01101");
  const MatrixXc w = assemble_interaction_matrix(p, cfg);
  StagedInverse staged(w, 2, cfg);
  VectorXc b(7);
  for (int i = 0; i < 7; ++i) b(i) = rng.complex_normal();
  const VectorXc x = staged.solve(b);
  CHECK((w * x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("singular pivot is reported with its stage") {
  // alpha_1 chosen so the state-1 pivot block is exactly singular
  CompactModelParams p(1, 2);
  p.alpha_a = Complex(2.0, 0.0);
  p.alpha_0 = Complex(1.0, 0.0);
  p.alpha_1 = Complex(0.0, 0.0);
  // zero coupling: state-1 block is the zero matrix
  CHECK_THROWS_WITH_AS(scattering_block(p, MetaConfig::from_string("11"), PortRoles::full(1)),
                       doctest::Contains("state-1"), SingularPivotError);
}

TEST_CASE("apply_pilots") {
  ScatteringMatrix h;
  h.roles = PortRoles::full(2);
  h.entries = MatrixXc::Identity(2, 2);
  MatrixXc x(2, 1);
  x << Complex(1, 0), Complex(0, 0);
  CHECK((apply_pilots(h, x) - x).norm() == 0.0);

  h.entries << 0, 1, 1, 0;
  MatrixXc y = apply_pilots(h, x);
  CHECK(y(0, 0) == Complex(0, 0));
  CHECK(y(1, 0) == Complex(1, 0));

  // naive per-column oracle on random pilots
  Rng rng(8);
  MatrixXc hr(2, 2), xr(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      hr(i, j) = rng.complex_normal();
      xr(i, j) = rng.complex_normal();
    }
  h.entries = hr;
  const MatrixXc yr = apply_pilots(h, xr);
  for (int col = 0; col < 2; ++col) {
    VectorXc expect = VectorXc::Zero(2);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) expect(i) += hr(i, k) * xr(k, col);
    CHECK((yr.col(col) - expect).norm() <= 1e-14);
  }

  MatrixXc bad(3, 1);
  CHECK_THROWS_AS(apply_pilots(h, bad), std::invalid_argument);
}

#include <doctest.h>

#include <cmath>

#include "metascat/rng.hpp"

using namespace metascat;

TEST_CASE("rng determinism and independence of streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
}

TEST_CASE("normal moments are sane") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("complex normal has unit total variance") {
  Rng rng(9);
  const int n = 100000;
  double p = 0;
  Complex mean(0, 0);
  for (int i = 0; i < n; ++i) {
    const Complex z = rng.complex_normal();
    p += std::norm(z);
    mean += z;
  }
  CHECK(std::abs(p / n - 1.0) < 0.03);
  CHECK(std::abs(mean / static_cast<double>(n)) < 0.02);
}

TEST_CASE("truncated normal respects its bounds") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.truncated_normal(0.0, 0.2, 2.0);
    CHECK(std::abs(x) <= 0.4 + 1e-15);
  }
}

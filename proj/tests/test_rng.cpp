#include "doctest.h"

#include <cmath>
#include <set>

#include "fieldlab/models.hpp"
#include "fieldlab/rng.hpp"

using namespace fieldlab;

TEST_CASE("seed chain is a pure function of its inputs") {
  Index coords[2] = {3, -7};
  auto w1 = SeedChain(42).mix(1).mix_coords({coords, 2}).mix(0).word();
  auto w2 = SeedChain(42).mix(1).mix_coords({coords, 2}).mix(0).word();
  CHECK(w1 == w2);
  CHECK(SeedChain(42).mix(1).word() != SeedChain(42).mix(2).word());
  CHECK(SeedChain(42).mix(1).word() != SeedChain(43).mix(1).word());
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
}

TEST_CASE("u01 stays inside the open unit interval") {
  CHECK(u01(0) > 0.0);
  CHECK(u01(~std::uint64_t{0}) < 1.0);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) acc += u01(SeedChain(5).mix(i).word());
  CHECK(acc / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("inverse normal cdf reference values") {
  CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inv_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inv_normal_cdf(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(inv_normal_cdf(1.0 - 0.0013498980316300946) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(inv_normal_cdf(0.0013498980316300946) == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK_THROWS_AS(inv_normal_cdf(0.0), std::invalid_argument);
}

TEST_CASE("innovation moments") {
  const int n = 40000;
  SUBCASE("rademacher is a sign") {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = Innovation::rademacher().sample(SeedChain(9).mix(i).word());
      CHECK((v == 1.0 || v == -1.0));
      mean += v;
    }
    CHECK(std::fabs(mean / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  }
  SUBCASE("uniform bounds and mean") {
    double mean = 0.0;
    auto dist = Innovation::uniform(-2.0, 6.0);
    for (int i = 0; i < n; ++i) {
      double v = dist.sample(SeedChain(11).mix(i).word());
      CHECK(v >= -2.0);
      CHECK(v < 6.0);
      mean += v;
    }
    // sd of the mean: (b-a)/sqrt(12 n)
    CHECK(std::fabs(mean / n - 2.0) < 4.0 * 8.0 / std::sqrt(12.0 * n));
  }
  SUBCASE("gaussian second moment") {
    double m2 = 0.0;
    auto dist = Innovation::gaussian(1.5);
    for (int i = 0; i < n; ++i) {
      double v = dist.sample(SeedChain(13).mix(i).word());
      m2 += v * v;
    }
    CHECK(m2 / n == doctest::Approx(2.25).epsilon(0.05));
  }
  SUBCASE("pareto p-th moment matches beta/(beta-p) and is symmetric") {
    auto dist = Innovation::pareto(3.0);
    double mp = 0.0, mean = 0.0;
    const double p = 1.5;
    for (int i = 0; i < n; ++i) {
      double v = dist.sample(SeedChain(17).mix(i).word());
      mp += std::pow(std::fabs(v), p);
      mean += v;
    }
    CHECK(mp / n == doctest::Approx(3.0 / (3.0 - p)).epsilon(0.05));
    CHECK(std::fabs(mean / n) < 0.1);
    CHECK(dist.centered());
  }
  SUBCASE("point mass") {
    CHECK(Innovation::point_mass(2.5).sample(123) == 2.5);
    CHECK(!Innovation::point_mass(2.5).centered());
    CHECK(Innovation::point_mass(0.0).centered());
  }
}

#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "fieldlab/grid.hpp"
#include "fieldlab/rng.hpp"

using namespace fieldlab;

namespace {

// Independent point-count oracle: walk every lattice point.
std::uint64_t count_points(const Rect& r) {
  std::uint64_t n = 0;
  MultiIndex p = r.lower();
  do {
    ++n;
  } while (r.next_point(p));
  return n;
}

// Brute-force maximizer over all size-d0 subsets via recursive choice,
// independent of the bitmask enumeration in the implementation.
double pi_oracle(const MultiIndex& n, int d0, double p) {
  const int d = n.dim();
  std::vector<int> pick;
  double best = 0.0;
  auto rec = [&](auto&& self, int from, int left) -> void {
    if (left == 0) {
      double prod = 1.0;
      std::vector<bool> in(static_cast<std::size_t>(d), false);
      for (int i : pick) in[static_cast<std::size_t>(i)] = true;
      for (int l = 0; l < d; ++l) {
        double nl = static_cast<double>(n[l]);
        prod *= in[static_cast<std::size_t>(l)] ? std::pow(nl, 1.0 / p) : nl;
      }
      best = std::max(best, prod);
      return;
    }
    for (int i = from; i <= d - left; ++i) {
      pick.push_back(i);
      self(self, i + 1, left - 1);
      pick.pop_back();
    }
  };
  rec(rec, 0, d0);
  return best;
}

}  // namespace

TEST_CASE("volume on hand-checked rectangles") {
  CHECK(volume(Rect({1, 1}, {3, 4})) == 12);
  CHECK(volume(Rect({5, -2, 7}, {5, -2, 7})) == 1);
  CHECK(volume(Rect({1, 1, 1}, {2, 5, 7})) == 70);
  CHECK(count_points(Rect({1, 1, 1}, {2, 5, 7})) == 70);
}

TEST_CASE("volume equals exhaustive point count") {
  std::uint64_t seed = 99;
  for (int d = 1; d <= 4; ++d) {
    for (int rep = 0; rep < 20; ++rep) {
      MultiIndex lo = MultiIndex::zeros(d), hi = MultiIndex::zeros(d);
      for (int l = 0; l < d; ++l) {
        std::uint64_t w = SeedChain(seed++).mix(l).word();
        lo[l] = static_cast<Index>(w % 7) - 3;
        hi[l] = lo[l] + static_cast<Index>((w >> 8) % 6);
      }
      Rect r(lo, hi);
      CHECK(volume(r) == count_points(r));
    }
  }
}

TEST_CASE("rect invariants and indexing") {
  CHECK_THROWS_AS(Rect({2, 1}, {1, 5}), std::invalid_argument);
  Rect r({1, 1}, {2, 3});
  CHECK(r.contains(MultiIndex{2, 2}));
  CHECK(!r.contains(MultiIndex{0, 2}));
  // row-major: last axis fastest
  CHECK(r.flat_index({1, 1}) == 0);
  CHECK(r.flat_index({1, 2}) == 1);
  CHECK(r.flat_index({2, 1}) == 3);
  for (std::uint64_t f = 0; f < volume(r); ++f)
    CHECK(r.flat_index(r.point_at(f)) == f);

  MultiIndex p = r.lower();
  std::uint64_t steps = 1;
  while (r.next_point(p)) ++steps;
  CHECK(steps == volume(r));
}

TEST_CASE("partial order") {
  CHECK(leq(MultiIndex{1, 2}, MultiIndex{1, 3}));
  CHECK(!leq(MultiIndex{2, 2}, MultiIndex{1, 3}));
  CHECK(coord_min(MultiIndex{1, 5}, MultiIndex{3, 2}) == MultiIndex{1, 2});
  CHECK(linf_norm(MultiIndex{-4, 2}) == 4);
}

TEST_CASE("dyadic_upper") {
  CHECK(dyadic_upper(MultiIndex{0, 0}) == MultiIndex{1, 1});
  CHECK(dyadic_upper(MultiIndex{3, 1}) == MultiIndex{8, 2});
  CHECK(dyadic_upper(MultiIndex{10, 10, 10}) == MultiIndex{1024, 1024, 1024});
  CHECK_THROWS_AS(dyadic_upper(MultiIndex{-1}), std::invalid_argument);
  CHECK_THROWS_AS(dyadic_upper(MultiIndex{63}), std::overflow_error);
}

TEST_CASE("pi_normalizer closed forms") {
  // equal coordinates: N^{d0/p + d - d0}
  for (int d0 = 0; d0 <= 3; ++d0) {
    double p = 1.7, N = 5.0;
    MultiIndex n = MultiIndex::filled(3, 5);
    CHECK(pi_normalizer(n, d0, p) ==
          doctest::Approx(std::pow(N, d0 / p + 3.0 - d0)).epsilon(1e-12));
  }
  // d0 = d reduces to |n|^{1/p}
  MultiIndex n{2, 3, 7};
  CHECK(pi_normalizer(n, 3, 2.0) == doctest::Approx(std::sqrt(42.0)).epsilon(1e-12));
  // hand-enumerated 2-d case
  CHECK(pi_normalizer(MultiIndex{4, 9}, 1, 2.0) == doctest::Approx(18.0).epsilon(1e-12));
}

TEST_CASE("pi_normalizer matches subset oracle and is monotone in d0") {
  std::uint64_t seed = 7;
  for (int d = 1; d <= 5; ++d) {
    for (int rep = 0; rep < 10; ++rep) {
      MultiIndex n = MultiIndex::zeros(d);
      for (int l = 0; l < d; ++l)
        n[l] = 1 + static_cast<Index>(SeedChain(seed++).mix(l).word() % 12);
      double p = 1.0 + u01(SeedChain(seed++).word()) * 2.0;
      double prev = 0.0;
      for (int d0 = 0; d0 <= d; ++d0) {
        double got = pi_normalizer(n, d0, p);
        CHECK(got == doctest::Approx(pi_oracle(n, d0, p)).epsilon(1e-12));
        if (d0 > 0) CHECK(got <= prev * (1.0 + 1e-12));
        prev = got;
      }
    }
  }
}

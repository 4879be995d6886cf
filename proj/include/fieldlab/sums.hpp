#pragma once

#include <vector>

#include "fieldlab/grid.hpp"
#include "fieldlab/models.hpp"

namespace fieldlab {

// Summed-area table over a [1, n] region: entry at n holds S_n, the sum of
// the field over 1 <= i <= n. Built by one compensated cumulative pass per
// axis so rounding drift stays far below the statistics it feeds.
class PrefixTable {
 public:
  explicit PrefixTable(const FieldTensor& tensor);

  const Rect& region() const { return region_; }
  const SpaceSpec& space() const { return space_; }
  int m() const { return space_.m; }

  std::span<const double> at(const MultiIndex& n) const;
  double norm_at(const MultiIndex& n) const;

 private:
  Rect region_;
  SpaceSpec space_;
  std::vector<double> table_;
};

// Sum of the field over r, read off with 2^d signed corner lookups.
std::vector<double> rect_sum(const PrefixTable& prefix, const Rect& r);

// |N|^{-1/p} max_{1 <= n <= N} |S_n|_B.
double max_normalized_rect(const PrefixTable& prefix, const MultiIndex& N,
                           double p);

// Censored sup statistic: sup over n in the table with max n >= N0 of
// |S_n|_B / |n|^{1/p}. The censoring horizon is the table region itself.
double sup_tail_statistic(const PrefixTable& prefix, Index N0, double p);

// sup_tail_statistic for every threshold 1..max side in one table scan;
// profile[k-1] corresponds to N0 = k. Nonincreasing by construction.
std::vector<double> sup_tail_profile(const PrefixTable& prefix, double p);

// Diagonal trajectory (n, |S_{n 1}|_B / n^{d/p}); the region must be a cube.
struct TrajectoryPoint {
  Index n;
  double value;
};
std::vector<TrajectoryPoint> square_trajectory(const PrefixTable& prefix,
                                               double p);

// Diagonal trajectory under an arbitrary normalizer(n).
template <class Normalizer>
std::vector<TrajectoryPoint> square_trajectory_with(const PrefixTable& prefix,
                                                    Normalizer&& normalizer) {
  const Rect& r = prefix.region();
  const Index side = r.side(0);
  for (int l = 1; l < r.dim(); ++l)
    if (r.side(l) != side)
      throw std::invalid_argument("square trajectory requires a cubic region");
  std::vector<TrajectoryPoint> out;
  out.reserve(static_cast<std::size_t>(side));
  for (Index n = 1; n <= side; ++n) {
    MultiIndex diag = MultiIndex::filled(r.dim(), n);
    out.push_back({n, prefix.norm_at(diag) / normalizer(n)});
  }
  return out;
}

}  // namespace fieldlab

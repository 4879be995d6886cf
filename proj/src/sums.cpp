#include "fieldlab/sums.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldlab {

namespace {

double pow_volume(const MultiIndex& n, double inv_p) {
  double v = 1.0;
  for (int i = 0; i < n.dim(); ++i) v *= static_cast<double>(n[i]);
  return std::pow(v, inv_p);
}

}  // namespace

PrefixTable::PrefixTable(const FieldTensor& tensor)
    : region_(tensor.region), space_(tensor.space), table_(tensor.values) {
  if (!(region_.lower() == MultiIndex::ones(region_.dim())))
    throw std::invalid_argument("prefix table requires lower corner 1");

  const int d = region_.dim();
  const int m = space_.m;
  const std::uint64_t vol = region_.volume();

  // Strides in units of components.
  std::vector<std::uint64_t> stride(static_cast<std::size_t>(d));
  std::uint64_t s = static_cast<std::uint64_t>(m);
  for (int i = d - 1; i >= 0; --i) {
    stride[static_cast<std::size_t>(i)] = s;
    s *= static_cast<std::uint64_t>(region_.side(i));
  }

  // One Kahan-compensated running sum per line and axis.
  for (int axis = 0; axis < d; ++axis) {
    const std::uint64_t len = static_cast<std::uint64_t>(region_.side(axis));
    const std::uint64_t ax_stride = stride[static_cast<std::size_t>(axis)];
    const std::uint64_t lines = vol / len;
    for (std::uint64_t line = 0; line < lines; ++line) {
      // Decompose the line id into the base offset with axis coordinate 0.
      std::uint64_t rest = line, base = 0;
      for (int i = d - 1; i >= 0; --i) {
        if (i == axis) continue;
        std::uint64_t side = static_cast<std::uint64_t>(region_.side(i));
        base += (rest % side) * stride[static_cast<std::size_t>(i)];
        rest /= side;
      }
      for (int c = 0; c < m; ++c) {
        double run = 0.0, carry = 0.0;
        std::uint64_t idx = base + static_cast<std::uint64_t>(c);
        for (std::uint64_t k = 0; k < len; ++k, idx += ax_stride) {
          double y = table_[idx] - carry;
          double t = run + y;
          carry = (t - run) - y;
          run = t;
          table_[idx] = run;
        }
      }
    }
  }
}

std::span<const double> PrefixTable::at(const MultiIndex& n) const {
  std::uint64_t idx = region_.flat_index(n) * static_cast<std::uint64_t>(space_.m);
  return {table_.data() + idx, static_cast<std::size_t>(space_.m)};
}

double PrefixTable::norm_at(const MultiIndex& n) const {
  return vec_norm(at(n), space_);
}

std::vector<double> rect_sum(const PrefixTable& prefix, const Rect& r) {
  const Rect& reg = prefix.region();
  if (r.dim() != reg.dim()) throw std::invalid_argument("dimension mismatch");
  if (!leq(reg.lower(), r.lower()) || !leq(r.upper(), reg.upper()))
    throw std::out_of_range("rectangle outside prefix region");

  const int d = r.dim();
  const int m = prefix.m();
  std::vector<double> acc(static_cast<std::size_t>(m), 0.0);
  MultiIndex corner = r.upper();
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    bool zero = false;
    for (int l = 0; l < d; ++l) {
      corner[l] = (mask >> l) & 1u ? r.lower()[l] - 1 : r.upper()[l];
      if (corner[l] < 1) zero = true;
    }
    if (zero) continue;
    double sign = __builtin_popcount(mask) % 2 == 0 ? 1.0 : -1.0;
    std::span<const double> v = prefix.at(corner);
    for (int c = 0; c < m; ++c) acc[static_cast<std::size_t>(c)] += sign * v[static_cast<std::size_t>(c)];
  }
  return acc;
}

double max_normalized_rect(const PrefixTable& prefix, const MultiIndex& N,
                           double p) {
  const Rect& reg = prefix.region();
  if (!reg.contains(N)) throw std::out_of_range("N outside prefix region");
  Rect scan(MultiIndex::ones(N.dim()), N);
  double best = 0.0;
  MultiIndex n = scan.lower();
  do {
    double v = prefix.norm_at(n);
    if (v > best) best = v;
  } while (scan.next_point(n));
  return best / pow_volume(N, 1.0 / p);
}

std::vector<double> sup_tail_profile(const PrefixTable& prefix, double p) {
  const Rect& reg = prefix.region();
  Index max_side = 0;
  for (int l = 0; l < reg.dim(); ++l)
    if (reg.side(l) > max_side) max_side = reg.side(l);

  // best[k-1] = sup over n with max n == k, then suffix-maximized.
  std::vector<double> best(static_cast<std::size_t>(max_side), 0.0);
  const double inv_p = 1.0 / p;
  MultiIndex n = reg.lower();
  do {
    double stat = prefix.norm_at(n) / pow_volume(n, inv_p);
    Index k = max_coord(n);
    double& slot = best[static_cast<std::size_t>(k - 1)];
    if (stat > slot) slot = stat;
  } while (reg.next_point(n));
  for (Index k = max_side - 1; k >= 1; --k)
    best[static_cast<std::size_t>(k - 1)] =
        std::max(best[static_cast<std::size_t>(k - 1)], best[static_cast<std::size_t>(k)]);
  return best;
}

double sup_tail_statistic(const PrefixTable& prefix, Index N0, double p) {
  const Rect& reg = prefix.region();
  Index max_side = 0;
  for (int l = 0; l < reg.dim(); ++l)
    if (reg.side(l) > max_side) max_side = reg.side(l);
  if (N0 < 1 || N0 > max_side)
    throw std::invalid_argument("N0 must lie in [1, max side]");
  return sup_tail_profile(prefix, p)[static_cast<std::size_t>(N0 - 1)];
}

std::vector<TrajectoryPoint> square_trajectory(const PrefixTable& prefix,
                                               double p) {
  const double exponent = static_cast<double>(prefix.region().dim()) / p;
  return square_trajectory_with(prefix, [exponent](Index n) {
    return std::pow(static_cast<double>(n), exponent);
  });
}

}  // namespace fieldlab

#include "fieldlab/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace fieldlab {

namespace {

void require_same_dim(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("MultiIndex dimension mismatch: " +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
}

}  // namespace

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a, b);
  MultiIndex r = a;
  for (int i = 0; i < a.dim(); ++i) r[i] += b[i];
  return r;
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a, b);
  MultiIndex r = a;
  for (int i = 0; i < a.dim(); ++i) r[i] -= b[i];
  return r;
}

bool leq(const MultiIndex& i, const MultiIndex& j) {
  require_same_dim(i, j);
  for (int l = 0; l < i.dim(); ++l)
    if (i[l] > j[l]) return false;
  return true;
}

MultiIndex coord_min(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a, b);
  MultiIndex r = a;
  for (int i = 0; i < a.dim(); ++i)
    if (b[i] < r[i]) r[i] = b[i];
  return r;
}

MultiIndex coord_max(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a, b);
  MultiIndex r = a;
  for (int i = 0; i < a.dim(); ++i)
    if (b[i] > r[i]) r[i] = b[i];
  return r;
}

Index max_coord(const MultiIndex& a) {
  if (a.dim() == 0) throw std::invalid_argument("max_coord of empty index");
  Index m = a[0];
  for (int i = 1; i < a.dim(); ++i)
    if (a[i] > m) m = a[i];
  return m;
}

Index linf_norm(const MultiIndex& a) {
  Index m = 0;
  for (int i = 0; i < a.dim(); ++i) {
    Index v = a[i] < 0 ? -a[i] : a[i];
    if (v > m) m = v;
  }
  return m;
}

Rect::Rect(MultiIndex lower, MultiIndex upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require_same_dim(lower_, upper_);
  if (lower_.dim() < 1) throw std::invalid_argument("Rect requires d >= 1");
  if (!leq(lower_, upper_))
    throw std::invalid_argument("Rect lower corner must be <= upper corner");
  unsigned __int128 v = 1;
  for (int i = 0; i < dim(); ++i) {
    v *= static_cast<unsigned __int128>(side(i));
    if (v > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("Rect volume overflows 64-bit range");
  }
  volume_ = static_cast<std::uint64_t>(v);
}

Rect Rect::unit_box(const MultiIndex& upper) {
  return Rect(MultiIndex::ones(upper.dim()), upper);
}

bool Rect::contains(const MultiIndex& p) const {
  return leq(lower_, p) && leq(p, upper_);
}

std::uint64_t Rect::flat_index(const MultiIndex& p) const {
  if (!contains(p)) throw std::out_of_range("point outside Rect");
  std::uint64_t idx = 0;
  for (int i = 0; i < dim(); ++i) {
    idx = idx * static_cast<std::uint64_t>(side(i)) +
          static_cast<std::uint64_t>(p[i] - lower_[i]);
  }
  return idx;
}

MultiIndex Rect::point_at(std::uint64_t flat) const {
  if (flat >= volume_) throw std::out_of_range("flat index outside Rect");
  MultiIndex p = lower_;
  for (int i = dim() - 1; i >= 0; --i) {
    std::uint64_t s = static_cast<std::uint64_t>(side(i));
    p[i] = lower_[i] + static_cast<Index>(flat % s);
    flat /= s;
  }
  return p;
}

bool Rect::next_point(MultiIndex& p) const {
  for (int i = dim() - 1; i >= 0; --i) {
    if (p[i] < upper_[i]) {
      ++p[i];
      return true;
    }
    p[i] = lower_[i];
  }
  return false;
}

Rect Rect::padded(Index radius) const {
  MultiIndex lo = lower_, hi = upper_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= radius;
    hi[i] += radius;
  }
  return Rect(lo, hi);
}

std::uint64_t volume(const Rect& r) { return r.volume(); }

MultiIndex dyadic_upper(const MultiIndex& exponents) {
  MultiIndex r = exponents;
  for (int i = 0; i < r.dim(); ++i) {
    Index e = exponents[i];
    if (e < 0) throw std::invalid_argument("dyadic exponent must be >= 0");
    if (e >= 63) throw std::overflow_error("2^" + std::to_string(e) +
                                           " exceeds lattice index range");
    r[i] = Index{1} << e;
  }
  return r;
}

double pi_normalizer(const MultiIndex& n, int d0, double p) {
  const int d = n.dim();
  if (d0 < 0 || d0 > d)
    throw std::invalid_argument("pi_normalizer requires 0 <= d0 <= d");
  if (!(p > 1.0)) throw std::invalid_argument("pi_normalizer requires p > 1");
  if (d > 25) throw std::invalid_argument("pi_normalizer subset enumeration capped at d <= 25");
  for (int i = 0; i < d; ++i)
    if (n[i] < 1) throw std::invalid_argument("pi_normalizer requires n >= 1");

  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    if (static_cast<int>(__builtin_popcount(mask)) != d0) continue;
    double prod = 1.0;
    for (int l = 0; l < d; ++l) {
      double nl = static_cast<double>(n[l]);
      prod *= (mask >> l) & 1u ? std::pow(nl, 1.0 / p) : nl;
    }
    if (prod > best) best = prod;
  }
  return best;
}

}  // namespace fieldlab

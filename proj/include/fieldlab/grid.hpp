#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fieldlab {

using Index = std::int64_t;

// Lattice point of Z^d. All indices interacting in one operation share d.
struct MultiIndex {
  std::vector<Index> c;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<Index> coords) : c(std::move(coords)) {}
  MultiIndex(std::initializer_list<Index> coords) : c(coords) {}

  static MultiIndex filled(int dim, Index value) {
    return MultiIndex(std::vector<Index>(static_cast<std::size_t>(dim), value));
  }
  static MultiIndex zeros(int dim) { return filled(dim, 0); }
  static MultiIndex ones(int dim) { return filled(dim, 1); }

  int dim() const { return static_cast<int>(c.size()); }
  Index operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  Index& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::span<const Index> coords() const { return {c.data(), c.size()}; }

  bool operator==(const MultiIndex&) const = default;
};

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);

// Componentwise partial order: i ≼ j iff i_l <= j_l for every l.
bool leq(const MultiIndex& i, const MultiIndex& j);
MultiIndex coord_min(const MultiIndex& a, const MultiIndex& b);
MultiIndex coord_max(const MultiIndex& a, const MultiIndex& b);
Index max_coord(const MultiIndex& a);
Index linf_norm(const MultiIndex& a);

// Axis-aligned box {i : lower ≼ i ≼ upper}; nonempty by construction.
// Iteration and flat indexing are row-major in coordinate order (last axis
// fastest), which fixes the layout seen by streaming consumers.
class Rect {
 public:
  Rect() : Rect(MultiIndex{0}, MultiIndex{0}) {}
  Rect(MultiIndex lower, MultiIndex upper);
  static Rect unit_box(const MultiIndex& upper);  // [1, upper]

  const MultiIndex& lower() const { return lower_; }
  const MultiIndex& upper() const { return upper_; }
  int dim() const { return lower_.dim(); }
  Index side(int axis) const { return upper_[axis] - lower_[axis] + 1; }
  std::uint64_t volume() const { return volume_; }
  bool contains(const MultiIndex& p) const;

  std::uint64_t flat_index(const MultiIndex& p) const;
  MultiIndex point_at(std::uint64_t flat) const;
  // Advances p to the next point in row-major order; returns false once p
  // was the upper corner (p is then reset to lower).
  bool next_point(MultiIndex& p) const;
  Rect padded(Index radius) const;

  bool operator==(const Rect&) const = default;

 private:
  MultiIndex lower_, upper_;
  std::uint64_t volume_ = 1;
};

std::uint64_t volume(const Rect& r);

// (2^{N_l})_l for nonnegative exponents; throws on overflow of Index.
MultiIndex dyadic_upper(const MultiIndex& exponents);

// max over subsets I of {1..d} with |I| = d0 of
//   prod_{l in I} n_l^{1/p} * prod_{l not in I} n_l.
// Subsets are enumerated directly; d is tiny in every experiment.
double pi_normalizer(const MultiIndex& n, int d0, double p);

}  // namespace fieldlab

#pragma once

#include <span>
#include <vector>

namespace fieldlab {

enum class NormKind { Euclidean, EllS };

// R^m stand-in for the value space of a field. The smoothness exponent is
// metadata used only to pick admissible test exponents p < r.
struct SpaceSpec {
  int m = 1;
  NormKind kind = NormKind::Euclidean;
  double s = 2.0;  // only for EllS

  double smoothness() const {
    if (kind == NormKind::Euclidean) return 2.0;
    return s < 2.0 ? s : 2.0;
  }
  bool operator==(const SpaceSpec&) const = default;
};

double vec_norm(std::span<const double> x, const SpaceSpec& space);

// Value in the space surrogate: m reals plus the norm that applies to them.
struct VecB {
  std::vector<double> v;
  SpaceSpec space;

  double norm() const { return vec_norm({v.data(), v.size()}, space); }
};

}  // namespace fieldlab

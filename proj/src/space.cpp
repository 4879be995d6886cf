#include "fieldlab/space.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldlab {

double vec_norm(std::span<const double> x, const SpaceSpec& space) {
  if (space.kind == NormKind::Euclidean) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }
  if (!(space.s >= 1.0)) throw std::invalid_argument("ell_s norm requires s >= 1");
  double s = 0.0;
  for (double v : x) s += std::pow(std::fabs(v), space.s);
  return std::pow(s, 1.0 / space.s);
}

}  // namespace fieldlab

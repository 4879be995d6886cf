#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fieldlab/grid.hpp"
#include "fieldlab/rng.hpp"
#include "fieldlab/space.hpp"

namespace fieldlab {

// ---------------------------------------------------------------------------
// Innovations: each component is a measurable deterministic function of one
// 64-bit word. Pareto is realized two-sided (random sign), so it is exactly
// centered for every tail index.
// ---------------------------------------------------------------------------
struct Innovation {
  enum class Kind { Rademacher, Uniform, Gaussian, Pareto, PointMass };
  Kind kind = Kind::Rademacher;
  double a = 0.0;  // Uniform lower / Gaussian sigma / Pareto tail index / PointMass value
  double b = 0.0;  // Uniform upper

  double sample(std::uint64_t word) const;
  bool centered() const;

  static Innovation rademacher() { return {Kind::Rademacher, 0, 0}; }
  static Innovation uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static Innovation gaussian(double sigma) { return {Kind::Gaussian, sigma, 0}; }
  static Innovation pareto(double tail) { return {Kind::Pareto, tail, 0}; }
  static Innovation point_mass(double v) { return {Kind::PointMass, v, 0}; }
};

// Componentwise map applied after the linear part of a Bernoulli field.
struct GMap {
  enum class Kind { Identity, Clamp, PowerAbs };
  Kind kind = Kind::Identity;
  double lo = -1.0, hi = 1.0;  // Clamp bounds
  double exponent = 1.0;       // PowerAbs: sign(x) |x|^exponent

  double apply(double x) const;
  double holder_alpha() const;
  double holder_const() const;
};

// ---------------------------------------------------------------------------
// Model family. All coefficient windows are finite by construction.
// ---------------------------------------------------------------------------

struct IidModel {
  int dim = 1;
  Innovation dist;
};

// One-dimensional martingale difference: d_j = xi_j * vol_j with
// vol_j = 1 + coupling * tanh(sum of the previous `window` xi values).
// The volatility is a bounded function of the past, so E[d_j | past] = 0
// whenever xi is centered.
struct AxisMartingale {
  Innovation xi;
  int window = 0;
  double coupling = 0.0;  // in [0, 1)
};

struct ProductOmModel {
  std::vector<AxisMartingale> axes;
};

struct DShiftAxis {
  std::vector<double> filter;  // causal taps a_0..a_K
  Innovation dist;
};

enum class DShiftG { Sum, Product, ClampedSum };

// X_i = g(f_1(axis-1 window), ..., f_d(axis-d window)) with mutually
// independent axis innovation sequences; scalar-valued (m = 1).
struct DShiftModel {
  std::vector<DShiftAxis> axes;
  DShiftG g = DShiftG::Sum;
  double clamp_lo = -1.0, clamp_hi = 1.0;
};

struct BernoulliCoeff {
  MultiIndex offset;           // within the inf-ball of radius `window`
  std::vector<double> matrix;  // m x m, row-major
};

// X_i = g( sum_{|k|_inf <= K} A_k eps_{i-k} ) with vector innovations.
struct BernoulliModel {
  int dim = 1;
  int window = 0;
  std::vector<BernoulliCoeff> coeffs;
  Innovation dist;
  GMap g;
};

struct FieldModel;

// Realized m-dependent component X_{i,m} of a base model, sampled by
// conditional-mean replicate averaging.
struct MDepApproxModel {
  std::shared_ptr<const FieldModel> base;
  int m_level = 0;
  int replicates = 100;
};

enum class InnovLayout { Sites, Axes };

struct FieldModel {
  std::variant<IidModel, ProductOmModel, DShiftModel, BernoulliModel,
               MDepApproxModel>
      value;
  SpaceSpec space;

  int dim() const;
  Index window() const;  // inf-ball radius of the innovation footprint
  InnovLayout layout() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&value);
  }
};

// ---------------------------------------------------------------------------
// Coupled redraw rules. A rule tells the innovation accessors which
// innovations to replace by an independent stream; the replacement value at a
// given address depends only on (redraw_seed, replicate, address), never on
// the rule shape, so estimators that combine several conditionings share
// redraw values and cancel exactly wherever the conditionings agree.
// ---------------------------------------------------------------------------
struct RedrawRule {
  enum class Kind {
    None,
    SingleSite,       // replace the innovation at `site`
    OutsideWindow,    // replace u with |u - site|_inf > radius (radius < 0: all)
    OutsideQuadrant,  // replace u unless u <= site (per-axis thresholds)
    AxesOutsideSet,   // axis layout: replace whole axes not in `axes_mask`
  };
  Kind kind = Kind::None;
  MultiIndex site;
  Index radius = 0;
  std::uint32_t axes_mask = 0;
  std::uint64_t redraw_seed = 0;
  std::uint64_t replicate = 0;

  static RedrawRule none() { return {}; }
  static RedrawRule single_site(MultiIndex site, std::uint64_t seed,
                                std::uint64_t replicate = 0);
  static RedrawRule outside_window(MultiIndex center, Index radius,
                                   std::uint64_t seed, std::uint64_t replicate);
  static RedrawRule outside_quadrant(MultiIndex corner, std::uint64_t seed,
                                     std::uint64_t replicate);
  static RedrawRule axes_outside(std::uint32_t keep_mask, std::uint64_t seed,
                                 std::uint64_t replicate);
};

// Realized field sample over a rectangle.
struct FieldTensor {
  Rect region;
  SpaceSpec space;
  std::uint64_t seed = 0;
  std::string model_tag;
  std::vector<double> values;  // volume * m, site-major

  std::span<const double> at(const MultiIndex& p) const;
  double norm_at(const MultiIndex& p) const;
};

// Pure function of (model, region, seed); overlapping regions agree
// pointwise because innovations are addressed by absolute coordinates.
FieldTensor sample_field(const FieldModel& model, const Rect& region,
                         std::uint64_t seed);

// Coupled copy of sample_field with the innovation at `site` redrawn from an
// independent stream; differs from sample_field only within the model window
// around `site`.
FieldTensor resample_at(const FieldModel& model, const Rect& region,
                        std::uint64_t seed, const MultiIndex& site);

// Single-site evaluation under an arbitrary redraw rule. Bit-identical to the
// corresponding sample_field entry when the rule matches.
void field_value_at(const FieldModel& model, std::uint64_t env_seed,
                    const MultiIndex& site, const RedrawRule& rule,
                    std::span<double> out);
std::vector<double> field_value_at(const FieldModel& model,
                                   std::uint64_t env_seed,
                                   const MultiIndex& site,
                                   const RedrawRule& rule = RedrawRule::none());

// Builds a ProductOM model after validating that every axis innovation is
// centered (non-centered specs are rejected).
FieldModel orthomartingale_from_products(std::vector<AxisMartingale> axes,
                                         SpaceSpec space = {});

// Monte Carlo estimate of the m-dependent component X_{i,m}. For
// m_level == K the upper conditional mean is the exact field value; for
// m_level > K the component vanishes identically.
struct MdepEstimate {
  std::vector<double> value;
  double se = 0.0;  // aggregate standard error of the replicate mean
};
MdepEstimate mdep_component(const FieldModel& model, int m_level,
                            const MultiIndex& site, std::uint64_t env_seed,
                            int replicates, std::uint64_t seed);

// Congruence-class decomposition of [1, n] into stride-(2m+1) sub-lattices:
// sites of class `offset` are {stride * j + offset : j in j_range}. Classes
// partition the region.
struct BlockClass {
  MultiIndex offset;
  Index stride = 1;
  Rect j_range;
};
std::vector<BlockClass> block_decompose(const Rect& region, int m_level);

// Raw innovation values drawn from a model's environment / redraw streams,
// exposed so dependence estimators can build custom couplings that stay
// consistent with sample_field.
double env_innovation_site(const FieldModel& model, std::uint64_t env_seed,
                           const MultiIndex& u, int comp = 0);
double env_innovation_axis(const FieldModel& model, std::uint64_t env_seed,
                           int axis, Index pos, int comp = 0);
double redraw_innovation_axis(const FieldModel& model,
                              std::uint64_t redraw_seed,
                              std::uint64_t replicate, int axis, Index pos,
                              int comp = 0);

// Largest singular value by power iteration to 1e-8 relative tolerance.
double matrix_op_norm(std::span<const double> a, int m);

// Linear-field helper: A_k = rho^{|k|_inf} Id for |k|_inf <= K.
FieldModel make_geometric_linear(int dim, double rho, int window,
                                 const Innovation& dist, GMap g = {},
                                 SpaceSpec space = {});
// Truncated tail mass sum_{|k|_inf > K} |A_k|_op^{p_alpha} of the idealized
// infinite geometric family; reported alongside experiments that use it.
double geometric_tail_mass(int dim, double rho, int window, double p_alpha);

}  // namespace fieldlab

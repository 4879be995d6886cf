#pragma once

#include <cstdint>
#include <vector>

#include "fieldlab/models.hpp"
#include "fieldlab/norms.hpp"

namespace fieldlab {

// ---------------------------------------------------------------------------
// Physical dependence measures.
// ---------------------------------------------------------------------------

struct DeltaEstimate {
  double value = 0.0;
  double se = 0.0;
  int n_pairs = 0;
};

// delta_{B,p,q}(i): norm of ||X_i - X*_i|| over coupled pairs, where X* has
// the innovation at the origin replaced by an independent copy. Standard
// error by nonparametric bootstrap. A degenerate (all-zero) coupling yields
// (0, 0).
DeltaEstimate delta_estimate(const FieldModel& model, const MultiIndex& lag,
                             const NormSpec& spec, int n_pairs,
                             std::uint64_t seed);

// Axis version for d-shift models: only eps^{(axis)}_0 is replaced and the
// compared functionals are the axis filters themselves.
DeltaEstimate delta_axis_estimate(const FieldModel& model, int axis, Index lag,
                                  const NormSpec& spec, int n_pairs,
                                  std::uint64_t seed);

// Coupled sample of ||X_i - X*_i|| values; exposed for tests that need the
// raw empirical distribution (e.g. pathwise Holder bounds).
EmpiricalSample delta_sample(const FieldModel& model, const MultiIndex& lag,
                             int n_pairs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Projection operators P_k(Y) = sum_I (-1)^{|I|} E[Y | F_{k - 1_I}].
//
// Conditioning on F_j is realized as "innovations at addresses <= j stay
// fixed, the remainder is redrawn"; redraw streams are shared across the 2^d
// corners, so corners whose redraw patterns coincide cancel exactly and the
// estimator returns hard zeros wherever the inclusion-exclusion collapses.
// ---------------------------------------------------------------------------

struct ProjectorEstimate {
  MultiIndex k;
  double norm_value = 0.0;  // requested norm of the outer sample (plain nested MC)
  double stderr_boot = 0.0; // bootstrap stderr of norm_value
  // Inner-variance-corrected second moment: unbiased for E|P_k(Y)|_2^2, with
  // its standard error. This is the statistic to use for "is it zero" tests,
  // since the plain norm of a nested estimate carries an O(1/sqrt(R_inner))
  // noise floor at zero.
  double sq_mean = 0.0;
  double sq_se = 0.0;
  int r_outer = 0;
  int r_inner = 0;
  bool bias_warning = false;  // R_inner < 100

  bool indistinguishable_from_zero(double z = 4.0) const {
    return sq_mean <= z * sq_se;
  }
};

ProjectorEstimate projector_norm(const FieldModel& model, const MultiIndex& k,
                                 const NormSpec& spec, int r_outer,
                                 int r_inner, std::uint64_t seed,
                                 const MultiIndex* site = nullptr);

struct HannanSum {
  double total = 0.0;
  std::vector<ProjectorEstimate> terms;
};

// Sum of projector norms over |k|_inf <= window (exact truncation: terms
// beyond the model window cancel to hard zeros).
HannanSum hannan_sum(const FieldModel& model, const NormSpec& spec,
                     Index window, int r_outer, int r_inner,
                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bernoulli-shift decomposition X^I over coordinate subsets.
// ---------------------------------------------------------------------------

struct XiComponentEstimate {
  EmpiricalSample norms;     // outer sample of ||X^I_0|| (plain nested MC)
  double cross_mean = 0.0;   // split-replicate cross statistic <X^(1), X^(2)>,
  double cross_se = 0.0;     // unbiased for ||X^I_0||_2^2 under the null
};

// E[X_0 | G_J] is estimated by redrawing all axes outside J; inner replicates
// are split into two halves so the cross statistic has zero mean whenever the
// component vanishes.
XiComponentEstimate xi_component(const FieldModel& dshift,
                                 std::uint32_t axes_mask, int r_outer,
                                 int r_inner, std::uint64_t seed);

struct D0Result {
  int d0 = 0;
  bool ambiguous = false;
  // cross statistic per cardinality (best trigger candidate per level)
  std::vector<double> level_stat;
  std::vector<double> level_se;
};

// Smallest cardinality c >= 1 whose cross statistic exceeds
// threshold * stderr for some |I| = c; d with an ambiguity flag when nothing
// triggers (fully degenerate field).
D0Result detect_d0(const FieldModel& dshift, int replicates,
                   std::uint64_t seed, double threshold = 3.0);

// ---------------------------------------------------------------------------
// Hypothesis functionals built from delta estimates.
// ---------------------------------------------------------------------------

struct ShellTerm {
  Index k = 0;
  double value = 0.0;  // k^{d(1-1/p)} (sum_{|i|_inf = k} delta(i)^p)^{1/p}
};

struct HypothesisSum {
  double total = 0.0;  // includes the k = 0 term contribution? no: k >= 1 shells
  std::vector<ShellTerm> shells;
};

// sum_{k=1..window} k^{d(1-1/p)} (sum_{|i|_inf=k} delta_{B,p,q}(i)^p)^{1/p}
// computed from Monte Carlo delta estimates.
HypothesisSum bernoulli_hypothesis_sum(const FieldModel& model, double p,
                                       double q, Index window, int n_pairs,
                                       std::uint64_t seed);

}  // namespace fieldlab

#pragma once

#include <cstdint>
#include <vector>

namespace fieldlab {

// Selector for the norm applied to empirical samples of ||X||_B values.
struct NormSpec {
  enum class Kind { Lp, Orlicz, Weak };
  Kind kind = Kind::Lp;
  double p = 2.0;
  double q = 0.0;

  static NormSpec lp(double p) { return {Kind::Lp, p, 0.0}; }
  static NormSpec orlicz(double p, double q) { return {Kind::Orlicz, p, q}; }
  static NormSpec weak(double p) { return {Kind::Weak, p, 0.0}; }
};

// Equal-weight empirical distribution of nonnegative reals.
struct EmpiricalSample {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// phi_{p,q}(t) = t^p for t < 1 and t^p (1 + ln t)^q for t >= 1.
double phi(double p, double q, double t);

// (mean of v^p)^{1/p}.
double lp_norm(const EmpiricalSample& s, double p);

// Luxemburg norm: the unique lambda with mean phi(v/lambda) = 1 when the
// sample is not identically zero, solved by bracketed bisection to 1e-10
// relative tolerance; 0 for the all-zero sample.
double luxemburg_norm(const EmpiricalSample& s, double p, double q);

// sup over events A of P(A)^{-1+1/p} E[v 1_A]; on the empirical measure the
// supremum is attained on upper level sets, so it reduces to a scan over
// top-k averages.
double weak_lp_norm(const EmpiricalSample& s, double p);

// Empirical mean of v^p (log(1+v))^q, the membership functional of L_{p,q}.
double lpq_moment(const EmpiricalSample& s, double p, double q);

// Tail quasinorm max_k v_(k) (k/n)^{1/p} over descending order statistics,
// the empirical version of sup_t t P(v > t)^{1/p}.
double weak_tail_quasinorm(const EmpiricalSample& s, double p);

double apply_norm(const EmpiricalSample& s, const NormSpec& spec);

// Nonparametric bootstrap standard error of apply_norm over resampled data.
double bootstrap_stderr(const EmpiricalSample& s, const NormSpec& spec,
                        int n_boot, std::uint64_t seed);

}  // namespace fieldlab

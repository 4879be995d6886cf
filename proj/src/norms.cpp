#include "fieldlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fieldlab/rng.hpp"

namespace fieldlab {

namespace {

void check_sample(const EmpiricalSample& s) {
  if (s.values.empty()) throw std::invalid_argument("empty sample");
  for (double v : s.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("sample values must be finite and >= 0");
}

double mean_phi(const EmpiricalSample& s, double p, double q, double lambda) {
  double acc = 0.0;
  for (double v : s.values) acc += phi(p, q, v / lambda);
  return acc / static_cast<double>(s.values.size());
}

}  // namespace

double phi(double p, double q, double t) {
  if (t < 0.0) throw std::invalid_argument("phi requires t >= 0");
  if (t == 0.0) return 0.0;
  double r = std::pow(t, p);
  if (t >= 1.0 && q != 0.0) r *= std::pow(1.0 + std::log(t), q);
  return r;
}

double lp_norm(const EmpiricalSample& s, double p) {
  check_sample(s);
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  double acc = 0.0;
  for (double v : s.values) acc += std::pow(v, p);
  return std::pow(acc / static_cast<double>(s.values.size()), 1.0 / p);
}

double luxemburg_norm(const EmpiricalSample& s, double p, double q) {
  check_sample(s);
  if (!(p >= 1.0) || !(q >= 0.0))
    throw std::invalid_argument("luxemburg_norm requires p >= 1, q >= 0");
  const double vmax = *std::max_element(s.values.begin(), s.values.end());
  if (vmax == 0.0) return 0.0;  // inf over lambda is 0 for the zero sample
  const double n = static_cast<double>(s.values.size());

  // At lo the max term alone makes mean phi >= 2; expand hi until mean <= 1.
  double lo = vmax / std::pow(2.0 * n, 1.0 / p);
  double hi = vmax;
  while (mean_phi(s, p, q, hi) > 1.0) hi *= 2.0;
  if (mean_phi(s, p, q, lo) < 1.0) lo = hi / 2.0;  // cannot happen by bracket choice

  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = mean_phi(s, p, q, mid);
    if (f > 1.0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-10 * hi && std::fabs(f - 1.0) < 1e-9) break;
  }
  return 0.5 * (lo + hi);
}

double weak_lp_norm(const EmpiricalSample& s, double p) {
  check_sample(s);
  if (!(p > 1.0)) throw std::invalid_argument("weak_lp_norm requires p > 1");
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end(), std::greater<double>());
  const double n = static_cast<double>(v.size());
  double best = 0.0, run = 0.0;
  for (std::size_t k = 1; k <= v.size(); ++k) {
    run += v[k - 1];
    double cand = std::pow(static_cast<double>(k) / n, -1.0 + 1.0 / p) * run / n;
    if (cand > best) best = cand;
  }
  return best;
}

double lpq_moment(const EmpiricalSample& s, double p, double q) {
  check_sample(s);
  double acc = 0.0;
  for (double v : s.values) acc += std::pow(v, p) * std::pow(std::log1p(v), q);
  return acc / static_cast<double>(s.values.size());
}

double weak_tail_quasinorm(const EmpiricalSample& s, double p) {
  check_sample(s);
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end(), std::greater<double>());
  const double n = static_cast<double>(v.size());
  double best = 0.0;
  for (std::size_t k = 1; k <= v.size(); ++k) {
    double cand = v[k - 1] * std::pow(static_cast<double>(k) / n, 1.0 / p);
    if (cand > best) best = cand;
  }
  return best;
}

double apply_norm(const EmpiricalSample& s, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::Lp:
      return lp_norm(s, spec.p);
    case NormSpec::Kind::Orlicz:
      return luxemburg_norm(s, spec.p, spec.q);
    case NormSpec::Kind::Weak:
      return weak_lp_norm(s, spec.p);
  }
  throw std::logic_error("unknown norm kind");
}

double bootstrap_stderr(const EmpiricalSample& s, const NormSpec& spec,
                        int n_boot, std::uint64_t seed) {
  check_sample(s);
  if (n_boot < 2) throw std::invalid_argument("bootstrap needs n_boot >= 2");
  const std::size_t n = s.values.size();
  std::vector<double> stats(static_cast<std::size_t>(n_boot));
  EmpiricalSample resample;
  resample.values.resize(n);
  for (int b = 0; b < n_boot; ++b) {
    SeedChain chain(derive_seed(seed, stream::kBootstrap, static_cast<std::uint64_t>(b)));
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t w = SeedChain(chain.word()).mix(i).word();
      resample.values[i] = s.values[w % n];
    }
    stats[static_cast<std::size_t>(b)] = apply_norm(resample, spec);
  }
  double mean = std::accumulate(stats.begin(), stats.end(), 0.0) /
                static_cast<double>(n_boot);
  double ss = 0.0;
  for (double x : stats) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n_boot - 1));
}

}  // namespace fieldlab

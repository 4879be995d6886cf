#include "fieldlab/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fieldlab {

namespace {

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

DeltaEstimate finish_delta(EmpiricalSample sample, const NormSpec& spec,
                           std::uint64_t seed) {
  DeltaEstimate est;
  est.n_pairs = static_cast<int>(sample.size());
  if (all_zero(sample.values)) return est;  // degenerate coupling
  est.value = apply_norm(sample, spec);
  est.se = bootstrap_stderr(sample, spec, 200, seed);
  return est;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of_mean(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size() - 1) * static_cast<double>(v.size())));
}

}  // namespace

EmpiricalSample delta_sample(const FieldModel& model, const MultiIndex& lag,
                             int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  const int d = model.dim();
  if (lag.dim() != d) throw std::invalid_argument("lag dimension mismatch");
  const MultiIndex origin = MultiIndex::zeros(d);
  const int m = model.space.m;

  EmpiricalSample sample;
  sample.values.reserve(static_cast<std::size_t>(n_pairs));
  std::vector<double> x(static_cast<std::size_t>(m)), xs(static_cast<std::size_t>(m)),
      diff(static_cast<std::size_t>(m));
  for (int r = 0; r < n_pairs; ++r) {
    std::uint64_t env = derive_seed(seed, stream::kEnv, static_cast<std::uint64_t>(r));
    std::uint64_t rs = derive_seed(seed, stream::kResample, static_cast<std::uint64_t>(r));
    field_value_at(model, env, lag, RedrawRule::none(), x);
    field_value_at(model, env, lag, RedrawRule::single_site(origin, rs), xs);
    for (int c = 0; c < m; ++c)
      diff[static_cast<std::size_t>(c)] =
          x[static_cast<std::size_t>(c)] - xs[static_cast<std::size_t>(c)];
    sample.values.push_back(vec_norm(diff, model.space));
  }
  return sample;
}

DeltaEstimate delta_estimate(const FieldModel& model, const MultiIndex& lag,
                             const NormSpec& spec, int n_pairs,
                             std::uint64_t seed) {
  return finish_delta(delta_sample(model, lag, n_pairs, seed), spec,
                      derive_seed(seed, stream::kBootstrap));
}

DeltaEstimate delta_axis_estimate(const FieldModel& model, int axis, Index lag,
                                  const NormSpec& spec, int n_pairs,
                                  std::uint64_t seed) {
  const auto* ds = model.get_if<DShiftModel>();
  if (!ds) throw std::invalid_argument("delta_axis_estimate requires a d-shift model");
  if (axis < 0 || axis >= model.dim()) throw std::invalid_argument("axis out of range");
  const auto& filter = ds->axes[static_cast<std::size_t>(axis)].filter;

  EmpiricalSample sample;
  sample.values.reserve(static_cast<std::size_t>(n_pairs));
  for (int r = 0; r < n_pairs; ++r) {
    std::uint64_t env = derive_seed(seed, stream::kEnv, static_cast<std::uint64_t>(r));
    std::uint64_t rs = derive_seed(seed, stream::kResample, static_cast<std::uint64_t>(r));
    double y = 0.0, ys = 0.0;
    for (std::size_t u = 0; u < filter.size(); ++u) {
      Index pos = lag - static_cast<Index>(u);
      double e = env_innovation_axis(model, env, axis, pos);
      double es = pos == 0 ? redraw_innovation_axis(model, rs, 0, axis, pos) : e;
      y += filter[u] * e;
      ys += filter[u] * es;
    }
    sample.values.push_back(std::fabs(y - ys));
  }
  return finish_delta(std::move(sample), spec,
                      derive_seed(seed, stream::kBootstrap));
}

ProjectorEstimate projector_norm(const FieldModel& model, const MultiIndex& k,
                                 const NormSpec& spec, int r_outer,
                                 int r_inner, std::uint64_t seed,
                                 const MultiIndex* site_ptr) {
  const int d = model.dim();
  if (k.dim() != d) throw std::invalid_argument("k dimension mismatch");
  if (r_outer < 2 || r_inner < 1)
    throw std::invalid_argument("projector_norm needs r_outer >= 2, r_inner >= 1");
  const MultiIndex site = site_ptr ? *site_ptr : MultiIndex::zeros(d);
  const int m = model.space.m;

  ProjectorEstimate est;
  est.k = k;
  est.r_outer = r_outer;
  est.r_inner = r_inner;
  est.bias_warning = r_inner < 100;

  EmpiricalSample norms;
  norms.values.reserve(static_cast<std::size_t>(r_outer));
  std::vector<double> sq_terms(static_cast<std::size_t>(r_outer));

  std::vector<double> x(static_cast<std::size_t>(m));
  std::vector<double> combo(static_cast<std::size_t>(m));
  std::vector<double> mean(static_cast<std::size_t>(m));
  std::vector<double> msq(static_cast<std::size_t>(m));

  for (int e = 0; e < r_outer; ++e) {
    std::uint64_t env = derive_seed(seed, stream::kEnv, static_cast<std::uint64_t>(e));
    std::uint64_t rs = derive_seed(seed, stream::kRedraw, static_cast<std::uint64_t>(e));
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(msq.begin(), msq.end(), 0.0);
    for (int t = 0; t < r_inner; ++t) {
      std::fill(combo.begin(), combo.end(), 0.0);
      for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        MultiIndex corner = k;
        for (int l = 0; l < d; ++l)
          if ((mask >> l) & 1u) corner[l] -= 1;
        field_value_at(model, env, site,
                       RedrawRule::outside_quadrant(corner, rs,
                                                    static_cast<std::uint64_t>(t)),
                       x);
        double sign = __builtin_popcount(mask) % 2 == 0 ? 1.0 : -1.0;
        for (int c = 0; c < m; ++c)
          combo[static_cast<std::size_t>(c)] += sign * x[static_cast<std::size_t>(c)];
      }
      for (int c = 0; c < m; ++c) {
        double delta = combo[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)];
        mean[static_cast<std::size_t>(c)] += delta / static_cast<double>(t + 1);
        msq[static_cast<std::size_t>(c)] +=
            delta * (combo[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)]);
      }
    }
    double sq = 0.0, var_of_mean = 0.0;
    for (int c = 0; c < m; ++c) {
      sq += mean[static_cast<std::size_t>(c)] * mean[static_cast<std::size_t>(c)];
      if (r_inner > 1)
        var_of_mean += msq[static_cast<std::size_t>(c)] /
                       (static_cast<double>(r_inner - 1) * static_cast<double>(r_inner));
    }
    norms.values.push_back(vec_norm(mean, model.space));
    sq_terms[static_cast<std::size_t>(e)] = sq - var_of_mean;
  }

  est.sq_mean = mean_of(sq_terms);
  est.sq_se = se_of_mean(sq_terms);
  if (!all_zero(norms.values)) {
    est.norm_value = apply_norm(norms, spec);
    est.stderr_boot = bootstrap_stderr(norms, spec, 200,
                                       derive_seed(seed, stream::kBootstrap));
  }
  return est;
}

HannanSum hannan_sum(const FieldModel& model, const NormSpec& spec,
                     Index window, int r_outer, int r_inner,
                     std::uint64_t seed) {
  if (window < 0) throw std::invalid_argument("window must be >= 0");
  const int d = model.dim();
  HannanSum sum;
  Rect ball(MultiIndex::filled(d, -window), MultiIndex::filled(d, window));
  MultiIndex k = ball.lower();
  std::uint64_t idx = 0;
  do {
    ProjectorEstimate term = projector_norm(
        model, k, spec, r_outer, r_inner,
        derive_seed(seed, stream::kGeneric, idx));
    sum.total += term.norm_value;
    sum.terms.push_back(std::move(term));
    ++idx;
  } while (ball.next_point(k));
  return sum;
}

XiComponentEstimate xi_component(const FieldModel& model,
                                 std::uint32_t axes_mask, int r_outer,
                                 int r_inner, std::uint64_t seed) {
  if (model.layout() != InnovLayout::Axes)
    throw std::invalid_argument("xi_component requires an axis-layout model");
  const int d = model.dim();
  if (axes_mask >= (1u << d)) throw std::invalid_argument("subset mask out of range");
  if (r_outer < 2 || r_inner < 2)
    throw std::invalid_argument("xi_component needs r_outer, r_inner >= 2");
  const int m = model.space.m;
  const MultiIndex origin = MultiIndex::zeros(d);
  const int half = r_inner / 2;

  XiComponentEstimate est;
  est.norms.values.reserve(static_cast<std::size_t>(r_outer));
  std::vector<double> cross(static_cast<std::size_t>(r_outer));

  const int cardI = __builtin_popcount(axes_mask);
  std::vector<double> x(static_cast<std::size_t>(m));
  std::vector<double> comp1(static_cast<std::size_t>(m)), comp2(static_cast<std::size_t>(m));
  std::vector<double> inner(static_cast<std::size_t>(m));

  for (int e = 0; e < r_outer; ++e) {
    std::uint64_t env = derive_seed(seed, stream::kEnv, static_cast<std::uint64_t>(e));
    std::uint64_t rs = derive_seed(seed, stream::kRedraw, static_cast<std::uint64_t>(e));
    std::fill(comp1.begin(), comp1.end(), 0.0);
    std::fill(comp2.begin(), comp2.end(), 0.0);
    for (std::uint32_t J = axes_mask;; J = (J - 1) & axes_mask) {
      const int cardJ = __builtin_popcount(J);
      double sign = (cardI + cardJ) % 2 == 0 ? 1.0 : -1.0;
      for (int h = 0; h < 2; ++h) {
        auto& acc = h == 0 ? comp1 : comp2;
        std::fill(inner.begin(), inner.end(), 0.0);
        for (int t = 0; t < half; ++t) {
          std::uint64_t rep = static_cast<std::uint64_t>(h * half + t);
          field_value_at(model, env, origin,
                         RedrawRule::axes_outside(J, rs, rep), x);
          for (int c = 0; c < m; ++c)
            inner[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < m; ++c)
          acc[static_cast<std::size_t>(c)] +=
              sign * inner[static_cast<std::size_t>(c)] / static_cast<double>(half);
      }
      if (J == 0) break;
    }
    double dot = 0.0;
    std::vector<double> avg(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
      dot += comp1[static_cast<std::size_t>(c)] * comp2[static_cast<std::size_t>(c)];
      avg[static_cast<std::size_t>(c)] =
          0.5 * (comp1[static_cast<std::size_t>(c)] + comp2[static_cast<std::size_t>(c)]);
    }
    cross[static_cast<std::size_t>(e)] = dot;
    est.norms.values.push_back(vec_norm(avg, model.space));
  }
  est.cross_mean = mean_of(cross);
  est.cross_se = se_of_mean(cross);
  return est;
}

D0Result detect_d0(const FieldModel& model, int replicates, std::uint64_t seed,
                   double threshold) {
  const int d = model.dim();
  D0Result res;
  res.level_stat.assign(static_cast<std::size_t>(d), 0.0);
  res.level_se.assign(static_cast<std::size_t>(d), 0.0);

  for (int card = 1; card <= d; ++card) {
    double best_stat = 0.0, best_se = 0.0;
    bool trigger = false, band = false;
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
      if (__builtin_popcount(mask) != card) continue;
      XiComponentEstimate est =
          xi_component(model, mask, replicates, replicates,
                       derive_seed(seed, stream::kGeneric, mask));
      if (est.cross_mean > best_stat) {
        best_stat = est.cross_mean;
        best_se = est.cross_se;
      }
      if (est.cross_se == 0.0) {
        if (est.cross_mean > 0.0) trigger = true;
      } else {
        double z = est.cross_mean / est.cross_se;
        if (z > threshold)
          trigger = true;
        else if (z > 1.0)
          band = true;
      }
    }
    res.level_stat[static_cast<std::size_t>(card - 1)] = best_stat;
    res.level_se[static_cast<std::size_t>(card - 1)] = best_se;
    if (band) res.ambiguous = true;
    if (trigger) {
      res.d0 = card;
      return res;
    }
  }
  // Nothing triggered: fully degenerate field, convention d0 = d with a flag.
  res.d0 = d;
  res.ambiguous = true;
  return res;
}

HypothesisSum bernoulli_hypothesis_sum(const FieldModel& model, double p,
                                       double q, Index window, int n_pairs,
                                       std::uint64_t seed) {
  const int d = model.dim();
  const NormSpec spec = q == 0.0 ? NormSpec::lp(p) : NormSpec::orlicz(p, q);
  HypothesisSum out;
  for (Index k = 1; k <= window; ++k) {
    Rect ball(MultiIndex::filled(d, -k), MultiIndex::filled(d, k));
    double shell_p = 0.0;
    MultiIndex i = ball.lower();
    std::uint64_t idx = 0;
    do {
      if (linf_norm(i) == k) {
        DeltaEstimate de = delta_estimate(
            model, i, spec, n_pairs,
            derive_seed(seed, stream::kGeneric,
                        static_cast<std::uint64_t>(k) * 1000003u + idx));
        shell_p += std::pow(de.value, p);
      }
      ++idx;
    } while (ball.next_point(i));
    double term = std::pow(static_cast<double>(k),
                           static_cast<double>(d) * (1.0 - 1.0 / p)) *
                  std::pow(shell_p, 1.0 / p);
    out.shells.push_back({k, term});
    out.total += term;
  }
  return out;
}

}  // namespace fieldlab

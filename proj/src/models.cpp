#include "fieldlab/models.hpp"

#include <cmath>
#include <cstring>
#include <new>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fieldlab {

namespace {

constexpr std::uint64_t kAxisMark = 0x5AF1E1D;
constexpr std::uint64_t kMdepMark = 0x3BD0C4;

std::uint64_t env_word_site(std::uint64_t env_seed, std::span<const Index> u,
                            int comp) {
  return SeedChain(env_seed)
      .mix(stream::kInnovation)
      .mix_coords(u)
      .mix(static_cast<std::uint64_t>(comp))
      .word();
}

std::uint64_t redraw_word_site(const RedrawRule& r, std::span<const Index> u,
                               int comp) {
  return SeedChain(r.redraw_seed)
      .mix(stream::kRedraw)
      .mix(r.replicate)
      .mix_coords(u)
      .mix(static_cast<std::uint64_t>(comp))
      .word();
}

std::uint64_t env_word_axis(std::uint64_t env_seed, int axis, Index pos,
                            int comp) {
  return SeedChain(env_seed)
      .mix(stream::kInnovation)
      .mix(kAxisMark)
      .mix(static_cast<std::uint64_t>(axis))
      .mix(static_cast<std::uint64_t>(pos))
      .mix(static_cast<std::uint64_t>(comp))
      .word();
}

std::uint64_t redraw_word_axis(const RedrawRule& r, int axis, Index pos,
                               int comp) {
  return SeedChain(r.redraw_seed)
      .mix(stream::kRedraw)
      .mix(r.replicate)
      .mix(kAxisMark)
      .mix(static_cast<std::uint64_t>(axis))
      .mix(static_cast<std::uint64_t>(pos))
      .mix(static_cast<std::uint64_t>(comp))
      .word();
}

bool redraw_site(const RedrawRule& r, std::span<const Index> u) {
  switch (r.kind) {
    case RedrawRule::Kind::None:
      return false;
    case RedrawRule::Kind::SingleSite:
      for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != r.site.c[i]) return false;
      return true;
    case RedrawRule::Kind::OutsideWindow: {
      if (r.radius < 0) return true;
      for (std::size_t i = 0; i < u.size(); ++i) {
        Index d = u[i] - r.site.c[i];
        if (d < 0) d = -d;
        if (d > r.radius) return true;
      }
      return false;
    }
    case RedrawRule::Kind::OutsideQuadrant:
      for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > r.site.c[i]) return true;
      return false;
    case RedrawRule::Kind::AxesOutsideSet:
      throw std::invalid_argument("axes redraw rule on a site-layout model");
  }
  return false;
}

bool redraw_axis(const RedrawRule& r, int axis, Index pos) {
  switch (r.kind) {
    case RedrawRule::Kind::None:
      return false;
    case RedrawRule::Kind::SingleSite:
      return pos == r.site[axis];
    case RedrawRule::Kind::OutsideWindow: {
      if (r.radius < 0) return true;
      Index d = pos - r.site[axis];
      if (d < 0) d = -d;
      return d > r.radius;
    }
    case RedrawRule::Kind::OutsideQuadrant:
      return pos > r.site[axis];
    case RedrawRule::Kind::AxesOutsideSet:
      return ((r.axes_mask >> axis) & 1u) == 0u;
  }
  return false;
}

// --- evaluation kernels, shared by the materialized and pointwise paths ---

template <class AxisInnov>
double axis_md_value(const AxisMartingale& ax, int axis, Index pos, int comp,
                     AxisInnov&& innov) {
  double xi = innov(axis, pos, comp);
  if (ax.window == 0 || ax.coupling == 0.0) return xi;
  double s = 0.0;
  for (int w = 1; w <= ax.window; ++w) s += innov(axis, pos - w, comp);
  return xi * (1.0 + ax.coupling * std::tanh(s));
}

template <class AxisInnov>
void product_om_value(const ProductOmModel& m, const SpaceSpec& space,
                      const MultiIndex& site, AxisInnov&& innov,
                      std::span<double> out) {
  double scalar = 1.0;
  for (int l = 1; l < static_cast<int>(m.axes.size()); ++l)
    scalar *= axis_md_value(m.axes[static_cast<std::size_t>(l)], l, site[l], 0, innov);
  for (int c = 0; c < space.m; ++c)
    out[static_cast<std::size_t>(c)] =
        scalar * axis_md_value(m.axes[0], 0, site[0], c, innov);
}

template <class AxisInnov>
void d_shift_value(const DShiftModel& m, const MultiIndex& site,
                   AxisInnov&& innov, std::span<double> out) {
  const int d = static_cast<int>(m.axes.size());
  if (d > 32) throw std::invalid_argument("d-shift models support d <= 32");
  double ys[32];
  for (int l = 0; l < d; ++l) {
    const auto& ax = m.axes[static_cast<std::size_t>(l)];
    double y = 0.0;
    for (std::size_t u = 0; u < ax.filter.size(); ++u)
      y += ax.filter[u] * innov(l, site[l] - static_cast<Index>(u), 0);
    ys[l] = y;
  }
  double v = 0.0;
  switch (m.g) {
    case DShiftG::Sum:
      for (int l = 0; l < d; ++l) v += ys[l];
      break;
    case DShiftG::Product:
      v = 1.0;
      for (int l = 0; l < d; ++l) v *= ys[l];
      break;
    case DShiftG::ClampedSum:
      for (int l = 0; l < d; ++l) v += ys[l];
      v = std::min(std::max(v, m.clamp_lo), m.clamp_hi);
      break;
  }
  out[0] = v;
}

template <class SiteInnov>
void bernoulli_value(const BernoulliModel& m, const SpaceSpec& space,
                     const MultiIndex& site, SiteInnov&& innov,
                     std::span<double> out) {
  const int mm = space.m;
  if (mm > 64) throw std::invalid_argument("Bernoulli fields support m <= 64");
  double acc[64];
  double eps[64];
  for (int c = 0; c < mm; ++c) acc[c] = 0.0;
  MultiIndex u = site;
  for (const auto& coeff : m.coeffs) {
    for (int l = 0; l < site.dim(); ++l) u[l] = site[l] - coeff.offset[l];
    for (int j = 0; j < mm; ++j) eps[j] = innov(u.coords(), j);
    const double* a = coeff.matrix.data();
    for (int c = 0; c < mm; ++c) {
      double s = 0.0;
      for (int j = 0; j < mm; ++j) s += a[c * mm + j] * eps[j];
      acc[c] += s;
    }
  }
  for (int c = 0; c < mm; ++c) out[static_cast<std::size_t>(c)] = m.g.apply(acc[c]);
}

template <class SiteInnov>
void iid_value(const SpaceSpec& space, const MultiIndex& site,
               SiteInnov&& innov, std::span<double> out) {
  for (int c = 0; c < space.m; ++c)
    out[static_cast<std::size_t>(c)] = innov(site.coords(), c);
}

std::vector<double> alloc_values(std::uint64_t volume, int m,
                                 const char* what) {
  const std::uint64_t count = volume * static_cast<std::uint64_t>(m);
  if (count > (std::uint64_t{1} << 34))
    throw std::runtime_error(std::string(what) + " needs " +
                             std::to_string(count * 8) +
                             " bytes, above the supported range");
  try {
    return std::vector<double>(count);
  } catch (const std::bad_alloc&) {
    throw std::runtime_error(std::string(what) + " allocation of " +
                             std::to_string(count * 8) + " bytes failed");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double Innovation::sample(std::uint64_t word) const {
  switch (kind) {
    case Kind::Rademacher:
      return (word >> 63) ? 1.0 : -1.0;
    case Kind::Uniform:
      return a + (b - a) * u01(word);
    case Kind::Gaussian:
      return a * inv_normal_cdf(u01(word));
    case Kind::Pareto: {
      double mag = std::pow(u01(word), -1.0 / a);
      return (word & 1u) ? mag : -mag;
    }
    case Kind::PointMass:
      return a;
  }
  throw std::logic_error("unknown innovation kind");
}

bool Innovation::centered() const {
  switch (kind) {
    case Kind::Rademacher:
    case Kind::Gaussian:
    case Kind::Pareto:
      return true;
    case Kind::Uniform:
      return a == -b;
    case Kind::PointMass:
      return a == 0.0;
  }
  return false;
}

double GMap::apply(double x) const {
  switch (kind) {
    case Kind::Identity:
      return x;
    case Kind::Clamp:
      return std::min(std::max(x, lo), hi);
    case Kind::PowerAbs:
      return std::copysign(std::pow(std::fabs(x), exponent), x);
  }
  throw std::logic_error("unknown g kind");
}

double GMap::holder_alpha() const {
  return kind == Kind::PowerAbs ? exponent : 1.0;
}

double GMap::holder_const() const {
  return kind == Kind::PowerAbs ? std::pow(2.0, 1.0 - exponent) : 1.0;
}

int FieldModel::dim() const {
  struct V {
    int operator()(const IidModel& m) const { return m.dim; }
    int operator()(const ProductOmModel& m) const {
      return static_cast<int>(m.axes.size());
    }
    int operator()(const DShiftModel& m) const {
      return static_cast<int>(m.axes.size());
    }
    int operator()(const BernoulliModel& m) const { return m.dim; }
    int operator()(const MDepApproxModel& m) const { return m.base->dim(); }
  };
  return std::visit(V{}, value);
}

Index FieldModel::window() const {
  struct V {
    Index operator()(const IidModel&) const { return 0; }
    Index operator()(const ProductOmModel& m) const {
      Index w = 0;
      for (const auto& ax : m.axes)
        if (ax.window > w) w = ax.window;
      return w;
    }
    Index operator()(const DShiftModel& m) const {
      Index w = 0;
      for (const auto& ax : m.axes) {
        Index k = static_cast<Index>(ax.filter.size()) - 1;
        if (k > w) w = k;
      }
      return w;
    }
    Index operator()(const BernoulliModel& m) const { return m.window; }
    Index operator()(const MDepApproxModel& m) const {
      Index base = m.base->window();
      return m.m_level < base ? m.m_level : base;
    }
  };
  return std::visit(V{}, value);
}

InnovLayout FieldModel::layout() const {
  struct V {
    InnovLayout operator()(const IidModel&) const { return InnovLayout::Sites; }
    InnovLayout operator()(const ProductOmModel&) const {
      return InnovLayout::Axes;
    }
    InnovLayout operator()(const DShiftModel&) const {
      return InnovLayout::Axes;
    }
    InnovLayout operator()(const BernoulliModel&) const {
      return InnovLayout::Sites;
    }
    InnovLayout operator()(const MDepApproxModel& m) const {
      return m.base->layout();
    }
  };
  return std::visit(V{}, value);
}

RedrawRule RedrawRule::single_site(MultiIndex site, std::uint64_t seed,
                                   std::uint64_t replicate) {
  RedrawRule r;
  r.kind = Kind::SingleSite;
  r.site = std::move(site);
  r.redraw_seed = seed;
  r.replicate = replicate;
  return r;
}

RedrawRule RedrawRule::outside_window(MultiIndex center, Index radius,
                                      std::uint64_t seed,
                                      std::uint64_t replicate) {
  RedrawRule r;
  r.kind = Kind::OutsideWindow;
  r.site = std::move(center);
  r.radius = radius;
  r.redraw_seed = seed;
  r.replicate = replicate;
  return r;
}

RedrawRule RedrawRule::outside_quadrant(MultiIndex corner, std::uint64_t seed,
                                        std::uint64_t replicate) {
  RedrawRule r;
  r.kind = Kind::OutsideQuadrant;
  r.site = std::move(corner);
  r.redraw_seed = seed;
  r.replicate = replicate;
  return r;
}

RedrawRule RedrawRule::axes_outside(std::uint32_t keep_mask, std::uint64_t seed,
                                    std::uint64_t replicate) {
  RedrawRule r;
  r.kind = Kind::AxesOutsideSet;
  r.axes_mask = keep_mask;
  r.redraw_seed = seed;
  r.replicate = replicate;
  return r;
}

std::span<const double> FieldTensor::at(const MultiIndex& p) const {
  std::uint64_t idx = region.flat_index(p) * static_cast<std::uint64_t>(space.m);
  return {values.data() + idx, static_cast<std::size_t>(space.m)};
}

double FieldTensor::norm_at(const MultiIndex& p) const {
  return vec_norm(at(p), space);
}

// ---------------------------------------------------------------------------

namespace {

const Innovation& site_dist(const FieldModel& model) {
  if (const auto* iid = model.get_if<IidModel>()) return iid->dist;
  if (const auto* b = model.get_if<BernoulliModel>()) return b->dist;
  throw std::logic_error("site innovations requested from an axis-layout model");
}

const Innovation& axis_dist(const FieldModel& model, int axis) {
  if (const auto* om = model.get_if<ProductOmModel>())
    return om->axes[static_cast<std::size_t>(axis)].xi;
  if (const auto* ds = model.get_if<DShiftModel>())
    return ds->axes[static_cast<std::size_t>(axis)].dist;
  throw std::logic_error("axis innovations requested from a site-layout model");
}

// Stride-based flat indexing over a padded box, avoiding MultiIndex
// construction in the innovation accessors.
struct FlatIndexer {
  std::vector<Index> lower;
  std::vector<std::uint64_t> stride;

  explicit FlatIndexer(const Rect& r) {
    const int d = r.dim();
    lower.resize(static_cast<std::size_t>(d));
    stride.resize(static_cast<std::size_t>(d));
    std::uint64_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      lower[static_cast<std::size_t>(i)] = r.lower()[i];
      stride[static_cast<std::size_t>(i)] = s;
      s *= static_cast<std::uint64_t>(r.side(i));
    }
  }
  std::uint64_t operator()(std::span<const Index> u) const {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      idx += static_cast<std::uint64_t>(u[i] - lower[i]) * stride[i];
    return idx;
  }
};

void value_at_impl(const FieldModel& model, std::uint64_t env_seed,
                   const MultiIndex& site, const RedrawRule& rule,
                   std::span<double> out) {
  if (site.dim() != model.dim())
    throw std::invalid_argument("site dimension does not match model");
  if (out.size() != static_cast<std::size_t>(model.space.m))
    throw std::invalid_argument("output span size does not match m");

  if (model.layout() == InnovLayout::Sites &&
      !model.get_if<MDepApproxModel>()) {
    const Innovation& dist = site_dist(model);
    auto innov = [&](std::span<const Index> u, int comp) {
      std::uint64_t w = redraw_site(rule, u) ? redraw_word_site(rule, u, comp)
                                             : env_word_site(env_seed, u, comp);
      return dist.sample(w);
    };
    if (const auto* iid = model.get_if<IidModel>()) {
      (void)iid;
      iid_value(model.space, site, innov, out);
    } else {
      bernoulli_value(*model.get_if<BernoulliModel>(), model.space, site, innov,
                      out);
    }
    return;
  }

  if (const auto* om = model.get_if<ProductOmModel>()) {
    auto innov = [&](int axis, Index pos, int comp) {
      std::uint64_t w = redraw_axis(rule, axis, pos)
                            ? redraw_word_axis(rule, axis, pos, comp)
                            : env_word_axis(env_seed, axis, pos, comp);
      return om->axes[static_cast<std::size_t>(axis)].xi.sample(w);
    };
    product_om_value(*om, model.space, site, innov, out);
    return;
  }
  if (const auto* ds = model.get_if<DShiftModel>()) {
    auto innov = [&](int axis, Index pos, int comp) {
      std::uint64_t w = redraw_axis(rule, axis, pos)
                            ? redraw_word_axis(rule, axis, pos, comp)
                            : env_word_axis(env_seed, axis, pos, comp);
      return ds->axes[static_cast<std::size_t>(axis)].dist.sample(w);
    };
    d_shift_value(*ds, site, innov, out);
    return;
  }

  const auto* md = model.get_if<MDepApproxModel>();
  if (rule.kind != RedrawRule::Kind::None)
    throw std::invalid_argument(
        "coupled redraw is not supported on m-dependent component models");
  std::uint64_t site_seed =
      SeedChain(env_seed).mix(kMdepMark).mix_coords(site.coords()).word();
  MdepEstimate est = mdep_component(*md->base, md->m_level, site, env_seed,
                                    md->replicates, site_seed);
  std::copy(est.value.begin(), est.value.end(), out.begin());
}

FieldTensor sample_impl(const FieldModel& model, const Rect& region,
                        std::uint64_t seed, const RedrawRule& rule,
                        const char* tag) {
  if (region.dim() != model.dim())
    throw std::invalid_argument("region dimension does not match model");
  FieldTensor t;
  t.region = region;
  t.space = model.space;
  t.seed = seed;
  t.model_tag = tag;
  t.values = alloc_values(region.volume(), model.space.m, "field tensor");

  const int m = model.space.m;
  const Index K = model.window();

  if (model.get_if<MDepApproxModel>()) {
    MultiIndex p = region.lower();
    std::uint64_t idx = 0;
    do {
      value_at_impl(model, seed, p, rule, {t.values.data() + idx * m,
                                           static_cast<std::size_t>(m)});
      ++idx;
    } while (region.next_point(p));
    return t;
  }

  if (model.layout() == InnovLayout::Sites) {
    const Innovation& dist = site_dist(model);
    Rect padded = region.padded(K);
    std::vector<double> buf =
        alloc_values(padded.volume(), m, "innovation buffer");
    {
      MultiIndex u = padded.lower();
      std::uint64_t idx = 0;
      do {
        for (int c = 0; c < m; ++c) {
          std::uint64_t w = redraw_site(rule, u.coords())
                                ? redraw_word_site(rule, u.coords(), c)
                                : env_word_site(seed, u.coords(), c);
          buf[idx * m + c] = dist.sample(w);
        }
        ++idx;
      } while (padded.next_point(u));
    }
    FlatIndexer flat(padded);
    auto innov = [&](std::span<const Index> u, int comp) {
      return buf[flat(u) * static_cast<std::uint64_t>(m) + comp];
    };
    MultiIndex p = region.lower();
    std::uint64_t idx = 0;
    if (const auto* iid = model.get_if<IidModel>()) {
      (void)iid;
      do {
        iid_value(model.space, p, innov,
                  {t.values.data() + idx * m, static_cast<std::size_t>(m)});
        ++idx;
      } while (region.next_point(p));
    } else {
      const auto& bm = *model.get_if<BernoulliModel>();
      do {
        bernoulli_value(bm, model.space, p, innov,
                        {t.values.data() + idx * m, static_cast<std::size_t>(m)});
        ++idx;
      } while (region.next_point(p));
    }
    return t;
  }

  // Axis layout: one buffer per axis, component-major per position.
  const int d = model.dim();
  std::vector<std::vector<double>> axis_buf(static_cast<std::size_t>(d));
  std::vector<Index> axis_lo(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    const int comps = l == 0 ? m : 1;
    axis_lo[static_cast<std::size_t>(l)] = region.lower()[l] - K;
    const Index len = region.upper()[l] - axis_lo[static_cast<std::size_t>(l)] + 1;
    auto& buf = axis_buf[static_cast<std::size_t>(l)];
    buf.resize(static_cast<std::size_t>(len) * comps);
    const Innovation& dist = axis_dist(model, l);
    for (Index pos = axis_lo[static_cast<std::size_t>(l)];
         pos <= region.upper()[l]; ++pos) {
      for (int c = 0; c < comps; ++c) {
        std::uint64_t w = redraw_axis(rule, l, pos)
                              ? redraw_word_axis(rule, l, pos, c)
                              : env_word_axis(seed, l, pos, c);
        buf[static_cast<std::size_t>(pos - axis_lo[static_cast<std::size_t>(l)]) * comps + c] =
            dist.sample(w);
      }
    }
  }
  auto innov = [&](int axis, Index pos, int comp) {
    const int comps = axis == 0 ? m : 1;
    return axis_buf[static_cast<std::size_t>(axis)]
                   [static_cast<std::size_t>(pos - axis_lo[static_cast<std::size_t>(axis)]) * comps +
                    comp];
  };
  MultiIndex p = region.lower();
  std::uint64_t idx = 0;
  if (const auto* om = model.get_if<ProductOmModel>()) {
    do {
      product_om_value(*om, model.space, p, innov,
                       {t.values.data() + idx * m, static_cast<std::size_t>(m)});
      ++idx;
    } while (region.next_point(p));
  } else {
    const auto& ds = *model.get_if<DShiftModel>();
    do {
      d_shift_value(ds, p, innov,
                    {t.values.data() + idx * m, static_cast<std::size_t>(m)});
      ++idx;
    } while (region.next_point(p));
  }
  return t;
}

}  // namespace

FieldTensor sample_field(const FieldModel& model, const Rect& region,
                         std::uint64_t seed) {
  return sample_impl(model, region, seed, RedrawRule::none(), "sample");
}

FieldTensor resample_at(const FieldModel& model, const Rect& region,
                        std::uint64_t seed, const MultiIndex& site) {
  if (site.dim() != model.dim())
    throw std::invalid_argument("resample site dimension mismatch");
  const Index K = model.window();
  if (model.layout() == InnovLayout::Sites) {
    if (!region.padded(K).contains(site))
      throw std::out_of_range("resample site outside the padded innovation region");
  } else {
    for (int l = 0; l < model.dim(); ++l)
      if (site[l] < region.lower()[l] - K || site[l] > region.upper()[l])
        throw std::out_of_range("resample site outside the padded innovation region");
  }
  if (model.get_if<MDepApproxModel>())
    throw std::invalid_argument(
        "coupled resampling is not supported on m-dependent component models");
  RedrawRule rule = RedrawRule::single_site(
      site, derive_seed(seed, stream::kResample));
  return sample_impl(model, region, seed, rule, "resample");
}

void field_value_at(const FieldModel& model, std::uint64_t env_seed,
                    const MultiIndex& site, const RedrawRule& rule,
                    std::span<double> out) {
  value_at_impl(model, env_seed, site, rule, out);
}

std::vector<double> field_value_at(const FieldModel& model,
                                   std::uint64_t env_seed,
                                   const MultiIndex& site,
                                   const RedrawRule& rule) {
  std::vector<double> out(static_cast<std::size_t>(model.space.m));
  value_at_impl(model, env_seed, site, rule, {out.data(), out.size()});
  return out;
}

FieldModel orthomartingale_from_products(std::vector<AxisMartingale> axes,
                                         SpaceSpec space) {
  if (axes.empty()) throw std::invalid_argument("need at least one axis");
  for (const auto& ax : axes) {
    if (!ax.xi.centered())
      throw std::invalid_argument(
          "orthomartingale axis innovation must be centered");
    if (ax.window < 0 || ax.coupling < 0.0 || ax.coupling >= 1.0)
      throw std::invalid_argument("axis martingale needs window >= 0 and coupling in [0,1)");
  }
  FieldModel m;
  m.value = ProductOmModel{std::move(axes)};
  m.space = space;
  return m;
}

MdepEstimate mdep_component(const FieldModel& model, int m_level,
                            const MultiIndex& site, std::uint64_t env_seed,
                            int replicates, std::uint64_t seed) {
  if (m_level < 0) throw std::invalid_argument("m_level must be >= 0");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (model.get_if<MDepApproxModel>())
    throw std::invalid_argument("mdep_component of an mdep model is not supported");
  const int m = model.space.m;
  MdepEstimate est;
  est.value.assign(static_cast<std::size_t>(m), 0.0);
  const Index K = model.window();
  if (m_level > K) return est;  // window saturation: exact zero

  const bool exact_hi = (m_level == static_cast<int>(K));
  std::vector<double> hi(static_cast<std::size_t>(m)), lo(static_cast<std::size_t>(m));
  if (exact_hi) field_value_at(model, env_seed, site, RedrawRule::none(), hi);

  std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
  std::vector<double> msq(static_cast<std::size_t>(m), 0.0);
  for (int t = 0; t < replicates; ++t) {
    if (!exact_hi)
      field_value_at(model, env_seed, site,
                     RedrawRule::outside_window(site, m_level, seed,
                                                static_cast<std::uint64_t>(t)),
                     hi);
    field_value_at(model, env_seed, site,
                   RedrawRule::outside_window(site, m_level - 1, seed,
                                              static_cast<std::uint64_t>(t)),
                   lo);
    for (int c = 0; c < m; ++c) {
      double diff = hi[static_cast<std::size_t>(c)] - lo[static_cast<std::size_t>(c)];
      double delta = diff - mean[static_cast<std::size_t>(c)];
      mean[static_cast<std::size_t>(c)] += delta / static_cast<double>(t + 1);
      msq[static_cast<std::size_t>(c)] +=
          delta * (diff - mean[static_cast<std::size_t>(c)]);
    }
  }
  est.value = mean;
  if (replicates > 1) {
    double agg = 0.0;
    for (int c = 0; c < m; ++c)
      agg += msq[static_cast<std::size_t>(c)] /
             (static_cast<double>(replicates - 1) * static_cast<double>(replicates));
    est.se = std::sqrt(agg);
  }
  return est;
}

std::vector<BlockClass> block_decompose(const Rect& region, int m_level) {
  if (m_level < 0) throw std::invalid_argument("m_level must be >= 0");
  if (!(region.lower() == MultiIndex::ones(region.dim())))
    throw std::invalid_argument("block_decompose requires lower corner 1");
  const Index stride = 2 * static_cast<Index>(m_level) + 1;
  const int d = region.dim();
  std::vector<BlockClass> classes;
  Rect offsets(MultiIndex::ones(d), MultiIndex::filled(d, stride));
  MultiIndex a = offsets.lower();
  do {
    MultiIndex j_hi = MultiIndex::zeros(d);
    bool empty = false;
    for (int l = 0; l < d; ++l) {
      Index hi = (region.upper()[l] - a[l]) / stride;  // floor, both >= 0
      if (region.upper()[l] < a[l]) {
        empty = true;
        break;
      }
      j_hi[l] = hi;
    }
    if (!empty)
      classes.push_back({a, stride, Rect(MultiIndex::zeros(d), j_hi)});
  } while (offsets.next_point(a));
  return classes;
}

double env_innovation_site(const FieldModel& model, std::uint64_t env_seed,
                           const MultiIndex& u, int comp) {
  return site_dist(model).sample(env_word_site(env_seed, u.coords(), comp));
}

double env_innovation_axis(const FieldModel& model, std::uint64_t env_seed,
                           int axis, Index pos, int comp) {
  return axis_dist(model, axis).sample(env_word_axis(env_seed, axis, pos, comp));
}

double redraw_innovation_axis(const FieldModel& model,
                              std::uint64_t redraw_seed,
                              std::uint64_t replicate, int axis, Index pos,
                              int comp) {
  RedrawRule r;
  r.redraw_seed = redraw_seed;
  r.replicate = replicate;
  return axis_dist(model, axis).sample(redraw_word_axis(r, axis, pos, comp));
}

double matrix_op_norm(std::span<const double> a, int m) {
  if (a.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
    throw std::invalid_argument("matrix size mismatch");
  double frob = 0.0;
  for (double v : a) frob += v * v;
  if (frob == 0.0) return 0.0;
  if (m == 1) return std::fabs(a[0]);

  // Power iteration on A^T A; deterministic, slightly tilted start vector.
  std::vector<double> x(static_cast<std::size_t>(m)), y(static_cast<std::size_t>(m)),
      z(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] = 1.0 + 1e-3 * i;
  double prev = 0.0;
  for (int it = 0; it < 20000; ++it) {
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += a[static_cast<std::size_t>(i * m + j)] * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s;
    }
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += a[static_cast<std::size_t>(i * m + j)] * y[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(j)] = s;
    }
    double nz = 0.0;
    for (double v : z) nz += v * v;
    nz = std::sqrt(nz);
    if (nz == 0.0) return 0.0;
    double sigma = 0.0;
    for (double v : y) sigma += v * v;
    sigma = std::sqrt(sigma);
    for (int j = 0; j < m; ++j) x[static_cast<std::size_t>(j)] = z[static_cast<std::size_t>(j)] / nz;
    if (it > 0 && std::fabs(sigma - prev) <= 1e-8 * std::max(sigma, 1e-300))
      return sigma;
    prev = sigma;
  }
  return prev;
}

FieldModel make_geometric_linear(int dim, double rho, int window,
                                 const Innovation& dist, GMap g,
                                 SpaceSpec space) {
  if (dim < 1 || window < 0) throw std::invalid_argument("bad linear field shape");
  BernoulliModel bm;
  bm.dim = dim;
  bm.window = window;
  bm.dist = dist;
  bm.g = g;
  const int m = space.m;
  Rect ball(MultiIndex::filled(dim, -window), MultiIndex::filled(dim, window));
  MultiIndex k = ball.lower();
  do {
    BernoulliCoeff c;
    c.offset = k;
    c.matrix.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    double w = std::pow(rho, static_cast<double>(linf_norm(k)));
    for (int i = 0; i < m; ++i) c.matrix[static_cast<std::size_t>(i * m + i)] = w;
    bm.coeffs.push_back(std::move(c));
  } while (ball.next_point(k));
  FieldModel model;
  model.value = std::move(bm);
  model.space = space;
  return model;
}

double geometric_tail_mass(int dim, double rho, int window, double p_alpha) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("geometric tail requires rho in [0,1)");
  double total = 0.0;
  for (int k = window + 1; k < 1000000; ++k) {
    double shell = std::pow(2.0 * k + 1.0, dim) - std::pow(2.0 * k - 1.0, dim);
    double term = shell * std::pow(std::pow(rho, k), p_alpha);
    total += term;
    if (term < 1e-300 || term < 1e-16 * total) break;
  }
  return total;
}

}  // namespace fieldlab

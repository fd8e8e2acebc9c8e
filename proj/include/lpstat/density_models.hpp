#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "distributions.hpp"
#include "score_basis.hpp"
#include "selection.hpp"

namespace lpstat {

//! A null hypothesis G: either a continuous distribution with evaluable
//! CDF/density/quantile, or a specified discrete pmf.
class NullModel {
public:
  static NullModel continuous(std::string description,
                              std::function<double(double)> cdf,
                              std::function<double(double)> pdf,
                              std::function<double(double)> quantile)
  {
    NullModel m;
    m.description_ = std::move(description);
    m.cdf_ = std::move(cdf);
    m.pdf_ = std::move(pdf);
    m.quantile_ = std::move(quantile);
    return m;
  }

  static NullModel normal(double mu, double sigma)
  {
    if (!(sigma > 0.0))
      throw std::invalid_argument("NullModel::normal: sigma must be > 0");
    return continuous("normal(" + format_param(mu) + "," + format_param(sigma) + ")",
                      [=](double x) { return normal_cdf(x, mu, sigma); },
                      [=](double x) { return normal_pdf(x, mu, sigma); },
                      [=](double u) { return normal_quantile(u, mu, sigma); });
  }

  static NullModel uniform(double a, double b)
  {
    if (!(b > a))
      throw std::invalid_argument("NullModel::uniform: need a < b");
    return continuous("uniform(" + format_param(a) + "," + format_param(b) + ")",
                      [=](double x) { return x <= a ? 0.0 : (x >= b ? 1.0 : (x - a) / (b - a)); },
                      [=](double x) { return (x < a || x > b) ? 0.0 : 1.0 / (b - a); },
                      [=](double u) { return a + u * (b - a); });
  }

  static NullModel exponential(double rate)
  {
    if (!(rate > 0.0))
      throw std::invalid_argument("NullModel::exponential: rate must be > 0");
    return continuous("exponential(" + format_param(rate) + ")",
                      [=](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); },
                      [=](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); },
                      [=](double u) { return -std::log1p(-u) / rate; });
  }

  static NullModel discrete(std::shared_ptr<const EmpiricalDistribution> dist,
                            std::string description = "discrete")
  {
    if (!dist)
      throw std::invalid_argument("NullModel::discrete: null distribution");
    if (dist->size() < 2)
      throw std::invalid_argument("NullModel::discrete: need at least 2 outcomes");
    NullModel m;
    m.description_ = std::move(description);
    m.dist_ = std::move(dist);
    return m;
  }

  bool is_continuous() const { return !dist_; }
  const std::string& description() const { return description_; }

  double cdf(double x) const { require_continuous(); return cdf_(x); }
  double pdf(double x) const { require_continuous(); return pdf_(x); }
  double quantile(double u) const
  {
    require_continuous();
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument("NullModel::quantile: u must lie in (0,1)");
    return quantile_(u);
  }

  const std::shared_ptr<const EmpiricalDistribution>& distribution() const
  {
    if (is_continuous())
      throw std::runtime_error("NullModel: continuous model has no discrete distribution");
    return dist_;
  }

private:
  static std::string format_param(double v)
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
  }
  void require_continuous() const
  {
    if (!is_continuous())
      throw std::runtime_error("NullModel: operation requires a continuous model");
  }

  std::string description_;
  std::function<double(double)> cdf_, pdf_, quantile_;
  std::shared_ptr<const EmpiricalDistribution> dist_;
};

//! Comparison distribution D(u;G,F) = F(Q(u;G)): the empirical CDF of
//! the probability-integral transforms G(x_i).
inline double comparison_distribution(std::span<const double> sample, const NullModel& null,
                                      double u)
{
  if (!null.is_continuous())
    throw std::invalid_argument("comparison_distribution: use the discrete pathway for discrete nulls");
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("comparison_distribution: u must lie in (0,1)");
  if (sample.empty())
    throw std::invalid_argument("comparison_distribution: empty sample");
  std::size_t count = 0;
  for (double x : sample) {
    if (null.cdf(x) <= u) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

struct GofComponents {
  std::vector<double> components;  // Comp_j = mean of T_j(x_i;G)
  double se = 0.0;                 // null standard error 1/sqrt(n)
  std::size_t n = 0;
};

//! Goodness-of-fit components Comp_j(X;G) = E[T_j(X;G)] under the data.
//! Continuous nulls use the Legendre scores Leg_j(G(x)); discrete nulls
//! use their Gram-Schmidt score table. All components are ~N(0,1/n)
//! when G is the truth.
inline GofComponents gof_components(std::span<const double> sample, const NullModel& null,
                                    int m = 4)
{
  if (sample.empty())
    throw std::invalid_argument("gof_components: empty sample");
  if (m < 1)
    throw std::invalid_argument("gof_components: order must be >= 1");
  GofComponents out;
  out.n = sample.size();
  out.se = 1.0 / std::sqrt(static_cast<double>(sample.size()));
  if (null.is_continuous()) {
    out.components.assign(static_cast<std::size_t>(m), 0.0);
    for (double x : sample) {
      if (!(null.pdf(x) > 0.0))
        throw std::runtime_error("gof_components: sample value outside the null support (g = 0)");
      const double u = null.cdf(x);
      for (int j = 1; j <= m; ++j)
        out.components[static_cast<std::size_t>(j - 1)] += legendre(j, u);
    }
  } else {
    auto basis = scores_for(null.distribution(), m);
    out.components.assign(static_cast<std::size_t>(basis->order()), 0.0);
    const auto& dist = *null.distribution();
    const auto& tab = basis->table();
    for (double x : sample) {
      auto idx = dist.index_of(x);
      if (!idx)
        throw std::runtime_error("gof_components: observed outcome outside the null support");
      for (int j = 0; j < basis->order(); ++j)
        out.components[static_cast<std::size_t>(j)] += tab(static_cast<Eigen::Index>(*idx), j);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  for (double& c : out.components) c *= inv_n;
  return out;
}

namespace detail {

//! Composite Simpson rule on [0,1] with an even number of panels.
inline double simpson_unit(const std::function<double(double)>& f, int panels = 2048)
{
  const double h = 1.0 / panels;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i)
    acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace detail

//! Orthogonal-series estimate of the comparison density d(u;G,F):
//! d̂(u) = 1 + Σ_{selected j} T_j(Q(u;G);G) · Comp_j. The raw series is
//! the primary object (it can dip below zero); the clipped form
//! max(0,d̂)/∫max(0,d̂) is available for pathways that need a genuine
//! density.
class ComparisonDensityEstimate {
public:
  ComparisonDensityEstimate(NullModel null, std::vector<double> components,
                            Selection selection,
                            std::optional<std::size_t> n = std::nullopt)
      : null_(std::move(null)),
        components_(std::move(components)),
        selection_(std::move(selection)),
        n_(n)
  {
    if (selection_.mask.size() != components_.size())
      throw std::invalid_argument("ComparisonDensityEstimate: selection/component size mismatch");
    if (!null_.is_continuous())
      basis_ = scores_for(null_.distribution(), static_cast<int>(components_.size()));
    any_selected_ = selection_.count > 0;
    normalize_clip();
  }

  const NullModel& null() const { return null_; }
  const std::vector<double>& components() const { return components_; }
  const Selection& selection() const { return selection_; }
  std::optional<std::size_t> n() const { return n_; }
  bool has_negative() const { return clip_removed_ > 0.0; }
  //! Probability mass removed by clipping, ∫ max(0,−d̂).
  double clip_removed_mass() const { return clip_removed_; }

  //! Raw series value at u ∈ (0,1).
  double evaluate(double u) const
  {
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument("ComparisonDensityEstimate: u must lie in (0,1)");
    return evaluate_unchecked(u);
  }

  //! Clipped-and-renormalized value at u ∈ (0,1).
  double evaluate_clipped(double u) const
  {
    return std::max(0.0, evaluate(u)) / clip_norm_;
  }

private:
  double evaluate_unchecked(double u) const
  {
    if (!any_selected_) return 1.0;
    double d = 1.0;
    if (null_.is_continuous()) {
      for (std::size_t j = 0; j < components_.size(); ++j) {
        if (selection_.mask[j])
          d += legendre(static_cast<int>(j) + 1, u) * components_[j];
      }
    } else {
      const auto row = basis_->table().row(
          static_cast<Eigen::Index>(null_.distribution()->quantile_index(u)));
      for (std::size_t j = 0; j < components_.size(); ++j) {
        if (selection_.mask[j]) d += row[static_cast<Eigen::Index>(j)] * components_[j];
      }
    }
    return d;
  }

  void normalize_clip()
  {
    if (!any_selected_) {
      clip_norm_ = 1.0;
      clip_removed_ = 0.0;
      return;
    }
    if (null_.is_continuous()) {
      clip_norm_ = detail::simpson_unit(
          [this](double u) {
            const double uu = std::min(1.0 - 1e-12, std::max(1e-12, u));
            return std::max(0.0, evaluate_unchecked(uu));
          });
      clip_removed_ = detail::simpson_unit(
          [this](double u) {
            const double uu = std::min(1.0 - 1e-12, std::max(1e-12, u));
            return std::max(0.0, -evaluate_unchecked(uu));
          });
    } else {
      const auto& dist = *null_.distribution();
      const auto& tab = basis_->table();
      clip_norm_ = 0.0;
      clip_removed_ = 0.0;
      for (std::size_t i = 0; i < dist.size(); ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < components_.size(); ++j) {
          if (selection_.mask[j])
            d += tab(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * components_[j];
        }
        clip_norm_ += dist.pmf()[i] * std::max(0.0, d);
        clip_removed_ += dist.pmf()[i] * std::max(0.0, -d);
      }
    }
    if (!(clip_norm_ > 0.0))
      throw std::runtime_error("ComparisonDensityEstimate: clipping removed all mass");
  }

  NullModel null_;
  std::vector<double> components_;
  Selection selection_;
  std::optional<std::size_t> n_;
  std::shared_ptr<const ScoreBasis> basis_;  // discrete nulls only
  bool any_selected_ = false;
  double clip_norm_ = 1.0;
  double clip_removed_ = 0.0;
};

//! Skew-G density estimate f̂(x) = g(x) d̂(G(x)) for a continuous null.
struct SkewGEstimate {
  ComparisonDensityEstimate density;

  double pdf(double x) const
  {
    const double g = density.null().pdf(x);
    if (!(g > 0.0)) return 0.0;
    const double u = std::min(1.0 - 1e-12, std::max(1e-12, density.null().cdf(x)));
    return g * density.evaluate(u);
  }

  double pdf_clipped(double x) const
  {
    const double g = density.null().pdf(x);
    if (!(g > 0.0)) return 0.0;
    const double u = std::min(1.0 - 1e-12, std::max(1e-12, density.null().cdf(x)));
    return g * density.evaluate_clipped(u);
  }
};

//! Fits the skew-G model to a sample: estimates components against the
//! continuous null, applies the selection rule (threshold 2/sqrt(n) by
//! default), and wraps the resulting comparison-density series.
inline SkewGEstimate skew_g_estimate(std::span<const double> sample, const NullModel& null,
                                     int m = 4, SelectionRule rule = SelectionRule::threshold)
{
  if (!null.is_continuous())
    throw std::invalid_argument("skew_g_estimate: continuous null required");
  GofComponents gc = gof_components(sample, null, m);
  Selection sel = select_components(gc.components, gc.n, rule);
  return SkewGEstimate{ComparisonDensityEstimate(null, gc.components, sel, gc.n)};
}

//! Discrete goodness-of-fit estimate: the corrected pmf
//! p̂(x) = g(x) {1 + Σ_selected T_j(x;G) Comp_j} plus component
//! diagnostics. Negative p̂ cells are flagged, not silently repaired.
struct DiscreteGofEstimate {
  std::vector<double> support;     // outcome values (null support order)
  std::vector<double> null_pmf;    // g
  std::vector<double> observed;    // p̃ aligned to support (empty for moment form)
  std::vector<double> phat;        // corrected pmf
  std::vector<double> components;  // Comp_j, j = 1..m
  Selection selection;
  std::vector<double> z_scores;    // sqrt(n) Comp_j; empty when n unknown
  std::optional<double> statistic; // n * Σ_selected Comp_j²; empty when n unknown
  std::optional<std::size_t> n;
  bool has_negative = false;
  std::shared_ptr<const ScoreBasis> basis;
};

namespace detail {

inline DiscreteGofEstimate finish_discrete_gof(const NullModel& null,
                                               std::shared_ptr<const ScoreBasis> basis,
                                               std::vector<double> observed,
                                               std::vector<double> components,
                                               Selection selection,
                                               std::optional<std::size_t> n)
{
  const auto& dist = *null.distribution();
  DiscreteGofEstimate out;
  out.support = dist.support();
  out.null_pmf = dist.pmf();
  out.observed = std::move(observed);
  out.components = std::move(components);
  out.selection = std::move(selection);
  out.n = n;
  out.basis = std::move(basis);
  const auto& tab = out.basis->table();
  out.phat.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double d = 1.0;
    for (std::size_t j = 0; j < out.components.size(); ++j) {
      if (out.selection.mask[j])
        d += tab(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * out.components[j];
    }
    out.phat[i] = dist.pmf()[i] * d;
    if (out.phat[i] < 0.0) out.has_negative = true;
  }
  if (n) {
    const double nn = static_cast<double>(*n);
    out.z_scores.reserve(out.components.size());
    for (double c : out.components) out.z_scores.push_back(std::sqrt(nn) * c);
    out.statistic = nn * out.selection.statistic;
  }
  return out;
}

}  // namespace detail

//! Discrete GOF from an observed pmf p̃ over the null outcomes (zeros
//! allowed for unobserved cells). A sample size enables the data-driven
//! selection rules and the n·LPINFOR-style statistic; without one, all
//! components are treated as data and retained.
inline DiscreteGofEstimate discrete_gof_from_pmf(std::span<const double> values,
                                                 std::span<const double> probs,
                                                 const NullModel& null, int m = 4,
                                                 SelectionRule rule = SelectionRule::threshold,
                                                 std::optional<std::size_t> n = std::nullopt)
{
  if (null.is_continuous())
    throw std::invalid_argument("discrete_gof_from_pmf: discrete null required");
  if (values.size() != probs.size() || values.empty())
    throw std::invalid_argument("discrete_gof_from_pmf: need matching non-empty value/probability lists");
  const auto& dist = *null.distribution();
  std::vector<double> pt(dist.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto idx = dist.index_of(values[i]);
    if (!idx)
      throw std::runtime_error("discrete_gof_from_pmf: observed outcome outside the null support");
    if (probs[i] < 0.0)
      throw std::invalid_argument("discrete_gof_from_pmf: negative observed probability");
    pt[*idx] += probs[i];
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("discrete_gof_from_pmf: observed probabilities must sum to 1 within 1e-9");
  for (double& p : pt) p /= total;

  auto basis = scores_for(null.distribution(), m);
  const auto& tab = basis->table();
  std::vector<double> comps(static_cast<std::size_t>(basis->order()), 0.0);
  for (std::size_t i = 0; i < pt.size(); ++i) {
    for (int j = 0; j < basis->order(); ++j)
      comps[static_cast<std::size_t>(j)] += pt[i] * tab(static_cast<Eigen::Index>(i), j);
  }
  Selection sel = n ? select_components(comps, *n, rule)
                    : select_components(comps, 0, SelectionRule::all);
  return detail::finish_discrete_gof(null, std::move(basis), std::move(pt), std::move(comps),
                                     std::move(sel), n);
}

//! Discrete GOF from a raw sample of outcomes.
inline DiscreteGofEstimate discrete_gof_from_sample(std::span<const double> sample,
                                                    const NullModel& null, int m = 4,
                                                    SelectionRule rule = SelectionRule::threshold)
{
  if (null.is_continuous())
    throw std::invalid_argument("discrete_gof_from_sample: discrete null required");
  if (sample.empty())
    throw std::invalid_argument("discrete_gof_from_sample: empty sample");
  const auto& dist = *null.distribution();
  std::vector<double> pt(dist.size(), 0.0);
  for (double x : sample) {
    auto idx = dist.index_of(x);
    if (!idx)
      throw std::runtime_error("discrete_gof_from_sample: observed outcome outside the null support");
    pt[*idx] += 1.0;
  }
  const double n = static_cast<double>(sample.size());
  for (double& p : pt) p /= n;

  auto basis = scores_for(null.distribution(), m);
  const auto& tab = basis->table();
  std::vector<double> comps(static_cast<std::size_t>(basis->order()), 0.0);
  for (std::size_t i = 0; i < pt.size(); ++i) {
    for (int j = 0; j < basis->order(); ++j)
      comps[static_cast<std::size_t>(j)] += pt[i] * tab(static_cast<Eigen::Index>(i), j);
  }
  Selection sel = select_components(comps, sample.size(), rule);
  return detail::finish_discrete_gof(null, std::move(basis), std::move(pt), std::move(comps),
                                     std::move(sel), sample.size());
}

//! Discrete GOF from a first-moment constraint (observed mean) alone,
//! the maximum-entropy-style pathway. Identifiable only for a uniform
//! null on equally spaced outcomes, where the mid-distribution transform
//! is linear in x, so the observed mean pins down the first component:
//! Comp_1 = (Gmid(mean) - 1/2)/σ(Gmid). The component is treated as data
//! (no sample size, no standard errors), and only the first component is
//! identified — higher orders are refused rather than guessed.
inline DiscreteGofEstimate discrete_gof_from_mean(double observed_mean, const NullModel& null)
{
  if (null.is_continuous())
    throw std::invalid_argument("discrete_gof_from_mean: discrete null required");
  if (!std::isfinite(observed_mean))
    throw std::invalid_argument("discrete_gof_from_mean: non-finite mean");
  const auto& dist = *null.distribution();
  const std::size_t k = dist.size();
  const double unif = 1.0 / static_cast<double>(k);
  for (double p : dist.pmf()) {
    if (std::abs(p - unif) > 1e-9)
      throw std::runtime_error(
          "discrete_gof_from_mean: moment-constraint pathway requires a uniform null pmf");
  }
  const double step = dist.support()[1] - dist.support()[0];
  for (std::size_t i = 1; i < k; ++i) {
    const double d = dist.support()[i] - dist.support()[i - 1];
    if (std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step)))
      throw std::runtime_error(
          "discrete_gof_from_mean: moment-constraint pathway requires equally spaced outcomes");
  }
  // Gmid(x) = ((x - x_1)/step + 1/2)/k is linear, so E[Gmid(X)] follows
  // from the mean alone.
  const double gmid_mean =
      ((observed_mean - dist.support()[0]) / step + 0.5) / static_cast<double>(k);
  const double comp1 = (gmid_mean - 0.5) / dist.mid_sd();

  auto basis = scores_for(null.distribution(), 1);
  std::vector<double> comps{comp1};
  Selection sel = select_components(comps, 0, SelectionRule::all);
  return detail::finish_discrete_gof(null, std::move(basis), {}, std::move(comps),
                                     std::move(sel), std::nullopt);
}

//! Comparison-density view of a discrete GOF estimate (step function on
//! the unit interval through the null's mid-quantile cells).
inline ComparisonDensityEstimate discrete_gof_density(const DiscreteGofEstimate& est,
                                                      const NullModel& null)
{
  return ComparisonDensityEstimate(null, est.components, est.selection, est.n);
}

}  // namespace lpstat

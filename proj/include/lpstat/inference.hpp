#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "density_models.hpp"
#include "distributions.hpp"
#include "lp_comoments.hpp"
#include "parallel.hpp"

namespace lpstat {

//! Wilcoxon-type two-sample summary via LP(1,1;X, 1{Y=1}).
struct TwoSampleResult {
  double lp11 = 0.0;     // mid-rank / indicator correlation
  double z_score = 0.0;  // sqrt(n) * lp11
  double p_value = 1.0;  // two-sided normal
  double t_equiv = 0.0;  // R/sqrt(1-R^2); +-inf at |R| = 1
  double pearson_r = 0.0;
  std::size_t pooled_n = 0;
  LpinforResult lpinfor;
  LPComomentMatrix comoments;
  //! d̂(u; pooled, sample1): comparison density of the treated group
  //! against the pooled empirical distribution.
  std::shared_ptr<const ComparisonDensityEstimate> conditional_density;
};

//! Pearson correlation of two equal-length columns.
inline double pearson_correlation(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: need matching columns with n >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::runtime_error("pearson_correlation: a column is constant");
  return sxy / std::sqrt(sxx * syy);
}

//! T = R/sqrt(1-R^2) for binary y in {0,1}. This is the correlation
//! equivalence form; the classical two-sample t equals sqrt(n-2) times
//! this value.
inline double t_equivalent(std::span<const double> x, std::span<const double> y01)
{
  bool saw0 = false, saw1 = false;
  for (double v : y01) {
    if (v == 0.0) saw0 = true;
    else if (v == 1.0) saw1 = true;
    else throw std::invalid_argument("t_equivalent: y must be coded 0/1");
  }
  if (!saw0 || !saw1)
    throw std::invalid_argument("t_equivalent: both classes must be present");
  const double r = pearson_correlation(x, y01);
  if (std::abs(r) >= 1.0)
    throw std::runtime_error("t_equivalent: undefined at |R| = 1");
  return r / std::sqrt(1.0 - r * r);
}

//! Pools the samples, sets the membership indicator Y = 1{from sample1},
//! and computes the rank statistics: lp11 (tie-robust by the
//! mid-rank construction), its z-score and p-value, the t-equivalence
//! form, LPINFOR(X,Y), and the conditional comparison density of
//! sample1 against the pooled distribution.
inline TwoSampleResult two_sample(std::span<const double> sample0,
                                  std::span<const double> sample1, int m = 4,
                                  SelectionRule rule = SelectionRule::threshold)
{
  if (sample0.empty() || sample1.empty())
    throw std::invalid_argument("two_sample: both samples must be non-empty");
  TwoSampleResult res;
  res.pooled_n = sample0.size() + sample1.size();

  std::vector<double> pooled;
  pooled.reserve(res.pooled_n);
  pooled.insert(pooled.end(), sample0.begin(), sample0.end());
  pooled.insert(pooled.end(), sample1.begin(), sample1.end());
  std::vector<double> indicator(res.pooled_n, 0.0);
  std::fill(indicator.begin() + static_cast<std::ptrdiff_t>(sample0.size()), indicator.end(), 1.0);

  auto pooled_dist = std::make_shared<const EmpiricalDistribution>(
      EmpiricalDistribution::from_sample(pooled, DistKind::discrete_sample));
  if (pooled_dist->size() < 2)
    throw std::runtime_error("two_sample: pooled sample is constant");

  // lp11 = Pearson correlation of Fmid(pooled) with the indicator
  std::vector<double> mids(res.pooled_n);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    mids[i] = pooled_dist->mid()[*pooled_dist->index_of(pooled[i])];
  res.lp11 = pearson_correlation(mids, indicator);
  res.z_score = std::sqrt(static_cast<double>(res.pooled_n)) * res.lp11;
  res.p_value = normal_two_sided_p(res.z_score);

  res.pearson_r = pearson_correlation(pooled, indicator);
  res.t_equiv = std::abs(res.pearson_r) < 1.0
                    ? res.pearson_r / std::sqrt(1.0 - res.pearson_r * res.pearson_r)
                    : std::copysign(std::numeric_limits<double>::infinity(), res.pearson_r);

  res.comoments = lp_comoments(pooled, indicator, m, 1);
  res.lpinfor = lpinfor(res.comoments, rule);

  NullModel pooled_null = NullModel::discrete(pooled_dist, "pooled");
  GofComponents gc = gof_components(sample1, pooled_null,
                                    std::min<int>(m, static_cast<int>(pooled_dist->size()) - 1));
  Selection sel = select_components(gc.components, gc.n, rule);
  res.conditional_density = std::make_shared<const ComparisonDensityEstimate>(
      std::move(pooled_null), gc.components, sel, gc.n);
  return res;
}

struct FeatureScreenEntry {
  std::string name;
  double lpinfor_value = 0.0;
  std::size_t selected_components = 0;
  int rank = 0;           // 1-based; 0 for skipped features
  bool skipped = false;
  std::string message;    // reason when skipped
};

struct FeatureScreenReport {
  std::vector<FeatureScreenEntry> entries;  // descending by lpinfor, skipped last
  SelectionRule rule = SelectionRule::threshold;
};

//! Screens features by LPINFOR(X_m, Y) under a shared selection rule.
//! Degenerate features are skipped with a message. Ordering: descending
//! LPINFOR, ties broken by name for determinism.
inline FeatureScreenReport feature_screen(const std::vector<std::string>& names,
                                          const std::vector<std::vector<double>>& features,
                                          std::span<const double> y, int m = 4,
                                          SelectionRule rule = SelectionRule::threshold,
                                          int threads = 0)
{
  if (names.size() != features.size())
    throw std::invalid_argument("feature_screen: names/features size mismatch");
  {
    auto ydist = EmpiricalDistribution::from_sample(y);
    if (ydist.size() < 2)
      throw std::invalid_argument("feature_screen: y is degenerate");
  }
  FeatureScreenReport report;
  report.rule = rule;
  report.entries.resize(features.size());
  parallel_for(features.size(), resolve_threads(threads), [&](std::size_t f) {
    FeatureScreenEntry e;
    e.name = names[f];
    if (features[f].size() != y.size()) {
      e.skipped = true;
      e.message = "column length differs from y";
    } else {
      try {
        const LPComomentMatrix cm = lp_comoments(features[f], y, m, m);
        const LpinforResult li = lpinfor(cm, rule);
        e.lpinfor_value = li.statistic;
        e.selected_components = li.selection.count;
      } catch (const std::exception& ex) {
        e.skipped = true;
        e.message = ex.what();
      }
    }
    report.entries[f] = e;
  });
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const FeatureScreenEntry& a, const FeatureScreenEntry& b) {
                     if (a.skipped != b.skipped) return !a.skipped;
                     if (a.lpinfor_value != b.lpinfor_value)
                       return a.lpinfor_value > b.lpinfor_value;
                     return a.name < b.name;
                   });
  int rank = 1;
  for (auto& e : report.entries) {
    e.rank = e.skipped ? 0 : rank++;
  }
  return report;
}

//! Logistic model on score-function features:
//! logodds Pr[Y=1|X] = beta_0 + sum_selected beta_j T_j(x;X).
struct LogisticScoreModel {
  std::shared_ptr<const ScoreBasis> basis;
  std::vector<double> beta;        // intercept first, then selected scores
  std::vector<int> selected;       // score orders j entering the model
  bool converged = false;
  bool separation = false;
  int iterations = 0;

  double predict(double x) const
  {
    const Eigen::VectorXd s = basis->eval_scores(x);
    double eta = beta[0];
    for (std::size_t c = 0; c < selected.size(); ++c)
      eta += beta[c + 1] * s[selected[c] - 1];
    return 1.0 / (1.0 + std::exp(-eta));
  }

  double predict_u(double u) const
  {
    const Eigen::VectorXd s = basis->eval_scores_u(u);
    double eta = beta[0];
    for (std::size_t c = 0; c < selected.size(); ++c)
      eta += beta[c + 1] * s[selected[c] - 1];
    return 1.0 / (1.0 + std::exp(-eta));
  }
};

//! Fits the score-function logistic model by IRLS with a 1e-8 ridge on
//! the weighted normal equations. Score functions are fixed before
//! fitting; components enter by the 2/sqrt(n) pre-selection on their
//! indicator correlations (rule = all keeps every score). Complete
//! separation is detected by coefficient blow-up and reported with the
//! estimates capped rather than diverging.
inline LogisticScoreModel classify_fit(std::span<const double> x, std::span<const double> y01,
                                       int m = 4,
                                       SelectionRule rule = SelectionRule::threshold)
{
  if (x.size() != y01.size() || x.empty())
    throw std::invalid_argument("classify_fit: need matching non-empty columns");
  bool saw0 = false, saw1 = false;
  for (double v : y01) {
    if (v == 0.0) saw0 = true;
    else if (v == 1.0) saw1 = true;
    else throw std::invalid_argument("classify_fit: y must be coded 0/1");
  }
  if (!saw0 || !saw1)
    throw std::invalid_argument("classify_fit: both classes must be present");
  if (m < 1)
    throw std::invalid_argument("classify_fit: order must be >= 1");

  auto dist = std::make_shared<const EmpiricalDistribution>(EmpiricalDistribution::from_sample(x));
  if (dist->size() < 2)
    throw std::runtime_error("classify_fit: x is constant");
  LogisticScoreModel model;
  model.basis = std::make_shared<const ScoreBasis>(dist, m);

  const std::size_t n = x.size();
  const auto& tab = model.basis->table();
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = *dist->index_of(x[i]);

  // pre-selection on the score/indicator correlations LP(j, 1{Y=1})
  double ymean = 0.0;
  for (double v : y01) ymean += v;
  ymean /= static_cast<double>(n);
  const double ysd = std::sqrt(ymean * (1.0 - ymean));
  for (int j = 1; j <= model.basis->order(); ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      c += tab(static_cast<Eigen::Index>(rows[i]), j - 1) * (y01[i] - ymean);
    c /= static_cast<double>(n) * ysd;
    bool keep = true;
    if (rule == SelectionRule::threshold)
      keep = std::abs(c) > 2.0 / std::sqrt(static_cast<double>(n));
    else if (rule == SelectionRule::bic)
      keep = c * c > std::log(static_cast<double>(n)) / static_cast<double>(n);
    if (keep) model.selected.push_back(j);
  }

  const std::size_t p = model.selected.size() + 1;
  Eigen::MatrixXd design(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t c = 0; c < model.selected.size(); ++c)
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c + 1)) =
          tab(static_cast<Eigen::Index>(rows[i]), model.selected[c] - 1);
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y01.data(), static_cast<Eigen::Index>(n));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  const int max_iter = 50;
  const double cap = 25.0;
  for (int it = 1; it <= max_iter; ++it) {
    model.iterations = it;
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd mu(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double e = std::min(30.0, std::max(-30.0, eta[i]));
      mu[i] = 1.0 / (1.0 + std::exp(-e));
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    const Eigen::VectorXd z = eta + (yv - mu).cwiseQuotient(w);
    Eigen::MatrixXd xtwx = design.transpose() * w.asDiagonal() * design;
    xtwx.diagonal().array() += 1e-8;
    const Eigen::VectorXd next = xtwx.ldlt().solve(design.transpose() * (w.asDiagonal() * z));
    const double step = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    if (beta.lpNorm<Eigen::Infinity>() > cap) {
      model.separation = true;
      for (Eigen::Index i = 0; i < beta.size(); ++i)
        beta[i] = std::min(cap, std::max(-cap, beta[i]));
      break;
    }
    if (step < 1e-8 * (1.0 + beta.lpNorm<Eigen::Infinity>())) {
      model.converged = true;
      break;
    }
  }
  model.beta.assign(beta.data(), beta.data() + beta.size());
  return model;
}

}  // namespace lpstat

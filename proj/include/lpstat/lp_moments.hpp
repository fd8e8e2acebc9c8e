#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "score_basis.hpp"

namespace lpstat {

//! LP moment sequence of one variable: LP(j;X) = E[X T_j(X;X)].
struct LPMomentVector {
  std::shared_ptr<const ScoreBasis> basis;
  std::vector<double> coeffs;        // LP(j;X), j = 1..m
  std::vector<double> standardized;  // LP(j;X)/sd(X)
  std::vector<double> var_explained; // cumulative share of Var[X]
  double mean = 0.0;
  double sd = 0.0;
};

//! Computes LP(j;X) for j = 1..order of the basis. By Parseval the
//! squared coefficients sum to Var[X] when the basis is complete.
inline LPMomentVector lp_moments(const std::shared_ptr<const ScoreBasis>& basis)
{
  if (!basis)
    throw std::invalid_argument("lp_moments: null basis");
  const auto& dist = *basis->distribution();
  const double sd = dist.sd();
  if (!(sd > 0.0))
    throw std::runtime_error("lp_moments: distribution has zero variance");

  LPMomentVector out;
  out.basis = basis;
  out.mean = dist.mean();
  out.sd = sd;
  const int m = basis->order();
  out.coeffs.resize(m);
  out.standardized.resize(m);
  out.var_explained.resize(m);
  const auto& x = dist.support();
  const auto& p = dist.pmf();
  const auto& tab = basis->table();
  double cum = 0.0;
  const double var = sd * sd;
  for (int j = 0; j < m; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      c += p[i] * x[i] * tab(static_cast<Eigen::Index>(i), j);
    out.coeffs[j] = c;
    out.standardized[j] = c / sd;
    cum += c * c;
    out.var_explained[j] = cum / var;
  }
  return out;
}

//! Smallest j whose cumulative variance share exceeds the threshold;
//! empty when even the full computed sequence falls short.
inline std::optional<int> tail_index(const LPMomentVector& mom, double threshold = 0.95)
{
  for (std::size_t j = 0; j < mom.var_explained.size(); ++j) {
    if (mom.var_explained[j] > threshold)
      return static_cast<int>(j) + 1;
  }
  return std::nullopt;
}

//! Quantile reconstruction Qhat(u) = E[X] + sum_j S_j(u;X) LP(j;X).
//! With no truncation threshold every computed moment enters the sum;
//! otherwise the sum stops at the first j passing the cumulative
//! variance-share threshold (all terms if none does).
inline double quantile_reconstruction(const LPMomentVector& mom, double u,
                                      std::optional<double> var_share_threshold = std::nullopt)
{
  if (!mom.basis)
    throw std::invalid_argument("quantile_reconstruction: moments carry no basis");
  int use = static_cast<int>(mom.coeffs.size());
  if (var_share_threshold) {
    if (auto j = tail_index(mom, *var_share_threshold))
      use = *j;
  }
  const Eigen::VectorXd s = mom.basis->eval_scores_u(u);
  double q = mom.mean;
  for (int j = 0; j < use; ++j)
    q += s[j] * mom.coeffs[j];
  return q;
}

//! First-component normality diagnostic: LP(1;Z) of the z-scored sample.
//! Values near sqrt(3/pi) ≈ 0.9772 are consistent with normality; smaller
//! values indicate heavy tails, larger ones short tails.
inline double normality_component(std::span<const double> sample)
{
  auto dist = std::make_shared<const EmpiricalDistribution>(
      EmpiricalDistribution::from_sample(sample));
  if (!(dist->sd() > 0.0))
    throw std::runtime_error("normality_component: sample has zero variance");
  auto basis = std::make_shared<const ScoreBasis>(dist, 1);
  return lp_moments(basis).standardized[0];
}

//! A candidate monotone re-expression for the LP criterion search.
struct Transform {
  std::string name;
  std::function<double(double)> apply;
  std::function<bool(double)> in_domain;
  bool increasing = true;
};

struct TransformScore {
  std::string name;
  double criterion = 0.0;     // |corr(z(g(X)), T_1(X;X))|-style alignment score
  bool applicable = false;
  bool short_tailed = false;  // criterion exceeded the normality threshold
  std::string message;        // reason when not applicable
};

//! Built-in re-expressions: identity, log, sqrt, reciprocal, logit.
inline std::vector<Transform> builtin_transforms()
{
  std::vector<Transform> t;
  t.push_back({"identity", [](double x) { return x; },
               [](double) { return true; }, true});
  t.push_back({"log", [](double x) { return std::log(x); },
               [](double x) { return x > 0.0; }, true});
  t.push_back({"sqrt", [](double x) { return std::sqrt(x); },
               [](double x) { return x >= 0.0; }, true});
  t.push_back({"reciprocal", [](double x) { return 1.0 / x; },
               [](double x) { return x > 0.0; }, false});
  t.push_back({"logit", [](double x) { return std::log(x / (1.0 - x)); },
               [](double x) { return x > 0.0 && x < 1.0; }, true});
  return t;
}

//! Scores each candidate transform by LP(1;Z(g(X))), computed through
//! rank reuse: mid-ranks of g(X) equal those of X for increasing g and
//! flip for decreasing g, so the statistic is the pmf-weighted product
//! of the standardized transformed values with ±T_1. Results come back
//! sorted by criterion (inapplicable transforms last, with a message);
//! entries above the threshold mark the re-expression as short-tailed,
//! with values near sqrt(3/pi) ≈ 0.977 indicating approximate normality.
inline std::vector<TransformScore> lp_criterion_search(std::span<const double> sample,
                                                       const std::vector<Transform>& transforms,
                                                       double short_tail_threshold = 0.975)
{
  auto dist = std::make_shared<const EmpiricalDistribution>(
      EmpiricalDistribution::from_sample(sample));
  if (dist->size() < 2)
    throw std::runtime_error("lp_criterion_search: sample is constant");
  auto basis = std::make_shared<const ScoreBasis>(dist, 1);
  const auto& x = dist->support();
  const auto& p = dist->pmf();
  const auto& tab = basis->table();

  std::vector<TransformScore> out;
  for (const auto& t : transforms) {
    TransformScore sc;
    sc.name = t.name;
    bool ok = true;
    for (double v : x) {
      if (!t.in_domain(v)) { ok = false; break; }
    }
    if (!ok) {
      sc.message = "sample leaves the transform domain";
      out.push_back(std::move(sc));
      continue;
    }
    std::vector<double> g(x.size());
    bool monotone = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = t.apply(x[i]);
      if (!std::isfinite(g[i])) { ok = false; break; }
      if (i > 0) {
        const bool up = g[i] > g[i - 1];
        if (t.increasing ? !up : up) monotone = false;
      }
    }
    if (!ok || !monotone) {
      sc.message = ok ? "transform not strictly monotone on the sample"
                      : "transform produced non-finite values";
      out.push_back(std::move(sc));
      continue;
    }
    double gm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gm += p[i] * g[i];
    double gv = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gv += p[i] * (g[i] - gm) * (g[i] - gm);
    if (!(gv > 0.0)) {
      sc.message = "transformed sample has zero variance";
      out.push_back(std::move(sc));
      continue;
    }
    const double gsd = std::sqrt(gv);
    double c = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      c += p[i] * ((g[i] - gm) / gsd) * tab(static_cast<Eigen::Index>(i), 0);
    sc.applicable = true;
    sc.criterion = t.increasing ? c : -c;
    sc.short_tailed = sc.criterion > short_tail_threshold;
    out.push_back(std::move(sc));
  }
  std::stable_sort(out.begin(), out.end(), [](const TransformScore& a, const TransformScore& b) {
    if (a.applicable != b.applicable) return a.applicable;
    return a.criterion > b.criterion;
  });
  return out;
}

}  // namespace lpstat

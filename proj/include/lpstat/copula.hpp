#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "lp_comoments.hpp"

namespace lpstat {

//! LP-series copula density model: ĉop(u,v) = 1 + Σ_selected LP(j,k)
//! S_j(u;X) S_k(v;Y), with marginals, score bases and the component
//! selection assembled at fit time. Immutable after construction.
struct CopulaModel {
  LPComomentMatrix comoments;
  LpinforResult components;  // selection mask over (j,k), row-major

  const std::shared_ptr<const ScoreBasis>& basis_x() const { return comoments.basis_x; }
  const std::shared_ptr<const ScoreBasis>& basis_y() const { return comoments.basis_y; }
  const std::shared_ptr<const EmpiricalDistribution>& dist_x() const
  {
    return comoments.basis_x->distribution();
  }
  const std::shared_ptr<const EmpiricalDistribution>& dist_y() const
  {
    return comoments.basis_y->distribution();
  }
};

inline CopulaModel estimate_copula(std::span<const double> x, std::span<const double> y,
                                   int m_x = 4, int m_y = 4,
                                   SelectionRule rule = SelectionRule::threshold)
{
  CopulaModel model;
  model.comoments = lp_comoments(x, y, m_x, m_y);
  model.components = lpinfor(model.comoments, rule);
  return model;
}

namespace detail {

//! Series value for tabulated score rows (one support cell per marginal).
inline double copula_cell_value(const CopulaModel& model,
                                const Eigen::VectorXd& sx, const Eigen::VectorXd& sy)
{
  const auto& lp = model.comoments.values;
  const auto& mask = model.components.selection.mask;
  double c = 1.0;
  std::size_t flat = 0;
  for (int j = 0; j < lp.rows(); ++j) {
    for (int k = 0; k < lp.cols(); ++k, ++flat) {
      if (mask[flat]) c += lp(j, k) * sx[j] * sy[k];
    }
  }
  return c;
}

}  // namespace detail

//! Raw series density at (u,v); may dip below zero.
inline double copula_density(const CopulaModel& model, double u, double v)
{
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::invalid_argument("copula_density: (u,v) must lie in (0,1)^2");
  return detail::copula_cell_value(model, model.basis_x()->eval_scores_u(u),
                                   model.basis_y()->eval_scores_u(v));
}

//! Conditional comparison density d(v;Y,Y | X = Q(given_u;X)); identical
//! to the copula density, exposed for slice plotting.
inline double conditional_comparison_density(const CopulaModel& model, double v, double given_u)
{
  return copula_density(model, given_u, v);
}

//! Bayes-factor form Comp[Y=y|X=x] = Pr[Y=y|X=x]/Pr[Y=y], evaluated at
//! the mid-distribution coordinates of two support points. Symmetric in
//! the conditioning direction.
inline double comparison_probability(const CopulaModel& model, double y, double x)
{
  const auto ix = model.dist_x()->index_of(x);
  const auto iy = model.dist_y()->index_of(y);
  if (!ix || !iy)
    throw std::runtime_error("comparison_probability: arguments must be support points");
  return detail::copula_cell_value(
      model,
      model.basis_x()->table().row(static_cast<Eigen::Index>(*ix)).transpose(),
      model.basis_y()->table().row(static_cast<Eigen::Index>(*iy)).transpose());
}

//! ∬ ĉop du dv. The fitted scores are step functions on the marginal
//! probability cells, so the double integral reduces exactly to a
//! pmf-weighted double sum over support cells — no quadrature error.
inline double copula_total_integral(const CopulaModel& model)
{
  const auto& px = model.dist_x()->pmf();
  const auto& py = model.dist_y()->pmf();
  const auto& tx = model.basis_x()->table();
  const auto& ty = model.basis_y()->table();
  double acc = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const Eigen::VectorXd sx = tx.row(static_cast<Eigen::Index>(i)).transpose();
    double row = 0.0;
    for (std::size_t l = 0; l < py.size(); ++l) {
      row += py[l] * detail::copula_cell_value(
                         model, sx, ty.row(static_cast<Eigen::Index>(l)).transpose());
    }
    acc += px[i] * row;
  }
  return acc;
}

//! ∫ ĉop(u0,v) dv at fixed u0, again an exact cell sum.
inline double copula_slice_integral(const CopulaModel& model, double u0)
{
  if (!(u0 > 0.0 && u0 < 1.0))
    throw std::invalid_argument("copula_slice_integral: u0 must lie in (0,1)");
  const Eigen::VectorXd sx = model.basis_x()->eval_scores_u(u0);
  const auto& py = model.dist_y()->pmf();
  const auto& ty = model.basis_y()->table();
  double acc = 0.0;
  for (std::size_t l = 0; l < py.size(); ++l) {
    acc += py[l] * detail::copula_cell_value(
                       model, sx, ty.row(static_cast<Eigen::Index>(l)).transpose());
  }
  return acc;
}

//! n · ∬ (ĉop − 1)² du dv by the exact cell sum; with discrete marginals
//! and full bases this reproduces the Pearson chi-square statistic.
inline double copula_chi_square_functional(const CopulaModel& model)
{
  const auto& px = model.dist_x()->pmf();
  const auto& py = model.dist_y()->pmf();
  const auto& tx = model.basis_x()->table();
  const auto& ty = model.basis_y()->table();
  double acc = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const Eigen::VectorXd sx = tx.row(static_cast<Eigen::Index>(i)).transpose();
    double row = 0.0;
    for (std::size_t l = 0; l < py.size(); ++l) {
      const double d = detail::copula_cell_value(
                           model, sx, ty.row(static_cast<Eigen::Index>(l)).transpose()) -
                       1.0;
      row += py[l] * d * d;
    }
    acc += px[i] * row;
  }
  return static_cast<double>(model.comoments.n) * acc;
}

//! Conditional quantile Q(v;Y|X=Q(given_u;X)) by the composition rule:
//! invert the clipped-and-renormalized conditional comparison density's
//! CDF at v (bisection to 1e-8), then map through Q(·;Y).
inline double conditional_quantile(const CopulaModel& model, double v, double given_u)
{
  if (!(v > 0.0 && v < 1.0 && given_u > 0.0 && given_u < 1.0))
    throw std::invalid_argument("conditional_quantile: probabilities must lie in (0,1)");

  const Eigen::VectorXd sx = model.basis_x()->eval_scores_u(given_u);
  const auto& dy = *model.dist_y();
  const auto& py = dy.pmf();
  const auto& cy = dy.cdf();
  const auto& ty = model.basis_y()->table();

  // clipped conditional density over the y cells
  std::vector<double> dens(py.size());
  double mass = 0.0;
  double removed = 0.0;
  for (std::size_t l = 0; l < py.size(); ++l) {
    const double d = detail::copula_cell_value(
        model, sx, ty.row(static_cast<Eigen::Index>(l)).transpose());
    dens[l] = std::max(0.0, d);
    mass += py[l] * dens[l];
    removed += py[l] * std::max(0.0, -d);
  }
  if (!(mass > 0.0) || removed > 0.5)
    throw std::runtime_error("conditional_quantile: degenerate conditional density after clipping");

  // piecewise-linear CDF of the clipped density, renormalized
  auto cond_cdf = [&](double w) {
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t l = 0; l < py.size(); ++l) {
      const double hi = cy[l];
      if (w <= hi) {
        acc += (w - lo) * dens[l];
        return acc / mass;
      }
      acc += (hi - lo) * dens[l];
      lo = hi;
    }
    return acc / mass;
  };

  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-8) {
    const double midpt = 0.5 * (lo + hi);
    (cond_cdf(midpt) < v ? lo : hi) = midpt;
  }
  const double w = 0.5 * (lo + hi);
  return dy.support()[dy.quantile_index(std::min(1.0, std::max(1e-300, w)))];
}

}  // namespace lpstat

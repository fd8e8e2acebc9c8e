#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "empirical.hpp"

namespace lpstat {

//! Orthonormal shifted Legendre polynomial Leg_j on (0,1):
//! Leg_j(u) = sqrt(2j+1) P_j(2u-1), so that ∫ Leg_j Leg_k du = δ_jk.
//! Leg_0 = 1 by convention.
inline double legendre(int j, double u)
{
  if (j < 0)
    throw std::invalid_argument("legendre: order must be >= 0");
  const double t = 2.0 * u - 1.0;
  double pm = 1.0;  // P_0
  if (j == 0) return pm;
  double p = t;     // P_1
  for (int r = 2; r <= j; ++r) {
    const double pn = ((2.0 * r - 1.0) * t * p - (r - 1.0) * pm) / r;
    pm = p;
    p = pn;
  }
  return std::sqrt(2.0 * j + 1.0) * p;
}

enum class BasisKind { legendre_continuous, gram_schmidt };

//! Orthonormal score functions T_1..T_m of a distribution, tabulated on
//! its support. T_1 is the standardized mid-distribution transform; the
//! higher scores are produced by orthonormalizing T_1-weighted products
//! of the lower ones under the pmf inner product (equivalent, in exact
//! arithmetic, to orthonormalizing the raw powers of T_1, but without
//! the catastrophic conditioning of the power basis).
//!
//! The basis may hold fewer than the requested number of columns when
//! the support cannot carry more orthonormal polynomials (at most k-1
//! scores exist on k points).
class ScoreBasis {
public:
  ScoreBasis(std::shared_ptr<const EmpiricalDistribution> dist, int requested_order)
      : dist_(std::move(dist)), requested_order_(requested_order)
  {
    if (!dist_)
      throw std::invalid_argument("ScoreBasis: null distribution");
    if (requested_order_ < 1)
      throw std::invalid_argument("ScoreBasis: order must be >= 1");
    if (dist_->size() < 2)
      throw std::runtime_error("ScoreBasis: degenerate distribution (single support point)");
    kind_ = dist_->is_theoretical_continuous() ? BasisKind::legendre_continuous
                                               : BasisKind::gram_schmidt;
    build();
  }

  const std::shared_ptr<const EmpiricalDistribution>& distribution() const { return dist_; }
  BasisKind kind() const { return kind_; }
  int requested_order() const { return requested_order_; }
  //! Number of score functions actually available (columns of the table).
  int order() const { return static_cast<int>(table_.cols()); }
  //! k x m table with T_j(support[i]) in column j-1.
  const Eigen::MatrixXd& table() const { return table_; }

  //! Scores (T_1(x),...,T_m(x)) at a point. Exact support points use
  //! their tabulated row; other points snap to the nearest support point
  //! for continuous-sample distributions and are rejected for discrete
  //! ones, where off-support values have no defined score.
  Eigen::VectorXd eval_scores(double x) const
  {
    if (auto idx = dist_->index_of(x))
      return table_.row(static_cast<Eigen::Index>(*idx)).transpose();
    if (dist_->kind() == DistKind::continuous_sample)
      return table_.row(static_cast<Eigen::Index>(dist_->nearest_index(x))).transpose();
    throw std::runtime_error("eval_scores: value is not a support point of a discrete distribution");
  }

  //! Quantile-domain scores S_j(u;X) = T_j(Q(u;X);X) for 0 < u < 1.
  //! Analytically specified continuous distributions use the Legendre
  //! closed form; otherwise this is the step function through the table.
  Eigen::VectorXd eval_scores_u(double u) const
  {
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument("eval_scores_u: u must lie in (0,1)");
    if (kind_ == BasisKind::legendre_continuous) {
      Eigen::VectorXd s(order());
      for (int j = 1; j <= order(); ++j) s[j - 1] = legendre(j, u);
      return s;
    }
    return table_.row(static_cast<Eigen::Index>(dist_->quantile_index(u))).transpose();
  }

  //! Pmf-weighted Gram matrix of the columns; equals the identity within
  //! numerical tolerance.
  Eigen::MatrixXd gram() const
  {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
        dist_->pmf().data(), static_cast<Eigen::Index>(dist_->pmf().size()));
    return table_.transpose() * w.asDiagonal() * table_;
  }

private:
  void build()
  {
    const auto& pmf = dist_->pmf();
    const auto& mid = dist_->mid();
    const Eigen::Index k = static_cast<Eigen::Index>(dist_->size());
    const int m = std::min<int>(requested_order_, static_cast<int>(k) - 1);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(pmf.data(), k);

    Eigen::MatrixXd tab(k, m);
    const double msd = dist_->mid_sd();
    if (!(msd > 0.0))
      throw std::runtime_error("ScoreBasis: zero mid-distribution variance");
    for (Eigen::Index i = 0; i < k; ++i)
      tab(i, 0) = (mid[i] - 0.5) / msd;

    int built = 1;
    for (int j = 2; j <= m; ++j) {
      Eigen::VectorXd v = tab.col(0).cwiseProduct(tab.col(j - 2));
      const double init_norm = std::sqrt(v.cwiseAbs2().dot(w));
      // two sweeps of modified Gram-Schmidt against 1, T_1, ..., T_{j-1}
      for (int pass = 0; pass < 2; ++pass) {
        v.array() -= v.dot(w);  // remove projection on the constant
        for (int c = 0; c < built; ++c) {
          const double proj = v.cwiseProduct(tab.col(c)).dot(w);
          v -= proj * tab.col(c);
        }
      }
      const double res_norm = std::sqrt(v.cwiseAbs2().dot(w));
      if (!(res_norm > 1e-8 * init_norm))
        break;  // support exhausted: nothing orthogonal is left
      tab.col(j - 1) = v / res_norm;
      built = j;
    }
    table_ = tab.leftCols(built);
  }

  std::shared_ptr<const EmpiricalDistribution> dist_;
  int requested_order_;
  BasisKind kind_ = BasisKind::gram_schmidt;
  Eigen::MatrixXd table_;
};

//! Process-wide memo for score bases keyed by (distribution, order).
//! Bounded: the cache is cleared when it would exceed 64 entries.
inline std::shared_ptr<const ScoreBasis> scores_for(
    const std::shared_ptr<const EmpiricalDistribution>& dist, int order)
{
  static std::mutex mu;
  static std::map<std::pair<const EmpiricalDistribution*, int>,
                  std::shared_ptr<const ScoreBasis>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({dist.get(), order});
    if (it != cache.end()) return it->second;
  }
  auto basis = std::make_shared<const ScoreBasis>(dist, order);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() >= 64) cache.clear();
  return cache.emplace(std::make_pair(dist.get(), order), basis).first->second;
}

}  // namespace lpstat

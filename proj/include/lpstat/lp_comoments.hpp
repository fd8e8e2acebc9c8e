#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "distributions.hpp"
#include "lp_moments.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "score_basis.hpp"
#include "selection.hpp"

namespace lpstat {

//! Bivariate LP comoments LP(j,k;X,Y) = E[T_j(X;X) T_k(Y;Y)] together
//! with the mixed moments LP(j,0;X,Y) = E[Y T_j(X;X)].
struct LPComomentMatrix {
  Eigen::MatrixXd values;       // m_x rows, m_y cols
  std::vector<double> row0;     // LP(j,0), units of Y
  std::size_t n = 0;
  std::shared_ptr<const ScoreBasis> basis_x;
  std::shared_ptr<const ScoreBasis> basis_y;
  //! Row index of each x_i / y_i in the marginal support tables.
  std::vector<std::size_t> idx_x;
  std::vector<std::size_t> idx_y;

  int order_x() const { return static_cast<int>(values.rows()); }
  int order_y() const { return static_cast<int>(values.cols()); }
};

namespace detail {

inline std::vector<std::size_t> support_indices(const EmpiricalDistribution& dist,
                                                std::span<const double> v)
{
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    idx[i] = *dist.index_of(v[i]);  // built from this sample, so always found
  return idx;
}

}  // namespace detail

//! Computes the comoment matrix of paired observations. Marginal score
//! bases are built from the paired sample itself; orders clip at the
//! available support size minus one. Defaults follow min(4, k-1).
inline LPComomentMatrix lp_comoments(std::span<const double> x, std::span<const double> y,
                                     int m_x = 4, int m_y = 4)
{
  if (x.size() != y.size())
    throw std::invalid_argument("lp_comoments: x and y lengths differ");
  if (x.size() < 2)
    throw std::invalid_argument("lp_comoments: need at least 2 pairs");
  auto dx = std::make_shared<const EmpiricalDistribution>(EmpiricalDistribution::from_sample(x));
  auto dy = std::make_shared<const EmpiricalDistribution>(EmpiricalDistribution::from_sample(y));
  if (dx->size() < 2 || dy->size() < 2)
    throw std::runtime_error("lp_comoments: degenerate marginal (single distinct value)");

  LPComomentMatrix out;
  out.n = x.size();
  out.basis_x = std::make_shared<const ScoreBasis>(dx, m_x);
  out.basis_y = std::make_shared<const ScoreBasis>(dy, m_y);
  out.idx_x = detail::support_indices(*dx, x);
  out.idx_y = detail::support_indices(*dy, y);

  const auto& tx = out.basis_x->table();
  const auto& ty = out.basis_y->table();
  const int mx = out.basis_x->order();
  const int my = out.basis_y->order();
  out.values = Eigen::MatrixXd::Zero(mx, my);
  out.row0.assign(mx, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto rx = tx.row(static_cast<Eigen::Index>(out.idx_x[i]));
    const auto ry = ty.row(static_cast<Eigen::Index>(out.idx_y[i]));
    out.values.noalias() += rx.transpose() * ry;
    for (int j = 0; j < mx; ++j) out.row0[j] += rx[j] * y[i];
  }
  const double inv_n = 1.0 / static_cast<double>(x.size());
  out.values *= inv_n;
  for (double& v : out.row0) v *= inv_n;
  return out;
}

//! Tie-robust Spearman correlation: LP(1,1;X,Y), i.e. the Pearson
//! correlation of the mid-distribution transforms.
inline double spearman(std::span<const double> x, std::span<const double> y)
{
  return lp_comoments(x, y, 1, 1).values(0, 0);
}

struct LpinforResult {
  double statistic = 0.0;       // sum over selected |LP(j,k)|^2
  Selection selection;          // mask in row-major (j,k) order
  SelectionRule rule = SelectionRule::threshold;
};

//! LPINFOR dependence measure under a component-selection rule. With
//! rule = all this is the squared Frobenius norm of the comoment matrix,
//! the trace of the LP-Coherence matrix.
inline LpinforResult lpinfor(const LPComomentMatrix& m,
                             SelectionRule rule = SelectionRule::threshold)
{
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.values.size()));
  for (int j = 0; j < m.values.rows(); ++j)
    for (int k = 0; k < m.values.cols(); ++k)
      flat.push_back(m.values(j, k));
  LpinforResult out;
  out.rule = rule;
  out.selection = select_components(flat, m.n, rule);
  out.statistic = out.selection.statistic;
  return out;
}

//! Eigenvalues of LP-Coherence(X,Y) = K_LP(X,Y) K_LP(Y,X), descending.
//! These are squared canonical correlations of the score vectors; tiny
//! negative round-off (> -1e-10) clamps to zero.
inline std::vector<double> coherence_eigen(const LPComomentMatrix& m)
{
  const Eigen::MatrixXd c = m.values * m.values.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("coherence_eigen: eigen-solver failed to converge");
  std::vector<double> ev(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  std::reverse(ev.begin(), ev.end());
  for (double& v : ev) {
    if (v < 0.0 && v > -1e-10) v = 0.0;
  }
  return ev;
}

struct IndependenceTest {
  double statistic = 0.0;  // n * full-basis LPINFOR
  int df = 0;
  double p_value = 1.0;
  bool small_sample_warning = false;
  std::size_t n = 0;
};

//! Chi-square test of independence: n times the full-basis LPINFOR is
//! asymptotically chi-square with m_x * m_y degrees of freedom under
//! independence. Small n (< 20 by default) only raises a warning flag.
inline IndependenceTest independence_test(const LPComomentMatrix& m, std::size_t min_n = 20)
{
  IndependenceTest t;
  t.n = m.n;
  t.statistic = static_cast<double>(m.n) * m.values.squaredNorm();
  t.df = m.order_x() * m.order_y();
  t.p_value = detail::chi_square_upper_tail(t.statistic, static_cast<double>(t.df));
  t.small_sample_warning = m.n < min_n;
  return t;
}

struct PermutationTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
};

//! Permutation version of the independence test for small n: random
//! re-pairings of y against x, p-value (1 + #{perm >= observed})/(B+1).
//! Permutation b draws from a sub-stream mixed from (seed, b), so the
//! result does not depend on the number of threads.
inline PermutationTest permutation_independence_test(const LPComomentMatrix& m,
                                                     std::size_t n_permutations = 999,
                                                     std::uint64_t seed = 0,
                                                     int threads = 0)
{
  PermutationTest out;
  out.n_permutations = n_permutations;
  out.statistic = static_cast<double>(m.n) * m.values.squaredNorm();

  const auto& tx = m.basis_x->table();
  const auto& ty = m.basis_y->table();
  const int mx = m.order_x();
  const int my = m.order_y();
  const double n = static_cast<double>(m.n);

  std::vector<int> exceed(n_permutations, 0);
  parallel_for(n_permutations, resolve_threads(threads), [&](std::size_t b) {
    Rng rng(mix_seed(seed, b));
    std::vector<std::size_t> perm = m.idx_y;
    rng.shuffle(perm);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(mx, my);
    for (std::size_t i = 0; i < m.idx_x.size(); ++i) {
      acc.noalias() += tx.row(static_cast<Eigen::Index>(m.idx_x[i])).transpose() *
                       ty.row(static_cast<Eigen::Index>(perm[i]));
    }
    const double stat = n * (acc / n).squaredNorm();
    if (stat >= out.statistic) exceed[b] = 1;
  });
  std::size_t count = 0;
  for (int e : exceed) count += static_cast<std::size_t>(e);
  out.p_value = (1.0 + static_cast<double>(count)) /
                (1.0 + static_cast<double>(n_permutations));
  return out;
}

//! Pearson correlation approximation from the LP representation:
//! sum_(j,k) LP(j;Z(X)) LP(j,k) LP(k;Z(Y)). With truncate_11 only the
//! (1,1) term enters, giving the rank-based approximate equality
//! R ≈ LP(1;Z(X)) LP(1,1) LP(1;Z(Y)).
inline double pearson_from_lp(const LPMomentVector& mom_x, const LPMomentVector& mom_y,
                              const LPComomentMatrix& m, bool truncate_11 = false)
{
  const int mx = truncate_11 ? 1 : std::min<int>(m.order_x(), static_cast<int>(mom_x.standardized.size()));
  const int my = truncate_11 ? 1 : std::min<int>(m.order_y(), static_cast<int>(mom_y.standardized.size()));
  double r = 0.0;
  for (int j = 0; j < mx; ++j)
    for (int k = 0; k < my; ++k)
      r += mom_x.standardized[j] * m.values(j, k) * mom_y.standardized[k];
  return r;
}

struct ConditionalMeanDecomposition {
  std::vector<double> shares;  // |LP(j,0)|^2 per component
  double total = 0.0;          // estimate of Var(E[Y|X])
};

//! Variance-of-conditional-mean decomposition Var(E[Y|X]) = sum_j LP(j,0)^2,
//! exact for full bases over discrete X.
inline ConditionalMeanDecomposition conditional_mean_decomposition(const LPComomentMatrix& m)
{
  ConditionalMeanDecomposition d;
  d.shares.reserve(m.row0.size());
  for (double v : m.row0) {
    d.shares.push_back(v * v);
    d.total += v * v;
  }
  return d;
}

}  // namespace lpstat

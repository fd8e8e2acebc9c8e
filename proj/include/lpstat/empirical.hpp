#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpstat {

enum class DistKind {
  continuous_sample,
  discrete_sample,
  specified_discrete
};

//! Discrete representation of a distribution: sorted distinct support,
//! probability masses, CDF and mid-distribution values.
//!
//! This is the single source for F(x), p(x), Fmid(x), Q(u) and Qmid(u).
//! Instances are immutable after construction and safe to share across
//! threads.
class EmpiricalDistribution {
public:
  //! Builds the empirical distribution of a sample. Ties collapse into
  //! single support points with pmf equal to the relative frequency, so
  //! mid values match tie-averaged (rank - 0.5)/n at every sample point.
  static EmpiricalDistribution from_sample(std::span<const double> sample,
                                           DistKind kind = DistKind::continuous_sample)
  {
    if (sample.empty())
      throw std::invalid_argument("from_sample: empty sample");
    for (double v : sample) {
      if (!std::isfinite(v))
        throw std::invalid_argument("from_sample: non-finite value");
    }
    if (kind == DistKind::specified_discrete)
      throw std::invalid_argument("from_sample: use from_probabilities for specified distributions");

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());

    EmpiricalDistribution d;
    d.kind_ = kind;
    d.n_ = sample.size();
    const double n = static_cast<double>(sample.size());
    std::size_t i = 0;
    std::size_t cum = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i])
        ++j;
      const std::size_t count = j - i + 1;
      cum += count;
      d.support_.push_back(sorted[i]);
      d.pmf_.push_back(static_cast<double>(count) / n);
      d.cdf_.push_back(static_cast<double>(cum) / n);
      i = j + 1;
    }
    d.cdf_.back() = 1.0;
    d.finalize();
    return d;
  }

  //! Builds a specified discrete distribution from (value, probability)
  //! pairs. Probabilities must be positive and sum to 1 within 1e-9;
  //! they are renormalized to sum exactly to 1.
  static EmpiricalDistribution from_probabilities(std::vector<double> values,
                                                  std::vector<double> probs)
  {
    if (values.empty() || values.size() != probs.size())
      throw std::invalid_argument("from_probabilities: need matching non-empty value/probability lists");
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]))
        throw std::invalid_argument("from_probabilities: non-finite support value");
      if (!(probs[i] > 0.0))
        throw std::invalid_argument("from_probabilities: probabilities must be > 0");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("from_probabilities: probabilities must sum to 1 within 1e-9");

    EmpiricalDistribution d;
    d.kind_ = DistKind::specified_discrete;
    d.support_.reserve(values.size());
    d.pmf_.reserve(values.size());
    double cum = 0.0;
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
      const std::size_t k = order[idx];
      if (idx > 0 && values[k] == d.support_.back())
        throw std::invalid_argument("from_probabilities: duplicate support value");
      const double p = probs[k] / total;
      cum += p;
      d.support_.push_back(values[k]);
      d.pmf_.push_back(p);
      d.cdf_.push_back(cum);
    }
    d.cdf_.back() = 1.0;
    d.finalize();
    return d;
  }

  //! Represents a theoretical continuous distribution by a dense quantile
  //! grid: support points Q((i-0.5)/N) with equal masses 1/N. The result
  //! has no sample size, which marks it as analytically specified.
  static EmpiricalDistribution from_quantile_grid(const std::function<double(double)>& quantile,
                                                  std::size_t grid_size = 10000)
  {
    if (grid_size < 2)
      throw std::invalid_argument("from_quantile_grid: grid size must be >= 2");
    EmpiricalDistribution d;
    d.kind_ = DistKind::continuous_sample;
    const double n = static_cast<double>(grid_size);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= grid_size; ++i) {
      const double u = (static_cast<double>(i) - 0.5) / n;
      const double x = quantile(u);
      if (!std::isfinite(x))
        throw std::invalid_argument("from_quantile_grid: quantile function returned non-finite value");
      if (x == prev) {
        // flat stretch: merge mass into the existing point
        d.pmf_.back() += 1.0 / n;
        d.cdf_.back() += 1.0 / n;
      } else if (x < prev) {
        throw std::invalid_argument("from_quantile_grid: quantile function not non-decreasing");
      } else {
        d.support_.push_back(x);
        d.pmf_.push_back(1.0 / n);
        d.cdf_.push_back(static_cast<double>(i) / n);
      }
      prev = x;
    }
    d.cdf_.back() = 1.0;
    d.finalize();
    return d;
  }

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& pmf() const { return pmf_; }
  const std::vector<double>& cdf() const { return cdf_; }
  const std::vector<double>& mid() const { return mid_; }

  std::size_t size() const { return support_.size(); }
  std::optional<std::size_t> sample_size() const { return n_; }
  DistKind kind() const { return kind_; }

  //! True for analytically specified continuous distributions (quantile
  //! grids), which have no sample size attached.
  bool is_theoretical_continuous() const
  {
    return kind_ == DistKind::continuous_sample && !n_.has_value();
  }

  double mean() const { return mean_; }
  double variance() const { return var_; }
  double sd() const { return std::sqrt(var_); }
  //! Standard deviation of the mid-distribution transform Fmid(X;X).
  double mid_sd() const { return mid_sd_; }

  //! Index of an exact support point, if present.
  std::optional<std::size_t> index_of(double x) const
  {
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it != support_.end() && *it == x)
      return static_cast<std::size_t>(it - support_.begin());
    return std::nullopt;
  }

  //! Index of the support point closest to x.
  std::size_t nearest_index(double x) const
  {
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.end()) return support_.size() - 1;
    if (it == support_.begin()) return 0;
    const std::size_t hi = static_cast<std::size_t>(it - support_.begin());
    return (x - support_[hi - 1] <= support_[hi] - x) ? hi - 1 : hi;
  }

  //! Index selected by the quantile rule: smallest i with cdf[i] >= u.
  std::size_t quantile_index(double u) const
  {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

private:
  void finalize()
  {
    mid_.resize(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i)
      mid_[i] = cdf_[i] - 0.5 * pmf_[i];
    mean_ = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i)
      mean_ += pmf_[i] * support_[i];
    var_ = 0.0;
    double mid_var = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      const double dx = support_[i] - mean_;
      var_ += pmf_[i] * dx * dx;
      const double dm = mid_[i] - 0.5;
      mid_var += pmf_[i] * dm * dm;
    }
    mid_sd_ = std::sqrt(mid_var);
  }

  std::vector<double> support_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> mid_;
  std::optional<std::size_t> n_;
  DistKind kind_ = DistKind::continuous_sample;
  double mean_ = 0.0;
  double var_ = 0.0;
  double mid_sd_ = 0.0;
};

//! Quantile function Q(u;X) = inf{x : F(x;X) >= u}, 0 < u < 1.
inline double quantile(const EmpiricalDistribution& dist, double u)
{
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("quantile: u must lie in (0,1)");
  return dist.support()[dist.quantile_index(u)];
}

//! Mid-quantile Qmid(u;X): piecewise-linear interpolant through the
//! points (mid[i], support[i]), clamped to the extreme support values
//! outside [mid[0], mid[last]].
inline double mid_quantile(const EmpiricalDistribution& dist, double u)
{
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("mid_quantile: u must lie in (0,1)");
  const auto& mid = dist.mid();
  const auto& x = dist.support();
  if (u <= mid.front()) return x.front();
  if (u >= mid.back()) return x.back();
  auto it = std::upper_bound(mid.begin(), mid.end(), u);
  const std::size_t hi = static_cast<std::size_t>(it - mid.begin());
  const std::size_t lo = hi - 1;
  const double w = (u - mid[lo]) / (mid[hi] - mid[lo]);
  return x[lo] + w * (x[hi] - x[lo]);
}

//! Z-score (x - E[X]) / sd(X) under the pmf-weighted (population) moments.
inline double standardize(const EmpiricalDistribution& dist, double x)
{
  const double sd = dist.sd();
  if (!(sd > 0.0))
    throw std::runtime_error("standardize: distribution has zero variance");
  return (x - dist.mean()) / sd;
}

struct LocationScaleSummary {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double mq = 0.0;  // mid-quartile .5(Q1+Q3)
  double dq = 0.0;  // quartile deviation 2(Q3-Q1)
  double mean = 0.0;
  double sd = 0.0;
};

struct QuantileSummary {
  LocationScaleSummary summary;
  std::vector<double> outliers;   // support values with |QI| > 1
  bool outliers_available = true; // false when DQ = 0
};

//! Informative-quantile value QI(x) = (x - MQ)/DQ.
inline double informative_quantile(const LocationScaleSummary& s, double x)
{
  if (!(s.dq > 0.0))
    throw std::runtime_error("informative_quantile: DQ is zero");
  return (x - s.mq) / s.dq;
}

//! Quartile-based location/scale summary with Tukey outlier flagging
//! (|QI(x)| > 1). When DQ = 0 the summary is still returned but outlier
//! flagging is reported unavailable.
inline QuantileSummary informative_quantile_summary(const EmpiricalDistribution& dist)
{
  if (dist.size() < 2)
    throw std::invalid_argument("informative_quantile_summary: need >= 2 support points");
  QuantileSummary out;
  auto& s = out.summary;
  s.q1 = quantile(dist, 0.25);
  s.q2 = quantile(dist, 0.5);
  s.q3 = quantile(dist, 0.75);
  s.mq = 0.5 * (s.q1 + s.q3);
  s.dq = 2.0 * (s.q3 - s.q1);
  s.mean = dist.mean();
  s.sd = dist.sd();
  if (s.dq > 0.0) {
    for (double x : dist.support()) {
      if (std::abs((x - s.mq) / s.dq) > 1.0)
        out.outliers.push_back(x);
    }
  } else {
    out.outliers_available = false;
  }
  return out;
}

}  // namespace lpstat

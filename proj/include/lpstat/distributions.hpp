#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/normal.hpp>
#include <stdexcept>

namespace lpstat {

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0)
{
  return boost::math::cdf(boost::math::normal_distribution<>(mu, sigma), x);
}

inline double normal_pdf(double x, double mu = 0.0, double sigma = 1.0)
{
  return boost::math::pdf(boost::math::normal_distribution<>(mu, sigma), x);
}

inline double normal_quantile(double u, double mu = 0.0, double sigma = 1.0)
{
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("normal_quantile: u must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<>(mu, sigma), u);
}

//! Two-sided normal p-value for an (asymptotically) standard normal z.
inline double normal_two_sided_p(double z)
{
  const boost::math::normal_distribution<> n01;
  return 2.0 * boost::math::cdf(boost::math::complement(n01, std::abs(z)));
}

namespace detail {

inline double chi_square_upper_tail(double x, double df)
{
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), x));
}

}  // namespace detail

}  // namespace lpstat

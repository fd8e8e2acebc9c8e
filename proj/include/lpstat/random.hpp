#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "distributions.hpp"

namespace lpstat {

//! splitmix64-style mixing of a base seed with a task index, giving
//! decorrelated deterministic sub-streams for parallel work.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t task)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (task + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

//! Deterministic random source. All variate transforms are implemented
//! here (rather than through std:: distribution objects, whose output is
//! implementation-defined) so that a seed produces the same stream on
//! every platform and standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  //! Uniform on the open interval (0,1): 53-bit mantissa, shifted off 0.
  double uniform01()
  {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  //! Standard normal via the inverse-CDF transform (deterministic given
  //! the uniform stream, unlike std::normal_distribution).
  double normal() { return normal_quantile(uniform01()); }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  //! Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n)
  {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  //! Fisher-Yates shuffle driven by below(), for reproducibility.
  template <typename T>
  void shuffle(std::vector<T>& v)
  {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
  }

  //! Draws an index from a probability vector (masses sum to ~1).
  std::size_t categorical(std::span<const double> probs)
  {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u <= cum) return i;
    }
    return probs.size() - 1;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace lpstat

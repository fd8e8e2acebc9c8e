#pragma once

// Shared test utilities: data generators and brute-force oracles that the
// library results are checked against.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "lpstat/empirical.hpp"
#include "lpstat/random.hpp"

namespace testutil {

inline std::vector<double> normal_sample(lpstat::Rng& rng, std::size_t n, double mu = 0.0,
                                         double sigma = 1.0)
{
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(mu, sigma);
  return v;
}

inline std::vector<double> uniform_sample(lpstat::Rng& rng, std::size_t n, double a = 0.0,
                                          double b = 1.0)
{
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(a, b);
  return v;
}

struct DiscreteSpec {
  std::vector<double> values;
  std::vector<double> probs;
};

//! Random discrete distribution with k distinct support points and
//! exponential-weight masses (no vanishing cells).
inline DiscreteSpec random_discrete(lpstat::Rng& rng, std::size_t k)
{
  DiscreteSpec spec;
  std::set<double> values;
  while (values.size() < k) values.insert(std::floor(rng.uniform(-50.0, 50.0) * 8.0) / 8.0);
  spec.values.assign(values.begin(), values.end());
  spec.probs.resize(k);
  double total = 0.0;
  for (auto& p : spec.probs) {
    p = 0.05 + rng.exponential(1.0);
    total += p;
  }
  for (auto& p : spec.probs) p /= total;
  // round-trip the masses through a normalization so they sum to 1 well
  // within the library's 1e-9 gate
  return spec;
}

inline std::shared_ptr<const lpstat::EmpiricalDistribution> make_dist(const DiscreteSpec& s)
{
  return std::make_shared<const lpstat::EmpiricalDistribution>(
      lpstat::EmpiricalDistribution::from_probabilities(s.values, s.probs));
}

//! Draws an i.i.d. sample from a discrete spec.
inline std::vector<double> sample_from(lpstat::Rng& rng, const DiscreteSpec& s, std::size_t n)
{
  std::vector<double> v(n);
  for (auto& x : v) x = s.values[rng.categorical(s.probs)];
  return v;
}

//! Random r x c contingency table with all cells >= 1, returned both as
//! counts and as the equivalent paired columns (x = row id, y = col id).
struct TableData {
  std::vector<std::vector<double>> counts;
  std::vector<double> x, y;
  double n = 0.0;
};

inline TableData random_table(lpstat::Rng& rng, std::size_t r, std::size_t c,
                              std::size_t total_extra)
{
  TableData t;
  t.counts.assign(r, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t.counts[i][j] = 1.0;
  for (std::size_t k = 0; k < total_extra; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng.below(r));
    const std::size_t j = static_cast<std::size_t>(rng.below(c));
    t.counts[i][j] += 1.0;
  }
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      for (double k = 0.0; k < t.counts[i][j]; k += 1.0) {
        t.x.push_back(static_cast<double>(i + 1));
        t.y.push_back(static_cast<double>(j + 1));
      }
      t.n += t.counts[i][j];
    }
  }
  return t;
}

//! Classical Pearson chi-square statistic of a contingency table.
inline double pearson_chi_square(const std::vector<std::vector<double>>& counts)
{
  const std::size_t r = counts.size();
  const std::size_t c = counts[0].size();
  std::vector<double> row(r, 0.0), col(c, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      row[i] += counts[i][j];
      col[j] += counts[i][j];
      n += counts[i][j];
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double expected = row[i] * col[j] / n;
      const double d = counts[i][j] - expected;
      stat += d * d / expected;
    }
  }
  return stat;
}

//! Var(E[Y|X]) by direct grouping over the distinct values of x.
inline double group_mean_variance(const std::vector<double>& x, const std::vector<double>& y)
{
  std::vector<double> levels(x);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double grand = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double var = 0.0;
  for (double level : levels) {
    double sum = 0.0, count = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == level) {
        sum += y[i];
        count += 1.0;
      }
    }
    const double mean = sum / count;
    var += (count / static_cast<double>(y.size())) * (mean - grand) * (mean - grand);
  }
  return var;
}

//! E|X - X'| over all ordered pairs of the sample (empirical Gini mean
//! difference with independent copies).
inline double gini_double_sum(const std::vector<double>& v)
{
  double acc = 0.0;
  for (double a : v)
    for (double b : v) acc += std::abs(a - b);
  return acc / (static_cast<double>(v.size()) * static_cast<double>(v.size()));
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

//! Wilcoxon rank-sum statistic of sample1 within the pooled data
//! (mid-ranks under ties).
inline double rank_sum(const std::vector<double>& sample0, const std::vector<double>& sample1)
{
  std::vector<double> pooled(sample0);
  pooled.insert(pooled.end(), sample1.begin(), sample1.end());
  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  auto midrank = [&](double v) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    return 0.5 * static_cast<double>(lo + 1 + hi);
  };
  double w = 0.0;
  for (double v : sample1) w += midrank(v);
  return w;
}

//! Composite Simpson integral on [a,b].
template <typename Fn>
double simpson(Fn&& f, double a, double b, int panels = 2048)
{
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// ---- CLI process helpers -------------------------------------------------

inline std::string cli_path()
{
  const char* p = std::getenv("LP_CLI");
  return p ? p : "";
}

struct CliRun {
  int exit_code = -1;
  std::string output;
};

inline std::string temp_dir()
{
  const char* t = std::getenv("TMPDIR");
  return t ? t : "/tmp";
}

inline std::string temp_path(const std::string& stem)
{
  static int counter = 0;
  return temp_dir() + "/lpstat_test_" + std::to_string(::getpid()) + "_" + stem + "_" +
         std::to_string(counter++);
}

inline CliRun run_cli(const std::string& binary, const std::string& args)
{
  CliRun r;
  const std::string out_path = temp_path("out");
  const std::string cmd = binary + " " + args + " >" + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path, std::ios::binary);
  r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  std::remove(out_path.c_str());
  return r;
}

inline std::string write_csv(const std::string& stem, const std::string& header,
                             const std::vector<std::vector<double>>& columns)
{
  const std::string path = temp_path(stem) + ".csv";
  std::ofstream out(path);
  out << header << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  out.precision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ",";
      out << columns[c][r];
    }
    out << "\n";
  }
  return path;
}

}  // namespace testutil

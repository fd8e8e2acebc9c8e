#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpstat {

//! Component-retention rules for LP coefficient sequences. The threshold
//! rule keeps entries with |coef| > 2/sqrt(n), matching the N(0,1/n) null
//! law of empirical LP coefficients; the BIC rule keeps an entry while it
//! improves n*sum(coef^2) - count*log(n), i.e. while n*coef^2 > log(n).
enum class SelectionRule { threshold, bic, all };

inline SelectionRule selection_rule_from_string(const std::string& s)
{
  if (s == "threshold") return SelectionRule::threshold;
  if (s == "bic") return SelectionRule::bic;
  if (s == "all") return SelectionRule::all;
  throw std::invalid_argument("unknown selection rule: " + s);
}

inline const char* to_string(SelectionRule r)
{
  switch (r) {
    case SelectionRule::threshold: return "threshold";
    case SelectionRule::bic: return "bic";
    default: return "all";
  }
}

struct Selection {
  std::vector<bool> mask;
  std::size_t count = 0;
  double statistic = 0.0;  // sum of squared selected coefficients
};

//! Applies a selection rule to a flat coefficient vector with sample
//! size n; n is ignored by the "all" rule and required otherwise.
inline Selection select_components(const std::vector<double>& coeffs, std::size_t n,
                                   SelectionRule rule)
{
  if (rule != SelectionRule::all && n == 0)
    throw std::invalid_argument("select_components: data-driven rules need a sample size");
  Selection sel;
  sel.mask.assign(coeffs.size(), false);
  const double thr = (rule == SelectionRule::threshold)
                         ? 2.0 / std::sqrt(static_cast<double>(n))
                         : 0.0;
  const double bic_bar = (rule == SelectionRule::bic)
                             ? std::log(static_cast<double>(n)) / static_cast<double>(n)
                             : 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    bool keep = true;
    if (rule == SelectionRule::threshold)
      keep = std::abs(coeffs[i]) > thr;
    else if (rule == SelectionRule::bic)
      keep = coeffs[i] * coeffs[i] > bic_bar;
    if (keep) {
      sel.mask[i] = true;
      ++sel.count;
      sel.statistic += coeffs[i] * coeffs[i];
    }
  }
  return sel;
}

}  // namespace lpstat

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "copula.hpp"
#include "dataset.hpp"
#include "density_models.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "inference.hpp"
#include "json.hpp"
#include "json_format.hpp"
#include "lp_comoments.hpp"
#include "lp_moments.hpp"
#include "model_spec.hpp"

namespace lpstat {

//! Resolved invocation of one CLI subcommand. Every field is echoed into
//! the output document's "config" block (except `output`, which only
//! chooses where bytes go), so a document can be reproduced from itself.
struct RunConfig {
  std::string subcommand;
  std::string input;              // CSV path; optional for gof --mean
  std::string output;             // empty = stdout (not echoed)
  std::string format = "json";    // json | csv
  std::string col, x, y, group;
  std::string features;           // comma-separated; empty = all but y
  std::string kind = "auto";      // kind hint for --col
  std::string kind_x = "auto";
  std::string kind_y = "auto";
  std::string null_spec;
  std::optional<double> mean;     // moment-constraint gof
  std::string positive_label;     // binary coding override
  int m = 4;
  std::string rule = "threshold";
  std::uint64_t seed = 0;
  int threads = 0;                // 0 = LP_THREADS env or hardware
  double tail_threshold = 0.95;
  int grid = 201;                 // 1-d plot grids
  int grid_u = 64, grid_v = 64;   // copula surface
  std::string slices = "0.1,0.25,0.5,0.75,0.9";
  std::string plot = "quantile";  // quantplot CSV table choice
  bool clip = false;
  bool permutation = false;
  int n_perm = 999;

  nlohmann::json to_json() const
  {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["input"] = input;
    j["format"] = format;
    j["col"] = col;
    j["x"] = x;
    j["y"] = y;
    j["group"] = group;
    j["features"] = features;
    j["kind"] = kind;
    j["kind_x"] = kind_x;
    j["kind_y"] = kind_y;
    j["null"] = null_spec;
    if (mean) j["mean"] = *mean;
    else j["mean"] = nullptr;
    j["positive_label"] = positive_label;
    j["m"] = m;
    j["rule"] = rule;
    j["seed"] = seed;
    j["threads"] = threads;
    j["tail_threshold"] = tail_threshold;
    j["grid"] = grid;
    j["grid_u"] = grid_u;
    j["grid_v"] = grid_v;
    j["slices"] = slices;
    j["plot"] = plot;
    j["clip"] = clip;
    j["permutation"] = permutation;
    j["n_perm"] = n_perm;
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j)
  {
    RunConfig c;
    c.subcommand = j.at("subcommand").get<std::string>();
    c.input = j.value("input", std::string());
    c.format = j.value("format", std::string("json"));
    c.col = j.value("col", std::string());
    c.x = j.value("x", std::string());
    c.y = j.value("y", std::string());
    c.group = j.value("group", std::string());
    c.features = j.value("features", std::string());
    c.kind = j.value("kind", std::string("auto"));
    c.kind_x = j.value("kind_x", std::string("auto"));
    c.kind_y = j.value("kind_y", std::string("auto"));
    c.null_spec = j.value("null", std::string());
    if (j.contains("mean") && !j.at("mean").is_null()) c.mean = j.at("mean").get<double>();
    c.positive_label = j.value("positive_label", std::string());
    c.m = j.value("m", 4);
    c.rule = j.value("rule", std::string("threshold"));
    c.seed = j.value("seed", std::uint64_t{0});
    c.threads = j.value("threads", 0);
    c.tail_threshold = j.value("tail_threshold", 0.95);
    c.grid = j.value("grid", 201);
    c.grid_u = j.value("grid_u", 64);
    c.grid_v = j.value("grid_v", 64);
    c.slices = j.value("slices", std::string("0.1,0.25,0.5,0.75,0.9"));
    c.plot = j.value("plot", std::string("quantile"));
    c.clip = j.value("clip", false);
    c.permutation = j.value("permutation", false);
    c.n_perm = j.value("n_perm", 999);
    return c;
  }
};

//! One executed run: the JSON document plus the CSV rendering of the
//! subcommand's main table.
struct RunResult {
  nlohmann::json document;
  std::string csv;
};

namespace detail {

inline void require(bool ok, const std::string& message)
{
  if (!ok) throw ValidationError(message);
}

inline DistKind kind_from_string(const std::string& s, const Column& col, std::size_t rows)
{
  if (s == "auto") return infer_kind(col.distinct, rows);
  if (s == "continuous") return DistKind::continuous_sample;
  if (s == "discrete") return DistKind::discrete_sample;
  throw ValidationError("kind must be auto|continuous|discrete, got '" + s + "'");
}

inline const char* kind_name(DistKind k)
{
  return k == DistKind::continuous_sample ? "continuous" : "discrete";
}

inline std::vector<double> parse_slices(const std::string& s)
{
  std::vector<double> out;
  for (const auto& part : split(s, ',')) {
    const std::string t = trim(part);
    if (t.empty()) continue;
    const double u = parse_spec_number(t, "--slices");
    if (!(u > 0.0 && u < 1.0))
      throw ValidationError("slice values must lie in (0,1)");
    out.push_back(u);
  }
  if (out.empty()) throw ValidationError("--slices has no values");
  return out;
}

inline std::string csv_escape(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

//! CSV table builder sharing the JSON number rendering.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header)
  {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_escape(header[i]);
    }
    text_ += '\n';
    cols_ = header.size();
  }
  void row(const std::vector<std::string>& cells)
  {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_escape(cells[i]);
    }
    text_ += '\n';
  }
  const std::string& str() const { return text_; }

private:
  std::string text_;
  std::size_t cols_ = 0;
};

inline nlohmann::json selection_pairs(const Selection& sel, int m_y)
{
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t flat = 0; flat < sel.mask.size(); ++flat) {
    if (sel.mask[flat]) {
      const int j = static_cast<int>(flat) / m_y + 1;
      const int k = static_cast<int>(flat) % m_y + 1;
      arr.push_back(nlohmann::json::array({j, k}));
    }
  }
  return arr;
}

inline nlohmann::json comoment_block(const LPComomentMatrix& cm, const LpinforResult& li)
{
  nlohmann::json j;
  j["n"] = cm.n;
  j["m_x"] = cm.order_x();
  j["m_y"] = cm.order_y();
  nlohmann::json vals = nlohmann::json::array();
  for (int r = 0; r < cm.values.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < cm.values.cols(); ++c) row.push_back(cm.values(r, c));
    vals.push_back(row);
  }
  j["values"] = vals;
  j["row0"] = cm.row0;
  j["selected"] = selection_pairs(li.selection, cm.order_y());
  j["lpinfor"] = li.statistic;
  j["rule"] = to_string(li.rule);
  return j;
}

inline std::shared_ptr<const EmpiricalDistribution> dist_from_column(const Column& col,
                                                                     DistKind kind)
{
  return std::make_shared<const EmpiricalDistribution>(
      EmpiricalDistribution::from_sample(col.values, kind));
}

//! Maps a two-valued column to a 0/1 indicator. The positive (=1) label
//! is the numerically larger value unless overridden.
inline std::vector<double> binary_indicator(const std::vector<double>& values,
                                            const std::string& positive_label,
                                            const std::string& column,
                                            double* positive_out = nullptr)
{
  std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() != 2)
    throw ValidationError("column '" + column + "' must have exactly 2 distinct values, found " +
                          std::to_string(distinct.size()));
  double positive = *distinct.rbegin();
  if (!positive_label.empty()) {
    positive = parse_spec_number(positive_label, "--positive-label");
    if (distinct.count(positive) == 0)
      throw ValidationError("--positive-label value not present in column '" + column + "'");
  }
  if (positive_out) *positive_out = positive;
  std::vector<double> ind(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    ind[i] = values[i] == positive ? 1.0 : 0.0;
  return ind;
}

inline double plot_u(int i, int total)
{
  return (static_cast<double>(i) + 0.5) / static_cast<double>(total);
}

// ---- subcommand handlers ------------------------------------------------

inline RunResult run_moments(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.col.empty(), "moments: --col is required");
  Dataset ds = ingest_csv(cfg.input, {cfg.col});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const Column& col = ds.column(cfg.col);
  const DistKind kind = kind_from_string(cfg.kind, col, ds.rows);
  auto dist = dist_from_column(col, kind);
  if (!(dist->sd() > 0.0))
    throw ValidationError("moments: column '" + cfg.col + "' is constant");
  auto basis = std::make_shared<const ScoreBasis>(dist, cfg.m);
  const LPMomentVector mom = lp_moments(basis);
  const auto tail = tail_index(mom, cfg.tail_threshold);
  const QuantileSummary qs = informative_quantile_summary(*dist);

  nlohmann::json res;
  res["column"] = cfg.col;
  res["kind"] = kind_name(kind);
  res["n"] = ds.rows;
  res["support_size"] = dist->size();
  res["mean"] = mom.mean;
  res["sd"] = mom.sd;
  nlohmann::json moments = nlohmann::json::array();
  for (std::size_t j = 0; j < mom.coeffs.size(); ++j) {
    nlohmann::json e;
    e["j"] = j + 1;
    e["value"] = mom.coeffs[j];
    e["standardized"] = mom.standardized[j];
    e["var_explained"] = mom.var_explained[j];
    moments.push_back(e);
  }
  res["lp_moments"] = moments;
  res["tail_index"] = tail ? nlohmann::json(*tail) : nlohmann::json(nullptr);
  res["long_tailed"] = !tail.has_value();
  nlohmann::json q;
  q["q1"] = qs.summary.q1;
  q["q2"] = qs.summary.q2;
  q["q3"] = qs.summary.q3;
  q["mq"] = qs.summary.mq;
  q["dq"] = qs.summary.dq;
  q["mean"] = qs.summary.mean;
  q["sd"] = qs.summary.sd;
  q["outliers"] = qs.outliers;
  q["outliers_available"] = qs.outliers_available;
  res["quartile_summary"] = q;

  CsvTable csv({"j", "value", "standardized", "var_explained"});
  for (std::size_t j = 0; j < mom.coeffs.size(); ++j)
    csv.row({std::to_string(j + 1), format_number(mom.coeffs[j]),
             format_number(mom.standardized[j]), format_number(mom.var_explained[j])});
  return {std::move(res), csv.str()};
}

inline RunResult run_comoments(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.x.empty() && !cfg.y.empty(), "comoments: --x and --y are required");
  Dataset ds = ingest_csv(cfg.input, {cfg.x, cfg.y});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const SelectionRule rule = selection_rule_from_string(cfg.rule);
  const LPComomentMatrix cm = lp_comoments(ds.column(cfg.x).values, ds.column(cfg.y).values,
                                           cfg.m, cfg.m);
  const LpinforResult li = lpinfor(cm, rule);
  const IndependenceTest test = independence_test(cm);
  if (test.small_sample_warning)
    warnings.push_back("independence test: n < 20, asymptotic p-value unreliable");

  nlohmann::json res = comoment_block(cm, li);
  res["spearman"] = cm.values(0, 0);
  res["coherence_eigenvalues"] = coherence_eigen(cm);
  nlohmann::json ind;
  ind["statistic"] = test.statistic;
  ind["df"] = test.df;
  ind["p_value"] = test.p_value;
  ind["small_sample_warning"] = test.small_sample_warning;
  res["independence"] = ind;
  res["n_lpinfor"] = static_cast<double>(cm.n) * li.statistic;
  if (cfg.permutation) {
    const PermutationTest pt = permutation_independence_test(
        cm, static_cast<std::size_t>(cfg.n_perm), cfg.seed, cfg.threads);
    nlohmann::json p;
    p["statistic"] = pt.statistic;
    p["p_value"] = pt.p_value;
    p["n_permutations"] = pt.n_permutations;
    res["permutation"] = p;
  }

  CsvTable csv({"j", "k", "value", "selected"});
  for (int j = 0; j < cm.values.rows(); ++j) {
    for (int k = 0; k < cm.values.cols(); ++k) {
      const std::size_t flat =
          static_cast<std::size_t>(j) * static_cast<std::size_t>(cm.values.cols()) +
          static_cast<std::size_t>(k);
      csv.row({std::to_string(j + 1), std::to_string(k + 1), format_number(cm.values(j, k)),
               li.selection.mask[flat] ? "1" : "0"});
    }
  }
  return {std::move(res), csv.str()};
}

inline RunResult run_gof(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.null_spec.empty(), "gof: --null is required");
  const NullModel null = parse_null_model(cfg.null_spec);
  const SelectionRule rule = selection_rule_from_string(cfg.rule);

  if (cfg.mean) {
    require(!null.is_continuous(), "gof: --mean needs a discrete null model");
    const DiscreteGofEstimate est = discrete_gof_from_mean(*cfg.mean, null);
    if (est.has_negative)
      warnings.push_back("corrected pmf has negative cells (flagged, not repaired)");
    nlohmann::json res;
    res["null"] = null.description();
    res["pathway"] = "moment_constraint";
    res["components"] = est.components;
    res["phat"] = est.phat;
    res["support"] = est.support;
    res["null_pmf"] = est.null_pmf;
    res["has_negative"] = est.has_negative;
    double fitted_mean = 0.0;
    for (std::size_t i = 0; i < est.phat.size(); ++i) fitted_mean += est.support[i] * est.phat[i];
    res["fitted_mean"] = fitted_mean;
    CsvTable csv({"value", "null_pmf", "phat"});
    for (std::size_t i = 0; i < est.phat.size(); ++i)
      csv.row({format_number(est.support[i]), format_number(est.null_pmf[i]),
               format_number(est.phat[i])});
    return {std::move(res), csv.str()};
  }

  require(!cfg.col.empty(), "gof: --col is required (or --mean for the moment pathway)");
  Dataset ds = ingest_csv(cfg.input, {cfg.col});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const std::vector<double>& sample = ds.column(cfg.col).values;

  if (null.is_continuous()) {
    const SkewGEstimate skew = skew_g_estimate(sample, null, cfg.m, rule);
    const auto& est = skew.density;
    if (est.has_negative() && est.clip_removed_mass() > 0.0)
      warnings.push_back("raw comparison density dips below zero (mass " +
                         format_number(est.clip_removed_mass()) + " clipped in --clip view)");
    nlohmann::json res;
    res["null"] = null.description();
    res["pathway"] = "skew_g";
    res["n"] = sample.size();
    res["components"] = est.components();
    res["se"] = 1.0 / std::sqrt(static_cast<double>(sample.size()));
    nlohmann::json sel = nlohmann::json::array();
    for (std::size_t j = 0; j < est.selection().mask.size(); ++j) {
      if (est.selection().mask[j]) sel.push_back(j + 1);
    }
    res["selected"] = sel;
    res["statistic"] = static_cast<double>(sample.size()) * est.selection().statistic;
    res["integral_d"] = detail::simpson_unit([&](double u) {
      return est.evaluate(std::min(1.0 - 1e-12, std::max(1e-12, u)));
    });
    res["clip_removed_mass"] = est.clip_removed_mass();
    nlohmann::json grid = nlohmann::json::array();
    CsvTable csv(cfg.clip ? std::vector<std::string>{"u", "density", "density_clipped"}
                          : std::vector<std::string>{"u", "density"});
    for (int i = 0; i < cfg.grid; ++i) {
      const double u = plot_u(i, cfg.grid);
      nlohmann::json e;
      e["u"] = u;
      e["density"] = est.evaluate(u);
      if (cfg.clip) e["density_clipped"] = est.evaluate_clipped(u);
      grid.push_back(e);
      if (cfg.clip)
        csv.row({format_number(u), format_number(est.evaluate(u)),
                 format_number(est.evaluate_clipped(u))});
      else
        csv.row({format_number(u), format_number(est.evaluate(u))});
    }
    res["density_grid"] = grid;
    return {std::move(res), csv.str()};
  }

  const DiscreteGofEstimate est = discrete_gof_from_sample(sample, null, cfg.m, rule);
  if (est.has_negative)
    warnings.push_back("corrected pmf has negative cells (flagged, not repaired)");
  nlohmann::json res;
  res["null"] = null.description();
  res["pathway"] = "discrete";
  res["n"] = sample.size();
  res["components"] = est.components;
  res["z_scores"] = est.z_scores;
  nlohmann::json sel = nlohmann::json::array();
  for (std::size_t j = 0; j < est.selection.mask.size(); ++j) {
    if (est.selection.mask[j]) sel.push_back(j + 1);
  }
  res["selected"] = sel;
  res["statistic"] = est.statistic ? nlohmann::json(*est.statistic) : nlohmann::json(nullptr);
  res["support"] = est.support;
  res["null_pmf"] = est.null_pmf;
  res["observed"] = est.observed;
  res["phat"] = est.phat;
  res["has_negative"] = est.has_negative;

  CsvTable csv({"value", "null_pmf", "observed", "phat"});
  for (std::size_t i = 0; i < est.phat.size(); ++i)
    csv.row({format_number(est.support[i]), format_number(est.null_pmf[i]),
             format_number(est.observed[i]), format_number(est.phat[i])});
  return {std::move(res), csv.str()};
}

inline RunResult run_copula(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.x.empty() && !cfg.y.empty(), "copula: --x and --y are required");
  Dataset ds = ingest_csv(cfg.input, {cfg.x, cfg.y});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const SelectionRule rule = selection_rule_from_string(cfg.rule);
  const CopulaModel model = estimate_copula(ds.column(cfg.x).values, ds.column(cfg.y).values,
                                            cfg.m, cfg.m, rule);
  const std::vector<double> slice_us = parse_slices(cfg.slices);

  nlohmann::json res;
  res["comoments"] = comoment_block(model.comoments, model.components);
  res["total_integral"] = copula_total_integral(model);

  require(cfg.grid_u >= 2 && cfg.grid_v >= 2, "copula: grid sizes must be >= 2");
  nlohmann::json surface = nlohmann::json::array();
  for (int i = 0; i < cfg.grid_u; ++i) {
    const double u = plot_u(i, cfg.grid_u);
    for (int l = 0; l < cfg.grid_v; ++l) {
      const double v = plot_u(l, cfg.grid_v);
      nlohmann::json e;
      e["u"] = u;
      e["v"] = v;
      e["density"] = copula_density(model, u, v);
      surface.push_back(e);
    }
  }
  res["surface"] = surface;

  nlohmann::json slices = nlohmann::json::array();
  for (double u0 : slice_us) {
    nlohmann::json s;
    s["u"] = u0;
    s["integral"] = copula_slice_integral(model, u0);
    nlohmann::json pts = nlohmann::json::array();
    for (int l = 0; l < cfg.grid_v; ++l) {
      const double v = plot_u(l, cfg.grid_v);
      nlohmann::json e;
      e["v"] = v;
      e["density"] = conditional_comparison_density(model, v, u0);
      pts.push_back(e);
    }
    s["points"] = pts;
    slices.push_back(s);
  }
  res["slices"] = slices;

  // CSV: slice table when slices were explicitly configured, else surface
  if (cfg.slices != RunConfig{}.slices) {
    CsvTable csv({"v", "density", "u_slice"});
    for (double u0 : slice_us) {
      for (int l = 0; l < cfg.grid_v; ++l) {
        const double v = plot_u(l, cfg.grid_v);
        csv.row({format_number(v), format_number(conditional_comparison_density(model, v, u0)),
                 format_number(u0)});
      }
    }
    return {std::move(res), csv.str()};
  }
  CsvTable csv({"u", "v", "density"});
  for (int i = 0; i < cfg.grid_u; ++i) {
    const double u = plot_u(i, cfg.grid_u);
    for (int l = 0; l < cfg.grid_v; ++l) {
      const double v = plot_u(l, cfg.grid_v);
      csv.row({format_number(u), format_number(v), format_number(copula_density(model, u, v))});
    }
  }
  return {std::move(res), csv.str()};
}

inline RunResult run_twosample(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.col.empty() && !cfg.group.empty(), "twosample: --col and --group are required");
  Dataset ds = ingest_csv(cfg.input, {cfg.col, cfg.group});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const std::vector<double>& values = ds.column(cfg.col).values;
  double positive = 0.0;
  const std::vector<double> ind =
      binary_indicator(ds.column(cfg.group).values, cfg.positive_label, cfg.group, &positive);
  std::vector<double> s0, s1;
  for (std::size_t i = 0; i < values.size(); ++i)
    (ind[i] == 1.0 ? s1 : s0).push_back(values[i]);
  const SelectionRule rule = selection_rule_from_string(cfg.rule);
  const TwoSampleResult r = two_sample(s0, s1, cfg.m, rule);

  nlohmann::json res;
  res["positive_label"] = positive;
  res["n0"] = s0.size();
  res["n1"] = s1.size();
  res["pooled_n"] = r.pooled_n;
  res["lp11"] = r.lp11;
  res["z_score"] = r.z_score;
  res["p_value"] = r.p_value;
  res["pearson_r"] = r.pearson_r;
  res["t_equiv"] = std::isfinite(r.t_equiv) ? nlohmann::json(r.t_equiv) : nlohmann::json(nullptr);
  res["lpinfor"] = r.lpinfor.statistic;
  res["comoments"] = comoment_block(r.comoments, r.lpinfor);
  const auto& cd = *r.conditional_density;
  nlohmann::json dens;
  dens["components"] = cd.components();
  nlohmann::json sel = nlohmann::json::array();
  for (std::size_t j = 0; j < cd.selection().mask.size(); ++j) {
    if (cd.selection().mask[j]) sel.push_back(j + 1);
  }
  dens["selected"] = sel;
  nlohmann::json grid = nlohmann::json::array();
  for (int i = 0; i < cfg.grid; ++i) {
    const double u = plot_u(i, cfg.grid);
    nlohmann::json e;
    e["u"] = u;
    e["density"] = cd.evaluate(u);
    grid.push_back(e);
  }
  dens["grid"] = grid;
  res["conditional_density"] = dens;

  CsvTable csv({"key", "value"});
  csv.row({"lp11", format_number(r.lp11)});
  csv.row({"z_score", format_number(r.z_score)});
  csv.row({"p_value", format_number(r.p_value)});
  csv.row({"pearson_r", format_number(r.pearson_r)});
  csv.row({"t_equiv", format_number(r.t_equiv)});
  csv.row({"lpinfor", format_number(r.lpinfor.statistic)});
  csv.row({"n0", std::to_string(s0.size())});
  csv.row({"n1", std::to_string(s1.size())});
  return {std::move(res), csv.str()};
}

inline RunResult run_screen(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.y.empty(), "screen: --y is required");
  Dataset ds = ingest_csv(cfg.input);
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  require(ds.has_column(cfg.y), "column not found: " + cfg.y);

  std::vector<std::string> names;
  if (cfg.features.empty()) {
    for (const auto& c : ds.columns) {
      if (c.name != cfg.y) names.push_back(c.name);
    }
  } else {
    for (const auto& part : split(cfg.features, ',')) {
      const std::string name = trim(part);
      if (name.empty()) continue;
      require(ds.has_column(name), "column not found: " + name);
      names.push_back(name);
    }
  }
  require(!names.empty(), "screen: no feature columns");
  std::vector<std::vector<double>> feats;
  feats.reserve(names.size());
  for (const auto& n : names) feats.push_back(ds.column(n).values);

  const SelectionRule rule = selection_rule_from_string(cfg.rule);
  const FeatureScreenReport report =
      feature_screen(names, feats, ds.column(cfg.y).values, cfg.m, rule, cfg.threads);
  for (const auto& e : report.entries) {
    if (e.skipped) warnings.push_back("feature '" + e.name + "' skipped: " + e.message);
  }

  nlohmann::json res;
  res["y"] = cfg.y;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json je;
    je["rank"] = e.rank;
    je["name"] = e.name;
    je["lpinfor"] = e.lpinfor_value;
    je["selected_components"] = e.selected_components;
    je["skipped"] = e.skipped;
    entries.push_back(je);
  }
  res["features"] = entries;

  CsvTable csv({"rank", "name", "lpinfor", "selected_components", "skipped"});
  for (const auto& e : report.entries)
    csv.row({std::to_string(e.rank), e.name, format_number(e.lpinfor_value),
             std::to_string(e.selected_components), e.skipped ? "1" : "0"});
  return {std::move(res), csv.str()};
}

inline RunResult run_classify(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.x.empty() && !cfg.y.empty(), "classify: --x and --y are required");
  Dataset ds = ingest_csv(cfg.input, {cfg.x, cfg.y});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  double positive = 0.0;
  const std::vector<double> y01 =
      binary_indicator(ds.column(cfg.y).values, cfg.positive_label, cfg.y, &positive);
  const SelectionRule rule = selection_rule_from_string(cfg.rule);
  const LogisticScoreModel model = classify_fit(ds.column(cfg.x).values, y01, cfg.m, rule);
  if (model.separation)
    warnings.push_back("complete separation detected; coefficients capped");
  else if (!model.converged)
    warnings.push_back("IRLS did not converge within 50 iterations");

  const std::vector<double>& xv = ds.column(cfg.x).values;
  double fitted = 0.0;
  for (double v : xv) fitted += model.predict(v);
  fitted /= static_cast<double>(xv.size());

  nlohmann::json res;
  res["positive_label"] = positive;
  res["n"] = xv.size();
  res["selected"] = model.selected;
  res["beta"] = model.beta;
  res["converged"] = model.converged;
  res["separation"] = model.separation;
  res["iterations"] = model.iterations;
  res["fitted_rate"] = fitted;
  nlohmann::json grid = nlohmann::json::array();
  CsvTable csv({"u", "probability"});
  for (int i = 0; i < cfg.grid; ++i) {
    const double u = plot_u(i, cfg.grid);
    const double p = model.predict_u(u);
    nlohmann::json e;
    e["u"] = u;
    e["probability"] = p;
    grid.push_back(e);
    csv.row({format_number(u), format_number(p)});
  }
  res["probability_grid"] = grid;
  return {std::move(res), csv.str()};
}

inline RunResult run_quantplot(const RunConfig& cfg, nlohmann::json& warnings)
{
  require(!cfg.col.empty(), "quantplot: --col is required");
  Dataset ds = ingest_csv(cfg.input, {cfg.col});
  if (ds.dropped_rows > 0)
    warnings.push_back(std::to_string(ds.dropped_rows) + " rows dropped (missing values)");
  const Column& col = ds.column(cfg.col);
  const DistKind kind = kind_from_string(cfg.kind, col, ds.rows);
  auto dist = dist_from_column(col, kind);

  nlohmann::json res;
  res["column"] = cfg.col;
  res["kind"] = kind_name(kind);
  res["n"] = ds.rows;

  nlohmann::json qpoints = nlohmann::json::array();
  nlohmann::json qqpoints = nlohmann::json::array();
  for (std::size_t i = 0; i < dist->size(); ++i) {
    const double u = dist->mid()[i];
    nlohmann::json e;
    e["u"] = u;
    e["x"] = dist->support()[i];
    qpoints.push_back(e);
    nlohmann::json g;
    g["u_normal_quantile"] = normal_quantile(u);
    g["x"] = dist->support()[i];
    qqpoints.push_back(g);
  }
  res["quantile_points"] = qpoints;
  res["normal_qq"] = qqpoints;

  nlohmann::json mq = nlohmann::json::array();
  for (int i = 0; i < cfg.grid; ++i) {
    const double u = plot_u(i, cfg.grid);
    nlohmann::json e;
    e["u"] = u;
    e["x"] = mid_quantile(*dist, u);
    mq.push_back(e);
  }
  res["mid_quantile_grid"] = mq;

  if (cfg.plot == "quantile") {
    CsvTable csv({"u", "x"});
    for (std::size_t i = 0; i < dist->size(); ++i)
      csv.row({format_number(dist->mid()[i]), format_number(dist->support()[i])});
    return {std::move(res), csv.str()};
  }
  if (cfg.plot == "midquantile") {
    CsvTable csv({"u", "x"});
    for (int i = 0; i < cfg.grid; ++i) {
      const double u = plot_u(i, cfg.grid);
      csv.row({format_number(u), format_number(mid_quantile(*dist, u))});
    }
    return {std::move(res), csv.str()};
  }
  if (cfg.plot == "qq") {
    CsvTable csv({"u_normal_quantile", "x"});
    for (std::size_t i = 0; i < dist->size(); ++i)
      csv.row({format_number(normal_quantile(dist->mid()[i])),
               format_number(dist->support()[i])});
    return {std::move(res), csv.str()};
  }
  throw ValidationError("quantplot: --plot must be quantile|midquantile|qq");
}

}  // namespace detail

//! Executes one subcommand and assembles the output document:
//! { "config": <echo>, "result": <subcommand block>, "warnings": [...] }.
inline RunResult run(const RunConfig& cfg)
{
  if (cfg.format != "json" && cfg.format != "csv")
    throw ValidationError("format must be json or csv, got '" + cfg.format + "'");
  if (cfg.m < 1)
    throw ValidationError("--m must be >= 1");
  if (cfg.grid < 1)
    throw ValidationError("--grid must be >= 1");
  if (cfg.n_perm < 1)
    throw ValidationError("--n-perm must be >= 1");
  selection_rule_from_string(cfg.rule);  // validate early
  const bool needs_input = !(cfg.subcommand == "gof" && cfg.mean.has_value());
  if (needs_input && cfg.input.empty())
    throw ValidationError(cfg.subcommand + ": --input is required");

  nlohmann::json warnings = nlohmann::json::array();
  RunResult rr;
  if (cfg.subcommand == "moments") rr = detail::run_moments(cfg, warnings);
  else if (cfg.subcommand == "comoments") rr = detail::run_comoments(cfg, warnings);
  else if (cfg.subcommand == "gof") rr = detail::run_gof(cfg, warnings);
  else if (cfg.subcommand == "copula") rr = detail::run_copula(cfg, warnings);
  else if (cfg.subcommand == "twosample") rr = detail::run_twosample(cfg, warnings);
  else if (cfg.subcommand == "screen") rr = detail::run_screen(cfg, warnings);
  else if (cfg.subcommand == "classify") rr = detail::run_classify(cfg, warnings);
  else if (cfg.subcommand == "quantplot") rr = detail::run_quantplot(cfg, warnings);
  else throw ValidationError("unknown subcommand: " + cfg.subcommand);

  nlohmann::json doc;
  doc["config"] = cfg.to_json();
  doc["result"] = std::move(rr.document);
  doc["warnings"] = warnings;
  rr.document = std::move(doc);
  return rr;
}

//! Serialized form of a run in the configured format.
inline std::string render(const RunResult& rr, const RunConfig& cfg)
{
  return cfg.format == "csv" ? rr.csv : dump_json(rr.document);
}

}  // namespace lpstat

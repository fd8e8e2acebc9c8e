// lp — LP statistics command line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lpstat/lpstat.hpp"

namespace {

void add_common_flags(CLI::App* sub, lpstat::RunConfig& cfg)
{
  sub->add_option("-i,--input", cfg.input, "Input CSV file (UTF-8, header row)");
  sub->add_option("-o,--output", cfg.output, "Output path (default: stdout)");
  sub->add_option("-f,--format", cfg.format, "Output format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("-m,--m", cfg.m, "Number of score components")->capture_default_str();
  sub->add_option("--rule", cfg.rule, "Component selection rule: threshold|bic|all")
      ->check(CLI::IsMember({"threshold", "bic", "all"}))
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Random seed (echoed in output)")->capture_default_str();
  sub->add_option("--threads", cfg.threads,
                  "Worker threads (0 = LP_THREADS env or hardware)")
      ->capture_default_str();
}

int run_and_emit(const lpstat::RunConfig& cfg)
{
  const lpstat::RunResult rr = lpstat::run(cfg);
  const std::string text = lpstat::render(rr, cfg);
  if (cfg.output.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out)
    throw lpstat::ValidationError("cannot open output file: " + cfg.output);
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"lp — LP statistics: score functions, LP moments/comoments, "
               "comparison-density goodness of fit, copula estimation, and "
               "two-sample/screening/classification inference"};
  app.require_subcommand(1);

  lpstat::RunConfig cfg;

  auto* moments = app.add_subcommand(
      "moments", "LP moments, tail index and quartile summary of one column");
  add_common_flags(moments, cfg);
  moments->add_option("--col", cfg.col, "Column to analyze")->required();
  moments->add_option("--kind", cfg.kind, "Column kind: auto|continuous|discrete")
      ->check(CLI::IsMember({"auto", "continuous", "discrete"}))
      ->capture_default_str();
  moments->add_option("--tail-threshold", cfg.tail_threshold,
                      "Cumulative variance share defining the tail index")
      ->capture_default_str();

  auto* comoments = app.add_subcommand(
      "comoments", "LP comoment matrix, LPINFOR, Spearman, coherence eigenvalues, "
                   "chi-square independence test");
  add_common_flags(comoments, cfg);
  comoments->add_option("-x,--x", cfg.x, "First column")->required();
  comoments->add_option("-y,--y", cfg.y, "Second column")->required();
  comoments->add_flag("--permutation", cfg.permutation,
                      "Also compute a permutation p-value (seeded)");
  comoments->add_option("--n-perm", cfg.n_perm, "Number of permutations")
      ->capture_default_str();

  auto* gof = app.add_subcommand(
      "gof", "Comparison-density goodness of fit: skew-G estimate against a "
             "continuous null, or corrected pmf against a discrete null");
  add_common_flags(gof, cfg);
  gof->add_option("--col", cfg.col, "Column with observations");
  gof->add_option("--null", cfg.null_spec,
                  "Null model: normal(mu,sigma)|uniform(a,b)|exponential(rate), "
                  "'die:A-B uniform', 'v1:p1,v2:p2,...', or file:PATH")
      ->required();
  double mean_value = 0.0;
  auto* mean_opt = gof->add_option("--mean", mean_value,
                                   "Observed mean (moment-constraint pathway; no --input needed)");
  gof->add_option("--grid", cfg.grid, "Number of density grid points")->capture_default_str();
  gof->add_flag("--clip", cfg.clip, "Also emit the clipped-and-renormalized density");

  auto* copula = app.add_subcommand(
      "copula", "LP copula density: fit, surface grid, conditional slices");
  add_common_flags(copula, cfg);
  copula->add_option("-x,--x", cfg.x, "First column")->required();
  copula->add_option("-y,--y", cfg.y, "Second column")->required();
  copula->add_option("--grid-u", cfg.grid_u, "Surface grid points in u")->capture_default_str();
  copula->add_option("--grid-v", cfg.grid_v, "Surface/slice grid points in v")
      ->capture_default_str();
  copula->add_option("--slices", cfg.slices, "Comma-separated u values for slices; "
                                             "when set, CSV output is the slice table")
      ->capture_default_str();

  auto* twosample = app.add_subcommand(
      "twosample", "Two-sample rank test: lp11, z-score, t-equivalence, LPINFOR, "
                   "conditional comparison density");
  add_common_flags(twosample, cfg);
  twosample->add_option("--col", cfg.col, "Measurement column")->required();
  twosample->add_option("--group", cfg.group, "Two-valued group column")->required();
  twosample->add_option("--positive-label", cfg.positive_label,
                        "Group value treated as sample 1 (default: larger value)");
  twosample->add_option("--grid", cfg.grid, "Density grid points")->capture_default_str();

  auto* screen = app.add_subcommand(
      "screen", "Rank features by LPINFOR against a target column");
  add_common_flags(screen, cfg);
  screen->add_option("-y,--y", cfg.y, "Target column")->required();
  screen->add_option("--features", cfg.features,
                     "Comma-separated feature columns (default: all except --y)");

  auto* classify = app.add_subcommand(
      "classify", "Logistic model on score functions for a binary target");
  add_common_flags(classify, cfg);
  classify->add_option("-x,--x", cfg.x, "Predictor column")->required();
  classify->add_option("-y,--y", cfg.y, "Binary target column")->required();
  classify->add_option("--positive-label", cfg.positive_label,
                       "Target value treated as 1 (default: larger value)");
  classify->add_option("--grid", cfg.grid, "Probability grid points")->capture_default_str();

  auto* quantplot = app.add_subcommand(
      "quantplot", "Quantile, mid-quantile and normal Q-Q point sets");
  add_common_flags(quantplot, cfg);
  quantplot->add_option("--col", cfg.col, "Column to analyze")->required();
  quantplot->add_option("--kind", cfg.kind, "Column kind: auto|continuous|discrete")
      ->check(CLI::IsMember({"auto", "continuous", "discrete"}))
      ->capture_default_str();
  quantplot->add_option("--grid", cfg.grid, "Mid-quantile grid points")->capture_default_str();
  quantplot->add_option("--plot", cfg.plot, "CSV table choice: quantile|midquantile|qq")
      ->check(CLI::IsMember({"quantile", "midquantile", "qq"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (auto* sub : {moments, comoments, gof, copula, twosample, screen, classify, quantplot}) {
    if (sub->parsed()) cfg.subcommand = sub->get_name();
  }
  if (mean_opt->count() > 0) cfg.mean = mean_value;

  try {
    return run_and_emit(cfg);
  } catch (const lpstat::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
}

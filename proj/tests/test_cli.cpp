#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "json.hpp"
#include "lpstat/lpstat.hpp"

using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

std::string bin()
{
  const std::string p = testutil::cli_path();
  REQUIRE_FALSE(p.empty());
  return p;
}

json parse_doc(const testutil::CliRun& r)
{
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  return json::parse(r.output);
}

//! Splits raw CSV text into rows of cells (no quoting in our outputs under test).
std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

//! CSV with one column "x" holding the worked sample 3,1,4,1,5.
std::string worked_sample_csv()
{
  return testutil::write_csv("worked", "x", {{3, 1, 4, 1, 5}});
}

//! 60-row two-column CSV realizing the 2x2 table with counts 10/20/20/10.
std::string table_2x2_csv()
{
  std::vector<double> x, y;
  auto add = [&](double xv, double yv, int count) {
    for (int i = 0; i < count; ++i) {
      x.push_back(xv);
      y.push_back(yv);
    }
  };
  add(0, 0, 10);
  add(0, 1, 20);
  add(1, 0, 20);
  add(1, 1, 10);
  return testutil::write_csv("t22", "x,y", {x, y});
}

//! 20-row factorial design: x and y independent in-sample by construction.
std::string factorial_csv()
{
  std::vector<double> x, y;
  for (int i = 0; i < 2; ++i) {
    for (int l = 0; l < 2; ++l) {
      for (int r = 0; r < 5; ++r) {
        x.push_back(i);
        y.push_back(l);
      }
    }
  }
  return testutil::write_csv("fact", "x,y", {x, y});
}

}  // namespace

TEST_CASE("moments document carries the documented blocks", "[cli]")
{
  const std::string f = worked_sample_csv();
  const auto r = testutil::run_cli(bin(), "moments -i " + f + " --col x --kind discrete");
  const json doc = parse_doc(r);

  REQUIRE(doc.contains("config"));
  REQUIRE(doc.contains("result"));
  REQUIRE(doc.contains("warnings"));
  CHECK(doc["warnings"].empty());
  CHECK(doc["config"]["subcommand"] == "moments");
  CHECK(doc["config"]["seed"] == 0);
  CHECK(doc["config"]["m"] == 4);

  const json& res = doc["result"];
  REQUIRE(res.contains("lp_moments"));
  REQUIRE(res.contains("tail_index"));
  REQUIRE(res.contains("quartile_summary"));
  CHECK(res["column"] == "x");
  CHECK(res["kind"] == "discrete");
  CHECK(res["n"] == 5);
  CHECK(res["support_size"] == 4);
  CHECK(res["mean"].get<double>() == Catch::Approx(2.8).margin(1e-12));
  CHECK(res["sd"].get<double>() == Catch::Approx(1.6).margin(1e-12));
  CHECK(res["quartile_summary"]["q1"].get<double>() == 1.0);
  CHECK(res["quartile_summary"]["q2"].get<double>() == 3.0);
  CHECK(res["quartile_summary"]["q3"].get<double>() == 4.0);
  CHECK(res["quartile_summary"]["outliers"].empty());
  REQUIRE_FALSE(res["lp_moments"].empty());
  for (const auto& e : res["lp_moments"]) {
    REQUIRE(e.contains("j"));
    REQUIRE(e.contains("value"));
    REQUIRE(e.contains("standardized"));
    REQUIRE(e.contains("var_explained"));
  }
  CHECK(r.output.back() == '\n');
}

TEST_CASE("moments CSV table lists one row per component", "[cli]")
{
  const std::string f = worked_sample_csv();
  const auto r =
      testutil::run_cli(bin(), "moments -i " + f + " --col x --kind discrete -f csv");
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 4);  // header + min(m, k-1) = 3 components
  CHECK(rows[0] == std::vector<std::string>{"j", "value", "standardized", "var_explained"});
  CHECK(rows[1][0] == "1");
  CHECK(rows[3][0] == "3");
}

TEST_CASE("rows with missing cells are dropped and reported", "[cli]")
{
  const std::string f = testutil::temp_path("gaps") + ".csv";
  {
    std::ofstream out(f, std::ios::binary);
    out << "x\n1\n2\nna\n3\n1\n2\n";
  }
  const auto r = testutil::run_cli(bin(), "moments -i " + f + " --col x --kind discrete");
  const json doc = parse_doc(r);
  REQUIRE(doc["warnings"].size() == 1);
  CHECK(doc["warnings"][0] == "1 rows dropped (missing values)");
  CHECK(doc["result"]["n"] == 5);
  std::remove(f.c_str());
}

TEST_CASE("comoments reproduces the two-by-two worked example", "[cli]")
{
  const std::string f = table_2x2_csv();
  const auto r = testutil::run_cli(bin(), "comoments -i " + f + " -x x -y y --rule all");
  const json doc = parse_doc(r);
  const json& res = doc["result"];
  CHECK(res["n"] == 60);
  CHECK(res["m_x"] == 1);
  CHECK(res["m_y"] == 1);
  CHECK(res["rule"] == "all");
  CHECK(res["n_lpinfor"].get<double>() == Catch::Approx(20.0 / 3.0).margin(1e-3));
  CHECK(res["values"][0][0].get<double>() == Catch::Approx(-1.0 / 3.0).margin(1e-12));
  CHECK(res["spearman"] == res["values"][0][0]);
  CHECK(res["independence"]["df"] == 1);
  CHECK(res["independence"]["statistic"].get<double>() ==
        Catch::Approx(20.0 / 3.0).margin(1e-9));
  CHECK_FALSE(res["independence"]["small_sample_warning"].get<bool>());
  CHECK_FALSE(res.contains("permutation"));

  const auto rc = testutil::run_cli(bin(), "comoments -i " + f + " -x x -y y --rule all -f csv");
  REQUIRE(rc.exit_code == 0);
  const auto rows = csv_rows(rc.output);
  REQUIRE(rows.size() == 2);  // header + single (1,1) cell
  CHECK(rows[0] == std::vector<std::string>{"j", "k", "value", "selected"});
  CHECK(rows[1][0] == "1");
  CHECK(rows[1][1] == "1");
  CHECK(rows[1][3] == "1");
}

TEST_CASE("repeated runs emit byte-identical documents", "[cli]")
{
  const std::string f = table_2x2_csv();
  const std::string args =
      "comoments -i " + f + " -x x -y y --permutation --n-perm 199 --seed 7 --threads 2";
  const auto r1 = testutil::run_cli(bin(), args);
  const auto r2 = testutil::run_cli(bin(), args);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(r1.output == r2.output);
  const json doc = json::parse(r1.output);
  CHECK(doc["config"]["seed"] == 7);
  CHECK(doc["result"]["permutation"]["n_permutations"] == 199);
}

TEST_CASE("config block reproduces the run", "[cli]")
{
  const std::string f = table_2x2_csv();
  const auto r = testutil::run_cli(
      bin(), "comoments -i " + f + " -x x -y y --rule all -m 3 --seed 5 --permutation "
             "--n-perm 99");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.output);

  const lpstat::RunConfig cfg = lpstat::RunConfig::from_json(doc["config"]);
  const lpstat::RunResult rr = lpstat::run(cfg);
  CHECK(lpstat::dump_json(rr.document) == r.output);
}

TEST_CASE("gof moment-constraint pathway runs without input", "[cli]")
{
  const auto r = testutil::run_cli(bin(), "gof --null \"die:1-6 uniform\" --mean 4.5");
  const json doc = parse_doc(r);
  CHECK(doc["config"]["mean"].get<double>() == 4.5);
  CHECK(doc["config"]["input"] == "");

  const json& res = doc["result"];
  CHECK(res["pathway"] == "moment_constraint");
  CHECK(res["null"] == "die:1-6 uniform");
  CHECK_FALSE(res["has_negative"].get<bool>());
  CHECK(res["fitted_mean"].get<double>() == Catch::Approx(4.5).margin(1e-12));
  const std::vector<double> expected = {1.0 / 42.0,  17.0 / 210.0, 29.0 / 210.0,
                                        41.0 / 210.0, 53.0 / 210.0, 65.0 / 210.0};
  REQUIRE(res["phat"].size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(res["phat"][i].get<double>() == Catch::Approx(expected[i]).margin(1e-9));
    CHECK(res["support"][i].get<double>() == static_cast<double>(i + 1));
    CHECK(res["null_pmf"][i].get<double>() == Catch::Approx(1.0 / 6.0).margin(1e-12));
  }

  const auto rc = testutil::run_cli(bin(), "gof --null \"die:1-6 uniform\" --mean 4.5 -f csv");
  REQUIRE(rc.exit_code == 0);
  const auto rows = csv_rows(rc.output);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"value", "null_pmf", "phat"});
  CHECK(std::stod(rows[1][2]) == Catch::Approx(1.0 / 42.0).margin(1e-9));
}

TEST_CASE("gof discrete pathway tabulates observed and corrected pmfs", "[cli]")
{
  std::vector<double> coin(100, 0.0);
  for (int i = 90; i < 100; ++i) coin[i] = 1.0;
  const std::string f = testutil::write_csv("coin", "x", {coin});
  const auto r =
      testutil::run_cli(bin(), "gof -i " + f + " --col x --null \"0:0.5,1:0.5\" -f csv");
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"value", "null_pmf", "observed", "phat"});
  CHECK(std::stod(rows[1][1]) == 0.5);
  CHECK(std::stod(rows[1][2]) == Catch::Approx(0.9).margin(1e-9));
  CHECK(std::stod(rows[1][3]) == Catch::Approx(0.9).margin(1e-9));
  CHECK(std::stod(rows[2][3]) == Catch::Approx(0.1).margin(1e-9));

  const auto rj = testutil::run_cli(bin(), "gof -i " + f + " --col x --null \"0:0.5,1:0.5\"");
  const json doc = parse_doc(rj);
  CHECK(doc["result"]["pathway"] == "discrete");
  CHECK(doc["result"]["n"] == 100);
  REQUIRE(doc["result"]["z_scores"].size() == 1);
  CHECK(doc["result"]["z_scores"][0].get<double>() == Catch::Approx(-8.0).margin(1e-9));
  CHECK(doc["result"]["statistic"].get<double>() == Catch::Approx(64.0).margin(1e-9));
}

TEST_CASE("gof skew-G pathway emits a density grid with optional clip column", "[cli]")
{
  std::vector<double> u;
  for (int i = 1; i <= 30; ++i) u.push_back(i / 31.0);
  const std::string f = testutil::write_csv("unif", "u", {u});
  const auto r = testutil::run_cli(
      bin(), "gof -i " + f + " --col u --null \"uniform(0,1)\" --grid 4 --clip -f csv");
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"u", "density", "density_clipped"});
  CHECK(std::stod(rows[1][0]) == 0.125);

  const auto rj = testutil::run_cli(
      bin(), "gof -i " + f + " --col u --null \"uniform(0,1)\" --grid 4 --clip");
  const json doc = parse_doc(rj);
  const json& res = doc["result"];
  CHECK(res["pathway"] == "skew_g");
  CHECK(res["se"].get<double>() == Catch::Approx(1.0 / std::sqrt(30.0)).margin(1e-12));
  REQUIRE(res["density_grid"].size() == 4);
  CHECK(res["density_grid"][0].contains("density_clipped"));
}

TEST_CASE("quantplot CSV matches the worked example bytes", "[cli]")
{
  const std::string f = worked_sample_csv();
  const auto r = testutil::run_cli(
      bin(), "quantplot -i " + f + " --col x --kind discrete --plot quantile -f csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output == "u,x\n0.2,1\n0.5,3\n0.7,4\n0.9,5\n");

  const auto rqq = testutil::run_cli(
      bin(), "quantplot -i " + f + " --col x --kind discrete --plot qq -f csv");
  REQUIRE(rqq.exit_code == 0);
  const auto qq = csv_rows(rqq.output);
  REQUIRE(qq.size() == 5);
  CHECK(qq[0] == std::vector<std::string>{"u_normal_quantile", "x"});
  CHECK(std::stod(qq[1][0]) ==
        Catch::Approx(lpstat::normal_quantile(0.2)).margin(1e-9));

  const auto rmq = testutil::run_cli(
      bin(),
      "quantplot -i " + f + " --col x --kind discrete --plot midquantile --grid 5 -f csv");
  REQUIRE(rmq.exit_code == 0);
  const auto mq = csv_rows(rmq.output);
  REQUIRE(mq.size() == 6);
  CHECK(mq[0] == std::vector<std::string>{"u", "x"});
  CHECK(std::stod(mq[1][0]) == 0.1);
  CHECK(std::stod(mq[5][0]) == 0.9);

  const json doc = parse_doc(testutil::run_cli(
      bin(), "quantplot -i " + f + " --col x --kind discrete --grid 5"));
  CHECK(doc["result"]["quantile_points"].size() == 4);
  CHECK(doc["result"]["normal_qq"].size() == 4);
  CHECK(doc["result"]["mid_quantile_grid"].size() == 5);
}

TEST_CASE("copula surface is flat under in-sample independence", "[cli]")
{
  const std::string f = factorial_csv();
  const auto r = testutil::run_cli(
      bin(), "copula -i " + f + " -x x -y y --grid-u 2 --grid-v 2 -f csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output == "u,v,density\n0.25,0.25,1\n0.25,0.75,1\n0.75,0.25,1\n0.75,0.75,1\n");

  const json doc = parse_doc(
      testutil::run_cli(bin(), "copula -i " + f + " -x x -y y --grid-u 2 --grid-v 2"));
  const json& res = doc["result"];
  CHECK(res["total_integral"].get<double>() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(res["slices"].size() == 5);  // default slice list
  for (const auto& s : res["slices"])
    CHECK(s["integral"].get<double>() == Catch::Approx(1.0).margin(1e-12));
  CHECK(res["surface"].size() == 4);
  CHECK(res["comoments"]["selected"].empty());
}

TEST_CASE("explicit slices switch the copula CSV to the slice table", "[cli]")
{
  const std::string f = factorial_csv();
  const auto r = testutil::run_cli(
      bin(), "copula -i " + f + " -x x -y y --grid-v 4 --slices 0.25,0.5,0.75 -f csv");
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 1 + 3 * 4);
  CHECK(rows[0] == std::vector<std::string>{"v", "density", "u_slice"});
  std::set<std::string> slice_ids;
  for (std::size_t i = 1; i < rows.size(); ++i) slice_ids.insert(rows[i][2]);
  CHECK(slice_ids == std::set<std::string>{"0.25", "0.5", "0.75"});
}

TEST_CASE("twosample reports the worked example over the wire", "[cli]")
{
  const std::string f =
      testutil::write_csv("ts", "v,g", {{3, 4, 1, 2}, {0, 0, 1, 1}});
  const auto r =
      testutil::run_cli(bin(), "twosample -i " + f + " --col v --group g -f csv");
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"key", "value"});
  CHECK(rows[1][0] == "lp11");
  CHECK(std::stod(rows[1][1]) == Catch::Approx(-0.8944).margin(1e-4));
  CHECK(rows[5][0] == "t_equiv");
  CHECK(std::stod(rows[5][1]) == Catch::Approx(-2.0).margin(1e-9));
  CHECK(rows[7] == std::vector<std::string>{"n0", "2"});
  CHECK(rows[8] == std::vector<std::string>{"n1", "2"});

  const json doc = parse_doc(
      testutil::run_cli(bin(), "twosample -i " + f + " --col v --group g --grid 11"));
  const json& res = doc["result"];
  CHECK(res["positive_label"].get<double>() == 1.0);
  CHECK(res["pooled_n"] == 4);
  CHECK(res["z_score"].get<double>() ==
        Catch::Approx(2.0 * res["lp11"].get<double>()).margin(1e-12));
  CHECK(res["conditional_density"]["grid"].size() == 11);
}

TEST_CASE("screen ranks features and classify grids probabilities", "[cli]")
{
  std::vector<double> x1, x2, y;
  for (int i = 0; i < 80; ++i) {
    x1.push_back(i);
    x2.push_back((i * 37) % 80);
    y.push_back(i >= 40 ? 1.0 : 0.0);
  }
  const std::string f = testutil::write_csv("sc", "x1,x2,y", {x1, x2, y});

  const auto rs = testutil::run_cli(bin(), "screen -i " + f + " -y y -f csv");
  REQUIRE(rs.exit_code == 0);
  const auto rows = csv_rows(rs.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        std::vector<std::string>{"rank", "name", "lpinfor", "selected_components", "skipped"});
  CHECK(rows[1][0] == "1");
  CHECK(rows[1][1] == "x1");

  const json sdoc = parse_doc(testutil::run_cli(bin(), "screen -i " + f + " -y y"));
  REQUIRE(sdoc["result"]["features"].size() == 2);
  CHECK(sdoc["result"]["y"] == "y");
  CHECK(sdoc["result"]["features"][0]["name"] == "x1");
  CHECK_FALSE(sdoc["result"]["features"][0]["skipped"].get<bool>());

  const auto rcsv =
      testutil::run_cli(bin(), "classify -i " + f + " -x x1 -y y --grid 5 -f csv");
  REQUIRE(rcsv.exit_code == 0);
  const auto crows = csv_rows(rcsv.output);
  REQUIRE(crows.size() == 6);
  CHECK(crows[0] == std::vector<std::string>{"u", "probability"});

  const auto rj = testutil::run_cli(bin(), "classify -i " + f + " -x x1 -y y --grid 5");
  const json cdoc = parse_doc(rj);
  CHECK(cdoc["result"]["separation"].get<bool>());
  REQUIRE_FALSE(cdoc["warnings"].empty());
  CHECK_THAT(cdoc["warnings"][0].get<std::string>(),
             ContainsSubstring("complete separation"));
  REQUIRE(cdoc["result"]["probability_grid"].size() == 5);
  CHECK(cdoc["result"]["probability_grid"][0]["probability"].get<double>() <
        cdoc["result"]["probability_grid"][4]["probability"].get<double>());
}

TEST_CASE("option values echo into the config block", "[cli]")
{
  const std::string f = worked_sample_csv();
  const json doc = parse_doc(testutil::run_cli(
      bin(), "moments -i " + f + " --col x --kind discrete --tail-threshold 0.5 --seed 42"));
  CHECK(doc["config"]["tail_threshold"].get<double>() == 0.5);
  CHECK(doc["config"]["seed"] == 42);
  CHECK(doc["config"]["kind"] == "discrete");
}

TEST_CASE("--output writes the same bytes as stdout", "[cli]")
{
  const std::string f = worked_sample_csv();
  const auto direct =
      testutil::run_cli(bin(), "moments -i " + f + " --col x --kind discrete");
  REQUIRE(direct.exit_code == 0);

  const std::string out = testutil::temp_path("doc") + ".json";
  const auto filed = testutil::run_cli(
      bin(), "moments -i " + f + " --col x --kind discrete -o " + out);
  REQUIRE(filed.exit_code == 0);
  CHECK(filed.output.empty());
  std::ifstream in(out, std::ios::binary);
  const std::string written((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  CHECK(written == direct.output);
  std::remove(out.c_str());
}

TEST_CASE("exit codes separate usage, validation and runtime failures", "[cli]")
{
  const std::string f = worked_sample_csv();

  CHECK(testutil::run_cli(bin(), "--help").exit_code == 0);
  CHECK(testutil::run_cli(bin(), "").exit_code == 2);                       // no subcommand
  CHECK(testutil::run_cli(bin(), "moments --no-such-flag").exit_code == 2); // unknown flag
  CHECK(testutil::run_cli(bin(), "moments -i " + f).exit_code == 2);        // missing --col
  CHECK(testutil::run_cli(bin(), "moments --col x").exit_code == 2);        // missing --input
  CHECK(testutil::run_cli(bin(), "moments -i " + f + " --col x -f xml").exit_code == 2);
  CHECK(testutil::run_cli(bin(), "moments -i /no/such/file.csv --col x").exit_code == 2);
  CHECK(testutil::run_cli(bin(), "gof --null \"normal(0,1)\" --mean 3").exit_code == 2);

  const auto missing = testutil::run_cli(bin(), "moments -i " + f + " --col nope");
  CHECK(missing.exit_code == 2);
  CHECK_THAT(missing.output, ContainsSubstring("error:"));
  CHECK_THAT(missing.output, ContainsSubstring("nope"));

  const auto badrule = testutil::run_cli(
      bin(), "comoments -i " + f + " -x x -y x --rule banana");
  CHECK(badrule.exit_code == 2);

  const std::string flat =
      testutil::write_csv("flat", "v,g", {{7, 7, 7, 7}, {0, 0, 1, 1}});
  const auto rt = testutil::run_cli(bin(), "twosample -i " + flat + " --col v --group g");
  CHECK(rt.exit_code == 1);
  CHECK_THAT(rt.output, ContainsSubstring("runtime error:"));
}

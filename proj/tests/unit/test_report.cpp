#include <doctest.h>

#include "helpers.hpp"
#include "seqcfa/dataio.hpp"
#include "seqcfa/report.hpp"

using namespace seqcfa;

namespace {

std::vector<ReplicationResult> small_run() {
  GridSpec g;
  g.sizes = {100};
  g.error_levels = {0.2, 0.6};
  return run_grid(Design::Simple, g, 3, 9);
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("summary CSV header layout") {
    const SummaryTable t = summarize(small_run());
    const CsvTable c = parse_csv(summary_csv(t));
    CHECK(c.header ==
          std::vector<std::string>{"n", "Distribution", "Residual Pattern", "Sequential RMSE", "Traditional RMSE"});
    CHECK(c.rows.size() == t.rows.size());
  }

  TEST_CASE("summary CSV re-parses to the table values") {
    const SummaryTable t = summarize(small_run());
    const CsvTable c = parse_csv(summary_full_csv(t));
    REQUIRE(c.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      CHECK(std::stoi(c.rows[i][0]) == r.n);
      CHECK(c.rows[i][1] == to_string(r.distribution));
      CHECK(c.rows[i][2] == to_string(r.pattern));
      CHECK(std::stoi(c.rows[i][3]) == r.replications);
      CHECK(c.rows[i][7] == format_number(*r.rmse_seq));
      CHECK(std::stod(c.rows[i][7]) == doctest::Approx(*r.rmse_seq).epsilon(1e-11));
      CHECK(std::stod(c.rows[i][8]) == doctest::Approx(*r.rmse_trad).epsilon(1e-11));
    }
  }

  TEST_CASE("replications CSV round-trips exactly") {
    const auto res = small_run();
    const std::string text = replications_csv(res);
    const auto back = parse_replications_csv(text);
    REQUIRE(back.size() == res.size());
    CHECK(replications_csv(back) == text);
    CHECK(summary_full_csv(summarize(back)) == summary_full_csv(summarize(res)));
    CHECK_THROWS(parse_replications_csv("a,b\n1,2\n"));
  }

  TEST_CASE("markdown has one row per stratum") {
    std::vector<ReplicationResult> rs;
    for (auto c : expand_grid(Design::Simple, default_grid(Design::Simple))) {
      ReplicationResult r;
      r.condition = c;
      r.status_seq = r.status_trad = FitStatus::Converged;
      r.rmse_seq = 0.4;
      r.rmse_trad = 0.6;
      r.r_seq = 0.9;
      r.r_trad = 0.8;
      rs.push_back(r);
    }
    const std::string md = summary_markdown(summarize(rs));
    const auto lines = std::count(md.begin(), md.end(), '\n');
    CHECK(lines == 22);  // header, rule, 20 strata
    CHECK(md.find("| 100 | Normal | Heteroskedastic | 0.400 | 0.600 |") != std::string::npos);
  }

  TEST_CASE("emit_reports writes every artifact") {
    const auto dir = testutil::scratch_dir("report");
    const auto res = small_run();
    emit_reports(summarize(res), res, dir, ReportFormat::Markdown);
    for (const char* f : {"summary.md", "summary_full.csv", "paired_tests.csv", "replications.csv",
                          "rmse_distribution.csv"})
      CHECK(std::filesystem::exists(dir / f));
    const CsvTable dist = read_csv(dir / "rmse_distribution.csv");
    CHECK(dist.header == std::vector<std::string>{"method", "data_type", "rmse"});
    std::size_t metrics = 0;
    for (const auto& r : res) metrics += (r.rmse_seq ? 1 : 0) + (r.rmse_trad ? 1 : 0);
    CHECK(dist.rows.size() == metrics);
    CHECK_THROWS(emit_reports(summarize(res), res, "/proc/forbidden_dir", ReportFormat::Csv));
  }

  TEST_CASE("fit JSON withholds loadings unless converged") {
    SimCondition c;
    c.n_obs = 300;
    const auto ds = generate(c);
    FittedModel fit = fit_traditional(ds.params.spec, ds.data);
    REQUIRE(fit.converged());
    auto j = fit_json(fit, true);
    CHECK(j["loadings"].size() == 9);
    CHECK(j.contains("fit_indices"));
    fit.status = FitStatus::Inadmissible;
    j = fit_json(fit, true);
    CHECK_FALSE(j.contains("loadings"));
    CHECK(j["status"] == "Inadmissible");
  }
}

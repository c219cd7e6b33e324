#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include <json.hpp>

#include "helpers.hpp"
#include "seqcfa/dataio.hpp"
#include "seqcfa/simgen.hpp"

using namespace seqcfa;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SEQCFA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  const auto dir = testutil::scratch_dir("cli");

  TEST_CASE("usage errors exit 1") {
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("simulate --design enormous --out " + (dir / "x").string()) == 1);
    CHECK(run("simulate --design simple") == 1);
    CHECK(run("--help") == 0);
  }

  TEST_CASE("fit, scores and data errors") {
    SimCondition c;
    c.n_obs = 200;
    const auto ds = generate(c);
    write_data_csv(dir / "data.csv", ds.data);
    write_text_file(dir / "model.txt", serialize_model(ds.params.spec));
    write_text_file(dir / "bad_model.txt", "F1 =~ V1 +\n");
    write_text_file(dir / "other_model.txt", "F1 =~ V1 + V2 + W9\n");

    CHECK(run("fit --model " + (dir / "model.txt").string() + " --data " + (dir / "data.csv").string() +
              " --method sequential --id-column id --out " + (dir / "seq.json").string() + " --scores " +
              (dir / "seq_scores.csv").string()) == 0);
    const auto j = nlohmann::json::parse(read_text_file(dir / "seq.json"));
    CHECK(j["schema_version"] == 1);
    CHECK(j["sequential"]["completed"] == true);
    const CsvTable scores = read_csv(dir / "seq_scores.csv");
    CHECK(scores.header == std::vector<std::string>{"id", "G"});
    CHECK(scores.rows.size() == 200);

    CHECK(run("fit --model " + (dir / "model.txt").string() + " --data " + (dir / "data.csv").string() +
              " --method traditional --out " + (dir / "trad.json").string()) == 0);
    CHECK(run("fit --model " + (dir / "bad_model.txt").string() + " --data " + (dir / "data.csv").string() +
              " --out " + (dir / "bad.json").string()) == 2);
    CHECK(run("fit --model " + (dir / "other_model.txt").string() + " --data " + (dir / "data.csv").string() +
              " --out " + (dir / "bad.json").string()) == 2);
  }

  TEST_CASE("simulate, report and the all-failed exit code") {
    const auto out = dir / "sim";
    CHECK(run("simulate --design simple --reps 2 --seed 42 --sizes 100 --error-levels 0.4 --out " + out.string()) == 0);
    CHECK(std::filesystem::exists(out / "summary.csv"));
    CHECK(std::filesystem::exists(out / "summary.md"));
    CHECK(std::filesystem::exists(out / "run.json"));
    const std::string before = read_text_file(out / "summary.csv");
    CHECK(run("report --in " + out.string() + " --format csv") == 0);
    CHECK(read_text_file(out / "summary.csv") == before);
    CHECK(run("report --in " + out.string() + " --format md") == 0);

    CHECK(run("simulate --design simple --reps 1 --seed 1 --sizes 3 --out " + (dir / "dead").string()) == 3);
  }

  TEST_CASE("validate") {
    std::string csv = "id,year,V1,V2,V3,V4\n";
    for (int y : {2021, 2022}) {
      SimCondition c;
      c.design = Design::Custom;
      c.custom_spec = parse_model("R =~ V1 + V2 + V3 + V4");
      c.n_obs = 80;
      c.seed = static_cast<std::uint64_t>(y);
      const auto ds = generate(c);
      for (Eigen::Index r = 0; r < ds.data.n_obs(); ++r) {
        csv += "c" + std::to_string(r) + "," + std::to_string(y);
        for (Eigen::Index k = 0; k < 4; ++k) csv += "," + format_number(ds.data.values()(r, k));
        csv += "\n";
      }
    }
    write_text_file(dir / "panel.csv", csv);
    write_text_file(dir / "rol.txt", "R =~ V1 + V2 + V3 + V4\n");
    const auto out = dir / "val";
    CHECK(run("validate --data " + (dir / "panel.csv").string() + " --model " + (dir / "rol.txt").string() +
              " --year-column year --id-column id --range-check -10,10 --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(read_text_file(out / "validation.json"));
    CHECK(j["groups"].size() == 2);
    CHECK(std::filesystem::exists(out / "scores_2021.csv"));
    CHECK(run("validate --data " + (dir / "panel.csv").string() + " --model " + (dir / "rol.txt").string() +
              " --year-column nope --out " + out.string()) == 2);
    CHECK(run("validate --data " + (dir / "panel.csv").string() + " --model " + (dir / "rol.txt").string() +
              " --year-column year --range-check oops --out " + out.string()) == 1);
  }
}

#include "cli.h"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agc/evaluator.h"
#include "agc/explanation_io.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "agc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.status = agc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("agc_cli_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("gen is deterministic") {
  TempDir dir("gen");
  REQUIRE(run({"gen", "--n", "100", "--seed", "7", "--out", dir / "a.jsonl"}).status == 0);
  REQUIRE(run({"gen", "--n", "100", "--seed", "7", "--out", dir / "b.jsonl", "--workers", "3"})
              .status == 0);
  REQUIRE(run({"gen", "--n", "100", "--seed", "8", "--out", dir / "c.jsonl"}).status == 0);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(slurp(dir / "a.jsonl") != slurp(dir / "c.jsonl"));
}

TEST_CASE("config file and precedence") {
  TempDir dir("config");
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "[gen]\nn = 20\nseed = 9\nout = \"" << (dir / "cfg.jsonl") << "\"\n";
  }
  REQUIRE(run({"--config", dir / "run.toml", "gen"}).status == 0);
  CHECK(slurp(dir / "cfg.jsonl").find("\"n\":20") != std::string::npos);
  REQUIRE(run({"--config", dir / "run.toml", "gen", "--n", "30"}).status == 0);
  CHECK(slurp(dir / "cfg.jsonl").find("\"n\":30") != std::string::npos);

  {
    std::ofstream cfg(dir / "bad.toml");
    cfg << "[gen]\nn = 20\nnum_samples = 5\n";
  }
  CHECK(run({"--config", dir / "bad.toml", "gen"}).status != 0);
  CHECK(run({"--config", dir / "missing.toml", "gen"}).status != 0);
}

TEST_CASE("usage errors") {
  CHECK(run({}).status != 0);
  CHECK(run({"frobnicate"}).status != 0);
  const Result r = run({"gen", "--no-such-flag"});
  CHECK(r.status != 0);
  CHECK(r.err.find("--no-such-flag") != std::string::npos);
  CHECK(run({"train", "--kind", "svm"}).status != 0);

  const Result missing = run({"detect", "--dataset", "/nonexistent/x.jsonl"});
  CHECK(missing.status == 1);
  CHECK(missing.err.find("error:") == 0);
}

TEST_CASE("help lists every flag") {
  const Result r = run({"explain", "--help"});
  CHECK(r.status == 0);
  for (const char* flag : {"--dataset", "--model", "--backend", "--base-url", "--llm-model",
                           "--shots", "--shot-seed", "--limit", "--max-in-flight",
                           "--max-attempts", "--token-budget", "--include-series",
                           "--measure-latency", "--split-seed", "--out"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
}

TEST_CASE("pipeline with the echo backend") {
  TempDir dir("pipeline");
  const std::string data = dir / "d.jsonl";
  const std::string model = dir / "m.json";
  REQUIRE(run({"gen", "--n", "600", "--seed", "11", "--out", data}).status == 0);
  const Result tr = run({"train", "--dataset", data, "--model-out", model, "--n-trees", "40",
                         "--metrics-out", dir / "metrics.json"});
  REQUIRE(tr.status == 0);
  CHECK(tr.out.find("gradient_boosted: accuracy") != std::string::npos);
  CHECK(fs::exists(dir / "metrics.json"));

  const Result det = run({"detect", "--dataset", data, "--model", model, "--out",
                          dir / "det.jsonl"});
  REQUIRE(det.status == 0);
  CHECK(!slurp(dir / "det.jsonl").empty());
  CHECK(run({"detect", "--dataset", data, "--model", model, "--sample", "99999"}).status == 1);

  const Result ex = run({"explain", "--dataset", data, "--model", model, "--backend",
                         "mock-echo", "--shots", "20", "--limit", "100", "--out",
                         dir / "ex.jsonl"});
  REQUIRE(ex.status == 0);
  const agc::ExplanationFile f = agc::read_explanations(dir / "ex.jsonl");
  CHECK(f.shots == 20);
  CHECK(f.outcomes.size() <= 100);
  CHECK(f.outcomes.size() >= 90);

  REQUIRE(run({"evaluate", "--dataset", data, "--model", model, "--explanations",
               dir / "ex.jsonl", "--out-dir", dir / "report"})
              .status == 0);
  const agc::Report rep = agc::read_report(dir.path / "report");
  REQUIRE(rep.explanations.size() == 1);
  CHECK(rep.explanations[0].target_accuracy == 100.0);
  CHECK(rep.explanations[0].mae_magnitude == 0.0);
  CHECK(rep.explanations[0].mae_onset == 0.0);
  CHECK(rep.explanations[0].n_parse_failures == 0);
  REQUIRE(rep.classifiers.size() == 1);
  CHECK(rep.classifiers[0].model == "gradient_boosted");
  CHECK(slurp(dir.path / "report" / "report.md").find("| gpt-4o-mini | 20 | 100.00 |") !=
        std::string::npos);

  for (const char* sub : {"a", "b"}) {
    REQUIRE(run({"sweep", "--dataset", data, "--model", model, "--backend", "mock-fault",
                 "--shots", "0,5", "--out-dir", dir / sub})
                .status == 0);
  }
  CHECK(slurp(dir.path / "a" / "report.csv") == slurp(dir.path / "b" / "report.csv"));
  CHECK(slurp(dir.path / "a" / "report.md") == slurp(dir.path / "b" / "report.md"));
  CHECK(slurp(dir.path / "a" / "explanations_k5.jsonl") ==
        slurp(dir.path / "b" / "explanations_k5.jsonl"));

  ::unsetenv("AGC_LLM_API_KEY");
  const Result live = run({"explain", "--dataset", data, "--model", model, "--backend", "live"});
  CHECK(live.status == 1);
  CHECK(live.err.find("AGC_LLM_API_KEY") != std::string::npos);
}

TEST_CASE("plot of the golden sample") {
  TempDir dir("plot");
  const Result r = run({"plot", "--dataset", std::string(AGC_GOLDEN_DIR) + "/fig3.jsonl",
                        "--sample", "3", "--out", dir / "fig.svg", "--csv", dir / "fig.csv"});
  REQUIRE(r.status == 0);
  const std::string svg = slurp(dir / "fig.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("data-label=\"Normal\"") != std::string::npos);
  CHECK(svg.find("data-label=\"Attack\"") != std::string::npos);
  CHECK(svg.find("class=\"marker\" data-x=\"15\"") != std::string::npos);
  CHECK(svg.find("delta_p_tie") != std::string::npos);

  const std::string csv = slurp(dir / "fig.csv");
  CHECK(csv.rfind("Time (s),Normal,Attack\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 201);

  CHECK(run({"plot", "--dataset", std::string(AGC_GOLDEN_DIR) + "/fig3.jsonl", "--sample", "4",
             "--out", dir / "x.svg"})
            .status == 1);
}

TEST_CASE("simulate writes a trace and a plot") {
  TempDir dir("simulate");
  const Result r = run({"simulate", "--load", "0.02", "--linear", "--ki", "0", "--window", "120",
                        "--process-noise", "0", "--measurement-noise", "0", "--out-dir",
                        dir.path.string()});
  REQUIRE(r.status == 0);
  CHECK(fs::exists(dir.path / "trace.jsonl"));
  CHECK(fs::exists(dir.path / "trace.svg"));
  CHECK(slurp(dir / "trace.csv").rfind("Time (s),delta_f1,delta_f2,delta_p_tie\n", 0) == 0);
  CHECK(r.out.find("terminal delta_f1 -5.4") != std::string::npos);
}

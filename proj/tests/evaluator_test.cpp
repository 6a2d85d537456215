#include "agc/evaluator.h"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "agc/datagen.h"
#include "agc/error.h"
#include "agc/mock_backend.h"

using namespace agc;
namespace fs = std::filesystem;

namespace {

ExplanationOutcome outcome(std::int64_t id, Signal target, double mag, double t,
                           double latency = 0.0) {
  ExplanationOutcome o;
  o.sample_id = id;
  ExplanationReport r;
  r.sample_id = id;
  r.attack_target = target;
  r.attack_magnitude = mag;
  r.attack_start_time = t;
  r.latency_s = latency;
  o.report = r;
  return o;
}

ExplanationOutcome failed(std::int64_t id) {
  ExplanationOutcome o;
  o.sample_id = id;
  o.error = "no JSON object in response";
  o.raw = "???";
  return o;
}

Report sample_report() {
  Report r;
  r.classifiers.push_back({.model = "random_forest", .accuracy = 0.91, .precision = 0.92,
                           .recall = 0.905, .f1 = 0.9124, .mean_latency_s = 0.0021});
  r.classifiers.push_back({.model = "gradient_boosted", .accuracy = 0.9513, .precision = 0.9857,
                           .recall = 0.9160, .f1 = 0.9496, .mean_latency_s = 0.004});
  r.explanations.push_back({"gpt-4o-mini", 20, 93.0, 0.07519, 2.19, 1.234, 100, 0});
  r.explanations.push_back({"gpt-4o-mini", 5, 81.0, 0.1 / 3.0, 4.0 / 7.0, 0.5, 97, 3});
  r.explanations.push_back({"gpt-4o", 0, 1e-300, 0.0, 123456.789, 0.0, 1, 0});
  r.metadata = {{"master_seed", "42"},
                {"note", "quoted, \"comma\"\nand newline"},
                {"backend", "mock-echo"}};
  return r;
}

}  // namespace

TEST_CASE("score basics") {
  const std::vector<GroundTruth> truth = {{1, {Signal::kDeltaF1, 0.1, 15.0}},
                                          {2, {Signal::kDeltaPTie, 0.2, 16.0}}};
  SUBCASE("identical") {
    const std::vector<ExplanationOutcome> out = {outcome(1, Signal::kDeltaF1, 0.1, 15.0),
                                                 outcome(2, Signal::kDeltaPTie, 0.2, 16.0)};
    const ExplanationMetrics m = score(out, truth);
    CHECK(m.target_accuracy == 100.0);
    CHECK(m.mae_magnitude == 0.0);
    CHECK(m.mae_onset == 0.0);
    CHECK(m.n_evaluated == 2);
    CHECK(m.n_parse_failures == 0);
  }
  SUBCASE("onset error") {
    const std::vector<ExplanationOutcome> out = {outcome(2, Signal::kDeltaPTie, 0.2, 20.0, 2.0),
                                                 outcome(1, Signal::kDeltaF2, 0.15, 15.0, 1.0)};
    const ExplanationMetrics m = score(out, truth);
    CHECK(m.mae_onset == 2.0);
    CHECK(m.target_accuracy == 50.0);
    CHECK(m.mae_magnitude == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(m.mean_latency_s == 1.5);
  }
  SUBCASE("failures are counted and excluded") {
    const std::vector<ExplanationOutcome> out = {outcome(1, Signal::kDeltaF1, 0.1, 15.0),
                                                 failed(2)};
    const ExplanationMetrics m = score(out, truth);
    CHECK(m.n_evaluated == 1);
    CHECK(m.n_parse_failures == 1);
    CHECK(m.target_accuracy == 100.0);
    CHECK(m.mae_onset == 0.0);
  }
  SUBCASE("all failed") {
    const std::vector<ExplanationOutcome> out = {failed(1), failed(2)};
    const ExplanationMetrics m = score(out, truth);
    CHECK(m.n_evaluated == 0);
    CHECK(m.n_parse_failures == 2);
    CHECK(m.target_accuracy == 0.0);
  }
  SUBCASE("alignment") {
    CHECK_THROWS_AS(score(std::vector<ExplanationOutcome>{outcome(1, Signal::kDeltaF1, 0, 0)},
                          truth),
                    AlignmentError);
    CHECK_THROWS_AS(score(std::vector<ExplanationOutcome>{outcome(1, Signal::kDeltaF1, 0, 0),
                                                          outcome(3, Signal::kDeltaF1, 0, 0)},
                          truth),
                    AlignmentError);
    const std::vector<GroundTruth> dup = {truth[0], truth[0]};
    CHECK_THROWS_AS(score(std::vector<ExplanationOutcome>{outcome(1, Signal::kDeltaF1, 0, 0),
                                                          outcome(1, Signal::kDeltaF1, 0, 0)},
                          dup),
                    AlignmentError);
  }
}

TEST_CASE("score is permutation invariant") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ExplanationOutcome> out;
  std::vector<GroundTruth> truth;
  for (std::int64_t id = 0; id < 64; ++id) {
    const auto target = static_cast<Signal>(id % 3);
    truth.push_back({id, {target, u(gen), 30 * u(gen)}});
    out.push_back(outcome(id, static_cast<Signal>((id / 2) % 3), u(gen), 30 * u(gen), u(gen)));
  }
  const ExplanationMetrics base = score(out, truth);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(out.begin(), out.end(), gen);
    std::shuffle(truth.begin(), truth.end(), gen);
    CHECK(score(out, truth) == base);
  }
}

TEST_CASE("markdown layout") {
  Report r;
  r.classifiers.push_back({.model = "gradient_boosted", .accuracy = 0.9513, .precision = 0.9857,
                           .recall = 0.9160, .f1 = 0.9496, .mean_latency_s = 0.004});
  const std::string md = render_markdown(r);
  CHECK(md.find("| Model | Accuracy | Recall | Precision | F1 Score | Latency (s) |") !=
        std::string::npos);
  CHECK(md.find("| gradient_boosted | 0.9513 | 0.9160 | 0.9857 | 0.9496 | 0.004 |") !=
        std::string::npos);
  CHECK(md.find("Attack explanation") == std::string::npos);
  CHECK(md.find("Shots") == std::string::npos);

  const std::string full = render_markdown(sample_report());
  CHECK(full.find("| gpt-4o-mini | 20 | 93.00 | 0.07519 | 2.19 | 1.234 |") != std::string::npos);
  CHECK(full.find("| Model | Shots | Accuracy of Attack Target (%) | MAE of Attack Magnitude | "
                  "MAE of Attack Time | Latency (s) |") != std::string::npos);
  const auto p5 = full.find("| gpt-4o-mini | 5 |");
  const auto p20 = full.find("| gpt-4o-mini | 20 |");
  const auto p0 = full.find("| gpt-4o | 0 |");
  CHECK(p0 < p5);
  CHECK(p5 < p20);
  CHECK(full.find("| gradient_boosted |") < full.find("| random_forest |"));
}

TEST_CASE("csv round trip") {
  const Report r = sample_report();
  const std::string csv = render_csv(r);
  const Report back = parse_csv(csv);
  CHECK(render_csv(back) == csv);
  CHECK(render_markdown(back) == render_markdown(r));
  REQUIRE(back.explanations.size() == 3);
  Report sorted = r;
  std::sort(sorted.classifiers.begin(), sorted.classifiers.end(),
            [](const auto& a, const auto& b) { return a.model < b.model; });
  std::sort(sorted.explanations.begin(), sorted.explanations.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.shots) < std::tie(b.model, b.shots);
  });
  CHECK(back == sorted);

  CHECK_THROWS_AS(parse_csv(""), FormatError);
  CHECK_THROWS_AS(parse_csv("a,b\n"), FormatError);
  CHECK_THROWS_AS(parse_csv(csv + "detection,x\n"), FormatError);
  CHECK_THROWS_AS(parse_csv(csv + "bogus,,,,,,,,,,,,,,\n"), FormatError);

  const fs::path dir = fs::temp_directory_path() / "agc_evaluator_test_report";
  fs::remove_all(dir);
  write_report(dir, r);
  CHECK(fs::exists(dir / "report.md"));
  CHECK(read_report(dir) == sorted);
  fs::remove_all(dir);
}

TEST_CASE("shot sweep against mock backends") {
  std::vector<Sample> eval, pool;
  for (std::int64_t i = 0; i < 160; ++i) {
    if (!is_attacked_index(i)) continue;
    Sample s = generate_sample(i, 0x53574550, true);
    (i < 100 ? eval : pool).push_back(std::move(s));
  }
  std::vector<DetectionResult> det(eval.size());
  for (std::size_t i = 0; i < det.size(); ++i) {
    det[i].label = i % 10 == 9 ? Label::kNormal : Label::kAttack;
    det[i].prob_attack = det[i].confidence = 0.9;
    det[i].prob_normal = 0.1;
  }
  std::size_t alarms = 0;
  for (const auto& d : det) alarms += d.label == Label::kAttack;

  MockOptions opt;
  for (const Sample& s : eval) opt.gold[s.id] = gold_answer(*s.attack);
  for (const Sample& s : pool) opt.gold[s.id] = gold_answer(*s.attack);

  SweepConfig cfg;
  cfg.client.require_api_key = false;
  cfg.client.retry.initial_backoff_s = 0.001;
  cfg.shots = {0, 5};
  cfg.record_latency = false;

  SUBCASE("echo") {
    MockBackend backend(opt);
    backend.start();
    cfg.client.base_url = backend.base_url();
    const auto entries = run_shot_sweep(eval, det, pool, cfg);
    REQUIRE(entries.size() == 2);
    for (const SweepEntry& e : entries) {
      CHECK(e.metrics.target_accuracy == 100.0);
      CHECK(e.metrics.mae_magnitude == 0.0);
      CHECK(e.metrics.mae_onset == 0.0);
      CHECK(e.metrics.mean_latency_s == 0.0);
      CHECK(e.metrics.n_evaluated == static_cast<std::int64_t>(alarms));
      CHECK(e.metrics.n_parse_failures == 0);
    }
    CHECK(entries[1].metrics.shots == 5);
    CHECK(backend.requests() == static_cast<std::int64_t>(2 * alarms));
  }
  SUBCASE("fault") {
    opt.mode = MockMode::kFault;
    MockBackend backend(opt);
    backend.start();
    cfg.client.base_url = backend.base_url();
    const auto a = run_shot_sweep(eval, det, pool, cfg);
    const auto b = run_shot_sweep(eval, det, pool, cfg);
    std::int64_t garbage = 0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
      garbage += det[i].label == Label::kAttack && MockBackend::is_garbage_id(eval[i].id, 0.1);
    }
    for (const SweepEntry& e : a) {
      CHECK(e.metrics.n_parse_failures == garbage);
      CHECK(e.metrics.n_evaluated + e.metrics.n_parse_failures ==
            static_cast<std::int64_t>(alarms));
      CHECK(e.metrics.target_accuracy == 100.0);
    }
    CHECK(a[0].metrics == b[0].metrics);
    CHECK(a[1].metrics == b[1].metrics);
  }
  SUBCASE("transport failures are tallied") {
    opt.always_429 = true;
    MockBackend backend(opt);
    backend.start();
    cfg.client.base_url = backend.base_url();
    cfg.client.retry.max_attempts = 2;
    cfg.shots = {0};
    const auto entries = run_shot_sweep(eval, det, pool, cfg);
    CHECK(entries[0].metrics.n_parse_failures == static_cast<std::int64_t>(alarms));
    CHECK(entries[0].metrics.n_evaluated == 0);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(run_shot_sweep(eval, std::span(det).first(3), pool, cfg), AlignmentError);
    std::vector<Sample> mixed = eval;
    mixed[0] = generate_sample(0, 1, false);
    CHECK_THROWS_AS(run_shot_sweep(mixed, det, pool, cfg), InvalidArgument);
    CHECK_THROWS_AS(run_shot_sweep(eval, det, eval, cfg), InvalidArgument);
  }
}

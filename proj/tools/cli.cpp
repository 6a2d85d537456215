#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "agc/datagen.h"
#include "agc/dataset_io.h"
#include "agc/detector.h"
#include "agc/error.h"
#include "agc/evaluator.h"
#include "agc/explanation_io.h"
#include "agc/explainer.h"
#include "agc/mock_backend.h"
#include "agc/model_io.h"
#include "agc/plot.h"

namespace agc::cli {

namespace {

namespace fs = std::filesystem;

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- options

struct SplitOptions {
  std::uint64_t split_seed = 2024;
  std::size_t llm_eval_per_class = kLlmEvalPerClass;

  void add(CLI::App* app) {
    app->add_option("--split-seed", split_seed, "Seed of the holdout and train/test split")
        ->capture_default_str();
    app->add_option("--llm-eval-per-class", llm_eval_per_class,
                    "Samples per class held out for explanation")
        ->capture_default_str();
  }
};

struct BackendOptions {
  std::string backend = "mock-echo";
  std::string base_url = "https://api.openai.com";
  std::string llm_model = "gpt-4o-mini";
  double temperature = 0.0;
  std::int64_t request_seed = 42;
  int max_in_flight = 4;
  int max_attempts = 3;
  double backoff_s = 0.5;
  double backoff_multiplier = 2.0;
  double timeout_s = 120.0;
  std::size_t token_budget = kDefaultTokenBudget;
  std::string fixed_response = "{}";
  double garbage_fraction = 0.1;

  void add(CLI::App* app) {
    app->add_option("--backend", backend, "live, mock-echo, mock-fault or mock-fixed")
        ->check(CLI::IsMember({"live", "mock-echo", "mock-fault", "mock-fixed"}))
        ->capture_default_str();
    app->add_option("--base-url", base_url, "Endpoint root of a live backend")
        ->capture_default_str();
    app->add_option("--llm-model", llm_model, "Model name sent to the backend")
        ->capture_default_str();
    app->add_option("--temperature", temperature)->capture_default_str();
    app->add_option("--request-seed", request_seed)->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-attempts", max_attempts, "Attempts per request")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--backoff", backoff_s, "Initial retry backoff (s)")->capture_default_str();
    app->add_option("--backoff-multiplier", backoff_multiplier)->capture_default_str();
    app->add_option("--timeout", timeout_s, "Per-request timeout (s)")->capture_default_str();
    app->add_option("--token-budget", token_budget, "Maximum estimated prompt tokens")
        ->capture_default_str();
    app->add_option("--fixed-response", fixed_response, "Reply of the mock-fixed backend")
        ->capture_default_str();
    app->add_option("--garbage-fraction", garbage_fraction,
                    "Share of sample ids answered with gibberish by mock-fault")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  }
};

struct ExplainOptions {
  std::vector<int> shots = {20};
  std::uint64_t shot_seed = 7;
  std::size_t limit = 100;
  bool include_series = false;
  int series_stride = 10;
  bool measure_latency = false;

  void add(CLI::App* app, bool many_shots) {
    if (many_shots) {
      shots = {0, 5, 10, 20};
      app->add_option("--shots", shots, "Shot counts to sweep")
          ->delimiter(',')
          ->capture_default_str();
    } else {
      app->add_option("--shots", shots, "Number of few-shot examples")
          ->expected(1)
          ->capture_default_str();
    }
    app->add_option("--shot-seed", shot_seed, "Seed of the few-shot selection")
        ->capture_default_str();
    app->add_option("--limit", limit, "Attacked held-out samples to explain")
        ->capture_default_str();
    app->add_flag("--include-series", include_series, "Append a decimated raw series");
    app->add_option("--series-stride", series_stride)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--measure-latency", measure_latency,
                  "Record wall-clock latencies (otherwise written as 0)");
  }
};

// ---------------------------------------------------------------- helpers

struct Corpus {
  Dataset dataset;
  DatasetSplit split;
};

Corpus load_corpus(const fs::path& path, const SplitOptions& so) {
  Corpus c;
  c.dataset = read_dataset(path);
  c.split = split_dataset(c.dataset.samples, so.split_seed, so.llm_eval_per_class);
  return c;
}

struct Backend {
  LlmClientConfig config;
  std::unique_ptr<MockBackend> mock;
};

Backend start_backend(const BackendOptions& o, const std::vector<Sample>& samples) {
  Backend b;
  b.config.model_name = o.llm_model;
  b.config.temperature = o.temperature;
  b.config.request_seed = o.request_seed;
  b.config.max_in_flight = o.max_in_flight;
  b.config.retry = {o.max_attempts, o.backoff_s, o.backoff_multiplier};
  b.config.timeout_s = o.timeout_s;
  b.config.token_budget = o.token_budget;
  if (o.backend == "live") {
    b.config.base_url = o.base_url;
    b.config.require_api_key = true;
    const char* key = std::getenv(b.config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("the live backend needs the API key in " + b.config.api_key_env);
    }
    return b;
  }
  MockOptions mo;
  mo.mode = *mock_mode_from_name(o.backend.substr(5));
  mo.fixed_content = o.fixed_response;
  mo.garbage_fraction = o.garbage_fraction;
  for (const Sample& s : samples) {
    if (s.attack) mo.gold[s.id] = gold_answer(*s.attack);
  }
  b.mock = std::make_unique<MockBackend>(std::move(mo));
  b.mock->start();
  b.config.base_url = b.mock->base_url();
  b.config.require_api_key = false;
  return b;
}

Detector model_detector(const EnsembleModel& model) {
  return [&model](const Sample& s) { return predict(model, s.features); };
}

struct SweepInputs {
  std::vector<Sample> eval;
  std::vector<DetectionResult> detections;
  std::vector<Sample> pool;
};

SweepInputs sweep_inputs(const Corpus& c, const EnsembleModel& model, std::size_t limit) {
  SweepInputs in;
  for (std::size_t i : c.split.llm_eval) {
    const Sample& s = c.dataset.samples[i];
    if (s.attack && in.eval.size() < limit) in.eval.push_back(s);
  }
  for (const Sample& s : in.eval) in.detections.push_back(predict(model, s.features));
  for (std::size_t i : c.split.train) {
    if (c.dataset.samples[i].attack) in.pool.push_back(c.dataset.samples[i]);
  }
  return in;
}

ClassifierMetrics classifier_row(const EnsembleModel& model, const Corpus& c,
                                 bool measure_latency) {
  const TrainingData test = to_training_data(c.dataset.samples, c.split.test);
  ClassifierMetrics m = evaluate_classifier(model, test);
  if (!measure_latency) m.mean_latency_s = 0.0;
  return m;
}

void print_classifier(std::ostream& out, const ClassifierMetrics& m) {
  out << m.model << ": accuracy " << fmt("%.4f", m.accuracy) << ", recall "
      << fmt("%.4f", m.recall) << ", precision " << fmt("%.4f", m.precision) << ", F1 "
      << fmt("%.4f", m.f1) << "\n";
}

void print_explanations(std::ostream& out, const ExplanationMetrics& m) {
  out << m.model << " " << m.shots << "-shot: target accuracy "
      << fmt("%.2f", m.target_accuracy) << " %, MAE magnitude " << fmt("%.5f", m.mae_magnitude)
      << " pu, MAE onset " << fmt("%.2f", m.mae_onset) << " s, evaluated " << m.n_evaluated
      << ", parse failures " << m.n_parse_failures << "\n";
}

Json detection_json(const Sample& s, const DetectionResult& d) {
  return {{"sample_id", s.id},
          {"label", label_name(d.label)},
          {"confidence", d.confidence},
          {"prob_normal", d.prob_normal},
          {"prob_attack", d.prob_attack},
          {"true_label", label_name(s.label)}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-area AGC false data injection toolkit: simulation, dataset "
               "generation, detection and LLM explanation."};
  app.name("agc");
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  int workers = default_workers();
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::function<void()> action;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one scenario and write a trace and an SVG");
  ScenarioConfig sc;
  bool linear = false;
  std::optional<double> ki;
  std::string sim_out = "simulate";
  std::string attack_target;
  AttackSpec sim_attack;
  sim->add_option("--area", sc.disturbance.area, "Disturbed area")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  sim->add_option("--load", sc.disturbance.magnitude, "Load step (pu)")->capture_default_str();
  sim->add_option("--load-time", sc.disturbance.start_time, "Load step time (s)")
      ->capture_default_str();
  sim->add_flag("--linear", linear, "Disable deadband and rate limit");
  sim->add_option("--ki", ki, "AGC integral gain of both areas");
  sim->add_option("--window", sc.window, "Horizon (s)")->capture_default_str();
  sim->add_option("--noise-seed", sc.seed)->capture_default_str();
  sim->add_option("--process-noise", sc.process_noise_std, "Process noise std (pu)")
      ->capture_default_str();
  sim->add_option("--measurement-noise", sc.measurement_noise_std,
                  "Measurement noise std (pu)")
      ->capture_default_str();
  sim->add_option("--attack-target", attack_target, "delta_f1, delta_f2 or delta_p_tie");
  sim->add_option("--attack-start", sim_attack.t_start, "Attack onset (s)")->capture_default_str();
  sim->add_option("--attack-fi", sim_attack.f_i, "Injection at onset (pu)")->capture_default_str();
  sim->add_option("--attack-ff", sim_attack.f_f, "Injection at window end (pu)")
      ->capture_default_str();
  sim->add_option("--out-dir", sim_out, "Output directory")->capture_default_str();
  sim->callback([&] {
    action = [&] {
      sc.system.nonlinear_mode = !linear;
      if (ki) sc.system.area1.agc_gain_ki = sc.system.area2.agc_gain_ki = *ki;
      std::optional<AttackSpec> attack;
      if (!attack_target.empty()) {
        const auto target = signal_from_name(attack_target);
        if (!target) throw InvalidArgument("unknown --attack-target " + attack_target);
        sim_attack.target = *target;
        sim_attack.refresh_magnitude();
        attack = sim_attack;
      }
      const Sample s = build_sample(0, sc, attack);
      Dataset ds;
      ds.samples = {s};
      const fs::path dir(sim_out);
      fs::create_directories(dir);
      write_dataset(dir / "trace.jsonl", ds);
      const LinePlot plot = trace_plot(s.trace, attack ? "Attacked run" : "Simulated run");
      write_text(dir / "trace.csv", render_plot_csv(plot));
      write_text(dir / "trace.svg", render_svg(plot));
      if (attack) {
        const LinePlot overlay =
            attack_overlay(s, simulate(sc, identity_hook()), attack->target);
        write_text(dir / "overlay.svg", render_svg(overlay));
      }
      const std::size_t last = s.trace.size() - 1;
      out << "terminal delta_f1 " << fmt("%.6e", s.trace.delta_f1[last]) << " pu, delta_f2 "
          << fmt("%.6e", s.trace.delta_f2[last]) << " pu, delta_p_tie "
          << fmt("%.6e", s.trace.delta_p_tie[last]) << " pu\n"
          << "wrote " << (dir / "trace.jsonl").string() << ", trace.csv, trace.svg\n";
    };
  });

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a balanced labelled dataset");
  std::int64_t gen_n = 10000;
  std::uint64_t master_seed = 42;
  std::string gen_out = "dataset.jsonl";
  GeneratorOptions gen_opt;
  gen->add_option("--n", gen_n, "Number of samples (even)")->capture_default_str();
  gen->add_option("--seed", master_seed, "Master seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Dataset file")->capture_default_str();
  gen->add_option("--disturbance-std", gen_opt.disturbance_std, "Load step std (pu)")
      ->capture_default_str();
  gen->add_option("--nonlinear-fraction", gen_opt.nonlinear_fraction)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->callback([&] {
    action = [&] {
      generate_dataset(gen_out, gen_n, master_seed, workers, gen_opt);
      out << "wrote " << gen_n << " samples to " << gen_out << "\n";
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Fit a detector and report its test metrics");
  std::string dataset_path = "dataset.jsonl";
  std::string model_path = "model.json";
  std::string kind_name = "gradient_boosted";
  std::string metrics_out;
  std::uint64_t train_seed = 1;
  std::uint64_t tune_seed = 3;
  int tune_trials = 0;
  SplitOptions split_opt;
  GbdtParams gbdt;
  ForestParams forest;
  train->add_option("--dataset", dataset_path)->capture_default_str();
  train->add_option("--model-out", model_path)->capture_default_str();
  train->add_option("--kind", kind_name, "gradient_boosted or random_forest")
      ->check(CLI::IsMember({"gradient_boosted", "random_forest"}))
      ->capture_default_str();
  train->add_option("--metrics-out", metrics_out, "Optional JSON file with test metrics");
  train->add_option("--train-seed", train_seed)->capture_default_str();
  train->add_option("--tune-seed", tune_seed)->capture_default_str();
  train->add_option("--tune-trials", tune_trials,
                    "Random-search trials for the boosted model (0 = none)")
      ->capture_default_str();
  split_opt.add(train);
  train->add_option("--n-trees", gbdt.n_trees, "Boosting rounds")->capture_default_str();
  train->add_option("--max-depth", gbdt.max_depth)->capture_default_str();
  train->add_option("--learning-rate", gbdt.learning_rate)->capture_default_str();
  train->add_option("--subsample", gbdt.subsample)->capture_default_str();
  train->add_option("--min-samples-leaf", gbdt.min_samples_leaf)->capture_default_str();
  train->add_option("--rf-trees", forest.n_trees)->capture_default_str();
  train->add_option("--rf-max-depth", forest.max_depth, "0 = unlimited")->capture_default_str();
  train->add_option("--rf-max-features", forest.max_features, "0 = floor(sqrt(d))")
      ->capture_default_str();
  train->add_option("--rf-min-samples-leaf", forest.min_samples_leaf)->capture_default_str();
  train->callback([&] {
    action = [&] {
      const Corpus c = load_corpus(dataset_path, split_opt);
      const TrainingData tr = to_training_data(c.dataset.samples, c.split.train);
      EnsembleModel model;
      Json tuning = nullptr;
      if (kind_name == "gradient_boosted") {
        if (tune_trials > 0) {
          const auto [fit, valid] = holdout_split(tr, 0.2, tune_seed);
          const TuningResult t = tune_random_search(fit, valid, tune_trials, tune_seed, workers);
          gbdt = t.best;
          tuning = {{"trials", tune_trials},
                    {"best_trial", t.best_trial},
                    {"best_validation_f1", t.best_f1}};
          out << "tuning: best of " << tune_trials << " trials has validation F1 "
              << fmt("%.4f", t.best_f1) << "\n";
        }
        model = train_gbdt(tr, gbdt, train_seed);
      } else {
        model = train_rf(tr, forest, train_seed, workers);
      }
      save_model(model_path, model);
      const TrainingData test = to_training_data(c.dataset.samples, c.split.test);
      const ClassifierMetrics m = evaluate_classifier(model, test);
      const double median = median_latency(model, test.row(0));
      print_classifier(out, m);
      out << "median single-sample latency " << fmt("%.3e", median) << " s\n"
          << "trained on " << tr.size() << ", tested on " << test.size() << "; model saved to "
          << model_path << "\n";
      if (!metrics_out.empty()) {
        const Json j = {{"model", m.model},
                        {"accuracy", m.accuracy},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"mean_latency_s", m.mean_latency_s},
                        {"median_latency_s", median},
                        {"n_train", tr.size()},
                        {"n_test", test.size()},
                        {"tuning", tuning}};
        write_text(metrics_out, j.dump(2) + "\n");
      }
    };
  });

  // detect
  auto* detect = app.add_subcommand("detect", "Score a dataset or a single sample");
  std::optional<std::int64_t> detect_sample;
  std::string detect_split = "test";
  std::string detect_out;
  detect->add_option("--dataset", dataset_path)->capture_default_str();
  detect->add_option("--model", model_path)->capture_default_str();
  detect->add_option("--sample", detect_sample, "Score only this sample id");
  detect->add_option("--split", detect_split, "all, train, test or llm_eval")
      ->check(CLI::IsMember({"all", "train", "test", "llm_eval"}))
      ->capture_default_str();
  detect->add_option("--out", detect_out, "Optional JSONL file of detections");
  split_opt.add(detect);
  detect->callback([&] {
    action = [&] {
      const EnsembleModel model = load_model(model_path);
      const Corpus c = load_corpus(dataset_path, split_opt);
      std::vector<std::size_t> idx;
      if (detect_sample) {
        for (std::size_t i = 0; i < c.dataset.samples.size(); ++i) {
          if (c.dataset.samples[i].id == *detect_sample) idx.push_back(i);
        }
        if (idx.empty()) {
          throw InvalidArgument("sample " + std::to_string(*detect_sample) + " not in dataset");
        }
      } else if (detect_split == "all") {
        for (std::size_t i = 0; i < c.dataset.samples.size(); ++i) idx.push_back(i);
      } else {
        idx = detect_split == "train" ? c.split.train
              : detect_split == "test" ? c.split.test
                                       : c.split.llm_eval;
      }
      std::ostringstream lines;
      Confusion conf;
      for (std::size_t i : idx) {
        const Sample& s = c.dataset.samples[i];
        const DetectionResult d = predict(model, s.features);
        lines << detection_json(s, d).dump() << "\n";
        const bool p = d.label == Label::kAttack, a = s.label == Label::kAttack;
        conf.tp += p && a;
        conf.fp += p && !a;
        conf.fn += !p && a;
        conf.tn += !p && !a;
        if (detect_sample) {
          out << "sample " << s.id << ": " << label_name(d.label) << " (p_attack "
              << fmt("%.4f", d.prob_attack) << ", true " << label_name(s.label) << ")\n";
        }
      }
      if (!detect_sample) {
        ClassifierMetrics m = metrics_from_confusion(conf);
        m.model = std::string(model_kind_name(model.kind));
        out << idx.size() << " samples; ";
        print_classifier(out, m);
      }
      if (!detect_out.empty()) write_text(detect_out, lines.str());
    };
  });

  // explain
  auto* explain_cmd = app.add_subcommand("explain", "Explain the alarms on held-out attacks");
  BackendOptions backend_opt;
  ExplainOptions explain_opt;
  std::string explain_out = "explanations.jsonl";
  explain_cmd->add_option("--dataset", dataset_path)->capture_default_str();
  explain_cmd->add_option("--model", model_path)->capture_default_str();
  explain_cmd->add_option("--out", explain_out)->capture_default_str();
  split_opt.add(explain_cmd);
  backend_opt.add(explain_cmd);
  explain_opt.add(explain_cmd, false);
  explain_cmd->callback([&] {
    action = [&] {
      const EnsembleModel model = load_model(model_path);
      const Corpus c = load_corpus(dataset_path, split_opt);
      const SweepInputs in = sweep_inputs(c, model, explain_opt.limit);
      Backend b = start_backend(backend_opt, c.dataset.samples);
      SweepConfig cfg;
      cfg.client = b.config;
      cfg.model_label = backend_opt.llm_model;
      cfg.shots = explain_opt.shots;
      cfg.shot_seed = explain_opt.shot_seed;
      cfg.query = {explain_opt.include_series, explain_opt.series_stride};
      cfg.record_latency = explain_opt.measure_latency;
      const auto entries =
          run_shot_sweep(in.eval, in.detections, in.pool, cfg, model_detector(model));
      const SweepEntry& e = entries.front();
      write_explanations(explain_out, {cfg.model_label, e.metrics.shots, e.outcomes});
      out << e.outcomes.size() << " of " << in.eval.size()
          << " held-out attacks raised alarms and were explained\n";
      print_explanations(out, e.metrics);
      out << "wrote " << explain_out << "\n";
    };
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Write the detection and explanation report");
  std::vector<std::string> eval_models;
  std::vector<std::string> eval_explanations;
  std::string report_dir = "report";
  bool eval_latency = false;
  evaluate->add_option("--dataset", dataset_path)->capture_default_str();
  evaluate->add_option("--model", eval_models, "Model files (repeatable)");
  evaluate->add_option("--explanations", eval_explanations, "Explanation files (repeatable)");
  evaluate->add_option("--out-dir", report_dir)->capture_default_str();
  evaluate->add_flag("--measure-latency", eval_latency,
                     "Measure detector latency (otherwise written as 0)");
  split_opt.add(evaluate);
  evaluate->callback([&] {
    action = [&] {
      const Corpus c = load_corpus(dataset_path, split_opt);
      Report r;
      for (const std::string& p : eval_models) {
        r.classifiers.push_back(classifier_row(load_model(p), c, eval_latency));
        print_classifier(out, r.classifiers.back());
      }
      std::map<std::int64_t, const Sample*> by_id;
      for (const Sample& s : c.dataset.samples) by_id[s.id] = &s;
      for (const std::string& p : eval_explanations) {
        const ExplanationFile f = read_explanations(p);
        std::vector<GroundTruth> truths;
        for (const auto& o : f.outcomes) {
          const auto it = by_id.find(o.sample_id);
          if (it == by_id.end() || !it->second->attack) {
            throw AlignmentError(p + ": sample " + std::to_string(o.sample_id) +
                                 " is not an attacked sample of the dataset");
          }
          truths.push_back({o.sample_id, gold_answer(*it->second->attack)});
        }
        ExplanationMetrics m = score(f.outcomes, truths);
        m.model = f.model;
        m.shots = f.shots;
        r.explanations.push_back(m);
        print_explanations(out, m);
      }
      r.metadata = {{"dataset", dataset_path},
                    {"master_seed", std::to_string(c.dataset.header.master_seed)},
                    {"split_seed", std::to_string(split_opt.split_seed)}};
      write_report(report_dir, r);
      out << "wrote " << (fs::path(report_dir) / "report.md").string() << " and report.csv\n";
    };
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Explain held-out attacks for several shot counts");
  ExplainOptions sweep_opt;
  sweep->add_option("--dataset", dataset_path)->capture_default_str();
  sweep->add_option("--model", model_path)->capture_default_str();
  sweep->add_option("--out-dir", report_dir)->capture_default_str();
  split_opt.add(sweep);
  backend_opt.add(sweep);
  sweep_opt.add(sweep, true);
  sweep->callback([&] {
    action = [&] {
      const EnsembleModel model = load_model(model_path);
      const Corpus c = load_corpus(dataset_path, split_opt);
      const SweepInputs in = sweep_inputs(c, model, sweep_opt.limit);
      Backend b = start_backend(backend_opt, c.dataset.samples);
      SweepConfig cfg;
      cfg.client = b.config;
      cfg.model_label = backend_opt.llm_model;
      cfg.shots = sweep_opt.shots;
      cfg.shot_seed = sweep_opt.shot_seed;
      cfg.query = {sweep_opt.include_series, sweep_opt.series_stride};
      cfg.record_latency = sweep_opt.measure_latency;
      const auto entries =
          run_shot_sweep(in.eval, in.detections, in.pool, cfg, model_detector(model));
      Report r;
      r.classifiers.push_back(classifier_row(model, c, sweep_opt.measure_latency));
      fs::create_directories(report_dir);
      for (const SweepEntry& e : entries) {
        r.explanations.push_back(e.metrics);
        print_explanations(out, e.metrics);
        write_explanations(fs::path(report_dir) /
                               ("explanations_k" + std::to_string(e.metrics.shots) + ".jsonl"),
                           {cfg.model_label, e.metrics.shots, e.outcomes});
      }
      r.metadata = {{"dataset", dataset_path},
                    {"master_seed", std::to_string(c.dataset.header.master_seed)},
                    {"split_seed", std::to_string(split_opt.split_seed)},
                    {"shot_seed", std::to_string(sweep_opt.shot_seed)},
                    {"backend", backend_opt.backend},
                    {"eval_samples", std::to_string(in.eval.size())}};
      write_report(report_dir, r);
      out << "wrote " << (fs::path(report_dir) / "report.md").string() << " and report.csv\n";
    };
  });

  // plot
  auto* plot = app.add_subcommand("plot", "Overlay an attacked signal on its attack-free twin");
  std::string plot_dataset = "data/golden/fig3.jsonl";
  std::int64_t plot_sample = 3;
  std::string plot_signal;
  std::string plot_out;
  std::string plot_csv;
  plot->add_option("--dataset", plot_dataset)->capture_default_str();
  plot->add_option("--sample", plot_sample, "Attacked sample id")->capture_default_str();
  plot->add_option("--signal", plot_signal, "Signal to draw (default: the attack target)");
  plot->add_option("--out", plot_out, "SVG file (default: sample_<id>.svg)");
  plot->add_option("--csv", plot_csv, "Also write the plotted series as CSV");
  plot->callback([&] {
    action = [&] {
      const Dataset ds = read_dataset(plot_dataset);
      const auto it = std::find_if(ds.samples.begin(), ds.samples.end(),
                                   [&](const Sample& s) { return s.id == plot_sample; });
      if (it == ds.samples.end()) {
        throw InvalidArgument("sample " + std::to_string(plot_sample) + " not in " +
                              plot_dataset);
      }
      if (!it->attack) {
        throw InvalidArgument("sample " + std::to_string(plot_sample) + " is not attacked");
      }
      Signal signal = it->attack->target;
      if (!plot_signal.empty()) {
        const auto s = signal_from_name(plot_signal);
        if (!s) throw InvalidArgument("unknown --signal " + plot_signal);
        signal = *s;
      }
      const LinePlot p = attack_overlay(*it, simulate(it->scenario, identity_hook()), signal);
      const std::string svg_path =
          plot_out.empty() ? "sample_" + std::to_string(plot_sample) + ".svg" : plot_out;
      write_text(svg_path, render_svg(p));
      if (!plot_csv.empty()) write_text(plot_csv, render_plot_csv(p));
      out << "wrote " << svg_path << " (attack start " << fmt("%g", it->attack->t_start)
          << " s)\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace agc::cli

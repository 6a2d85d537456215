// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agc/attack.h"
#include "agc/datagen.h"
#include "agc/dataset_io.h"
#include "agc/detector.h"
#include "agc/evaluator.h"
#include "agc/explainer.h"
#include "agc/features.h"
#include "agc/mock_backend.h"
#include "agc/model_io.h"
#include "agc/plant.h"

using namespace agc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kMasterSeed = 20240607;
constexpr std::uint64_t kSplitSeed = 2024;
constexpr std::int64_t kCorpusSize = 10000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string f(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig quiet(double load, bool linear, std::optional<double> ki, double window) {
  ScenarioConfig sc;
  sc.system.nonlinear_mode = !linear;
  if (ki) sc.system.area1.agc_gain_ki = sc.system.area2.agc_gain_ki = *ki;
  sc.disturbance = {1, load, 0.0};
  sc.process_noise_std = 0.0;
  sc.measurement_noise_std = 0.0;
  sc.window = window;
  return sc;
}

// Shared state built once: the regenerated corpus, its split and the
// boosted detector trained on it.
struct World {
  fs::path dir;
  Dataset corpus;
  DatasetSplit split;
  std::optional<EnsembleModel> model;
  std::vector<Sample> attacked_eval;  // first 100 attacked llm_eval samples
  std::vector<Sample> shot_pool;      // attacked training samples
};

World& world() {
  static World w;
  return w;
}

// ---------------------------------------------------------------------------

Verdict equilibrium() {
  const auto t0 = Clock::now();
  bool zero = true;
  for (bool linear : {true, false}) {
    const SignalTrace tr = simulate(quiet(0.0, linear, std::nullopt, 60.0), identity_hook());
    for (Signal s : kAllSignals) {
      for (double v : tr.series(s)) zero = zero && v == 0.0;
    }
    zero = zero && tr.size() == 200;
  }
  const double dt = seconds_since(t0);
  return {zero && dt < 1.0, std::string(zero ? "all recorded values are exactly 0" : "nonzero value") +
                                ", " + f("%.3f", dt) + " s"};
}

Verdict droop() {
  const auto t0 = Clock::now();
  const ScenarioConfig sc = quiet(0.02, true, 0.0, 120.0);
  const SignalTrace tr = simulate(sc, identity_hook());
  const double dt = seconds_since(t0);
  // Static balance without integral action.
  const AreaParams& a1 = sc.system.area1;
  const AreaParams& a2 = sc.system.area2;
  const double beta1 = a1.damping_d + 1.0 / a1.droop_r;
  const double beta2 = a2.damping_d + 1.0 / a2.droop_r;
  const double df = -0.02 / (beta1 + beta2);
  const double tie = -0.02 * beta2 / (beta1 + beta2);
  const double f1 = tr.delta_f1.back(), f2 = tr.delta_f2.back(), pt = tr.delta_p_tie.back();
  const auto within = [](double got, double want) {
    return std::abs(got - want) <= 0.02 * std::abs(want);
  };
  const bool ok = within(f1, -5.420e-4) && within(f2, -5.420e-4) && within(pt, -8.835e-3) &&
                  within(df, -5.420e-4) && within(tie, -8.835e-3) && dt < 1.0;
  return {ok, "df1 " + f("%.4e", f1) + ", df2 " + f("%.4e", f2) + ", dPtie " + f("%.4e", pt) +
                  " (analytic " + f("%.4e", df) + ", " + f("%.4e", tie) + "), " +
                  f("%.3f", dt) + " s"};
}

Verdict secondary() {
  const auto t0 = Clock::now();
  const SignalTrace tr = simulate(quiet(0.02, true, std::nullopt, 120.0), identity_hook());
  const double dt = seconds_since(t0);
  const double worst = std::max(
      {std::abs(tr.delta_f1.back()), std::abs(tr.delta_f2.back()), std::abs(tr.delta_p_tie.back())});
  return {worst < 1e-4 && dt < 1.0,
          "max terminal |deviation| " + f("%.3e", worst) + " pu, " + f("%.3f", dt) + " s"};
}

Verdict dataset_contract() {
  World& w = world();
  const auto t_smoke = Clock::now();
  generate_dataset(w.dir / "smoke.jsonl", 1000, kMasterSeed, 4);
  const double smoke = seconds_since(t_smoke);

  const fs::path a = w.dir / "corpus_a.jsonl";
  const fs::path b = w.dir / "corpus_b.jsonl";
  const fs::path c = w.dir / "corpus_c.jsonl";
  const auto t0 = Clock::now();
  generate_dataset(a, kCorpusSize, kMasterSeed, 1);
  const double full = seconds_since(t0);
  generate_dataset(b, kCorpusSize, kMasterSeed, 1);
  generate_dataset(c, kCorpusSize, kMasterSeed, 4);
  const std::string bytes = slurp(a);
  const bool repeat_same = bytes == slurp(b);
  const bool workers_same = bytes == slurp(c);
  fs::remove(b);
  fs::remove(c);

  w.corpus = read_dataset(a);
  std::int64_t attacks = 0, normals = 0;
  bool points = true;
  for (const Sample& s : w.corpus.samples) {
    (s.label == Label::kAttack ? attacks : normals) += 1;
    for (Signal sig : kAllSignals) points = points && s.trace.series(sig).size() == 200;
    points = points && s.attack.has_value() == (s.label == Label::kAttack);
  }
  const bool ok = w.corpus.samples.size() == kCorpusSize && attacks == 5000 && normals == 5000 &&
                  points && repeat_same && workers_same && full < 600 && smoke < 60;
  return {ok, std::to_string(attacks) + "/" + std::to_string(normals) + " attack/normal, " +
                  (points ? "200 points each" : "bad point count") + ", repeat " +
                  (repeat_same ? "identical" : "DIFFERS") + ", 1 vs 4 workers " +
                  (workers_same ? "identical" : "DIFFERS") + ", " + f("%.1f", full) +
                  " s for 10000, " + f("%.1f", smoke) + " s for 1000"};
}

Verdict ace_limit() {
  const AceLimitPolicy policy;
  std::size_t n = 0, violations = 0, subtle = 0;
  double worst_ratio = 0.0;
  for (const Sample& s : world().corpus.samples) {
    if (!s.attack) continue;
    ++n;
    subtle += s.attack->subtlety == Subtlety::kSubtle;
    const double limit =
        s.attack->subtlety == Subtlety::kSubtle ? policy.subtle_limit : policy.noticeable_limit;
    double peak = 0.0;
    for (std::size_t k = 0; k < s.trace.size(); ++k) {
      if (s.trace.t[k] < s.attack->t_start) continue;
      peak = std::max({peak, std::abs(s.trace.ace1[k]), std::abs(s.trace.ace2[k])});
    }
    worst_ratio = std::max(worst_ratio, peak / limit);
    violations += peak > limit * (1.0 + 1e-3);
  }
  return {n >= 100 && violations == 0,
          std::to_string(n) + " attacked samples (" + std::to_string(subtle) +
              " subtle), worst max|ACE|/limit " + f("%.6f", worst_ratio) + ", " +
              std::to_string(violations) + " violations"};
}

Verdict pre_onset_identity() {
  std::size_t n = 0, mismatched = 0, points = 0;
  for (const Sample& s : world().corpus.samples) {
    if (!s.attack || n >= 200) continue;
    ++n;
    const SignalTrace twin = simulate(s.scenario, identity_hook());
    bool same = twin.t == s.trace.t;
    for (std::size_t k = 0; same && k < s.trace.size() && s.trace.t[k] < s.attack->t_start; ++k) {
      ++points;
      for (Signal sig : kAllSignals) same = same && twin.series(sig)[k] == s.trace.series(sig)[k];
      same = same && twin.ace1[k] == s.trace.ace1[k] && twin.ace2[k] == s.trace.ace2[k];
    }
    mismatched += !same;
  }
  return {n >= 100 && mismatched == 0,
          std::to_string(n) + " attacked samples, " + std::to_string(points) +
              " pre-onset points compared, " + std::to_string(mismatched) + " mismatches"};
}

Verdict grc_invariant() {
  RngStream rng(0x475243);
  GeneratorOptions options;
  std::size_t runs = 0;
  double worst = 0.0;
  double limit = 0.0;
  for (int i = 0; i < 200; ++i) {
    ScenarioConfig sc = sample_scenario(rng, options);
    sc.system.nonlinear_mode = true;
    // Large steps on odd runs.
    if (i % 2 == 1) sc.disturbance.magnitude = std::copysign(0.1 + 0.4 * rng.uniform(), sc.disturbance.magnitude);
    limit = sc.system.grc_limit;
    PlantState prev;
    double prev_t = 0.0;
    simulate(sc, identity_hook(), [&](std::int64_t, double t, const PlantState& s) {
      const double h = t - prev_t;
      worst = std::max({worst, std::abs(s.pm1 - prev.pm1) / h, std::abs(s.pm2 - prev.pm2) / h});
      prev = s;
      prev_t = t;
    });
    ++runs;
  }
  return {runs >= 100 && worst <= limit + 1e-9,
          std::to_string(runs) + " nonlinear runs, worst |dPm/dt| " + f("%.9f", worst) +
              " pu/s (limit " + f("%g", limit) + ")"};
}

Verdict detector_quality() {
  World& w = world();
  w.split = split_dataset(w.corpus.samples, kSplitSeed);
  const TrainingData train = to_training_data(w.corpus.samples, w.split.train);
  const TrainingData test = to_training_data(w.corpus.samples, w.split.test);
  const auto t0 = Clock::now();
  w.model = train_gbdt(train, GbdtParams{}, 1);
  const double train_s = seconds_since(t0);
  const ClassifierMetrics m = evaluate_classifier(*w.model, test);
  std::vector<double> lat;
  for (std::size_t i = 0; i < 50; ++i) lat.push_back(median_latency(*w.model, test.row(i), 20));
  std::sort(lat.begin(), lat.end());
  const double median = lat[lat.size() / 2];

  for (std::size_t i : w.split.llm_eval) {
    const Sample& s = w.corpus.samples[i];
    if (s.attack && w.attacked_eval.size() < 100) w.attacked_eval.push_back(s);
  }
  for (std::size_t i : w.split.train) {
    if (w.corpus.samples[i].attack) w.shot_pool.push_back(w.corpus.samples[i]);
  }

  const bool ok = m.accuracy >= 0.90 && m.f1 >= 0.89 && median < 0.010 && train_s < 300;
  return {ok, "train " + std::to_string(train.size()) + ", test " + std::to_string(test.size()) +
                  ": accuracy " + f("%.4f", m.accuracy) + ", F1 " + f("%.4f", m.f1) +
                  ", precision " + f("%.4f", m.precision) + ", recall " + f("%.4f", m.recall) +
                  ", median latency " + f("%.2e", median) + " s, training " +
                  f("%.1f", train_s) + " s"};
}

// Exhaustive search over every feature and every midpoint, scored as the
// reduction of the residual sum of squared deviations.
struct Split {
  int feature = -1;
  double threshold = 0.0;
};

Split exhaustive_split(const TrainingData& data, const std::vector<std::size_t>& rows,
                       const std::vector<double>& r, std::size_t min_leaf) {
  auto sse = [&](const std::vector<std::size_t>& ids) {
    if (ids.empty()) return 0.0L;
    long double mean = 0;
    for (std::size_t i : ids) mean += r[i];
    mean /= static_cast<long double>(ids.size());
    long double s = 0;
    for (std::size_t i : ids) s += (r[i] - mean) * (r[i] - mean);
    return s;
  };
  const long double parent = sse(rows);
  Split best;
  long double best_gain = 1e-14L;
  for (std::size_t feat = 0; feat < data.n_features; ++feat) {
    std::vector<double> v;
    for (std::size_t i : rows) v.push_back(data.row(i)[feat]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      double thr = (v[k] + v[k + 1]) / 2.0;
      if (!(thr < v[k + 1])) thr = v[k];
      std::vector<std::size_t> left, right;
      for (std::size_t i : rows) (data.row(i)[feat] <= thr ? left : right).push_back(i);
      if (left.size() < min_leaf || right.size() < min_leaf) continue;
      const long double gain = parent - sse(left) - sse(right);
      if (gain > best_gain) {
        best_gain = gain;
        best = {static_cast<int>(feat), thr};
      }
    }
  }
  return best;
}

Verdict detector_determinism() {
  const World& w = world();
  const TrainingData train = to_training_data(w.corpus.samples, w.split.train);
  GbdtParams small;
  small.n_trees = 60;
  const bool gbdt_same =
      serialize_model(train_gbdt(train, small, 99)) == serialize_model(train_gbdt(train, small, 99));
  ForestParams fp;
  fp.n_trees = 40;
  const bool rf_same = serialize_model(train_rf(train, fp, 5, 1)) ==
                       serialize_model(train_rf(train, fp, 5, 4));

  std::mt19937_64 gen(50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrainingData toy;
  toy.n_features = 3;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> row = {u(gen), u(gen), u(gen)};
    const double z = 2.5 * (row[0] - 0.5) - 1.5 * (row[2] - 0.4);
    toy.add(row, u(gen) < 1.0 / (1.0 + std::exp(-4.0 * z)) ? 1 : 0);
  }
  GbdtParams p;
  p.n_trees = 1;
  p.max_depth = 2;
  p.subsample = 1.0;
  p.min_samples_leaf = 1;
  const EnsembleModel m = train_gbdt(toy, p, 3);
  double prior = 0;
  for (int y : toy.y) prior += y;
  prior /= static_cast<double>(toy.size());
  std::vector<double> resid;
  for (int y : toy.y) resid.push_back(y - prior);

  std::size_t checked = 0, matched = 0;
  const Tree& t = m.trees.at(0);
  std::function<void(int, const std::vector<std::size_t>&, int)> walk =
      [&](int node, const std::vector<std::size_t>& rows, int depth_left) {
        const TreeNode& n = t.nodes[static_cast<std::size_t>(node)];
        const Split want = depth_left > 0 ? exhaustive_split(toy, rows, resid, 1) : Split{};
        ++checked;
        const bool same =
            n.feature == want.feature && (want.feature < 0 || n.threshold == want.threshold);
        matched += same;
        if (n.is_leaf() || !same) return;
        std::vector<std::size_t> l, r;
        for (std::size_t i : rows) {
          (toy.row(i)[static_cast<std::size_t>(n.feature)] <= n.threshold ? l : r).push_back(i);
        }
        walk(n.left, l, depth_left - 1);
        walk(n.right, r, depth_left - 1);
      };
  std::vector<std::size_t> all(toy.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  walk(0, all, 2);

  const bool ok = gbdt_same && rf_same && checked == 7 && matched == checked;
  return {ok, std::string("boosted repeat ") + (gbdt_same ? "identical" : "DIFFERS") +
                  ", forest 1 vs 4 workers " + (rf_same ? "identical" : "DIFFERS") +
                  ", depth-2 oracle " + std::to_string(matched) + "/" +
                  std::to_string(checked) + " nodes match"};
}

std::vector<DetectionResult> detections_for(const std::vector<Sample>& samples) {
  std::vector<DetectionResult> out;
  for (const Sample& s : samples) out.push_back(predict(*world().model, s.features));
  return out;
}

MockOptions mock_for(MockMode mode) {
  MockOptions o;
  o.mode = mode;
  for (const Sample& s : world().corpus.samples) {
    if (s.attack) o.gold[s.id] = gold_answer(*s.attack);
  }
  return o;
}

SweepConfig sweep_config(const MockBackend& backend) {
  SweepConfig cfg;
  cfg.client.base_url = backend.base_url();
  cfg.client.require_api_key = false;
  cfg.shots = {0, 5, 10, 20};
  cfg.shot_seed = 7;
  cfg.record_latency = false;
  return cfg;
}

Verdict explanation_round_trip() {
  const World& w = world();
  MockBackend backend(mock_for(MockMode::kEcho));
  backend.start();
  const auto det = detections_for(w.attacked_eval);
  const Detector detect = [&](const Sample& s) { return predict(*w.model, s.features); };
  const auto entries = run_shot_sweep(w.attacked_eval, det, w.shot_pool, sweep_config(backend), detect);
  bool ok = w.attacked_eval.size() == 100 && entries.size() == 4;
  std::string detail = std::to_string(w.attacked_eval.size()) + " eval attacks;";
  for (const SweepEntry& e : entries) {
    const ExplanationMetrics& m = e.metrics;
    ok = ok && m.target_accuracy == 100.0 && m.mae_magnitude == 0.0 && m.mae_onset == 0.0 &&
         m.n_parse_failures == 0 && m.n_evaluated > 0;
    detail += " k=" + std::to_string(m.shots) + ": " + f("%.2f", m.target_accuracy) + "% / " +
              f("%.5f", m.mae_magnitude) + " / " + f("%.2f", m.mae_onset) + " over " +
              std::to_string(m.n_evaluated) + ", " + std::to_string(m.n_parse_failures) +
              " failures;";
  }
  return {ok, detail};
}

Verdict robust_parsing() {
  const World& w = world();
  MockOptions opt = mock_for(MockMode::kFault);
  MockBackend backend(opt);
  backend.start();
  const auto det = detections_for(w.attacked_eval);
  SweepConfig cfg = sweep_config(backend);
  cfg.shots = {5};
  const auto entries = run_shot_sweep(w.attacked_eval, det, w.shot_pool, cfg);
  const SweepEntry& e = entries.at(0);

  std::size_t wrapped = 0, wrapped_ok = 0, garbage = 0, garbage_ok = 0;
  for (const ExplanationOutcome& o : e.outcomes) {
    if (MockBackend::is_garbage_id(o.sample_id, opt.garbage_fraction)) {
      ++garbage;
      garbage_ok += !o.report && backend.requests_for(o.sample_id) == 2 &&
                    o.raw.find("{unterminated") != std::string::npos;
    } else {
      ++wrapped;
      wrapped_ok += o.report.has_value() && backend.requests_for(o.sample_id) == 1 &&
                    !o.report->repaired;
    }
  }
  const bool ok = wrapped > 0 && garbage > 0 && wrapped_ok == wrapped && garbage_ok == garbage &&
                  e.metrics.n_parse_failures == static_cast<std::int64_t>(garbage) &&
                  e.metrics.target_accuracy == 100.0;
  return {ok, std::to_string(wrapped_ok) + "/" + std::to_string(wrapped) +
                  " prose/fence/bare replies parsed, " + std::to_string(garbage_ok) + "/" +
                  std::to_string(garbage) +
                  " garbage replies surfaced after exactly one repair, sweep completed"};
}

Verdict no_leakage() {
  const World& w = world();
  const std::vector<std::string> banned_keys = {"target", "magnitude", "t_start", "f_i",
                                                "f_f", "onset", "subtle", "noticeable"};
  std::vector<Sample> pool(w.shot_pool.begin(), w.shot_pool.begin() + 20);
  const auto shots = select_few_shots(pool, 20, 1, std::vector<std::int64_t>{});
  const std::string system = build_system_prompt(w.corpus.samples[0].scenario.system, shots);
  std::vector<std::int64_t> pool_ids;
  for (const Sample& s : pool) pool_ids.push_back(s.id);

  std::size_t queries = 0, hits = 0;
  for (const Sample& s : w.corpus.samples) {
    if (!s.attack || queries >= 1000) continue;
    if (std::find(pool_ids.begin(), pool_ids.end(), s.id) != pool_ids.end()) continue;
    DetectionResult d = predict(*w.model, s.features);
    d.label = Label::kAttack;
    QueryOptions opt;
    opt.include_series = queries % 2 == 1;
    std::string q = build_query(s, d, opt);
    ++queries;
    std::string lower = q;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const std::string& k : banned_keys) hits += lower.find(k) != std::string::npos;
    for (double v : {s.attack->t_start, s.attack->f_i, s.attack->f_f, s.attack->magnitude,
                     s.attack->f_i * s.attack->scale, s.attack->f_f * s.attack->scale}) {
      char g17[32];
      std::snprintf(g17, sizeof g17, "%.17g", v);
      for (const std::string& needle : {Json(v).dump(), std::string(g17)}) {
        hits += q.find(needle) != std::string::npos;
        hits += system.find(needle) != std::string::npos;
      }
    }
  }
  return {queries == 1000 && hits == 0,
          std::to_string(queries) + " queries scanned for " + std::to_string(banned_keys.size()) +
              " key tokens and 6 ground-truth values each, " + std::to_string(hits) +
              " occurrences"};
}

Verdict feature_oracle() {
  const World& w = world();
  const Dataset stored = read_dataset(w.dir / "corpus_a.jsonl");
  std::size_t n = 0, exact = 0;
  for (const Sample& s : stored.samples) {
    if (n >= 1000) break;
    ++n;
    exact += extract(s.trace) == s.features;
  }

  std::mt19937_64 gen(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> len(3, 400);
  double worst_skew = 0.0, worst_slope = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(static_cast<std::size_t>(len(gen)));
    const double trend = normal(gen);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double e = normal(gen);
      x[k] = 0.01 * trend * static_cast<double>(k) + (i % 3 == 0 ? e * e * e : e);
    }
    const double dt = 0.3;
    const auto nn = static_cast<long double>(x.size());
    long double s1 = 0;
    for (double v : x) s1 += v;
    const long double mu = s1 / nn;
    long double m2 = 0, m3 = 0;
    for (double v : x) {
      m2 += (v - mu) * (v - mu);
      m3 += (v - mu) * (v - mu) * (v - mu);
    }
    m2 /= nn;
    m3 /= nn;
    const long double skew = m3 / std::pow(m2, 1.5L);
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const long double t = static_cast<long double>(k) * dt;
      sx += t;
      sy += x[k];
      sxx += t * t;
      sxy += t * x[k];
    }
    const long double b = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    worst_skew = std::max(worst_skew, static_cast<double>(std::fabs(skewness(x) - skew)));
    worst_slope = std::max(worst_slope, static_cast<double>(std::fabs(slope(x, dt) - b)));
  }
  const bool ok = n == 1000 && exact == n && worst_skew <= 1e-9 && worst_slope <= 1e-9;
  return {ok, std::to_string(exact) + "/" + std::to_string(n) +
                  " persisted feature vectors reproduced bit-exactly; brute-force max error "
                  "skewness " + f("%.2e", worst_skew) + ", slope " + f("%.2e", worst_slope)};
}

}  // namespace

int main() {
  world().dir = fs::temp_directory_path() / "agc_acceptance";
  fs::remove_all(world().dir);
  fs::create_directories(world().dir);

  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"Equilibrium", equilibrium},
      {"Droop steady state", droop},
      {"Secondary regulation", secondary},
      {"Dataset contract", dataset_contract},
      {"ACE-limit enforcement", ace_limit},
      {"Pre-onset identity", pre_onset_identity},
      {"GRC invariant", grc_invariant},
      {"Detector quality", detector_quality},
      {"Detector determinism and oracle", detector_determinism},
      {"Explanation round trip", explanation_round_trip},
      {"Robust parsing", robust_parsing},
      {"No leakage", no_leakage},
      {"Feature oracle", feature_oracle},
  };

  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << index << ". " << c.name << ": " << v.detail
              << " (" << f("%.1f", seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (std::size(criteria) - static_cast<std::size_t>(failed)) << "/"
            << std::size(criteria) << " criteria passed" << std::endl;
  fs::remove_all(world().dir);
  return failed == 0 ? 0 : 1;
}

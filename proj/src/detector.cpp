#include "agc/detector.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "agc/error.h"
#include "agc/parallel.h"
#include "agc/rng.h"
#include "tree_growth.h"

namespace agc {

namespace {

constexpr std::uint64_t kForestStreamTag = 0x464f5245;   // "FORE"
constexpr std::uint64_t kTuningStreamTag = 0x54554e45;   // "TUNE"

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Logistic loss of one row at log-odds margin m.
double row_loss(int y, double m) { return y == 1 ? softplus(-m) : softplus(m); }

void require_two_classes(const TrainingData& data, const char* who) {
  if (data.size() == 0) {
    throw InvalidArgument(std::string(who) + ": empty training set");
  }
  if (data.x.size() != data.size() * data.n_features) {
    throw InvalidArgument(std::string(who) + ": ragged feature matrix");
  }
  const auto pos = std::count(data.y.begin(), data.y.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(data.size())) {
    throw InvalidArgument(std::string(who) +
                          ": training set must contain both classes");
  }
}

int leaf_index(const Tree& tree, std::span<const double> x) {
  int i = 0;
  while (!tree.nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

double boosted_margin(const EnsembleModel& m, std::span<const double> x) {
  double margin = m.base_score;
  for (const Tree& t : m.trees) margin += m.learning_rate * t.leaf_for(x).value;
  return margin;
}

int depth_from(const Tree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(t, n.left), depth_from(t, n.right));
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  return kind == ModelKind::kGradientBoosted ? "gradient_boosted"
                                             : "random_forest";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  if (name == "gradient_boosted") return ModelKind::kGradientBoosted;
  if (name == "random_forest") return ModelKind::kRandomForest;
  return std::nullopt;
}

void TrainingData::add(std::span<const double> features, int label) {
  if (features.size() != n_features) {
    throw InvalidArgument("TrainingData: expected " +
                          std::to_string(n_features) + " features");
  }
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

TrainingData to_training_data(std::span<const Sample> samples) {
  TrainingData data;
  for (const Sample& s : samples) {
    data.add(s.features.values, s.label == Label::kAttack ? 1 : 0);
  }
  return data;
}

TrainingData to_training_data(std::span<const Sample> samples,
                              std::span<const std::size_t> indices) {
  TrainingData data;
  for (std::size_t i : indices) {
    const Sample& s = samples[i];
    data.add(s.features.values, s.label == Label::kAttack ? 1 : 0);
  }
  return data;
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  return nodes[static_cast<std::size_t>(leaf_index(*this, x))];
}

int Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

void GbdtParams::validate() const {
  if (n_trees < 0 || max_depth < 1 || !(learning_rate > 0) ||
      !(subsample > 0 && subsample <= 1) || min_samples_leaf < 1) {
    throw InvalidArgument(
        "gbdt: need n_trees >= 0, max_depth >= 1, learning_rate > 0, "
        "subsample in (0, 1], min_samples_leaf >= 1");
  }
}

void ForestParams::validate() const {
  if (n_trees < 1 || max_depth < 0 || max_features < 0 ||
      min_samples_leaf < 1) {
    throw InvalidArgument(
        "forest: need n_trees >= 1, max_depth >= 0, max_features >= 0, "
        "min_samples_leaf >= 1");
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double EnsembleModel::prob_attack(std::span<const double> x) const {
  if (kind == ModelKind::kGradientBoosted) {
    return sigmoid(boosted_margin(*this, x));
  }
  if (trees.empty()) return 0.5;
  double sum = 0.0;
  for (const Tree& t : trees) {
    const TreeNode& leaf = t.leaf_for(x);
    const double total = leaf.counts[0] + leaf.counts[1];
    sum += total > 0 ? leaf.counts[1] / total : 0.5;
  }
  return sum / static_cast<double>(trees.size());
}

EnsembleModel train_gbdt(const TrainingData& train, const GbdtParams& params,
                         std::uint64_t seed) {
  params.validate();
  require_two_classes(train, "train_gbdt");
  const std::size_t n = train.size();

  const double prior =
      static_cast<double>(std::count(train.y.begin(), train.y.end(), 1)) /
      static_cast<double>(n);
  EnsembleModel model;
  model.kind = ModelKind::kGradientBoosted;
  model.n_features = train.n_features;
  model.learning_rate = params.learning_rate;
  model.base_score = std::log(prior / (1.0 - prior));
  model.gbdt = params;
  model.training_seed = seed;
  const double lr = params.learning_rate;

  const internal::Presorted order = internal::presort(train);
  RngStream rng(seed);
  const std::size_t n_sub =
      params.subsample >= 1.0
          ? n
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(params.subsample *
                                                         static_cast<double>(n))));

  std::vector<double> margin(n, model.base_score);
  std::vector<double> resid(n);
  std::vector<double> hess(n);
  std::vector<internal::RowStats> rows(n);
  std::vector<std::uint32_t> ids(n);
  std::vector<int> leaf_of(n);

  const internal::GrowOptions grow{.components = 1,
                                   .max_depth = params.max_depth,
                                   .min_samples_leaf =
                                       static_cast<double>(params.min_samples_leaf),
                                   .max_features = 0,
                                   .stop_when_pure = false};

  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      resid[i] = static_cast<double>(train.y[i]) - p;
      hess[i] = p * (1.0 - p);
    }

    std::vector<double> weight(n, n_sub == n ? 1.0 : 0.0);
    if (n_sub < n) {
      std::iota(ids.begin(), ids.end(), 0U);
      for (std::size_t j = 0; j < n_sub; ++j) {
        const auto r = j + static_cast<std::size_t>(rng.uniform_index(n - j));
        std::swap(ids[j], ids[r]);
        weight[ids[j]] = 1.0;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = {weight[i], {weight[i] * resid[i], 0.0}};
    }

    Tree tree = internal::grow_tree(train, order, rows, grow, nullptr).tree;

    // Newton leaf values from every training row, not only the subsample.
    const std::size_t n_nodes = tree.nodes.size();
    std::vector<double> sum_r(n_nodes, 0.0);
    std::vector<double> sum_h(n_nodes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      leaf_of[i] = leaf_index(tree, train.row(i));
      sum_r[static_cast<std::size_t>(leaf_of[i])] += resid[i];
      sum_h[static_cast<std::size_t>(leaf_of[i])] += hess[i];
    }
    std::vector<double> gamma(n_nodes, 0.0);
    for (std::size_t j = 0; j < n_nodes; ++j) {
      if (tree.nodes[j].is_leaf() && sum_h[j] > 1e-12) {
        gamma[j] = sum_r[j] / sum_h[j];
      }
    }

    // Halve any leaf step that would raise that leaf's loss.
    std::vector<double> loss0(n_nodes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      loss0[static_cast<std::size_t>(leaf_of[i])] += row_loss(train.y[i], margin[i]);
    }
    std::vector<double> loss1(n_nodes);
    for (int halving = 0;; ++halving) {
      std::fill(loss1.begin(), loss1.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(leaf_of[i]);
        loss1[j] += row_loss(train.y[i], margin[i] + lr * gamma[j]);
      }
      bool all_ok = true;
      for (std::size_t j = 0; j < n_nodes; ++j) {
        if (gamma[j] != 0.0 && loss1[j] > loss0[j]) {
          all_ok = false;
          gamma[j] = halving < 30 ? gamma[j] / 2.0 : 0.0;
        }
      }
      if (all_ok) break;
    }

    for (std::size_t j = 0; j < n_nodes; ++j) tree.nodes[j].value = gamma[j];
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += lr * gamma[static_cast<std::size_t>(leaf_of[i])];
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

EnsembleModel train_rf(const TrainingData& train, const ForestParams& params,
                       std::uint64_t seed, int workers) {
  params.validate();
  require_two_classes(train, "train_rf");
  const std::size_t n = train.size();
  const std::size_t d = train.n_features;
  const int max_features =
      params.max_features > 0
          ? std::min(params.max_features, static_cast<int>(d))
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));

  EnsembleModel model;
  model.kind = ModelKind::kRandomForest;
  model.n_features = d;
  model.forest = params;
  model.training_seed = seed;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  const internal::Presorted order = internal::presort(train);
  const internal::GrowOptions grow{
      .components = 2,
      .max_depth = params.max_depth,
      .min_samples_leaf = static_cast<double>(params.min_samples_leaf),
      .max_features = max_features < static_cast<int>(d) ? max_features : 0,
      .stop_when_pure = true};

  parallel_for(model.trees.size(), workers, [&](std::size_t t) {
    RngStream rng(mix_seed(seed, t, kForestStreamTag));
    std::vector<double> weight(n, params.bootstrap ? 0.0 : 1.0);
    if (params.bootstrap) {
      for (std::size_t k = 0; k < n; ++k) weight[rng.uniform_index(n)] += 1.0;
    }
    std::vector<internal::RowStats> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double attack = train.y[i] == 1 ? weight[i] : 0.0;
      rows[i] = {weight[i], {weight[i] - attack, attack}};
    }
    internal::GrownTree grown = internal::grow_tree(train, order, rows, grow, &rng);
    for (std::size_t j = 0; j < grown.tree.nodes.size(); ++j) {
      TreeNode& node = grown.tree.nodes[j];
      if (node.is_leaf()) node.counts = grown.node_stats[j].s;
    }
    model.trees[t] = std::move(grown.tree);
  });
  return model;
}

double log_loss(const EnsembleModel& model, const TrainingData& data) {
  if (data.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.kind == ModelKind::kGradientBoosted) {
      total += row_loss(data.y[i], boosted_margin(model, data.row(i)));
    } else {
      const double p = std::clamp(model.prob_attack(data.row(i)), 1e-15, 1 - 1e-15);
      total -= std::log(data.y[i] == 1 ? p : 1.0 - p);
    }
  }
  return total / static_cast<double>(data.size());
}

DetectionResult predict(const EnsembleModel& model,
                        std::span<const double> features) {
  if (features.size() != model.n_features) {
    throw InvalidArgument("predict: expected " +
                          std::to_string(model.n_features) + " features, got " +
                          std::to_string(features.size()));
  }
  const auto start = std::chrono::steady_clock::now();
  const double p = model.prob_attack(features);
  const auto stop = std::chrono::steady_clock::now();

  DetectionResult r;
  r.prob_attack = p;
  r.prob_normal = 1.0 - p;
  r.label = p >= 0.5 ? Label::kAttack : Label::kNormal;
  r.confidence = std::max(r.prob_attack, r.prob_normal);
  r.latency_s = std::chrono::duration<double>(stop - start).count();
  return r;
}

DetectionResult predict(const EnsembleModel& model,
                        const FeatureVector& features) {
  return predict(model, std::span<const double>(features.values));
}

double median_latency(const EnsembleModel& model,
                      std::span<const double> features, int repeats) {
  if (repeats < 1) throw InvalidArgument("median_latency: repeats must be >= 1");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repeats));
  for (int k = 0; k < repeats; ++k) {
    times.push_back(predict(model, features).latency_s);
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  return times.size() % 2 == 1 ? times[mid] : (times[mid - 1] + times[mid]) / 2.0;
}

ClassifierMetrics metrics_from_confusion(const Confusion& c) {
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  ClassifierMetrics m;
  const auto total = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
  m.accuracy = ratio(static_cast<double>(c.tp + c.tn), total);
  m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

ClassifierMetrics evaluate_classifier(const EnsembleModel& model,
                                      const TrainingData& test) {
  if (test.size() == 0) throw InvalidArgument("evaluate_classifier: empty test set");
  Confusion c;
  double latency = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const DetectionResult r = predict(model, test.row(i));
    latency += r.latency_s;
    const bool predicted = r.label == Label::kAttack;
    const bool actual = test.y[i] == 1;
    if (predicted && actual) ++c.tp;
    if (predicted && !actual) ++c.fp;
    if (!predicted && actual) ++c.fn;
    if (!predicted && !actual) ++c.tn;
  }
  ClassifierMetrics m = metrics_from_confusion(c);
  m.model = std::string(model_kind_name(model.kind));
  m.mean_latency_s = latency / static_cast<double>(test.size());
  return m;
}

std::pair<TrainingData, TrainingData> holdout_split(const TrainingData& data,
                                                    double fraction,
                                                    std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) {
    throw InvalidArgument("holdout_split: fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data.y[i] == 1 ? 1 : 0].push_back(i);
  }
  RngStream rng(seed);
  std::vector<char> held(data.size(), 0);
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto k = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < k; ++j) held[members[j]] = 1;
  }
  TrainingData kept;
  TrainingData holdout;
  kept.n_features = holdout.n_features = data.n_features;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (held[i] ? holdout : kept).add(data.row(i), data.y[i]);
  }
  return {std::move(kept), std::move(holdout)};
}

TuningResult tune_random_search(const TrainingData& train,
                                const TrainingData& valid, int trials,
                                std::uint64_t seed, int workers) {
  if (trials < 1) throw InvalidArgument("tune_random_search: trials must be >= 1");
  RngStream rng(seed);
  TuningResult result;
  result.trials.resize(static_cast<std::size_t>(trials));
  for (TuningTrial& trial : result.trials) {
    GbdtParams& p = trial.params;
    p.n_trees = 50 + static_cast<int>(rng.uniform_index(351));
    p.max_depth = 2 + static_cast<int>(rng.uniform_index(5));
    p.learning_rate = std::exp(rng.uniform(std::log(0.02), std::log(0.3)));
    p.subsample = rng.uniform(0.5, 1.0);
    p.min_samples_leaf = 1 + static_cast<int>(rng.uniform_index(20));
  }
  parallel_for(result.trials.size(), workers, [&](std::size_t k) {
    TuningTrial& trial = result.trials[k];
    const EnsembleModel m =
        train_gbdt(train, trial.params, mix_seed(seed, k, kTuningStreamTag));
    trial.f1 = evaluate_classifier(m, valid).f1;
  });
  for (std::size_t k = 0; k < result.trials.size(); ++k) {
    if (k == 0 || result.trials[k].f1 > result.best_f1) {
      result.best = result.trials[k].params;
      result.best_f1 = result.trials[k].f1;
      result.best_trial = k;
    }
  }
  return result;
}

}  // namespace agc

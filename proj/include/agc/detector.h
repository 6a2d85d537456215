#pragma once

// Tree-ensemble attack detectors: a logistic gradient-boosted tree learner
// and a random forest, both with exact greedy split search.
//
// Split rules shared by both learners:
//   * candidate thresholds are midpoints between consecutive distinct values
//     of a feature among the node's rows; x <= threshold goes left;
//   * a split must leave at least min_samples_leaf (weighted) rows per side;
//   * the best split maximises gain, ties going to the lowest feature index
//     and then the lowest threshold.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agc/datagen.h"
#include "agc/features.h"

namespace agc {

enum class ModelKind { kGradientBoosted, kRandomForest };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

// Row-major feature matrix with binary labels (1 = attack).
struct TrainingData {
  std::size_t n_features = kNumFeatures;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * n_features, n_features};
  }
  void add(std::span<const double> features, int label);
};

TrainingData to_training_data(std::span<const Sample> samples);
TrainingData to_training_data(std::span<const Sample> samples,
                              std::span<const std::size_t> indices);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Boosted trees: leaf score added to the log-odds (times the learning rate).
  double value = 0.0;
  // Forests: (normal, attack) weighted counts reaching the leaf.
  std::array<double, 2> counts{};

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Flat tree, root at index 0.
struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> x) const;
  int depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct GbdtParams {
  int n_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  double subsample = 0.8;
  int min_samples_leaf = 5;

  void validate() const;
  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;     // 0 = unlimited
  int max_features = 0;  // 0 = floor(sqrt(n_features))
  int min_samples_leaf = 1;
  bool bootstrap = true;

  void validate() const;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

inline constexpr int kModelFormatVersion = 1;

struct EnsembleModel {
  ModelKind kind = ModelKind::kGradientBoosted;
  std::size_t n_features = kNumFeatures;
  std::vector<Tree> trees;
  double learning_rate = 0.0;
  double base_score = 0.0;  // log-odds
  GbdtParams gbdt;
  ForestParams forest;
  std::uint64_t training_seed = 0;
  int format_version = kModelFormatVersion;

  // P(attack). Boosted: sigmoid(base_score + sum of learning_rate * leaf);
  // forest: mean of per-tree leaf attack frequencies.
  double prob_attack(std::span<const double> x) const;
  friend bool operator==(const EnsembleModel&, const EnsembleModel&) = default;
};

double sigmoid(double z);

// Throws InvalidArgument for an empty or single-class training set.
EnsembleModel train_gbdt(const TrainingData& train, const GbdtParams& params,
                         std::uint64_t seed);
// Trees are grown on up to `workers` threads; the model does not depend on
// the worker count.
EnsembleModel train_rf(const TrainingData& train, const ForestParams& params,
                       std::uint64_t seed, int workers = 1);

// Mean logistic loss of the model on data.
double log_loss(const EnsembleModel& model, const TrainingData& data);

struct DetectionResult {
  Label label = Label::kNormal;
  double confidence = 0.0;
  double prob_normal = 0.0;
  double prob_attack = 0.0;
  double latency_s = 0.0;
};

// Label is attack when prob_attack >= 0.5. Throws InvalidArgument when the
// feature count differs from the model's.
DetectionResult predict(const EnsembleModel& model,
                        std::span<const double> features);
DetectionResult predict(const EnsembleModel& model,
                        const FeatureVector& features);

// Median wall-clock time of a single prediction over `repeats` calls.
double median_latency(const EnsembleModel& model,
                      std::span<const double> features, int repeats = 100);

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

struct ClassifierMetrics {
  std::string model;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mean_latency_s = 0.0;

  friend bool operator==(const ClassifierMetrics&,
                         const ClassifierMetrics&) = default;
};

// Attack is the positive class. Ratios with a zero denominator are 0.
ClassifierMetrics metrics_from_confusion(const Confusion& c);
ClassifierMetrics evaluate_classifier(const EnsembleModel& model,
                                      const TrainingData& test);

// Stratified holdout of `fraction` of each class, for tuning.
std::pair<TrainingData, TrainingData> holdout_split(const TrainingData& data,
                                                    double fraction,
                                                    std::uint64_t seed);

struct TuningTrial {
  GbdtParams params;
  double f1 = 0.0;
};

struct TuningResult {
  GbdtParams best;
  double best_f1 = 0.0;
  std::size_t best_trial = 0;
  std::vector<TuningTrial> trials;
};

// Draws `trials` boosted-tree configurations:
//   n_trees uniform {50..400}, max_depth uniform {2..6},
//   learning_rate log-uniform [0.02, 0.3], subsample uniform [0.5, 1],
//   min_samples_leaf uniform {1..20};
// trains each on `train` and returns the one with the highest F1 on `valid`,
// the earliest trial winning ties.
TuningResult tune_random_search(const TrainingData& train,
                                const TrainingData& valid, int trials,
                                std::uint64_t seed, int workers = 1);

}  // namespace agc

#include "agc/model_io.h"

#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "agc/error.h"

namespace agc {

namespace {

constexpr std::string_view kModelFormat = "agc-ensemble-model";
constexpr std::string_view kDigestPrefix = "fnv1a64:";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json node_to_json(const Tree& tree, int i, ModelKind kind) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) {
    if (kind == ModelKind::kGradientBoosted) return {{"leaf", n.value}};
    return {{"counts", {n.counts[0], n.counts[1]}}};
  }
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(tree, n.left, kind)},
          {"right", node_to_json(tree, n.right, kind)}};
}

// Rebuilds the flat layout breadth-first, which is the order the learners
// allocate nodes in.
Tree tree_from_json(const Json& root, ModelKind kind, std::size_t n_features) {
  Tree tree;
  std::deque<const Json*> pending{&root};
  tree.nodes.emplace_back();
  for (std::size_t i = 0; !pending.empty(); ++i) {
    const Json& j = *pending.front();
    pending.pop_front();
    TreeNode node;
    if (j.contains("feature")) {
      node.feature = j.at("feature").get<int>();
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) {
        throw FormatError("tree node feature index out of range");
      }
      node.threshold = j.at("threshold").get<double>();
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      pending.push_back(&j.at("left"));
      pending.push_back(&j.at("right"));
    } else if (kind == ModelKind::kGradientBoosted) {
      node.value = j.at("leaf").get<double>();
    } else {
      const Json& c = j.at("counts");
      if (!c.is_array() || c.size() != 2) throw FormatError("leaf counts must have 2 entries");
      node.counts = {c[0].get<double>(), c[1].get<double>()};
    }
    tree.nodes[i] = node;
  }
  return tree;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json model_to_json(const EnsembleModel& model) {
  Json hp;
  if (model.kind == ModelKind::kGradientBoosted) {
    hp = {{"n_trees", model.gbdt.n_trees},
          {"max_depth", model.gbdt.max_depth},
          {"learning_rate", model.gbdt.learning_rate},
          {"subsample", model.gbdt.subsample},
          {"min_samples_leaf", model.gbdt.min_samples_leaf}};
  } else {
    hp = {{"n_trees", model.forest.n_trees},
          {"max_depth", model.forest.max_depth},
          {"max_features", model.forest.max_features},
          {"min_samples_leaf", model.forest.min_samples_leaf},
          {"bootstrap", model.forest.bootstrap}};
  }
  Json trees = Json::array();
  for (const Tree& t : model.trees) trees.push_back(node_to_json(t, 0, model.kind));

  Json j = {{"format", kModelFormat},
            {"format_version", model.format_version},
            {"kind", model_kind_name(model.kind)},
            {"hyperparams", hp},
            {"n_features", model.n_features},
            {"base_score", model.base_score},
            {"learning_rate", model.learning_rate},
            {"training_seed", model.training_seed},
            {"trees", trees}};
  j["digest"] = std::string(kDigestPrefix) + hex64(fnv1a64(j.dump()));
  return j;
}

EnsembleModel model_from_json(const Json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormat) {
      throw FormatError("not a model file");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format_version " + std::to_string(version));
    }
    Json body = j;
    const std::string digest = body.at("digest").get<std::string>();
    body.erase("digest");
    if (digest != std::string(kDigestPrefix) + hex64(fnv1a64(body.dump()))) {
      throw FormatError("model digest mismatch");
    }

    EnsembleModel m;
    m.format_version = version;
    const auto kind = model_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw FormatError("unknown model kind");
    m.kind = *kind;
    m.n_features = j.at("n_features").get<std::size_t>();
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.training_seed = j.at("training_seed").get<std::uint64_t>();
    const Json& hp = j.at("hyperparams");
    if (m.kind == ModelKind::kGradientBoosted) {
      m.gbdt.n_trees = hp.at("n_trees").get<int>();
      m.gbdt.max_depth = hp.at("max_depth").get<int>();
      m.gbdt.learning_rate = hp.at("learning_rate").get<double>();
      m.gbdt.subsample = hp.at("subsample").get<double>();
      m.gbdt.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
    } else {
      m.forest.n_trees = hp.at("n_trees").get<int>();
      m.forest.max_depth = hp.at("max_depth").get<int>();
      m.forest.max_features = hp.at("max_features").get<int>();
      m.forest.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
      m.forest.bootstrap = hp.at("bootstrap").get<bool>();
    }
    for (const Json& t : j.at("trees")) {
      m.trees.push_back(tree_from_json(t, m.kind, m.n_features));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

std::string serialize_model(const EnsembleModel& model) {
  return model_to_json(model).dump() + "\n";
}

EnsembleModel parse_model(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const std::filesystem::path& path, const EnsembleModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_model(model);
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace agc

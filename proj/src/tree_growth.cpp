#include "tree_growth.h"

#include <algorithm>
#include <numeric>

#include "agc/error.h"

namespace agc::internal {

namespace {

double score(const RowStats& st, int components) {
  if (st.w <= 0.0) return 0.0;
  double acc = 0.0;
  for (int c = 0; c < components; ++c) acc += st.s[c] * st.s[c];
  return acc / st.w;
}

void accumulate(RowStats& into, const RowStats& row) {
  into.w += row.w;
  into.s[0] += row.s[0];
  into.s[1] += row.s[1];
}

RowStats difference(const RowStats& a, const RowStats& b) {
  return {a.w - b.w, {a.s[0] - b.s[0], a.s[1] - b.s[1]}};
}

double midpoint(double lo, double hi) {
  const double mid = (lo + hi) / 2.0;
  return mid < hi ? mid : lo;
}

struct Candidate {
  bool active = false;
  std::uint64_t mask = 0;
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  RowStats left;
  double last = 0.0;
  bool has_last = false;
};

std::uint64_t feature_mask(std::size_t n_features, std::size_t subset,
                           RngStream* rng) {
  if (subset >= n_features) {
    return n_features == 64 ? ~0ULL : (1ULL << n_features) - 1;
  }
  std::vector<std::size_t> ids(n_features);
  std::iota(ids.begin(), ids.end(), 0);
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j < subset; ++j) {
    const auto r = j + static_cast<std::size_t>(rng->uniform_index(n_features - j));
    std::swap(ids[j], ids[r]);
    mask |= 1ULL << ids[j];
  }
  return mask;
}

}  // namespace

Presorted presort(const TrainingData& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.n_features;
  Presorted order(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& ids = order[f];
    std::iota(ids.begin(), ids.end(), 0U);
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return data.x[a * d + f] < data.x[b * d + f];
                     });
  }
  return order;
}

GrownTree grow_tree(const TrainingData& data, const Presorted& order,
                    std::span<const RowStats> rows, const GrowOptions& options,
                    RngStream* rng) {
  const std::size_t n = data.size();
  const std::size_t d = data.n_features;
  if (d == 0 || d > 64) throw InvalidArgument("tree: 1..64 features supported");
  const int k = options.components;
  const double min_leaf = options.min_samples_leaf;
  const std::size_t subset =
      options.max_features > 0 ? static_cast<std::size_t>(options.max_features)
                               : d;
  if (subset < d && rng == nullptr) {
    throw InvalidArgument("tree: feature subsampling needs a random stream");
  }

  GrownTree out;
  auto& nodes = out.tree.nodes;
  auto& stats = out.node_stats;

  std::vector<int> node_of(n, -1);
  RowStats root;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].w > 0.0) {
      node_of[i] = 0;
      accumulate(root, rows[i]);
    }
  }
  nodes.emplace_back();
  stats.push_back(root);

  std::vector<int> open{0};
  std::vector<int> local_of;
  std::vector<Candidate> cand;
  for (int depth = 0; !open.empty(); ++depth) {
    if (options.max_depth > 0 && depth >= options.max_depth) break;

    cand.assign(open.size(), Candidate{});
    local_of.assign(nodes.size(), -1);
    bool any = false;
    for (std::size_t l = 0; l < open.size(); ++l) {
      const RowStats& st = stats[static_cast<std::size_t>(open[l])];
      bool ok = st.w >= 2.0 * min_leaf;
      if (ok && options.stop_when_pure && (st.s[0] == 0.0 || st.s[1] == 0.0)) {
        ok = false;
      }
      if (!ok) continue;
      cand[l].active = true;
      cand[l].mask = feature_mask(d, subset, rng);
      local_of[static_cast<std::size_t>(open[l])] = static_cast<int>(l);
      any = true;
    }
    if (!any) break;

    for (std::size_t f = 0; f < d; ++f) {
      for (Candidate& c : cand) {
        c.left = RowStats{};
        c.has_last = false;
      }
      for (std::uint32_t i : order[f]) {
        const int nd = node_of[i];
        if (nd < 0) continue;
        const int l = local_of[static_cast<std::size_t>(nd)];
        if (l < 0) continue;
        Candidate& c = cand[static_cast<std::size_t>(l)];
        if (((c.mask >> f) & 1U) == 0) continue;
        const double v = data.x[i * d + f];
        if (c.has_last && v > c.last) {
          const RowStats& parent = stats[static_cast<std::size_t>(nd)];
          const RowStats right = difference(parent, c.left);
          if (c.left.w >= min_leaf && right.w >= min_leaf) {
            const double gain =
                score(c.left, k) + score(right, k) - score(parent, k);
            if (gain > c.gain) {
              c.gain = gain;
              c.feature = static_cast<int>(f);
              c.threshold = midpoint(c.last, v);
            }
          }
        }
        accumulate(c.left, rows[i]);
        c.last = v;
        c.has_last = true;
      }
    }

    std::vector<int> next;
    for (std::size_t l = 0; l < open.size(); ++l) {
      const Candidate& c = cand[l];
      if (!c.active || c.feature < 0) continue;
      const auto node = static_cast<std::size_t>(open[l]);
      const int left = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      stats.emplace_back();
      stats.emplace_back();
      nodes[node].feature = c.feature;
      nodes[node].threshold = c.threshold;
      nodes[node].left = left;
      nodes[node].right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;

    for (std::size_t i = 0; i < n; ++i) {
      const int nd = node_of[i];
      if (nd < 0) continue;
      const TreeNode& t = nodes[static_cast<std::size_t>(nd)];
      if (t.is_leaf()) {
        node_of[i] = -1;
        continue;
      }
      const int child =
          data.x[i * d + static_cast<std::size_t>(t.feature)] <= t.threshold
              ? t.left
              : t.right;
      node_of[i] = child;
      accumulate(stats[static_cast<std::size_t>(child)], rows[i]);
    }
    open = std::move(next);
  }
  return out;
}

}  // namespace agc::internal

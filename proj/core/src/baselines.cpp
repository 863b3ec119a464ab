#include "tscmrar/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "tscmrar/error.hpp"

namespace tscmrar {

namespace {

std::size_t vote(std::span<const std::size_t> counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                  counts.begin());
}

std::size_t composite_of(const LabelPair& label, const LabelSpace& labels) {
  return label.resident * labels.activities + label.activity;
}

LabelPair decode_composite(std::size_t composite, const LabelSpace& labels) {
  return {composite / labels.activities, composite % labels.activities};
}

}  // namespace

FlatSample flatten(const SampleWindow& window) {
  FlatSample out;
  out.label = window.label;
  for (const auto& e : window.embeddings) {
    out.features.insert(out.features.end(), e.data().begin(), e.data().end());
  }
  return out;
}

std::vector<FlatSample> flatten(std::span<const SampleWindow> windows) {
  std::vector<FlatSample> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(flatten(w));
  return out;
}

LabelPair knn_predict(std::span<const FlatSample> train, const FlatSample& query,
                      std::size_t k_neighbors, const LabelSpace& labels) {
  if (train.empty()) throw DataError("knn: training set is empty");
  if (k_neighbors == 0 || k_neighbors > train.size()) {
    throw DataError("knn: k_neighbors must be in [1, " + std::to_string(train.size()) +
                    "], got " + std::to_string(k_neighbors));
  }
  std::vector<std::pair<double, std::size_t>> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& f = train[i].features;
    if (f.size() != query.features.size()) {
      throw ShapeError("knn: feature length mismatch");
    }
    double d = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const double diff = f[j] - query.features[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  // pairs order by (distance, index): distance ties keep the earlier sample
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                    dist.end());
  std::vector<std::size_t> residents(labels.residents, 0);
  std::vector<std::size_t> activities(labels.activities, 0);
  for (std::size_t n = 0; n < k_neighbors; ++n) {
    const LabelPair& l = train[dist[n].second].label;
    ++residents.at(l.resident);
    ++activities.at(l.activity);
  }
  return {vote(residents), vote(activities)};
}

LabelPair DecisionTree::predict(std::span<const double> features) const {
  std::size_t at = 0;
  while (nodes_[at].feature != kLeaf) {
    const Node& n = nodes_[at];
    if (n.feature >= features.size()) throw ShapeError("decision tree: feature out of range");
    at = features[n.feature] <= n.threshold ? n.left : n.right;
  }
  return decode_composite(nodes_[at].composite, labels_);
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature == kLeaf; }));
}

DecisionTree dt_fit(std::span<const FlatSample> train, const DecisionTreeConfig& config,
                    const LabelSpace& labels) {
  if (train.empty()) throw DataError("decision tree: training set is empty");
  if (config.min_leaf == 0) throw DataError("decision tree: min_leaf must be >= 1");
  const std::size_t classes = labels.composite_classes();
  const std::size_t dims = train.front().features.size();
  std::vector<std::size_t> target(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].features.size() != dims) throw ShapeError("decision tree: ragged features");
    target[i] = composite_of(train[i].label, labels);
    if (target[i] >= classes) throw DataError("decision tree: label outside label space");
  }

  std::vector<DecisionTree::Node> nodes;
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> samples;
  };
  std::vector<Pending> stack;
  nodes.push_back({});
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  stack.push_back({0, std::move(all)});

  std::vector<std::size_t> left_counts(classes), right_counts(classes);
  std::vector<std::size_t> order;
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    auto& samples = job.samples;
    const std::size_t n = samples.size();

    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t s : samples) ++counts[target[s]];
    nodes[job.node].composite = vote(counts);
    const std::size_t node_depth = nodes[job.node].depth;

    const bool pure = counts[nodes[job.node].composite] == n;
    if (pure || node_depth >= config.max_depth || n < 2 * config.min_leaf) continue;

    // weighted impurity n * gini = n - sum(c^2) / n
    double parent_sq = 0.0;
    for (std::size_t c : counts) parent_sq += static_cast<double>(c) * static_cast<double>(c);
    const double parent_impurity = static_cast<double>(n) - parent_sq / static_cast<double>(n);

    double best_impurity = parent_impurity;
    std::size_t best_feature = DecisionTree::kLeaf;
    double best_threshold = 0.0;
    order = samples;
    for (std::size_t f = 0; f < dims; ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return train[a].features[f] < train[b].features[f];
      });
      if (train[order.front()].features[f] == train[order.back()].features[f]) continue;
      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      double left_sq = 0.0;
      double right_sq = parent_sq;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t c = target[order[i]];
        left_sq += 2.0 * static_cast<double>(left_counts[c]) + 1.0;
        right_sq -= 2.0 * static_cast<double>(right_counts[c]) - 1.0;
        ++left_counts[c];
        --right_counts[c];
        const double here = train[order[i]].features[f];
        const double next = train[order[i + 1]].features[f];
        if (here == next) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < config.min_leaf || nr < config.min_leaf) continue;
        const double impurity = (static_cast<double>(nl) - left_sq / static_cast<double>(nl)) +
                                (static_cast<double>(nr) - right_sq / static_cast<double>(nr));
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = here + (next - here) / 2.0;
        }
      }
    }
    if (best_feature == DecisionTree::kLeaf ||
        parent_impurity - best_impurity <= 1e-12 * static_cast<double>(n)) {
      continue;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t s : samples) {
      (train[s].features[best_feature] <= best_threshold ? left : right).push_back(s);
    }
    const std::size_t left_id = nodes.size();
    nodes.push_back({.depth = node_depth + 1});
    nodes.push_back({.depth = node_depth + 1});
    nodes[job.node].feature = best_feature;
    nodes[job.node].threshold = best_threshold;
    nodes[job.node].left = left_id;
    nodes[job.node].right = left_id + 1;
    stack.push_back({left_id + 1, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return DecisionTree(std::move(nodes), labels);
}

LabelPair dt_predict(const DecisionTree& tree, const FlatSample& query) {
  return tree.predict(query.features);
}

}  // namespace tscmrar

#pragma once

// Classical baselines over flattened windows: brute-force KNN and a CART
// decision tree. Both predict the resident and the activity of a window.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tscmrar/casas.hpp"
#include "tscmrar/windowing.hpp"

namespace tscmrar {

// Window embeddings concatenated oldest first: k * N values in {0, 1}.
struct FlatSample {
  std::vector<double> features;
  LabelPair label;
};

FlatSample flatten(const SampleWindow& window);
std::vector<FlatSample> flatten(std::span<const SampleWindow> windows);

inline constexpr std::size_t kDefaultNeighbors = 5;

// Euclidean distance; resident and activity are voted independently. Distance
// ties go to the earlier training sample, vote ties to the lower class index.
// Throws DataError on an empty training set or k_neighbors outside
// [1, train.size()].
LabelPair knn_predict(std::span<const FlatSample> train, const FlatSample& query,
                      std::size_t k_neighbors, const LabelSpace& labels = {});

struct DecisionTreeConfig {
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 1;
};

// Binary CART tree on Gini impurity over the composite class
// resident * activities + activity.
class DecisionTree {
 public:
  struct Node {
    // Internal nodes send x[feature] <= threshold to `left`.
    std::size_t feature = kLeaf;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t composite = 0;  // majority composite class (all nodes)
    std::size_t depth = 0;
  };
  static constexpr std::size_t kLeaf = std::numeric_limits<std::size_t>::max();

  DecisionTree(std::vector<Node> nodes, LabelSpace labels)
      : nodes_(std::move(nodes)), labels_(labels) {}

  LabelPair predict(std::span<const double> features) const;
  std::size_t depth() const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  LabelSpace labels_;
};

// Throws DataError on an empty training set or min_leaf == 0.
DecisionTree dt_fit(std::span<const FlatSample> train, const DecisionTreeConfig& config = {},
                    const LabelSpace& labels = {});
LabelPair dt_predict(const DecisionTree& tree, const FlatSample& query);

}  // namespace tscmrar

#include "hardlabel/models.hpp"

#include <cmath>
#include <string>

namespace hardlabel {

RadialModel::RadialModel(double r2, std::size_t d) : r2_(r2), d_(d) {
  if (!(r2 > 0.0) || !std::isfinite(r2)) {
    throw InvalidInput("radial: r2 must be positive and finite");
  }
}

Label RadialModel::predict(std::span<const double> x) const {
  return Label{dot(x, x) >= r2_ ? 1 : 0};
}

LinearModel::LinearModel(std::vector<double> w, double b)
    : w_(std::move(w)), b_(b) {
  if (w_.empty()) throw InvalidInput("linear: empty weight vector");
  if (!all_finite(w_) || !std::isfinite(b_)) {
    throw InvalidInput("linear: non-finite parameter");
  }
}

Label LinearModel::predict(std::span<const double> x) const {
  return Label{dot(w_, x) >= b_ ? 1 : 0};
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInput("mlp: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    std::string at = "layers[" + std::to_string(i) + "]";
    if (l.rows == 0 || l.cols == 0) throw LoadError(at, "empty weight matrix");
    if (l.weights.size() != l.rows * l.cols) {
      throw LoadError(at, "weight matrix is not rows x cols");
    }
    if (l.bias.size() != l.rows) {
      throw LoadError(at + ".b", "bias length " + std::to_string(l.bias.size()) +
                                     " != output width " +
                                     std::to_string(l.rows));
    }
    if (i > 0 && l.cols != layers_[i - 1].rows) {
      throw LoadError(at, "input width " + std::to_string(l.cols) +
                              " != previous output width " +
                              std::to_string(layers_[i - 1].rows));
    }
  }
  if (layers_.back().rows < 2) {
    throw LoadError("layers[" + std::to_string(layers_.size() - 1) + "]",
                    "final layer must have at least 2 outputs");
  }
}

std::vector<double> MlpModel::scores(std::span<const double> x) const {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (const DenseLayer& l : layers_) {
    next.assign(l.rows, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double* row = l.weights.data() + r * l.cols;
      double s = l.bias[r];
      for (std::size_t c = 0; c < l.cols; ++c) s += row[c] * cur[c];
      switch (l.activation) {
        case Activation::kRelu: s = s > 0.0 ? s : 0.0; break;
        case Activation::kTanh: s = std::tanh(s); break;
        case Activation::kIdentity: break;
      }
      next[r] = s;
    }
    cur.swap(next);
  }
  return cur;
}

Label MlpModel::predict(std::span<const double> x) const {
  std::vector<double> s = scores(x);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[best]) best = i;
  }
  return Label{static_cast<int>(best)};
}

double RegressionTree::evaluate(std::span<const double> x) const {
  std::size_t i = 0;
  while (true) {
    const TreeNode& node = nodes[i];
    if (const auto* leaf = std::get_if<TreeLeaf>(&node)) return leaf->value;
    const auto& split = std::get<TreeSplit>(node);
    i = x[split.feature] <= split.threshold ? split.left : split.right;
  }
}

namespace {

void validate_tree(const RegressionTree& tree, std::size_t tree_index, int k,
                   std::size_t d) {
  std::string at = "trees[" + std::to_string(tree_index) + "]";
  if (tree.nodes.empty()) throw LoadError(at, "tree has no nodes");
  if (tree.target_class < 0 || tree.target_class >= k) {
    throw LoadError(at + ".class", "class " + std::to_string(tree.target_class) +
                                       " outside [0, " + std::to_string(k) +
                                       ")");
  }
  const std::size_t n = tree.nodes.size();
  std::vector<int> parents(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* split = std::get_if<TreeSplit>(&tree.nodes[i]);
    if (!split) continue;
    std::string node_at = at + ".nodes[" + std::to_string(i) + "]";
    if (split->feature >= d) {
      throw LoadError(node_at + ".feat",
                      "feature " + std::to_string(split->feature) +
                          " >= dimension " + std::to_string(d));
    }
    if (!std::isfinite(split->threshold)) {
      throw LoadError(node_at + ".thresh", "non-finite threshold");
    }
    for (auto [child, name] : {std::pair{split->left, "left"},
                               std::pair{split->right, "right"}}) {
      if (child >= n) {
        throw LoadError(node_at + "." + name,
                        "references missing node " + std::to_string(child));
      }
      if (child == 0) throw LoadError(node_at + "." + name, "points at root");
      if (++parents[child] > 1) {
        throw LoadError(node_at + "." + name,
                        "node " + std::to_string(child) +
                            " has more than one parent");
      }
    }
  }
  // Three-colour DFS over every node catches cycles, including ones not
  // reachable from the root.
  enum : char { kWhite, kGrey, kBlack };
  std::vector<char> colour(n, kWhite);
  for (std::size_t start = 0; start < n; ++start) {
    if (colour[start] != kWhite) continue;
    std::vector<std::pair<std::size_t, int>> stack{{start, 0}};
    colour[start] = kGrey;
    while (!stack.empty()) {
      auto& [node, next_child] = stack.back();
      const auto* split = std::get_if<TreeSplit>(&tree.nodes[node]);
      if (!split || next_child == 2) {
        colour[node] = kBlack;
        stack.pop_back();
        continue;
      }
      std::size_t child = next_child++ == 0 ? split->left : split->right;
      if (colour[child] == kGrey) {
        throw LoadError(at, "cycle through node " + std::to_string(child));
      }
      if (colour[child] == kWhite) {
        colour[child] = kGrey;
        stack.emplace_back(child, 0);
      }
    }
  }
}

}  // namespace

GbdtModel::GbdtModel(int k, std::size_t d, std::vector<RegressionTree> trees)
    : k_(k), d_(d), trees_(std::move(trees)) {
  if (k_ < 2) throw LoadError("k", "need at least 2 classes");
  if (d_ == 0) throw LoadError("d", "dimension must be positive");
  if (trees_.empty()) throw LoadError("trees", "ensemble has no trees");
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    validate_tree(trees_[t], t, k_, d_);
  }
  binary_ = k_ == 2;
  for (const auto& t : trees_) {
    if (t.target_class != 0) binary_ = false;
  }
}

std::vector<double> GbdtModel::class_scores(std::span<const double> x) const {
  std::vector<double> s(static_cast<std::size_t>(k_), 0.0);
  for (const auto& t : trees_) {
    s[static_cast<std::size_t>(t.target_class)] += t.evaluate(x);
  }
  return s;
}

Label GbdtModel::predict(std::span<const double> x) const {
  std::vector<double> s = class_scores(x);
  if (binary_) return Label{s[0] >= 0.0 ? 1 : 0};
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[best]) best = i;
  }
  return Label{static_cast<int>(best)};
}

}  // namespace hardlabel

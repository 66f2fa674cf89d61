#ifndef HARDLABEL_MODELS_HPP
#define HARDLABEL_MODELS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hardlabel/oracle.hpp"

namespace hardlabel {

/// f(x) = 1 iff ||x||^2 >= r2, else 0. Ties go to class 1.
class RadialModel final : public Model {
 public:
  static constexpr double kDefaultRadiusSquared = 0.4;

  explicit RadialModel(double r2 = kDefaultRadiusSquared, std::size_t d = 0);

  std::size_t dimension() const override { return d_; }
  int num_classes() const override { return 2; }
  Label predict(std::span<const double> x) const override;
  std::string_view kind() const override { return "radial"; }

  double radius_squared() const { return r2_; }

 private:
  double r2_;
  std::size_t d_;
};

/// f(x) = 1 iff w.x >= b, else 0.
class LinearModel final : public Model {
 public:
  LinearModel(std::vector<double> w, double b);

  std::size_t dimension() const override { return w_.size(); }
  int num_classes() const override { return 2; }
  Label predict(std::span<const double> x) const override;
  std::string_view kind() const override { return "linear"; }

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  std::vector<double> w_;
  double b_;
};

enum class Activation { kRelu, kTanh, kIdentity };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation act);

struct DenseLayer {
  std::size_t rows = 0;  // output width
  std::size_t cols = 0;  // input width
  std::vector<double> weights;  // row-major, rows * cols
  std::vector<double> bias;     // rows
  Activation activation = Activation::kIdentity;
};

/// Feed-forward network; the label is the argmax of the final layer
/// (lowest index wins ties).
class MlpModel final : public Model {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  std::size_t dimension() const override { return layers_.front().cols; }
  int num_classes() const override {
    return static_cast<int>(layers_.back().rows);
  }
  Label predict(std::span<const double> x) const override;
  std::string_view kind() const override { return "mlp"; }

  std::vector<double> scores(std::span<const double> x) const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

struct TreeSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;   // taken when x[feature] <= threshold
  std::size_t right = 0;
};

struct TreeLeaf {
  double value = 0.0;
};

using TreeNode = std::variant<TreeSplit, TreeLeaf>;

struct RegressionTree {
  int target_class = 0;
  std::vector<TreeNode> nodes;  // node 0 is the root

  double evaluate(std::span<const double> x) const;
};

/// Additive tree ensemble. With k == 2 and every tree scoring class 0 the
/// label is the sign of the single score (score >= 0 -> class 1);
/// otherwise per-class sums are compared and the argmax wins.
class GbdtModel final : public Model {
 public:
  /// Validates child indices, acyclicity, feature indices and classes.
  /// Throws LoadError on any violation.
  GbdtModel(int k, std::size_t d, std::vector<RegressionTree> trees);

  std::size_t dimension() const override { return d_; }
  int num_classes() const override { return k_; }
  Label predict(std::span<const double> x) const override;
  std::string_view kind() const override { return "gbdt"; }

  bool binary_sign_rule() const { return binary_; }
  std::vector<double> class_scores(std::span<const double> x) const;
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  int k_;
  std::size_t d_;
  std::vector<RegressionTree> trees_;
  bool binary_ = false;
};

}  // namespace hardlabel

#endif  // HARDLABEL_MODELS_HPP

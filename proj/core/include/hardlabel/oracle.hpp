#ifndef HARDLABEL_ORACLE_HPP
#define HARDLABEL_ORACLE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "hardlabel/types.hpp"

namespace hardlabel {

/// A hard-label classifier. Implementations must be pure: the same input
/// always yields the same label. `predict` is never exposed to attack code
/// directly; queries go through an Oracle so they are counted.
class Model {
 public:
  virtual ~Model() = default;

  /// Declared input dimension, or 0 when the model accepts any dimension.
  virtual std::size_t dimension() const = 0;
  virtual int num_classes() const = 0;
  virtual Label predict(std::span<const double> x) const = 0;
  virtual std::string_view kind() const = 0;
};

/// The only channel to a target model: classifies points and counts every
/// call. Handles sharing one Model are independent; each owns its counter.
class Oracle {
 public:
  explicit Oracle(std::shared_ptr<const Model> model,
                  DomainBounds bounds = DomainBounds::unbounded());

  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;
  Oracle(Oracle&& other) noexcept;
  Oracle& operator=(Oracle&& other) noexcept;

  /// Returns the hard label of x and increments the query counter by one.
  /// Throws InvalidInput on a dimension mismatch or non-finite entry and
  /// QueryBudgetExhausted once the optional query limit is reached.
  Label classify(std::span<const double> x);

  std::uint64_t query_count() const {
    return queries_.load(std::memory_order_relaxed);
  }
  void reset_count() { queries_.store(0, std::memory_order_relaxed); }

  /// Caps the number of counted queries; nullopt removes the cap.
  void set_query_limit(std::optional<std::uint64_t> limit) { limit_ = limit; }
  std::optional<std::uint64_t> query_limit() const { return limit_; }

  /// New handle on the same model with a zeroed counter and no limit.
  Oracle fresh() const;
  /// Handle whose classify calls are never counted or limited. Used by
  /// verification code so reported query totals reflect attack cost only.
  Oracle uncounted() const;

  bool counted() const { return counted_; }
  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> shared_model() const { return model_; }
  const DomainBounds& bounds() const { return bounds_; }
  std::size_t dimension() const { return model_->dimension(); }
  int num_classes() const { return model_->num_classes(); }

  FeatureVector clamp(std::span<const double> x) const {
    return bounds_.clamp(x);
  }

 private:
  std::shared_ptr<const Model> model_;
  DomainBounds bounds_;
  std::atomic<std::uint64_t> queries_{0};
  std::optional<std::uint64_t> limit_;
  bool counted_ = true;
};

inline std::uint64_t query_count(const Oracle& oracle) {
  return oracle.query_count();
}

}  // namespace hardlabel

#endif  // HARDLABEL_ORACLE_HPP

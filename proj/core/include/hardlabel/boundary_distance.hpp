#ifndef HARDLABEL_BOUNDARY_DISTANCE_HPP
#define HARDLABEL_BOUNDARY_DISTANCE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hardlabel/dataset.hpp"
#include "hardlabel/oracle.hpp"
#include "hardlabel/types.hpp"

namespace hardlabel {

/// Unit-norm search direction.
class Direction {
 public:
  /// Normalises v. Throws InvalidInput when v is zero or non-finite.
  static Direction normalized(std::span<const double> v);
  /// Accepts v only if it is already unit-norm within 1e-9.
  static Direction from_unit(std::span<const double> v);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& vector() const { return values_; }

 private:
  explicit Direction(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

/// Success condition for a candidate point: f(x) != y0 (untargeted) or
/// f(x) == t (targeted).
class AdversarialPredicate {
 public:
  static AdversarialPredicate untargeted(Label original) {
    return AdversarialPredicate(false, original);
  }
  static AdversarialPredicate targeted(Label target) {
    return AdversarialPredicate(true, target);
  }

  bool holds(Label label) const {
    return targeted_ ? label == label_ : label != label_;
  }
  /// Whether a candidate example with this label may seed initialisation.
  bool accepts_candidate(Label label) const { return holds(label); }

  bool is_targeted() const { return targeted_; }
  /// y0 for untargeted attacks, t for targeted ones.
  Label label() const { return label_; }

 private:
  AdversarialPredicate(bool targeted, Label label)
      : targeted_(targeted), label_(label) {}
  bool targeted_;
  Label label_;
};

enum class DistanceStatus { kFound, kNoBoundaryWithinBudget };

struct DistanceEval {
  double value = 0.0;  // g(theta); meaningful only when found()
  std::uint64_t queries_used = 0;
  DistanceStatus status = DistanceStatus::kNoBoundaryWithinBudget;

  bool found() const { return status == DistanceStatus::kFound; }
};

enum class ToleranceMode { kAbsolute, kRelative };

struct SearchParams {
  double alpha_ratio = 0.01;
  /// Fine-grained step for from-scratch evaluation. Default 0.02 * sqrt(d).
  std::optional<double> init_step;
  double tolerance = 1e-3;
  ToleranceMode tolerance_mode = ToleranceMode::kRelative;
  /// Search ceiling on lambda. Default: box diameter when bounded, else 1e3.
  std::optional<double> max_lambda;
  int max_expansion_steps = 200;

  void validate() const;
  static SearchParams absolute(double tol) {
    SearchParams p;
    p.tolerance = tol;
    p.tolerance_mode = ToleranceMode::kAbsolute;
    return p;
  }
};

/// Evaluates g(theta), the distance from x0 to the first adversarial point
/// along theta, through hard-label queries to a bound oracle. Query points
/// are clamped into the oracle's domain before classification.
class BoundaryDistance {
 public:
  BoundaryDistance(Oracle& oracle, FeatureVector x0, AdversarialPredicate pred,
                   SearchParams params = {});

  /// From-scratch evaluation: walks x0 + i*step*theta until the predicate
  /// holds, then bisects the last step down to the tolerance.
  DistanceEval evaluate_initial(const Direction& theta) const;
  DistanceEval evaluate_initial(const Direction& theta,
                                const SearchParams& params) const;

  /// Warm-started evaluation around a previous value v_prev: expand or
  /// shrink by (1 +/- alpha) until the boundary is bracketed, then bisect.
  /// theta need not be normalised.
  DistanceEval evaluate_local(std::span<const double> theta,
                              double v_prev) const;
  DistanceEval evaluate_local(std::span<const double> theta, double v_prev,
                              const SearchParams& params) const;

  /// Bisects [v_left, v_right] (predicate fails at v_left, holds at
  /// v_right) until its width is at most `tolerance`; returns the final
  /// v_right. Uses exactly ceil(log2((v_right - v_left) / tolerance))
  /// queries. Endpoints are trusted, not re-queried.
  double binary_search_bracket(const Direction& theta, double v_left,
                               double v_right, double tolerance) const;

  /// Like binary_search_bracket but first queries both endpoints and throws
  /// ContractError if they do not straddle the boundary.
  double checked_binary_search(const Direction& theta, double v_left,
                               double v_right, double tolerance) const;

  /// One query at clamp(x0 + lambda * theta).
  bool adversarial_at(const Direction& theta, double lambda) const;

  FeatureVector point_at(const Direction& theta, double lambda) const;

  const FeatureVector& origin() const { return x0_; }
  const AdversarialPredicate& predicate() const { return pred_; }
  const SearchParams& params() const { return params_; }
  Oracle& oracle() const { return oracle_; }
  std::size_t dimension() const { return x0_.size(); }

  double default_init_step() const;
  double default_max_lambda() const;

 private:
  double resolve_tolerance(const SearchParams& p, double reference) const;

  Oracle& oracle_;
  FeatureVector x0_;
  AdversarialPredicate pred_;
  SearchParams params_;
};

/// Anything that can evaluate a direction objective near a hint value.
/// The optimizer only sees this interface, so synthetic objectives can
/// stand in for the oracle in tests.
class DirectionObjective {
 public:
  virtual ~DirectionObjective() = default;
  /// Evaluates the objective at theta (not necessarily normalised), using
  /// `hint` as a warm start.
  virtual DistanceEval evaluate(std::span<const double> theta,
                                double hint) = 0;
};

/// DirectionObjective backed by BoundaryDistance::evaluate_local.
class LocalBoundaryObjective final : public DirectionObjective {
 public:
  LocalBoundaryObjective(const BoundaryDistance& distance, SearchParams params)
      : distance_(distance), params_(params) {}

  DistanceEval evaluate(std::span<const double> theta, double hint) override {
    return distance_.evaluate_local(theta, hint, params_);
  }

  void set_params(const SearchParams& p) { params_ = p; }
  const SearchParams& params() const { return params_; }

 private:
  const BoundaryDistance& distance_;
  SearchParams params_;
};

struct InitialDirection {
  Direction theta;
  DistanceEval eval;
  /// Index into the candidate list, or -1 for a random direction.
  std::ptrdiff_t candidate_index = -1;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Tries up to n_tries candidates whose label satisfies the predicate
/// (nearest first), evaluating g along (x - x0) with the step ||x - x0||/20
/// and ceiling ||x - x0||. Returns the smallest Found value. Throws
/// InitializationError when nothing is found.
InitialDirection initialize_direction(const BoundaryDistance& distance,
                                      std::span<const DatasetRecord> candidates,
                                      int n_tries);

}  // namespace hardlabel

#endif  // HARDLABEL_BOUNDARY_DISTANCE_HPP

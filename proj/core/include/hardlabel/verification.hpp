#ifndef HARDLABEL_VERIFICATION_HPP
#define HARDLABEL_VERIFICATION_HPP

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hardlabel/boundary_distance.hpp"
#include "hardlabel/models.hpp"
#include "hardlabel/rgf.hpp"

namespace hardlabel {

// Independent checks for attack results. Everything here that needs the
// model queries an uncounted clone of the oracle it is given.

enum class GroundTruthMethod { kClosedForm, kBruteForce };

std::string_view method_name(GroundTruthMethod m);

struct GroundTruth {
  double min_distortion = 0.0;
  /// Set when the minimiser is unique (closed form) or for the best sampled
  /// direction (brute force).
  std::optional<std::vector<double>> argmin_direction;
  GroundTruthMethod method = GroundTruthMethod::kClosedForm;
  /// Direction-sampling resolution for brute force, 0 for closed form.
  double grid_resolution = 0.0;
};

/// Smallest positive lambda with ||x0 + lambda*theta||^2 = r2; nullopt when
/// the ray never crosses the sphere.
std::optional<double> analytic_distance(const RadialModel& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta);
/// (b - w.x0) / (w.theta) when the ray moves from x0's side towards the
/// other one; nullopt otherwise (including w.theta == 0).
std::optional<double> analytic_distance(const LinearModel& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta);
/// Dispatches on radial/linear; throws InvalidInput for other models.
std::optional<double> analytic_distance(const Model& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta);

/// Exact minimum distortion for radial and linear models; nullopt for
/// other model kinds.
std::optional<GroundTruth> closed_form_min_distortion(
    const Model& model, std::span<const double> x0);

class NoAdversarialFound : public Error {
 public:
  using Error::Error;
};

struct BruteForceOptions {
  std::size_t n_directions = 720;
  /// Evaluation parameters; the tolerance should be fine (default 1e-6).
  SearchParams params = SearchParams::absolute(1e-6);
  /// Sampling error grows quickly with d, so d > 3 must be opted into.
  bool allow_high_dimension = false;
};

/// Evaluates g from scratch on deterministic sphere directions and keeps
/// the minimum. Throws NoAdversarialFound if no direction hits a boundary.
GroundTruth brute_force_min_distortion(const Oracle& oracle,
                                       std::span<const double> x0,
                                       const AdversarialPredicate& pred,
                                       const BruteForceOptions& options = {});

/// Central differences (g(theta + h e_i) - g(theta - h e_i)) / (2h).
/// Requires h > 10 * tolerance (the evaluation precision). Throws
/// InvalidInput when that fails and Error listing the coordinates whose
/// evaluations found no boundary.
std::vector<double> finite_difference_gradient(DirectionObjective& objective,
                                               std::span<const double> theta,
                                               double g_hint, double h,
                                               double tolerance);

struct TraceMetrics {
  struct Gap {
    std::uint64_t queries = 0;
    double gap = 0.0;
  };
  std::vector<Gap> gaps;
  /// Reference the gaps were taken against (ground truth or final g).
  double reference = 0.0;
  bool relative_to_final = false;
  /// First cumulative query count with gap below 1e-1 and 1e-2.
  std::optional<std::uint64_t> first_below_1e1;
  std::optional<std::uint64_t> first_below_1e2;
};

/// Gap series of a trace against the ground truth, or against the final
/// trace value when no ground truth is given. Throws ContractError on an
/// empty trace.
TraceMetrics convergence_trace_metrics(
    std::span<const TracePoint> trace,
    const std::optional<GroundTruth>& ground_truth);

}  // namespace hardlabel

#endif  // HARDLABEL_VERIFICATION_HPP

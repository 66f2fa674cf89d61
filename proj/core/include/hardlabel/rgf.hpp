#ifndef HARDLABEL_RGF_HPP
#define HARDLABEL_RGF_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hardlabel/boundary_distance.hpp"

namespace hardlabel {

using Rng = std::mt19937_64;

struct RgfConfig {
  double beta = 0.005;  // smoothing radius of the Gaussian perturbation
  int q = 20;           // perturbations averaged per gradient estimate
  double eta0 = 0.2;
  double backtrack_factor = 0.5;
  double forward_factor = 2.0;
  int max_line_search_steps = 15;
  std::uint64_t query_budget = 20000;
  int max_iterations = 100000;
  std::uint64_t seed = 0;
  SearchParams distance_params;

  double beta_floor = 1e-4;
  /// Consecutive failed steps at the beta floor that end the run.
  int max_consecutive_failures = 10;
  /// Absolute tolerance of the final re-evaluation of g.
  double final_tolerance = 1e-6;
  int init_tries = 20;

  void validate() const;
};

struct GradientEstimate {
  std::vector<double> vector;
  std::uint64_t queries_used = 0;
  int samples_used = 0;
  int samples_dropped = 0;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

struct OptState {
  std::vector<double> theta;  // unit norm
  double g_value = 0.0;
  double eta = 0.0;
  int iteration = 0;
};

struct LineSearchResult {
  OptState state;
  bool step_failed = false;
  int evaluations = 0;
};

enum class AttackStatus { kConverged, kBudgetExhausted, kInitFailed };

std::string_view status_name(AttackStatus s);
/// Inverse of status_name; throws InvalidInput on unknown names.
AttackStatus parse_status(std::string_view name);

struct TracePoint {
  std::uint64_t queries = 0;
  double g_value = 0.0;
};

struct AttackResult {
  FeatureVector x_star;         // empty when no adversarial point exists
  std::vector<double> theta_star;
  double distortion = 0.0;      // ||x_star - x0||, NaN when x_star is empty
  double g_final = 0.0;         // final g at the fine tolerance
  std::uint64_t total_queries = 0;
  int iterations = 0;
  std::vector<TracePoint> trace;  // init point plus every accepted step
  AttackStatus status = AttackStatus::kInitFailed;
  bool reconstruction_clamped = false;

  bool has_adversarial() const { return !x_star.empty(); }
};

struct IterationInfo {
  int iteration = 0;
  std::span<const double> theta;
  double g_value = 0.0;
  double beta = 0.0;
  std::uint64_t queries = 0;
  bool step_failed = false;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

/// i.i.d. standard normal entries; not normalised.
std::vector<double> sample_gaussian_direction(std::size_t d, Rng& rng);

/// q-sample average of (g(theta + beta*u) - g(theta)) / beta * u.
/// Samples whose evaluation finds no boundary are dropped. Throws
/// EstimationError when every sample is dropped.
GradientEstimate estimate_gradient(DirectionObjective& objective,
                                   std::span<const double> theta,
                                   double g_theta, double beta, int q,
                                   Rng& rng);

/// Backtracking line search along -grad. Grows eta by forward_factor while
/// g keeps strictly decreasing, otherwise shrinks it by backtrack_factor
/// until a decrease appears. On failure the state is returned unchanged.
LineSearchResult line_search_step(DirectionObjective& objective,
                                  const OptState& state,
                                  const GradientEstimate& grad,
                                  const RgfConfig& config);

/// clamp(x0 + g * theta). theta must be unit-norm within 1e-9.
FeatureVector reconstruct_adversarial(std::span<const double> x0,
                                      std::span<const double> theta,
                                      double g_value,
                                      const DomainBounds& bounds);

/// Initial direction from n_tries seeded Gaussian directions, used when no
/// labelled candidates are available. Each walk is capped at 200 fine steps.
InitialDirection initialize_random_direction(const BoundaryDistance& distance,
                                             int n_tries, Rng& rng);

/// Hard-label attack: initialise theta, then alternate gradient estimation
/// and line search until the query budget, the iteration cap, or repeated
/// failures at the beta floor stop it. The oracle's counter is used for
/// the budget; verification work must go through an uncounted handle.
AttackResult rgf_attack(Oracle& oracle, std::span<const double> x0,
                        const AdversarialPredicate& pred,
                        std::span<const DatasetRecord> candidates,
                        const RgfConfig& config,
                        const IterationObserver& observer = {});

}  // namespace hardlabel

#endif  // HARDLABEL_RGF_HPP

#include "hardlabel/rgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace hardlabel {

void RgfConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("rgf: beta must be positive");
  if (q < 1) throw ConfigError("rgf: q must be at least 1");
  if (!(eta0 > 0.0)) throw ConfigError("rgf: eta0 must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("rgf: backtrack_factor must lie in (0, 1)");
  }
  if (!(forward_factor > 1.0)) {
    throw ConfigError("rgf: forward_factor must exceed 1");
  }
  if (max_line_search_steps < 1) {
    throw ConfigError("rgf: max_line_search_steps must be at least 1");
  }
  if (query_budget == 0) throw ConfigError("rgf: query budget must be positive");
  if (max_iterations < 0) throw ConfigError("rgf: max_iterations must be >= 0");
  if (!(beta_floor > 0.0) || beta_floor > beta) {
    throw ConfigError("rgf: beta_floor must lie in (0, beta]");
  }
  if (!(final_tolerance > 0.0)) {
    throw ConfigError("rgf: final_tolerance must be positive");
  }
  if (init_tries < 1) throw ConfigError("rgf: init_tries must be at least 1");
  distance_params.validate();
}

std::string_view status_name(AttackStatus s) {
  switch (s) {
    case AttackStatus::kConverged: return "converged";
    case AttackStatus::kBudgetExhausted: return "budget_exhausted";
    case AttackStatus::kInitFailed: return "init_failed";
  }
  return "init_failed";
}

AttackStatus parse_status(std::string_view name) {
  if (name == "converged") return AttackStatus::kConverged;
  if (name == "budget_exhausted") return AttackStatus::kBudgetExhausted;
  if (name == "init_failed") return AttackStatus::kInitFailed;
  throw InvalidInput("unknown attack status '" + std::string(name) + "'");
}

std::vector<double> sample_gaussian_direction(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(d);
  for (double& v : u) v = normal(rng);
  return u;
}

GradientEstimate estimate_gradient(DirectionObjective& objective,
                                   std::span<const double> theta,
                                   double g_theta, double beta, int q,
                                   Rng& rng) {
  const std::size_t d = theta.size();
  GradientEstimate est;
  est.vector.assign(d, 0.0);
  std::vector<double> probe(d);
  for (int i = 0; i < q; ++i) {
    std::vector<double> u = sample_gaussian_direction(d, rng);
    for (std::size_t j = 0; j < d; ++j) probe[j] = theta[j] + beta * u[j];
    DistanceEval e = objective.evaluate(probe, g_theta);
    est.queries_used += e.queries_used;
    if (!e.found()) {
      ++est.samples_dropped;
      continue;
    }
    const double scale = (e.value - g_theta) / beta;
    for (std::size_t j = 0; j < d; ++j) est.vector[j] += scale * u[j];
    ++est.samples_used;
  }
  if (est.samples_used == 0) {
    throw EstimationError("gradient estimate: all " + std::to_string(q) +
                          " samples failed to find a boundary");
  }
  for (double& v : est.vector) v /= est.samples_used;
  return est;
}

namespace {

struct Trial {
  std::vector<double> theta;
  double g = 0.0;
};

}  // namespace

LineSearchResult line_search_step(DirectionObjective& objective,
                                  const OptState& state,
                                  const GradientEstimate& grad,
                                  const RgfConfig& config) {
  LineSearchResult out{state, true, 0};
  if (std::all_of(grad.vector.begin(), grad.vector.end(),
                  [](double v) { return v == 0.0; })) {
    return out;
  }
  const std::size_t d = state.theta.size();

  auto attempt = [&](double eta) -> std::optional<Trial> {
    std::vector<double> next(d);
    for (std::size_t j = 0; j < d; ++j) {
      next[j] = state.theta[j] - eta * grad.vector[j];
    }
    double n = norm2(next);
    if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
    for (double& v : next) v /= n;
    ++out.evaluations;
    DistanceEval e = objective.evaluate(next, state.g_value);
    if (!e.found()) return std::nullopt;
    return Trial{std::move(next), e.value};
  };

  double eta = state.eta;
  std::optional<Trial> first = attempt(eta);
  if (first && first->g < state.g_value) {
    Trial best = std::move(*first);
    double best_eta = eta;
    for (int k = 0; k < config.max_line_search_steps; ++k) {
      double bigger = best_eta * config.forward_factor;
      std::optional<Trial> t = attempt(bigger);
      if (!t || !(t->g < best.g)) break;
      best = std::move(*t);
      best_eta = bigger;
    }
    out.state.theta = std::move(best.theta);
    out.state.g_value = best.g;
    out.state.eta = best_eta;
    out.step_failed = false;
    return out;
  }
  for (int k = 0; k < config.max_line_search_steps; ++k) {
    eta *= config.backtrack_factor;
    std::optional<Trial> t = attempt(eta);
    if (t && t->g < state.g_value) {
      out.state.theta = std::move(t->theta);
      out.state.g_value = t->g;
      out.state.eta = eta;
      out.step_failed = false;
      return out;
    }
  }
  return out;
}

FeatureVector reconstruct_adversarial(std::span<const double> x0,
                                      std::span<const double> theta,
                                      double g_value,
                                      const DomainBounds& bounds) {
  Direction unit = Direction::from_unit(theta);
  if (!(g_value > 0.0)) throw InvalidInput("reconstruct: g must be positive");
  if (unit.size() != x0.size()) {
    throw InvalidInput("reconstruct: dimension mismatch");
  }
  FeatureVector x(x0.begin(), x0.end());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += g_value * unit[i];
  return bounds.clamp(x);
}

InitialDirection initialize_random_direction(const BoundaryDistance& distance,
                                             int n_tries, Rng& rng) {
  // Cap each walk at kRandomInitMaxSteps fine steps so a direction that
  // never meets the boundary cannot drain the budget.
  constexpr double kRandomInitMaxSteps = 200.0;
  SearchParams p = distance.params();
  const double step = p.init_step.value_or(distance.default_init_step());
  p.max_lambda = std::min(p.max_lambda.value_or(distance.default_max_lambda()),
                          kRandomInitMaxSteps * step);
  std::optional<InitialDirection> best;
  try {
    for (int i = 0; i < n_tries; ++i) {
      Direction theta = Direction::normalized(
          sample_gaussian_direction(distance.dimension(), rng));
      DistanceEval e = distance.evaluate_initial(theta, p);
      if (e.found() && (!best || e.value < best->eval.value)) {
        best = InitialDirection{theta, e, -1};
      }
    }
  } catch (const QueryBudgetExhausted&) {
    if (!best) throw;
  }
  if (!best) {
    throw InitializationError("initialization: no random direction reached "
                              "the boundary");
  }
  return *best;
}

namespace {

// Restores the oracle's query limit when an attack returns or throws.
class LimitGuard {
 public:
  explicit LimitGuard(Oracle& o) : oracle_(o), saved_(o.query_limit()) {}
  ~LimitGuard() { oracle_.set_query_limit(saved_); }
  LimitGuard(const LimitGuard&) = delete;
  LimitGuard& operator=(const LimitGuard&) = delete;

 private:
  Oracle& oracle_;
  std::optional<std::uint64_t> saved_;
};

}  // namespace

AttackResult rgf_attack(Oracle& oracle, std::span<const double> x0,
                        const AdversarialPredicate& pred,
                        std::span<const DatasetRecord> candidates,
                        const RgfConfig& config,
                        const IterationObserver& observer) {
  config.validate();
  FeatureVector origin(x0.begin(), x0.end());
  {
    Oracle check = oracle.uncounted();
    if (pred.holds(check.classify(origin))) {
      throw InvalidInput("rgf_attack: x0 already satisfies the predicate");
    }
  }

  LimitGuard guard(oracle);
  const std::uint64_t start = oracle.query_count();
  const std::uint64_t reserve = std::min<std::uint64_t>(64, config.query_budget / 4);
  oracle.set_query_limit(start + config.query_budget - reserve);

  BoundaryDistance distance(oracle, origin, pred, config.distance_params);
  Rng rng(config.seed);
  AttackResult result;
  result.distortion = std::numeric_limits<double>::quiet_NaN();

  std::optional<InitialDirection> init;
  try {
    init = candidates.empty()
               ? initialize_random_direction(distance, config.init_tries, rng)
               : initialize_direction(distance, candidates, config.init_tries);
  } catch (const InitializationError&) {
    result.status = AttackStatus::kInitFailed;
  } catch (const QueryBudgetExhausted&) {
    result.status = AttackStatus::kBudgetExhausted;
  }
  if (!init) {
    result.total_queries = oracle.query_count() - start;
    return result;
  }

  OptState state{init->theta.vector(), init->eval.value, config.eta0, 0};
  result.trace.push_back({oracle.query_count() - start, state.g_value});

  LocalBoundaryObjective objective(distance, config.distance_params);
  double beta = config.beta;
  int failures_at_floor = 0;
  result.status = AttackStatus::kConverged;
  try {
    while (state.iteration < config.max_iterations) {
      bool failed = true;
      try {
        GradientEstimate grad = estimate_gradient(objective, state.theta,
                                                  state.g_value, beta,
                                                  config.q, rng);
        LineSearchResult ls = line_search_step(objective, state, grad, config);
        failed = ls.step_failed;
        if (!failed) state = std::move(ls.state);
      } catch (const EstimationError&) {
        failed = true;
      }
      ++state.iteration;
      if (failed) {
        state.eta = config.eta0;
        if (beta > config.beta_floor) {
          beta = std::max(beta * 0.5, config.beta_floor);
        } else {
          ++failures_at_floor;
        }
      } else {
        failures_at_floor = 0;
        result.trace.push_back({oracle.query_count() - start, state.g_value});
      }
      if (observer) {
        observer(IterationInfo{state.iteration, state.theta, state.g_value,
                               beta, oracle.query_count() - start, failed});
      }
      if (failures_at_floor >= config.max_consecutive_failures) break;
    }
  } catch (const QueryBudgetExhausted&) {
    result.status = AttackStatus::kBudgetExhausted;
  }

  // Re-evaluate at the fine tolerance using the reserved queries.
  oracle.set_query_limit(start + config.query_budget);
  double g_final = state.g_value;
  try {
    DistanceEval fine = distance.evaluate_local(
        state.theta, state.g_value, SearchParams{
            .alpha_ratio = config.distance_params.alpha_ratio,
            .init_step = std::nullopt,
            .tolerance = config.final_tolerance,
            .tolerance_mode = ToleranceMode::kAbsolute,
            .max_lambda = config.distance_params.max_lambda,
            .max_expansion_steps = config.distance_params.max_expansion_steps});
    if (fine.found()) g_final = fine.value;
  } catch (const QueryBudgetExhausted&) {
    result.status = AttackStatus::kBudgetExhausted;
  }

  result.theta_star = state.theta;
  result.g_final = g_final;
  result.iterations = state.iteration;
  FeatureVector unclamped(origin);
  for (std::size_t i = 0; i < unclamped.size(); ++i) {
    unclamped[i] += g_final * state.theta[i];
  }
  result.x_star = reconstruct_adversarial(origin, state.theta, g_final,
                                          oracle.bounds());
  result.reconstruction_clamped = result.x_star != unclamped;
  result.distortion = distance2(result.x_star, origin);
  result.total_queries = oracle.query_count() - start;
  return result;
}

}  // namespace hardlabel

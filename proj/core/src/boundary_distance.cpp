#include "hardlabel/boundary_distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hardlabel {

Direction Direction::normalized(std::span<const double> v) {
  if (v.empty() || !all_finite(v)) {
    throw InvalidInput("direction: empty or non-finite");
  }
  double n = norm2(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("direction: zero norm");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return Direction(std::move(out));
}

Direction Direction::from_unit(std::span<const double> v) {
  if (v.empty() || !all_finite(v) || std::abs(norm2(v) - 1.0) > 1e-9) {
    throw InvalidInput("direction: expected a unit-norm vector");
  }
  return Direction(std::vector<double>(v.begin(), v.end()));
}

void SearchParams::validate() const {
  if (!(alpha_ratio > 0.0 && alpha_ratio < 1.0)) {
    throw ConfigError("search: alpha_ratio must lie in (0, 1)");
  }
  if (!(tolerance > 0.0)) throw ConfigError("search: tolerance must be positive");
  if (max_lambda && !(*max_lambda > 0.0)) {
    throw ConfigError("search: max_lambda must be positive");
  }
  if (init_step && !(*init_step > 0.0)) {
    throw ConfigError("search: init_step must be positive");
  }
  if (max_expansion_steps < 1) {
    throw ConfigError("search: max_expansion_steps must be at least 1");
  }
}

BoundaryDistance::BoundaryDistance(Oracle& oracle, FeatureVector x0,
                                   AdversarialPredicate pred,
                                   SearchParams params)
    : oracle_(oracle), x0_(std::move(x0)), pred_(pred), params_(params) {
  params_.validate();
  if (x0_.empty() || !all_finite(x0_)) {
    throw InvalidInput("boundary distance: x0 empty or non-finite");
  }
  std::size_t d = oracle_.dimension();
  if (d != 0 && d != x0_.size()) {
    throw InvalidInput("boundary distance: x0 has dimension " +
                       std::to_string(x0_.size()) + ", oracle expects " +
                       std::to_string(d));
  }
}

double BoundaryDistance::default_init_step() const {
  return 0.02 * std::sqrt(static_cast<double>(x0_.size()));
}

double BoundaryDistance::default_max_lambda() const {
  return oracle_.bounds().diameter(x0_.size()).value_or(1e3);
}

double BoundaryDistance::resolve_tolerance(const SearchParams& p,
                                           double reference) const {
  if (p.tolerance_mode == ToleranceMode::kAbsolute) return p.tolerance;
  return p.tolerance * reference;
}

FeatureVector BoundaryDistance::point_at(const Direction& theta,
                                         double lambda) const {
  FeatureVector x(x0_);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += lambda * theta[i];
  return oracle_.clamp(x);
}

bool BoundaryDistance::adversarial_at(const Direction& theta,
                                      double lambda) const {
  return pred_.holds(oracle_.classify(point_at(theta, lambda)));
}

double BoundaryDistance::binary_search_bracket(const Direction& theta,
                                               double v_left, double v_right,
                                               double tolerance) const {
  if (!(tolerance > 0.0)) throw ContractError("binary search: tolerance <= 0");
  if (!(v_left < v_right)) {
    throw ContractError("binary search: need v_left < v_right");
  }
  // Fix the bisection count up front so rounding in the midpoints cannot
  // change the number of queries.
  const double width = v_right - v_left;
  int steps = 0;
  while (std::ldexp(width, -steps) > tolerance) ++steps;
  for (int i = 0; i < steps; ++i) {
    double mid = 0.5 * (v_left + v_right);
    if (!(mid > v_left && mid < v_right)) break;
    if (adversarial_at(theta, mid)) {
      v_right = mid;
    } else {
      v_left = mid;
    }
  }
  return v_right;
}

double BoundaryDistance::checked_binary_search(const Direction& theta,
                                               double v_left, double v_right,
                                               double tolerance) const {
  if (!(v_left < v_right)) {
    throw ContractError("binary search: need v_left < v_right");
  }
  bool left_holds = adversarial_at(theta, v_left);
  bool right_holds = adversarial_at(theta, v_right);
  if (left_holds || !right_holds) {
    throw ContractError(
        "binary search: bracket does not straddle the boundary (predicate " +
        std::string(left_holds ? "holds" : "fails") + " at v_left, " +
        (right_holds ? "holds" : "fails") + " at v_right)");
  }
  return binary_search_bracket(theta, v_left, v_right, tolerance);
}

DistanceEval BoundaryDistance::evaluate_initial(const Direction& theta) const {
  return evaluate_initial(theta, params_);
}

DistanceEval BoundaryDistance::evaluate_initial(
    const Direction& theta, const SearchParams& params) const {
  params.validate();
  if (theta.size() != x0_.size()) {
    throw InvalidInput("evaluate_initial: direction dimension mismatch");
  }
  const std::uint64_t start = oracle_.query_count();
  const double step = params.init_step.value_or(default_init_step());
  const double ceiling = params.max_lambda.value_or(default_max_lambda()) *
                         (1.0 + 1e-12);
  DistanceEval out;

  FeatureVector previous;
  for (std::uint64_t i = 1;; ++i) {
    const double lambda = static_cast<double>(i) * step;
    if (lambda > ceiling) break;
    FeatureVector p = point_at(theta, lambda);
    if (!previous.empty() && p == previous) break;  // pinned by the bounds
    if (pred_.holds(oracle_.classify(p))) {
      const double lo = static_cast<double>(i - 1) * step;
      out.value = binary_search_bracket(theta, lo, lambda,
                                        resolve_tolerance(params, lambda));
      out.status = DistanceStatus::kFound;
      break;
    }
    previous = std::move(p);
  }
  out.queries_used = oracle_.query_count() - start;
  return out;
}

DistanceEval BoundaryDistance::evaluate_local(std::span<const double> theta,
                                              double v_prev) const {
  return evaluate_local(theta, v_prev, params_);
}

DistanceEval BoundaryDistance::evaluate_local(std::span<const double> raw_theta,
                                              double v_prev,
                                              const SearchParams& params) const {
  params.validate();
  if (!(v_prev > 0.0) || !std::isfinite(v_prev)) {
    throw InvalidInput("evaluate_local: v_prev must be positive and finite");
  }
  if (raw_theta.size() != x0_.size()) {
    throw InvalidInput("evaluate_local: direction dimension mismatch");
  }
  const Direction theta = Direction::normalized(raw_theta);
  const std::uint64_t start = oracle_.query_count();
  const double alpha = params.alpha_ratio;
  const double ceiling = params.max_lambda.value_or(default_max_lambda());
  DistanceEval out;

  double v_left = 0.0;
  double v_right = 0.0;
  FeatureVector p = point_at(theta, v_prev);
  if (!pred_.holds(oracle_.classify(p))) {
    // Still on the original side: grow v_right until the predicate holds.
    v_left = v_prev;
    v_right = (1.0 + alpha) * v_prev;
    FeatureVector previous = std::move(p);
    for (int steps = 0;; ++steps) {
      if (v_right > ceiling || steps >= params.max_expansion_steps) {
        out.queries_used = oracle_.query_count() - start;
        return out;
      }
      FeatureVector q = point_at(theta, v_right);
      if (q == previous) {  // pinned by the bounds
        out.queries_used = oracle_.query_count() - start;
        return out;
      }
      if (pred_.holds(oracle_.classify(q))) break;
      previous = std::move(q);
      v_right *= 1.0 + alpha;
    }
  } else {
    // Already adversarial: shrink v_left until the predicate fails. After
    // max_expansion_steps fall back to x0 itself, which is not adversarial.
    v_right = v_prev;
    v_left = (1.0 - alpha) * v_prev;
    for (int steps = 1; adversarial_at(theta, v_left); ++steps) {
      if (steps >= params.max_expansion_steps) {
        v_left = 0.0;
        break;
      }
      v_left *= 1.0 - alpha;
    }
  }

  out.value = binary_search_bracket(theta, v_left, v_right,
                                    resolve_tolerance(params, v_prev));
  out.status = DistanceStatus::kFound;
  out.queries_used = oracle_.query_count() - start;
  return out;
}

InitialDirection initialize_direction(const BoundaryDistance& distance,
                                      std::span<const DatasetRecord> candidates,
                                      int n_tries) {
  const FeatureVector& x0 = distance.origin();
  struct Option {
    std::size_t index;
    double dist;
  };
  std::vector<Option> options;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const DatasetRecord& c = candidates[i];
    if (!distance.predicate().accepts_candidate(c.label)) continue;
    if (c.x.size() != x0.size()) continue;
    double dist = distance2(c.x, x0);
    if (dist > 0.0) options.push_back({i, dist});
  }
  std::stable_sort(options.begin(), options.end(),
                   [](const Option& a, const Option& b) { return a.dist < b.dist; });
  if (n_tries >= 0 && options.size() > static_cast<std::size_t>(n_tries)) {
    options.resize(static_cast<std::size_t>(n_tries));
  }

  std::optional<InitialDirection> best;
  try {
    for (const Option& o : options) {
      std::vector<double> delta(x0.size());
      const auto& x = candidates[o.index].x;
      for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = x[j] - x0[j];
      Direction theta = Direction::normalized(delta);
      // The candidate itself bounds the fine-grained walk.
      SearchParams p = distance.params();
      p.init_step = o.dist / 20.0;
      p.max_lambda = o.dist;
      DistanceEval e = distance.evaluate_initial(theta, p);
      if (e.found() && (!best || e.value < best->eval.value)) {
        best = InitialDirection{theta, e, static_cast<std::ptrdiff_t>(o.index)};
      }
    }
  } catch (const QueryBudgetExhausted&) {
    if (!best) throw;
  }
  if (!best) {
    throw InitializationError("initialization: none of " +
                              std::to_string(options.size()) +
                              " candidate directions reached the boundary");
  }
  return *best;
}

}  // namespace hardlabel

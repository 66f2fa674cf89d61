#include "hardlabel/verification.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hardlabel/sphere_sampling.hpp"

namespace hardlabel {

std::string_view method_name(GroundTruthMethod m) {
  return m == GroundTruthMethod::kClosedForm ? "closed_form" : "brute_force";
}

std::optional<double> analytic_distance(const RadialModel& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta) {
  // lambda^2 + 2 b lambda + c = 0 with b = x0.theta, c = ||x0||^2 - r2.
  const double b = dot(x0, theta);
  const double c = dot(x0, x0) - model.radius_squared();
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  const double near = -b - s;
  const double far = -b + s;
  if (near > 0.0) return near;
  if (far > 0.0) return far;
  return std::nullopt;
}

std::optional<double> analytic_distance(const LinearModel& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta) {
  const double wx = dot(model.weights(), x0);
  const double wt = dot(model.weights(), theta);
  const double gap = model.bias() - wx;
  // Class 0 side needs to move up towards b, class 1 side down.
  if (gap > 0.0 && wt > 0.0) return gap / wt;
  if (gap <= 0.0 && wt < 0.0) {
    double lambda = gap / wt;
    if (lambda > 0.0) return lambda;
  }
  return std::nullopt;
}

std::optional<double> analytic_distance(const Model& model,
                                        std::span<const double> x0,
                                        std::span<const double> theta) {
  if (const auto* r = dynamic_cast<const RadialModel*>(&model)) {
    return analytic_distance(*r, x0, theta);
  }
  if (const auto* l = dynamic_cast<const LinearModel*>(&model)) {
    return analytic_distance(*l, x0, theta);
  }
  throw InvalidInput("analytic_distance: no closed form for model kind '" +
                     std::string(model.kind()) + "'");
}

std::optional<GroundTruth> closed_form_min_distortion(
    const Model& model, std::span<const double> x0) {
  GroundTruth gt;
  gt.method = GroundTruthMethod::kClosedForm;
  if (const auto* r = dynamic_cast<const RadialModel*>(&model)) {
    const double radius = std::sqrt(r->radius_squared());
    const double n = norm2(x0);
    if (n < radius) {
      gt.min_distortion = radius - n;
      if (n > 0.0) {
        std::vector<double> dir(x0.begin(), x0.end());
        for (double& v : dir) v /= n;
        gt.argmin_direction = std::move(dir);
      }
    } else {
      // Outside (class 1): the nearest class-0 point is just inside the
      // sphere along -x0.
      gt.min_distortion = n - radius;
      std::vector<double> dir(x0.begin(), x0.end());
      for (double& v : dir) v /= -n;
      gt.argmin_direction = std::move(dir);
    }
    if (!(gt.min_distortion > 0.0)) return std::nullopt;
    return gt;
  }
  if (const auto* l = dynamic_cast<const LinearModel*>(&model)) {
    const double wn = norm2(l->weights());
    const double gap = l->bias() - dot(l->weights(), x0);
    gt.min_distortion = std::abs(gap) / wn;
    std::vector<double> dir(l->weights());
    const double sign = gap > 0.0 ? 1.0 : -1.0;
    for (double& v : dir) v *= sign / wn;
    gt.argmin_direction = std::move(dir);
    if (!(gt.min_distortion > 0.0)) return std::nullopt;
    return gt;
  }
  return std::nullopt;
}

GroundTruth brute_force_min_distortion(const Oracle& oracle,
                                       std::span<const double> x0,
                                       const AdversarialPredicate& pred,
                                       const BruteForceOptions& options) {
  const std::size_t d = x0.size();
  if (d > 3 && !options.allow_high_dimension) {
    throw InvalidInput("brute force: d = " + std::to_string(d) +
                       " > 3 requires allow_high_dimension");
  }
  if (options.n_directions == 0) {
    throw InvalidInput("brute force: n_directions must be positive");
  }
  Oracle probe = oracle.uncounted();
  BoundaryDistance distance(probe, FeatureVector(x0.begin(), x0.end()), pred,
                            options.params);
  GroundTruth best;
  best.method = GroundTruthMethod::kBruteForce;
  bool found = false;
  for (const auto& dir : sphere_directions(d, options.n_directions)) {
    Direction theta = Direction::normalized(dir);
    DistanceEval e = distance.evaluate_initial(theta);
    if (e.found() && (!found || e.value < best.min_distortion)) {
      best.min_distortion = e.value;
      best.argmin_direction = theta.vector();
      found = true;
    }
  }
  if (!found) {
    throw NoAdversarialFound("brute force: no direction reached an "
                             "adversarial region");
  }
  // Typical spacing between neighbouring directions on S^{d-1}.
  const double n = static_cast<double>(options.n_directions);
  if (d == 1) {
    best.grid_resolution = 0.0;
  } else {
    const double half = 0.5 * static_cast<double>(d);
    const double area = 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
    best.grid_resolution = std::pow(area / n, 1.0 / static_cast<double>(d - 1));
  }
  return best;
}

std::vector<double> finite_difference_gradient(DirectionObjective& objective,
                                               std::span<const double> theta,
                                               double g_hint, double h,
                                               double tolerance) {
  if (!(h > 10.0 * tolerance)) {
    throw InvalidInput("finite differences: step h must exceed 10x the "
                       "evaluation tolerance");
  }
  const std::size_t d = theta.size();
  std::vector<double> grad(d, 0.0);
  std::vector<double> probe(theta.begin(), theta.end());
  std::string failed;
  for (std::size_t i = 0; i < d; ++i) {
    probe[i] = theta[i] + h;
    DistanceEval plus = objective.evaluate(probe, g_hint);
    probe[i] = theta[i] - h;
    DistanceEval minus = objective.evaluate(probe, g_hint);
    probe[i] = theta[i];
    if (!plus.found() || !minus.found()) {
      failed += (failed.empty() ? "" : ", ") + std::to_string(i);
      continue;
    }
    grad[i] = (plus.value - minus.value) / (2.0 * h);
  }
  if (!failed.empty()) {
    throw Error("finite differences: no boundary at coordinates " + failed);
  }
  return grad;
}

TraceMetrics convergence_trace_metrics(
    std::span<const TracePoint> trace,
    const std::optional<GroundTruth>& ground_truth) {
  if (trace.empty()) throw ContractError("trace metrics: empty trace");
  TraceMetrics m;
  m.relative_to_final = !ground_truth.has_value();
  m.reference = ground_truth ? ground_truth->min_distortion
                             : trace.back().g_value;
  for (const TracePoint& p : trace) {
    double gap = p.g_value - m.reference;
    m.gaps.push_back({p.queries, gap});
    if (!m.first_below_1e1 && gap < 1e-1) m.first_below_1e1 = p.queries;
    if (!m.first_below_1e2 && gap < 1e-2) m.first_below_1e2 = p.queries;
  }
  return m;
}

}  // namespace hardlabel

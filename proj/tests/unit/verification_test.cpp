#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hardlabel/model_io.hpp"
#include "hardlabel/models.hpp"
#include "hardlabel/rgf.hpp"
#include "hardlabel/sphere_sampling.hpp"
#include "hardlabel/verification.hpp"

using namespace hardlabel;

namespace {

AdversarialPredicate untargeted0() {
  return AdversarialPredicate::untargeted(Label{0});
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// Gradient of g(theta / ||theta||) for the sphere ||x||^2 = r2, evaluated
// at a unit theta, by differentiating the smallest positive root.
std::vector<double> sphere_gradient(const std::vector<double>& x0,
                                    const std::vector<double>& theta, double r2) {
  double b = std::inner_product(x0.begin(), x0.end(), theta.begin(), 0.0);
  double c = std::inner_product(x0.begin(), x0.end(), x0.begin(), 0.0) - r2;
  double dg_db = -1.0 + b / std::sqrt(b * b - c);
  std::vector<double> g(x0.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = dg_db * (x0[i] - b * theta[i]);
  return g;
}

}  // namespace

TEST(Analytic, RadialFromOrigin) {
  RadialModel m;
  for (auto theta : {std::vector<double>{1.0, 0.0}, std::vector<double>{0.6, -0.8}}) {
    EXPECT_NEAR(*analytic_distance(m, std::vector<double>{0.0, 0.0}, theta), 0.6324555,
                1e-7);
  }
}

TEST(Analytic, RadialOffset) {
  RadialModel m;
  EXPECT_NEAR(*analytic_distance(m, std::vector<double>{0.1, 0.1},
                                 std::vector<double>{1.0, 0.0}),
              0.5244998, 1e-7);
}

TEST(Analytic, RadialFromOutsideMovingAway) {
  RadialModel m;
  // Outside the sphere the adversarial side is the interior.
  auto inward = analytic_distance(m, std::vector<double>{1.0, 0.0},
                                  std::vector<double>{-1.0, 0.0});
  ASSERT_TRUE(inward.has_value());
  EXPECT_NEAR(*inward, 1.0 - std::sqrt(0.4), 1e-12);
  EXPECT_FALSE(analytic_distance(m, std::vector<double>{1.0, 0.0},
                                 std::vector<double>{1.0, 0.0}));
}

TEST(Analytic, LinearCrossingAndParallel) {
  LinearModel m({1.0, 0.0}, 0.5);
  EXPECT_NEAR(*analytic_distance(m, std::vector<double>{0.0, 0.0},
                                 std::vector<double>{1.0, 0.0}),
              0.5, 1e-15);
  EXPECT_FALSE(analytic_distance(m, std::vector<double>{0.0, 0.0},
                                 std::vector<double>{0.0, 1.0}));
  EXPECT_FALSE(analytic_distance(m, std::vector<double>{0.0, 0.0},
                                 std::vector<double>{-1.0, 0.0}));
}

TEST(Analytic, DispatchRejectsOtherModels) {
  EXPECT_THROW(analytic_distance(*builtin::two_stump_gbdt(), std::vector<double>{0.5, 0.5},
                                 std::vector<double>{1.0, 0.0}),
               InvalidInput);
}

TEST(Analytic, AgreesWithEvaluateInitialOnRandomCases) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto radial = std::make_shared<RadialModel>(0.4, 3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x0 = {0.2 * n(rng), 0.2 * n(rng), 0.2 * n(rng)};
    if (norm(x0) > 0.6) continue;
    Oracle o(radial);
    BoundaryDistance bd(o, x0, untargeted0(), SearchParams::absolute(1e-6));
    Direction theta = Direction::normalized(std::vector<double>{n(rng), n(rng), n(rng)});
    DistanceEval e = bd.evaluate_initial(theta);
    ASSERT_TRUE(e.found());
    ASSERT_NEAR(e.value, *analytic_distance(*radial, x0, theta.values()), 1e-6);
  }
}

TEST(ClosedForm, RadialAndLinear) {
  auto r = closed_form_min_distortion(RadialModel(), std::vector<double>{0.1, 0.1});
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->min_distortion, std::sqrt(0.4) - std::sqrt(0.02), 1e-12);
  EXPECT_EQ(r->method, GroundTruthMethod::kClosedForm);
  auto l = closed_form_min_distortion(LinearModel({3.0, 4.0}, 1.0),
                                      std::vector<double>{0.0, 0.0});
  ASSERT_TRUE(l);
  EXPECT_NEAR(l->min_distortion, 0.2, 1e-12);
  EXPECT_FALSE(closed_form_min_distortion(*builtin::two_stump_gbdt(),
                                          std::vector<double>{0.5, 0.5}));
}

TEST(BruteForce, OffsetSphere) {
  Oracle o(std::make_shared<RadialModel>(0.4, 2));
  GroundTruth gt = brute_force_min_distortion(o, std::vector<double>{0.1, 0.1},
                                              untargeted0());
  EXPECT_NEAR(gt.min_distortion, 0.4910, 2e-3);
  EXPECT_EQ(o.query_count(), 0u);
  EXPECT_GT(gt.grid_resolution, 0.0);
}

TEST(BruteForce, HalfSpace) {
  Oracle o(builtin::half_space(2));
  GroundTruth gt = brute_force_min_distortion(o, std::vector<double>{0.0, 0.0},
                                              untargeted0());
  EXPECT_NEAR(gt.min_distortion, 0.5, 2e-3);
}

TEST(BruteForce, TwoStumpCornerMatchesDenseGrid) {
  auto m = builtin::two_stump_gbdt();
  // Dense grid first: the nearest class-1 grid point sits just past the
  // corner (0.6, 0.6).
  double grid = 1e9;
  for (int i = 0; i <= 500; ++i) {
    for (int j = 0; j <= 500; ++j) {
      std::vector<double> p = {0.5 + i * 1e-3, 0.5 + j * 1e-3};
      if (m->predict(p).value == 1) grid = std::min(grid, std::hypot(p[0] - 0.5, p[1] - 0.5));
    }
  }
  ASSERT_NEAR(grid, std::hypot(0.1, 0.1), 2e-3);
  Oracle o(m);
  GroundTruth gt = brute_force_min_distortion(o, std::vector<double>{0.5, 0.5},
                                              untargeted0());
  EXPECT_NEAR(gt.min_distortion, 0.1414, 2e-3);
  ASSERT_TRUE(gt.argmin_direction);
  EXPECT_NEAR((*gt.argmin_direction)[0], std::sqrt(0.5), 0.02);
}

TEST(BruteForce, HighDimensionNeedsOptIn) {
  Oracle o(std::make_shared<RadialModel>(0.4, 4));
  std::vector<double> x0(4, 0.0);
  EXPECT_THROW(brute_force_min_distortion(o, x0, untargeted0()), InvalidInput);
  BruteForceOptions opts;
  opts.allow_high_dimension = true;
  opts.n_directions = 200;
  EXPECT_NEAR(brute_force_min_distortion(o, x0, untargeted0(), opts).min_distortion,
              std::sqrt(0.4), 1e-5);
}

TEST(BruteForce, NoBoundaryAnywhere) {
  Oracle o(std::make_shared<RadialModel>(1e8, 2));
  BruteForceOptions opts;
  opts.n_directions = 8;
  opts.params.max_lambda = 2.0;
  EXPECT_THROW(brute_force_min_distortion(o, std::vector<double>{0.0, 0.0},
                                          untargeted0(), opts),
               NoAdversarialFound);
}

TEST(BruteForce, AttackNeverBeatsGroundTruth) {
  struct Case {
    std::shared_ptr<const Model> model;
    std::vector<double> x0;
  };
  std::vector<Case> cases = {
      {std::make_shared<RadialModel>(0.4, 2), {0.1, 0.1}},
      {builtin::half_space(2), {0.0, 0.0}},
      {builtin::two_stump_gbdt(), {0.5, 0.5}},
      {std::make_shared<RadialModel>(0.4, 3), {0.1, 0.0, -0.2}},
  };
  for (const Case& c : cases) {
    Oracle o(c.model);
    Label y0 = o.uncounted().classify(c.x0);
    auto pred = AdversarialPredicate::untargeted(y0);
    GroundTruth gt = brute_force_min_distortion(o, c.x0, pred);
    RgfConfig cfg;
    cfg.seed = 17;
    AttackResult r = rgf_attack(o, c.x0, pred, {}, cfg);
    ASSERT_TRUE(r.has_adversarial());
    EXPECT_GE(r.distortion, gt.min_distortion * (1.0 - 2.0 * gt.grid_resolution) - 1e-6)
        << c.model->kind();
  }
}

TEST(FiniteDifference, ConstantRadialIsFlat) {
  Oracle o(std::make_shared<RadialModel>(0.4, 2));
  SearchParams fine = SearchParams::absolute(1e-6);
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), fine);
  LocalBoundaryObjective obj(bd, fine);
  auto g = finite_difference_gradient(obj, std::vector<double>{0.6, 0.8}, 0.63, 1e-3, 1e-6);
  EXPECT_LE(norm(g), 2.0 * 1e-6 / 1e-3 * std::sqrt(2.0));
}

TEST(FiniteDifference, OffsetSphereMatchesAnalytic) {
  std::vector<double> x0 = {0.1, 0.1};
  Oracle o(std::make_shared<RadialModel>(0.4, 2));
  SearchParams fine = SearchParams::absolute(1e-9);
  BoundaryDistance bd(o, x0, untargeted0(), fine);
  LocalBoundaryObjective obj(bd, fine);
  for (double angle : {0.0, 1.0, 2.5, 4.0}) {
    std::vector<double> theta = {std::cos(angle), std::sin(angle)};
    double g0 = obj.evaluate(theta, 0.5).value;
    auto fd = finite_difference_gradient(obj, theta, g0, 1e-3, 1e-9);
    auto exact = sphere_gradient(x0, theta, 0.4);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(fd[i], exact[i], 1e-3);
  }
}

TEST(FiniteDifference, RejectsStepBelowFloor) {
  Oracle o(std::make_shared<RadialModel>(0.4, 2));
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  LocalBoundaryObjective obj(bd, SearchParams::absolute(1e-3));
  EXPECT_THROW(finite_difference_gradient(obj, std::vector<double>{1.0, 0.0}, 0.6, 5e-3,
                                          1e-3),
               InvalidInput);
}

TEST(FiniteDifference, AgreesWithEstimatorInDirection) {
  std::vector<double> x0 = {0.1, 0.1};
  Oracle o(std::make_shared<RadialModel>(0.4, 2));
  SearchParams fine = SearchParams::absolute(1e-7);
  BoundaryDistance bd(o, x0, untargeted0(), fine);
  LocalBoundaryObjective obj(bd, fine);
  std::vector<double> theta = {std::cos(2.0), std::sin(2.0)};
  double g0 = obj.evaluate(theta, 0.5).value;
  auto fd = finite_difference_gradient(obj, theta, g0, 1e-3, 1e-7);
  Rng rng(1);
  GradientEstimate est = estimate_gradient(obj, theta, g0, 0.005, 2000, rng);
  double cos = std::inner_product(fd.begin(), fd.end(), est.vector.begin(), 0.0) /
               (norm(fd) * norm(est.vector));
  EXPECT_GE(cos, 0.9);
}

TEST(TraceMetrics, ThresholdsAgainstGroundTruth) {
  std::vector<TracePoint> trace = {{10, 0.8}, {50, 0.62}, {90, 0.506}, {120, 0.505}};
  GroundTruth gt;
  gt.min_distortion = 0.5;
  TraceMetrics m = convergence_trace_metrics(trace, gt);
  ASSERT_EQ(m.gaps.size(), 4u);
  EXPECT_NEAR(m.gaps[0].gap, 0.3, 1e-12);
  EXPECT_EQ(*m.first_below_1e1, 90u);
  EXPECT_EQ(*m.first_below_1e2, 90u);
  EXPECT_FALSE(m.relative_to_final);
}

TEST(TraceMetrics, RelativeToFinalWithoutGroundTruth) {
  std::vector<TracePoint> trace = {{10, 0.8}, {50, 0.6}, {90, 0.55}};
  TraceMetrics m = convergence_trace_metrics(trace, std::nullopt);
  EXPECT_TRUE(m.relative_to_final);
  EXPECT_EQ(m.reference, 0.55);
  EXPECT_EQ(*m.first_below_1e1, 50u);
  EXPECT_EQ(*m.first_below_1e2, 90u);
}

TEST(TraceMetrics, EmptyTraceIsAContractError) {
  EXPECT_THROW(convergence_trace_metrics({}, std::nullopt), ContractError);
}

TEST(SphereSampling, UnitNormAndDeterministic) {
  for (std::size_t d : {2u, 3u, 5u, 8u}) {
    auto a = sphere_directions(d, 100);
    auto b = sphere_directions(d, 100);
    ASSERT_EQ(a, b);
    for (const auto& v : a) ASSERT_NEAR(norm(v), 1.0, 1e-12);
  }
}

TEST(SphereSampling, CoversTheCircleEvenly) {
  auto v = sphere_directions(2, 360);
  EXPECT_NEAR(v[90][0], 0.0, 1e-12);
  EXPECT_NEAR(v[90][1], 1.0, 1e-12);
}

TEST(SphereSampling, RoughlyUniformInHighDimension) {
  auto v = sphere_directions(6, 4000);
  std::vector<double> mean(6, 0.0);
  for (const auto& x : v) {
    for (std::size_t i = 0; i < 6; ++i) mean[i] += x[i] / 4000.0;
  }
  EXPECT_LT(norm(mean), 0.05);
}

TEST(SphereSampling, RadicalInverse) {
  EXPECT_DOUBLE_EQ(radical_inverse(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(radical_inverse(3, 2), 0.75);
  EXPECT_DOUBLE_EQ(radical_inverse(1, 3), 1.0 / 3.0);
}

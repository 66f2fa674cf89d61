#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hardlabel/boundary_distance.hpp"
#include "hardlabel/model_io.hpp"
#include "hardlabel/models.hpp"

using namespace hardlabel;

namespace {

const double kSqrt04 = std::sqrt(0.4);

AdversarialPredicate untargeted0() {
  return AdversarialPredicate::untargeted(Label{0});
}

Oracle radial() { return Oracle(std::make_shared<RadialModel>(0.4, 2)); }
Oracle half_space() { return Oracle(builtin::half_space(2)); }

}  // namespace

TEST(Direction, NormalisesAndRejectsZero) {
  Direction d = Direction::normalized(std::vector<double>{3.0, 4.0});
  EXPECT_NEAR(d[0], 0.6, 1e-15);
  EXPECT_NEAR(d[1], 0.8, 1e-15);
  EXPECT_THROW(Direction::normalized(std::vector<double>{0.0, 0.0}), InvalidInput);
  EXPECT_THROW(Direction::from_unit(std::vector<double>{2.0, 0.0}), InvalidInput);
  EXPECT_NO_THROW(Direction::from_unit(std::vector<double>{0.6, 0.8}));
}

TEST(Predicate, UntargetedAndTargeted) {
  auto u = AdversarialPredicate::untargeted(Label{1});
  EXPECT_TRUE(u.holds(Label{0}));
  EXPECT_FALSE(u.holds(Label{1}));
  auto t = AdversarialPredicate::targeted(Label{2});
  EXPECT_TRUE(t.holds(Label{2}));
  EXPECT_FALSE(t.holds(Label{0}));
}

TEST(EvaluateInitial, RadialFromOrigin) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  DistanceEval e = bd.evaluate_initial(Direction::normalized(std::vector<double>{1.0, 0.0}));
  ASSERT_TRUE(e.found());
  EXPECT_GE(e.value, 0.6324555 - 1e-7);
  EXPECT_LE(e.value, kSqrt04 + 1e-6);
  EXPECT_EQ(e.queries_used, o.query_count());
}

TEST(EvaluateInitial, HalfSpace) {
  Oracle o = half_space();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  DistanceEval e = bd.evaluate_initial(Direction::normalized(std::vector<double>{1.0, 0.0}));
  ASSERT_TRUE(e.found());
  EXPECT_NEAR(e.value, 0.5, 1e-6);
  EXPECT_GE(e.value, 0.5);
}

TEST(EvaluateInitial, AwayFromHalfSpaceFindsNothing) {
  Oracle o = half_space();
  SearchParams p = SearchParams::absolute(1e-6);
  p.max_lambda = 5.0;
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), p);
  DistanceEval e = bd.evaluate_initial(Direction::normalized(std::vector<double>{-1.0, 0.0}));
  EXPECT_FALSE(e.found());
}

TEST(EvaluateInitial, StopsWhenClampPinsThePoint) {
  auto m = builtin::half_space(2);
  Oracle o(m, DomainBounds::box(2, -1.0, 0.4));
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  DistanceEval e = bd.evaluate_initial(Direction::normalized(std::vector<double>{1.0, 0.0}));
  EXPECT_FALSE(e.found());
  EXPECT_LT(o.query_count(), 30u);
}

TEST(EvaluateLocal, ShrinkBranch) {
  Oracle o = radial();
  SearchParams p = SearchParams::absolute(1e-3);
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), p);
  DistanceEval e = bd.evaluate_local(std::vector<double>{0.0, 1.0}, 0.7);
  ASSERT_TRUE(e.found());
  EXPECT_GE(e.value, 0.6324555);
  EXPECT_LE(e.value, 0.6324555 + 1e-3);
}

TEST(EvaluateLocal, ExpansionBranch) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-3));
  DistanceEval e = bd.evaluate_local(std::vector<double>{0.0, 1.0}, 0.5);
  ASSERT_TRUE(e.found());
  EXPECT_GE(e.value, 0.6324555);
  EXPECT_LE(e.value, 0.6324555 + 1e-3);
}

TEST(EvaluateLocal, WarmStartIsCheap) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  std::vector<double> theta = {0.6, 0.8};
  DistanceEval first = bd.evaluate_local(theta, 0.5);
  ASSERT_TRUE(first.found());
  DistanceEval again = bd.evaluate_local(theta, first.value);
  ASSERT_TRUE(again.found());
  EXPECT_NEAR(again.value, first.value, 1e-6);
  // One probe at v_prev, a couple of shrink steps, then bisection of a
  // bracket of width ~0.01 * v down to 1e-6.
  EXPECT_LE(again.queries_used, 1u + 3u + 14u);
}

TEST(EvaluateLocal, ScaleInvariantInTheta) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.1, -0.2}, untargeted0(), SearchParams::absolute(1e-9));
  std::vector<double> theta = {0.3, 0.7};
  std::vector<double> scaled = {3.0, 7.0};
  EXPECT_EQ(bd.evaluate_local(theta, 0.4).value, bd.evaluate_local(scaled, 0.4).value);
}

TEST(EvaluateLocal, ExpansionGivesUpAfterMaxSteps) {
  Oracle o = half_space();
  SearchParams p = SearchParams::absolute(1e-6);
  p.max_expansion_steps = 10;
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), p);
  DistanceEval e = bd.evaluate_local(std::vector<double>{1.0, 0.0}, 0.1);
  EXPECT_FALSE(e.found());
  EXPECT_EQ(e.queries_used, 11u);
}

TEST(EvaluateLocal, ShrinkFallsBackToOrigin) {
  Oracle o = half_space();
  SearchParams p = SearchParams::absolute(1e-6);
  p.max_expansion_steps = 5;
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), p);
  DistanceEval e = bd.evaluate_local(std::vector<double>{1.0, 0.0}, 10.0);
  ASSERT_TRUE(e.found());
  EXPECT_NEAR(e.value, 0.5, 1e-6);
}

TEST(EvaluateLocal, RejectsBadInputs) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  EXPECT_THROW(bd.evaluate_local(std::vector<double>{1.0, 0.0}, 0.0), InvalidInput);
  EXPECT_THROW(bd.evaluate_local(std::vector<double>{0.0, 0.0}, 0.5), InvalidInput);
  EXPECT_THROW(bd.evaluate_local(std::vector<double>{1.0}, 0.5), InvalidInput);
}

TEST(EvaluateLocal, BracketSoundnessOnRandomCases) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-4;
  for (int i = 0; i < 300; ++i) {
    Oracle o = radial();
    Oracle probe = o.uncounted();
    std::vector<double> x0 = {0.3 * (u(rng) - 0.5), 0.3 * (u(rng) - 0.5)};
    BoundaryDistance bd(o, x0, untargeted0(), SearchParams::absolute(tol));
    BoundaryDistance check(probe, x0, untargeted0());
    Direction theta = Direction::normalized(std::vector<double>{n(rng), n(rng)});
    DistanceEval e = bd.evaluate_local(theta.values(), 0.2 + u(rng));
    ASSERT_TRUE(e.found());
    EXPECT_TRUE(check.adversarial_at(theta, e.value));
    if (e.value - tol > 0) EXPECT_FALSE(check.adversarial_at(theta, e.value - tol));
  }
}

TEST(EvaluateLocal, TargetedPredicate) {
  Oracle o(builtin::three_class_planes());
  BoundaryDistance bd(o, {0.0, 0.0}, AdversarialPredicate::targeted(Label{2}),
                      SearchParams::absolute(1e-6));
  // Class 2 wins once x1 > 0.5 (and x1 > x0).
  DistanceEval e = bd.evaluate_local(std::vector<double>{0.0, 1.0}, 0.4);
  ASSERT_TRUE(e.found());
  EXPECT_NEAR(e.value, 0.5, 1e-6);
}

TEST(BinarySearch, EightQueriesToNarrowPointTwoToMilli) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  Direction theta = Direction::normalized(std::vector<double>{1.0, 0.0});
  double v = bd.binary_search_bracket(theta, 0.5, 0.7, 1e-3);
  EXPECT_EQ(o.query_count(), 8u);  // ceil(log2(0.2 / 1e-3)) = 8
  EXPECT_GT(v, 0.6324555);
  EXPECT_LE(v, 0.6334555);
}

TEST(BinarySearch, NarrowBracketCostsNothing) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  Direction theta = Direction::normalized(std::vector<double>{1.0, 0.0});
  EXPECT_EQ(bd.binary_search_bracket(theta, 0.632, 0.6325, 1e-3), 0.6325);
  EXPECT_EQ(o.query_count(), 0u);
}

TEST(BinarySearch, OneBisection) {
  Oracle o(std::make_shared<LinearModel>(std::vector<double>{1.0, 0.0}, 0.15));
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  Direction theta = Direction::normalized(std::vector<double>{1.0, 0.0});
  double v = bd.binary_search_bracket(theta, 0.1, 0.2, 0.05);
  EXPECT_EQ(o.query_count(), 1u);
  EXPECT_GT(v, 0.15);
  EXPECT_LE(v, 0.2);
}

TEST(BinarySearch, CheckedVersionDetectsBadBracket) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  Direction theta = Direction::normalized(std::vector<double>{1.0, 0.0});
  EXPECT_THROW(bd.checked_binary_search(theta, 0.1, 0.2, 1e-3), ContractError);
  EXPECT_THROW(bd.checked_binary_search(theta, 0.7, 0.9, 1e-3), ContractError);
  EXPECT_THROW(bd.binary_search_bracket(theta, 0.7, 0.5, 1e-3), ContractError);
  EXPECT_NEAR(bd.checked_binary_search(theta, 0.5, 0.7, 1e-6), kSqrt04, 1e-6);
}

TEST(BinarySearch, BracketWidthShrinksEveryStep) {
  // Counting queries against the expected log count doubles as a check that
  // every bisection halves the bracket.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Oracle o = radial();
    BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
    double lo = kSqrt04 * u(rng);
    double hi = kSqrt04 + u(rng);
    double tol = 1e-5 + 1e-3 * u(rng);
    bd.binary_search_bracket(Direction::normalized(std::vector<double>{1.0, 1.0}), lo, hi,
                             tol);
    EXPECT_EQ(o.query_count(),
              static_cast<std::uint64_t>(std::ceil(std::log2((hi - lo) / tol))));
  }
}

TEST(InitializeDirection, RadialCandidatesTie) {
  Oracle o = radial();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  std::vector<DatasetRecord> c = {{{1.0, 0.0}, Label{1}}, {{0.0, 2.0}, Label{1}}};
  InitialDirection init = initialize_direction(bd, c, 20);
  EXPECT_NEAR(init.eval.value, 0.6324555, 1e-6);
}

TEST(InitializeDirection, HalfSpacePicksTheShorterRay) {
  Oracle o = half_space();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  std::vector<DatasetRecord> c = {{{1.0, 1.0}, Label{1}}, {{1.0, 0.0}, Label{1}}};
  InitialDirection init = initialize_direction(bd, c, 20);
  EXPECT_NEAR(init.eval.value, 0.5, 1e-6);
  EXPECT_NEAR(init.theta[0], 1.0, 1e-12);
  EXPECT_EQ(init.candidate_index, 1);
}

TEST(InitializeDirection, SkipsSameClassCandidates) {
  Oracle o = half_space();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0());
  std::vector<DatasetRecord> c = {{{-1.0, 0.0}, Label{0}}};
  EXPECT_THROW(initialize_direction(bd, c, 20), InitializationError);
  EXPECT_EQ(o.query_count(), 0u);
}

TEST(InitializeDirection, RespectsTryLimitNearestFirst) {
  Oracle o = half_space();
  BoundaryDistance bd(o, {0.0, 0.0}, untargeted0(), SearchParams::absolute(1e-6));
  // Far candidate has the better direction but only the nearest is tried.
  std::vector<DatasetRecord> c = {{{5.0, 0.0}, Label{1}}, {{0.6, 0.6}, Label{1}}};
  InitialDirection init = initialize_direction(bd, c, 1);
  EXPECT_EQ(init.candidate_index, 1);
  EXPECT_NEAR(init.eval.value, 0.5 * std::sqrt(2.0), 1e-6);
}

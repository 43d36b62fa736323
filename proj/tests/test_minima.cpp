#include <gtest/gtest.h>

#include "support.hpp"

using namespace parageo;
using namespace testsupport;

namespace {

const FieldContext Q = FieldContext::rational();

Vector<FieldElement> ints(std::initializer_list<long> xs) {
    Vector<FieldElement> v;
    for (long x : xs) v.push_back(Q.from_int(x));
    return v;
}

double as_double(const Real& x) { return x.convert_to<double>(); }

std::vector<std::vector<Real>> oracle_profile(const ApproximationTarget& t, const std::vector<Rational>& grid) {
    std::vector<std::vector<Real>> out;
    for (const auto& q : grid) out.push_back(oracle::minima(t.xi_real(), q));
    return out;
}

class Minima : public ::testing::Test {
protected:
    PrecisionGuard guard{256};
};

}  // namespace

TEST_F(Minima, LValueExamples) {
    auto e1 = degenerate_target();
    auto G = GradedVector<FieldElement>::from_vector(ints({0, 1}));
    EXPECT_EQ(L_value(e1, G, 5), 0);
    EXPECT_EQ(as_double(L_value(e1, GradedVector<FieldElement>::from_vector(ints({1, 0})), 5)), 5.0);
    auto g = golden_target();
    double gamma = (1 + std::sqrt(5.0)) / 2;
    double expect = std::max(std::log(std::sqrt(2.0)), 2 + std::log(std::fabs(1 - gamma) / std::sqrt(1 + gamma * gamma)));
    EXPECT_NEAR(as_double(L_value(g, GradedVector<FieldElement>::from_vector(ints({1, -1})), 2)), expect, 1e-14);
}

TEST_F(Minima, LogLambdaAtInfinity) {
    EXPECT_EQ(log_lambda_of_point(degenerate_target(), ints({0, 1}), 3), 0);
}

TEST_F(Minima, DegenerateTargetClosedForm) {
    auto prof = profile(degenerate_target(), 1, make_grid(3, 1, 1));
    ASSERT_TRUE(prof.exact);
    for (std::size_t i = 0; i < prof.size(); ++i) {
        EXPECT_EQ(prof.values[i][0], 0);
        EXPECT_EQ(as_double(prof.values[i][1]), prof.q_grid[i].get_d());
    }
}

TEST_F(Minima, MatchesBruteForceGolden) {
    auto t = golden_target();
    auto grid = make_grid(8, Rational(1, 4));
    auto prof = profile(t, 1, grid);
    ASSERT_TRUE(prof.exact);
    EXPECT_LT(max_difference(prof.values, oracle_profile(t, grid)), 1e-60);
}

TEST_F(Minima, MatchesBruteForceDegenerate) {
    auto t = degenerate_target();
    auto grid = make_grid(6, Rational(1, 4));
    auto prof = profile(t, 1, grid);
    EXPECT_LT(max_difference(prof.values, oracle_profile(t, grid)), 1e-60);
}

TEST_F(Minima, MatchesBruteForceCubic) {
    auto t = cubic_target();
    auto grid = make_grid(5, Rational(1, 2));
    auto prof = profile(t, 1, grid);
    EXPECT_LT(max_difference(prof.values, oracle_profile(t, grid)), 1e-60);
}

TEST_F(Minima, MatchesBruteForceRandomTargets) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 4; ++t) {
        auto target = rational_target({"1", std::to_string(u(rng)), std::to_string(u(rng))});
        auto grid = make_grid(4, Rational(1, 2));
        auto prof = profile(target, 1, grid);
        EXPECT_LT(max_difference(prof.values, oracle_profile(target, grid)), 1e-60) << t;
    }
}

TEST_F(Minima, WithoutReductionSameValues) {
    auto t = cubic_target();
    auto grid = make_grid(4, Rational(1, 2));
    EnumerationBudget plain;
    plain.reduction = false;
    EXPECT_EQ(max_difference(profile(t, 1, grid).values, profile(t, 1, grid, plain).values), 0);
}

TEST_F(Minima, GradeNMinusOneEqualsStar) {
    for (const auto& t : {golden_target(), cubic_target(), rational_target({"1", "3/7", "2^(1/2)"})}) {
        auto grid = make_grid(5, Rational(1, 4));
        auto a = profile(t, t.n() - 1, grid);
        auto b = star_profile(t, grid);
        ASSERT_EQ(a.values.size(), b.values.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
    }
}

TEST_F(Minima, StructureAndSumRule) {
    auto t = cubic_target();
    auto grid = make_grid(6, Rational(1, 4));
    auto L = profile(t, 1, grid);
    auto S = star_profile(t, grid);
    EXPECT_TRUE(profile_violations(L).empty());
    EXPECT_TRUE(profile_violations(S).empty());
    EXPECT_LT(sum_rule_check(L), 3.0);
    EXPECT_LT(duality_sum_check(L, S), 3.0);
}

TEST_F(Minima, TopGradeIsQ) {
    // The only primitive point of grade n is e1∧…∧en, with H = 1 and D = ‖ξ‖ = 1.
    auto grid = make_grid(4, 1);
    auto prof = profile(cubic_target(), 3, grid);
    for (std::size_t i = 0; i < prof.size(); ++i) EXPECT_EQ(prof.values[i].front(), to_real(prof.q_grid[i]));
}

TEST_F(Minima, BurgerComparability) {
    auto t = cubic_target();
    auto grid = make_grid(5, Rational(1, 2));
    double worst = burger_comparability_check(profile(t, 1, grid), profile(t, 2, grid));
    EXPECT_LT(worst, 3.0);
}

TEST_F(Minima, FinitePlaceTarget) {
    auto K = FieldContext::rational();
    auto t = io::make_target(K, places_above(K, 5).front(), {"1", "sqrt(-1)"});
    auto prof = profile(t, 1, make_grid(8, 1));
    ASSERT_TRUE(prof.exact);
    EXPECT_TRUE(profile_violations(prof).empty());
    EXPECT_LT(sum_rule_check(prof), 3.0);
}

TEST_F(Minima, QuadraticFieldTarget) {
    auto K = FieldContext::quadratic(2);
    auto t = io::make_target(K, places_above(K, 0).front(), {"1", "2^(1/4)"});
    auto prof = profile(t, 1, make_grid(4, 1));
    ASSERT_TRUE(prof.exact);
    EXPECT_TRUE(profile_violations(prof).empty());
}

TEST_F(Minima, ExponentEstimates) {
    auto grid = make_grid(12, Rational(1, 4));
    auto e = exponents_from_profile(profile(degenerate_target(), 1, make_grid(6, Rational(1, 4))));
    EXPECT_TRUE(std::isinf(e.omega));
    auto g = exponents_from_profile(profile(golden_target(), 1, grid));
    for (double x : {g.omega, g.omega_hat, g.lambda, g.lambda_hat}) EXPECT_NEAR(x, 1.0, 0.35);
}

TEST_F(Minima, BudgetExhaustionIsReported) {
    EnumerationBudget tiny;
    tiny.max_log_height = 0.5;
    auto prof = profile(golden_target(), 1, make_grid(6, 1), tiny);
    EXPECT_FALSE(prof.exact);
}

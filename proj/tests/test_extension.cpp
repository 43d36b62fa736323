#include <gtest/gtest.h>

#include <parageo/extension.hpp>

#include "support.hpp"

using namespace parageo;
using namespace parageo::extension;

namespace {

const FieldContext Q2 = FieldContext::quadratic(2);
const Place W = places_above(Q2, 0).front();

ApproximationTarget fourth_root_target() { return io::make_target(Q2, W, {"1", "2^(1/4)"}); }

ExponentQuadruple quad(Rational w, Rational wh, Rational l, Rational lh) {
    return {ExtendedRational::of(w), ExtendedRational::of(wh), ExtendedRational::of(l), ExtendedRational::of(lh)};
}

}  // namespace

TEST(TMap, RoundTripAndIntegrality) {
    ScalarExtension T(Q2, W);
    EXPECT_TRUE(T.integral_basis());
    std::mt19937_64 rng(51);
    for (int t = 0; t < 30; ++t) {
        auto x = testsupport::random_rational_vector(rng, 6);
        EXPECT_EQ(T.invert(T.apply(x)), x);
    }
    Vector<FieldElement> y{Q2.element(3, -2), Q2.element(0, 5)};
    EXPECT_EQ(T.apply(T.invert_integral(y)), y);
    EXPECT_THROW(T.invert_integral({Q2.element(Rational(1, 2), 0)}), std::domain_error);
}

TEST(TMap, LatticeIndexByHnf) {
    EXPECT_EQ(ScalarExtension(Q2, W).lattice_index(2), 1);
    ScalarExtension twice(Q2, W, Vector<FieldElement>{Q2.from_int(1), Q2.element(0, 2)});
    EXPECT_FALSE(twice.integral_basis());
    EXPECT_EQ(twice.lattice_index(2), 4);
    auto K5 = FieldContext::quadratic(5);
    ScalarExtension half(K5, places_above(K5, 0).front());
    EXPECT_TRUE(half.integral_basis());
    EXPECT_EQ(half.lattice_index(3), 1);
    ScalarExtension sqrt5(K5, places_above(K5, 0).front(), Vector<FieldElement>{K5.from_int(1), K5.element(0, 1)});
    EXPECT_EQ(sqrt5.lattice_index(1), 2);
}

TEST(TMap, RejectsDependentAlpha) {
    EXPECT_THROW(ScalarExtension(Q2, W, Vector<FieldElement>{Q2.from_int(1), Q2.from_int(3)}), std::invalid_argument);
    EXPECT_THROW(ScalarExtension(Q2, W, Vector<FieldElement>{Q2.from_int(1)}), std::invalid_argument);
}

TEST(ExtendPoint, Coordinates) {
    ScalarExtension T(Q2, W);
    Vector<Real> xi{Real(1), Real(3)};
    auto X = extend_coordinates(xi, T);
    ASSERT_EQ(X.size(), 4u);
    Real s2 = boost::multiprecision::sqrt(Real(2));
    EXPECT_EQ(X[0], 1);
    EXPECT_EQ(X[1], 3);
    EXPECT_EQ(X[2], s2);
    EXPECT_EQ(X[3], 3 * s2);
    auto Q = FieldContext::rational();
    auto t = testsupport::rational_target({"2", "3"});
    auto same = extend_point(t, ScalarExtension(Q, places_above(Q, 0).front()));
    EXPECT_EQ(same.xi_real(), t.xi_real());
}

TEST(ExtendPoint, ProfileInvariantUnderPermutingAlpha) {
    PrecisionGuard guard(256);
    auto t = fourth_root_target();
    ScalarExtension a(Q2, W), b(Q2, W, Vector<FieldElement>{Q2.omega(), Q2.from_int(1)});
    auto grid = make_grid(3, Rational(1, 2));
    auto pa = profile(extend_point(t, a), 1, grid);
    auto pb = profile(extend_point(t, b), 1, grid);
    EXPECT_LT(testsupport::max_difference(pa.values, pb.values), 1e-60);
}

TEST(BoundedDifferences, DegreeOneIsExactlyZero) {
    auto Q = FieldContext::rational();
    auto t = testsupport::golden_target();
    auto rep = verify_bounded_differences(t, ScalarExtension(Q, places_above(Q, 0).front()), make_grid(4, Rational(1, 2)));
    EXPECT_EQ(rep.sup_L, 0);
    EXPECT_EQ(rep.sup_Lstar, 0);
}

TEST(BoundedDifferences, ShortHorizonBounded) {
    PrecisionGuard guard(256);
    auto rep = verify_bounded_differences(fourth_root_target(), ScalarExtension(Q2, W), make_grid(4, Rational(1, 2)));
    EXPECT_EQ(rep.d, 2);
    EXPECT_LT(rep.sup_L, 2.0);
    EXPECT_LT(rep.sup_Lstar, 2.0);
}

TEST(Transfer, Examples) {
    auto e = exponent_transfer(quad(1, 1, 1, 1), 2);
    EXPECT_EQ(e.omega_hat, ExtendedRational::of(3));
    EXPECT_EQ(e.lambda_hat, ExtendedRational::of(Rational(1, 3)));
    auto id = exponent_transfer(quad(Rational(7, 3), 2, Rational(1, 2), Rational(2, 5)), 1);
    EXPECT_EQ(id.omega, ExtendedRational::of(Rational(7, 3)));
    EXPECT_EQ(id.lambda_hat, ExtendedRational::of(Rational(2, 5)));
    ExponentQuadruple inf{ExtendedRational::inf(), ExtendedRational::inf(), ExtendedRational::inf(), ExtendedRational::of(0)};
    auto ei = exponent_transfer(inf, 3);
    EXPECT_TRUE(ei.omega.infinite);
    EXPECT_EQ(ei.lambda, ExtendedRational::of(Rational(1, 2)));
    EXPECT_EQ(ei.lambda_hat, ExtendedRational::of(0));
    EXPECT_THROW(exponent_transfer(inf, 0), std::invalid_argument);
}

TEST(Transfer, ExtendedJarnikResidual) {
    auto e = exponent_transfer(quad(2, 2, Rational(1, 2), Rational(1, 2)), 2);
    EXPECT_EQ(jarnik_extended_residual(e.omega_hat, e.lambda_hat, 2), ExtendedRational::of(0));
    // Jarník's identity for ξ maps to the extended identity for Ξ for every d.
    for (int d = 1; d <= 4; ++d)
        for (Rational wh : {Rational(1), Rational(3, 2), Rational(4)}) {
            Rational lh = 1 - 1 / wh;
            auto t = exponent_transfer(quad(wh, wh, lh, lh), d);
            EXPECT_EQ(jarnik_extended_residual(t.omega_hat, t.lambda_hat, d), ExtendedRational::of(0)) << d;
        }
}

TEST(Transfer, BelValuesSatisfyIdentity) {
    for (int d = 1; d <= 3; ++d) {
        auto b = bel_values(d);
        EXPECT_LT(std::fabs(jarnik_extended_residual(b.omega_hat, b.lambda_hat, d)), 1e-12);
    }
}

TEST(Thunder, RatiosWithinTheoreticalWindow) {
    PrecisionGuard guard(256);
    auto rep = thunder_check(fourth_root_target(), ScalarExtension(Q2, W), 2.0);
    EXPECT_EQ(rep.lambda_pullback.size(), 4u);
    EXPECT_EQ(rep.lambda_field.size(), 2u);
    EXPECT_TRUE(rep.within_bounds);
    EXPECT_NEAR(rep.bound, std::sqrt(2.0), 1e-12);
}

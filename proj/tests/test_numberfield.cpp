#include <gtest/gtest.h>

#include "support.hpp"

using namespace parageo;

namespace {

const FieldContext Q = FieldContext::rational();
const FieldContext Q2 = FieldContext::quadratic(2);

Vector<FieldElement> ints(const FieldContext& K, std::initializer_list<long> xs) {
    Vector<FieldElement> v;
    for (long x : xs) v.push_back(K.from_int(x));
    return v;
}

double as_double(const Real& x) { return x.convert_to<double>(); }

}  // namespace

TEST(Field, Construction) {
    EXPECT_THROW(FieldContext::quadratic(4), std::invalid_argument);
    EXPECT_THROW(FieldContext::quadratic(1), std::invalid_argument);
    EXPECT_EQ(FieldContext::quadratic(5).discriminant(), 5);
    EXPECT_EQ(Q2.discriminant(), 8);
    EXPECT_TRUE(FieldContext::quadratic(5).is_integral(FieldContext::quadratic(5).omega()));
}

TEST(Field, FundamentalUnit) {
    auto eps = Q2.fundamental_unit();
    EXPECT_EQ(eps.a(), 1);
    EXPECT_EQ(eps.b(), 1);
    EXPECT_EQ(abs(eps.norm()), 1);
}

TEST(Places, Splitting) {
    auto p7 = places_above(Q2, 7);
    ASSERT_EQ(p7.size(), 2u);
    for (const auto& v : p7) {
        EXPECT_EQ(v.splitting, Place::Splitting::split);
        EXPECT_EQ(v.local_degree, 1);
    }
    auto p3 = places_above(Q2, 3);
    ASSERT_EQ(p3.size(), 1u);
    EXPECT_EQ(p3[0].splitting, Place::Splitting::inert);
    EXPECT_EQ(p3[0].local_degree, 2);
    auto p2 = places_above(Q2, 2);
    ASSERT_EQ(p2.size(), 1u);
    EXPECT_EQ(p2[0].splitting, Place::Splitting::ramified);
    EXPECT_EQ(p2[0].local_degree, 2);
    EXPECT_EQ(places_above(Q2, 0).size(), 2u);
    EXPECT_THROW(places_above(Q2, 9), std::invalid_argument);
}

TEST(AbsoluteValues, Examples) {
    EXPECT_EQ(abs_at(Q.element(Rational(1, 2)), places_above(Q, 0)[0]).value, Real(0.5));
    auto v2 = places_above(Q2, 2)[0];
    EXPECT_EQ(abs_at(Q2.element(0, 1), v2).exponent, Rational(-1, 2));
    EXPECT_TRUE(product_formula_exact(Q2.element(0, 1), Q2));
}

TEST(AbsoluteValues, SplitPlacesSeparateConjugates) {
    // 3 + √2 has norm 7: it lies in exactly one of the two primes above 7.
    auto a = Q2.element(3, 1);
    auto p7 = places_above(Q2, 7);
    Rational o0 = ord_at(a, p7[0]), o1 = ord_at(a, p7[1]);
    EXPECT_EQ(o0 + o1, 1);
    EXPECT_TRUE(o0 == 0 || o1 == 0);
}

TEST(AbsoluteValues, ProductFormulaRandom) {
    PrecisionGuard guard(256);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        auto a = testsupport::random_field_element(rng, Q2, 40, 30);
        if (a.is_zero()) continue;
        EXPECT_TRUE(product_formula_exact(a, Q2)) << a.str();
        EXPECT_LT(abs(as_double(product_formula_log_residual(a, Q2))), 1e-60);
    }
}

TEST(Heights, Examples) {
    EXPECT_EQ(height_vector(Q, ints(Q, {3, 4})).power, 25);
    EXPECT_EQ(height_vector(Q, ints(Q, {2, 4})).power, 5);
    Vector<FieldElement> x{Q2.from_int(1), Q2.element(0, 1)};
    auto h = height_vector(Q2, x);
    EXPECT_EQ(h.exponent, 4);
    EXPECT_EQ(h.power, 9);
    EXPECT_NEAR(as_double(h.value), std::sqrt(3.0), 1e-15);
}

TEST(Heights, Subspaces) {
    Matrix<FieldElement> e12{ints(Q, {1, 0, 0}), ints(Q, {0, 1, 0})};
    EXPECT_EQ(height_subspace(Q, e12, 3).power, 1);
    EXPECT_EQ(height_subspace(Q, Matrix<FieldElement>{ints(Q, {1, 2})}, 2).power, 5);
}

TEST(Heights, ScaleInvariant) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 30; ++t) {
        auto B = testsupport::random_full_rank_field(rng, Q2, 1, 3);
        auto c = testsupport::random_field_element(rng, Q2);
        if (c.is_zero()) continue;
        Vector<FieldElement> y;
        for (const auto& z : B[0]) y.push_back(c * z);
        EXPECT_EQ(height_vector(Q2, B[0]).power, height_vector(Q2, y).power);
    }
}

TEST(Heights, TwoPathsAgree) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<long> d(-30, 30);
    for (int t = 0; t < 50; ++t) {
        Vector<FieldElement> x;
        for (int j = 0; j < 3; ++j) x.push_back(Q2.element(d(rng), d(rng)));
        if (std::all_of(x.begin(), x.end(), [](const FieldElement& c) { return c.is_zero(); })) continue;
        EXPECT_EQ(height_power_content(Q2, x), height_power_places(Q2, x));
    }
}

TEST(Heights, OrthogonalComplementSameHeight) {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 20; ++t) {
        auto B = testsupport::random_full_rank_field(rng, Q, 1 + t % 3, 4);
        EXPECT_EQ(height_subspace(Q, B, 4).power, height_subspace(Q, orthogonal_complement(B), 4).power);
        auto C = testsupport::random_full_rank_field(rng, Q2, 1 + t % 2, 3);
        EXPECT_EQ(height_subspace(Q2, C, 3).power, height_subspace(Q2, orthogonal_complement(C), 3).power);
    }
}

TEST(Targets, DotAndWedgeFunctionals) {
    auto t = testsupport::rational_target({"1", "0"});
    EXPECT_EQ(dot_distance(t, ints(Q, {0, 1})), 0);
    EXPECT_EQ(wedge_distance(t, ints(Q, {1, 0})), 0);
    EXPECT_NEAR(as_double(dot_distance(t, ints(Q, {3, 4}))), 3.0, 1e-30);
}

TEST(Targets, RejectsZero) {
    auto w = places_above(Q, 0)[0];
    EXPECT_THROW(ApproximationTarget::real_place(Q, w, Vector<Real>{Real(0), Real(0)}), std::invalid_argument);
}

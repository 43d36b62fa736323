#include <gtest/gtest.h>

#include <parageo/construct.hpp>

#include "support.hpp"

using namespace parageo;
using namespace parageo::construct;

namespace {

Vector<Rational> vec(std::initializer_list<long> xs) {
    Vector<Rational> v;
    for (long x : xs) v.push_back(Rational(x));
    return v;
}

/// A rigid 3-system of mesh 1 with six switches, including an arrival at rank 2 and a rise at rank 2.
NSystem hand_built() {
    std::vector<Switch> sw{{12, vec({2, 4, 6}), 1, 0},  {15, vec({4, 5, 6}), 1, 2}, {18, vec({5, 6, 7}), 2, 3},
                           {20, vec({5, 7, 8}), 1, 3},  {24, vec({7, 8, 9}), 1, 3}, {27, vec({8, 9, 10}), 1, 3}};
    return NSystem(3, 12, std::move(sw));
}

Matrix<Rational> rational_rows(const IntMatrix& M, std::size_t from, std::size_t to) {
    Matrix<Rational> out;
    for (std::size_t i = from; i < to; ++i) out.push_back(Vector<Rational>(M[i].begin(), M[i].end()));
    return out;
}

double norm(const IntVector& x) {
    Integer s = 0;
    for (const auto& c : x) s += c * c;
    return std::sqrt(s.get_d());
}

const ConstructionConstants K3 = ConstructionConstants::with_C(3, 34050, false);

}  // namespace

TEST(Constants, AdmissibleBound) {
    auto k = ConstructionConstants::standard(3);
    EXPECT_EQ(k.C, 34049);
    EXPECT_TRUE(K3.satisfies_bound());
    EXPECT_FALSE(K3.heuristic);
    EXPECT_NEAR(k.deviation_bound(), 42.196, 1e-3);
    EXPECT_THROW(ConstructionConstants::with_C(3, 3, false), ContractError);
    EXPECT_TRUE(ConstructionConstants::with_C(3, 3, true).heuristic);
    EXPECT_THROW(ConstructionConstants::standard(1), std::invalid_argument);
}

TEST(Schedule, TemplatePrefixed) {
    auto s = derive_schedule(template_system(3, 1), 1, 6);
    ASSERT_EQ(s.entries.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& e = s.entries[i];
        long b = static_cast<long>(i) + 1;
        EXPECT_EQ(e.a, (Vector<long>{b, b + 1, b + 2}));
        EXPECT_EQ(e.k, 1);
        EXPECT_EQ(e.l, 3);
        EXPECT_EQ(e.system_q, Rational(6 + 3 * static_cast<long>(i)));
    }
}

TEST(Schedule, HandBuiltSixSwitches) {
    auto R = hand_built();
    ASSERT_TRUE(validate(R).empty());
    auto s = derive_schedule(R, 1, 6);
    const std::vector<Vector<long>> a{{2, 4, 6}, {4, 5, 6}, {5, 6, 7}, {5, 7, 8}, {7, 8, 9}, {8, 9, 10}};
    const std::vector<int> k{1, 1, 2, 1, 1, 1}, l{3, 2, 3, 3, 3, 3};
    const std::vector<long> q{12, 15, 18, 20, 24, 27};
    ASSERT_EQ(s.entries.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(s.entries[i].a, a[i]) << i;
        EXPECT_EQ(s.entries[i].k, k[i]) << i;
        EXPECT_EQ(s.entries[i].l, l[i]) << i;
        EXPECT_EQ(s.entries[i].system_q, Rational(q[i])) << i;
    }
    EXPECT_THROW(derive_schedule(R, 1, 7), ContractError);
}

TEST(Schedule, RejectsNonRigid) {
    EXPECT_THROW(derive_schedule(template_system(3, 1), Rational(2), 4), ContractError);
}

TEST(Schedule, CheckDetectsBrokenMatching) {
    auto s = derive_schedule(hand_built(), 1, 6);
    s.entries[2].a = {5, 6, 8};
    EXPECT_THROW(check_schedule(s), ContractError);
}

TEST(Basis, InitialTwoDimensional) {
    auto K = ConstructionConstants::standard(2);
    auto x = initial_basis({1, 2}, K);
    ASSERT_EQ(x.size(), 2u);
    EXPECT_EQ(abs(lattice::determinant(x)), 1);
    const double C = K.C.get_d();
    EXPECT_GE(norm(x[0]), C);
    EXPECT_LE(norm(x[0]), 2 * C);
    EXPECT_GE(norm(x[1]), C * C);
    EXPECT_LE(norm(x[1]), 2 * C * C);
}

TEST(Basis, InitialRejectsBadSizes) {
    EXPECT_THROW(initial_basis({2, 1}, ConstructionConstants::standard(2)), std::invalid_argument);
    EXPECT_THROW(initial_basis({1, 2, 3}, ConstructionConstants::standard(2)), std::invalid_argument);
}

TEST(Basis, StepPreservesSpanAndLattice) {
    auto s = derive_schedule(hand_built(), 1, 6);
    auto chain = build_chain(s, K3, 5);
    for (std::size_t i = 1; i < chain.records.size(); ++i) {
        const auto& prev = chain.records[i - 1];
        const auto& cur = chain.records[i];
        EXPECT_EQ(abs(lattice::determinant(cur.basis)), 1);
        // span(y_1..y_l) = span(y_1..y_{l−1}, x_h)
        const int h = s.entries[i - 1].k, l = cur.l;
        auto rest = construct::detail::without_row(prev.basis, h);
        auto expected = rational_rows(rest, 0, static_cast<std::size_t>(l - 1));
        const auto& xh = prev.basis[static_cast<std::size_t>(h - 1)];
        expected.push_back(Vector<Rational>(xh.begin(), xh.end()));
        EXPECT_TRUE(same_span(rational_rows(cur.basis, 0, static_cast<std::size_t>(l)), expected)) << i;
        for (int j = 0; j < 3; ++j) {
            double lo = std::pow(K3.C.get_d(), static_cast<double>(cur.a[static_cast<std::size_t>(j)]));
            EXPECT_GE(norm(cur.basis[static_cast<std::size_t>(j)]) / lo, 1.0);
            EXPECT_LE(norm(cur.basis[static_cast<std::size_t>(j)]) / lo, 2.0);
        }
    }
}

TEST(Chain, InvariantsHoldOnHandBuiltSystem) {
    auto pt = synthesize_point(derive_schedule(hand_built(), 1, 6), K3, 5);
    EXPECT_TRUE(pt.check.ok());
    EXPECT_TRUE(pt.chain.warnings.empty());
    EXPECT_LT(pt.check.worst_convergence_margin, 0);
    EXPECT_LT(pt.check.worst_consecutive_margin, 0);
}

TEST(Chain, TemplateCertificate) {
    auto s = derive_schedule(template_system(3, 1), 1, 13);
    auto pt10 = synthesize_point(s, K3, 10);
    ASSERT_TRUE(pt10.check.ok());
    double q10 = pt10.chain.q(10).convert_to<double>();
    auto rep10 = verify(pt10, 0.8 * q10);
    EXPECT_TRUE(rep10.rigorous);
    EXPECT_TRUE(rep10.ok());
    EXPECT_LE(rep10.sup_deviation, K3.deviation_bound());
    auto rep12 = verify(synthesize_point(s, K3, 12), 0.8 * q10);
    EXPECT_LE(rep12.sup_deviation, rep10.sup_deviation + 1e-9);
    EXPECT_THROW(verify(pt10, q10), std::invalid_argument);
}

TEST(Chain, CertificateBoundsSandwichR) {
    auto pt = synthesize_point(derive_schedule(template_system(3, 1), 1, 8), K3, 7);
    auto rep = verify(pt, 0.8 * pt.chain.q(7).convert_to<double>(), 0.5);
    for (std::size_t i = 0; i < rep.q.size(); ++i)
        for (int j = 0; j < 3; ++j) {
            EXPECT_LE(rep.lower[i][static_cast<std::size_t>(j)], rep.upper[i][static_cast<std::size_t>(j)] + 1e-9);
            EXPECT_GE(rep.lower[i][static_cast<std::size_t>(j)], -1e-12);
        }
}

TEST(Chain, HeuristicEnumeration) {
    auto K = ConstructionConstants::with_C(3, 3, true);
    auto pt = synthesize_point(derive_schedule(template_system(3, 1), 1, 8), K, 6);
    auto rep = verify(pt, std::min(12.0, 0.8 * pt.chain.q(6).convert_to<double>()), 0.25, VerifyMode::enumeration);
    EXPECT_FALSE(rep.rigorous);
    EXPECT_TRUE(rep.enumeration_exact);
    EXPECT_LE(rep.sup_deviation, 3.0);
}

TEST(Chain, RejectsHeuristicConstantsUnlessAllowed) {
    EXPECT_THROW(ConstructionConstants::with_C(3, 100, false), ContractError);
}

#include <gtest/gtest.h>

#include "support.hpp"

using namespace parageo;
using io::json;

TEST(Json, SystemRoundTrip) {
    std::mt19937_64 rng(31);
    for (auto sys : {template_system(3, Rational(3, 2)), testsupport::doubling_system(), random_system(4, rng, 9),
                     random_eventually_periodic(3, rng, false), dual(template_system(3, 1))}) {
        auto j = io::system_to_json(sys);
        auto back = io::system_from_json(json::parse(j.dump()));
        EXPECT_EQ(io::system_to_json(back), j);
        for (Rational q = sys.q0(); q < 30; q += Rational(5, 4)) EXPECT_EQ(back.evaluate(q), sys.evaluate(q));
    }
}

TEST(Json, RationalsAsStrings) {
    auto j = io::system_to_json(template_system(2, Rational(1, 3)));
    EXPECT_EQ(j["mesh"], "1/3");
    EXPECT_EQ(j["switches"][1]["q"], "1/3");
}

TEST(Json, FloatInputFlagged) {
    auto j = json::parse(R"({"n":2,"q0":0,"switches":[{"q":0,"k":2,"values":[0,0]},{"q":1.5,"k":1,"l":2,"values":[0,1.5]}]})");
    auto sys = io::system_from_json(j);
    EXPECT_TRUE(sys.float_input());
    EXPECT_EQ(sys.switches()[1].q, Rational(3, 2));
    EXPECT_TRUE(validate(sys).empty());
}

TEST(Json, ViolationReport) {
    auto j = io::violations_to_json({{"S1", 3, "values do not sum to q"}}, "system");
    EXPECT_EQ(j["status"], "violation");
    EXPECT_EQ(j["violations"][0]["invariant"], "S1");
    EXPECT_EQ(j["violations"][0]["location"], 3);
}

TEST(Json, BadTailRejected) {
    auto j = json::parse(R"({"n":1,"switches":[{"q":0,"k":1,"values":[0]}],"tail":{"kind":"spiral"}})");
    EXPECT_THROW(io::system_from_json(j), std::invalid_argument);
}

TEST(Expressions, ExactAndIrrational) {
    EXPECT_EQ(io::parse_rational_expression("3/4 + 1/4"), 1);
    auto e = io::evaluate_expression("(1+5^(1/2))/2");
    EXPECT_FALSE(e.exact.has_value());
    EXPECT_NEAR(e.value.convert_to<double>(), 1.6180339887498949, 1e-15);
    auto r = io::evaluate_expression("sqrt(2)*sqrt(2)");
    EXPECT_NEAR(r.value.convert_to<double>(), 2.0, 1e-30);
    auto q = io::evaluate_expression("1.25");
    ASSERT_TRUE(q.exact.has_value());
    EXPECT_EQ(*q.exact, Rational(5, 4));
    EXPECT_THROW(io::evaluate_expression("1+"), std::invalid_argument);
    EXPECT_THROW(io::evaluate_expression("(1"), std::invalid_argument);
}

TEST(Expressions, PAdicSquareRoot) {
    auto x = io::evaluate_padic_expression("sqrt(2)", 7, 20);
    Integer r = x.residue();
    Integer m = pow_integer(7, 10);
    EXPECT_EQ(Integer((r * r - 2) % m), 0);
}

TEST(Expressions, SplitList) {
    EXPECT_EQ(io::split_list("1, 2^(1/3),(1,2)"), (std::vector<std::string>{"1", "2^(1/3)", "(1,2)"}));
}

TEST(Descriptors, FieldsAndPlaces) {
    EXPECT_TRUE(io::field_from_string("rational").is_rational());
    EXPECT_EQ(io::field_from_string("D=5").D(), 5);
    EXPECT_THROW(io::field_from_string("cubic"), std::invalid_argument);
    auto K = FieldContext::quadratic(2);
    EXPECT_EQ(io::place_from_string(K, "inf1").embedding(), -1);
    auto v = io::place_from_string(K, "p=7-");
    EXPECT_EQ(v.p, 7);
    EXPECT_EQ(v.root_sign, -1);
    EXPECT_THROW(io::place_from_string(K, "bogus"), std::invalid_argument);
}

TEST(Targets, ExactDirectionKept) {
    auto t = testsupport::rational_target({"1", "1/2"});
    ASSERT_TRUE(t.xi_exact().has_value());
    EXPECT_EQ((*t.xi_exact())[1], Rational(1, 2));
    EXPECT_FALSE(testsupport::golden_target().xi_exact().has_value());
}

TEST(Decimal, Digits) { EXPECT_EQ(io::decimal(Real(1) / 4, 10), "0.25"); }

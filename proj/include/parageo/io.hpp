#pragma once

#include "nsystem.hpp"
#include "numberfield.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

namespace parageo::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers.

struct ParsedNumber {
    Rational value;
    bool from_float = false;
};

inline ParsedNumber read_number(const json& j) {
    if (j.is_string()) return {parse_rational(j.get<std::string>()), false};
    if (j.is_number_integer()) return {Rational(j.get<long>()), false};
    if (j.is_number_float()) {
        // Shortest round-trip decimal of the binary value.
        std::ostringstream os;
        os.precision(17);
        os << j.get<double>();
        return {parse_rational(os.str()), true};
    }
    throw std::invalid_argument("expected a number or a numeric string");
}

inline json write_rational(const Rational& q) { return q.get_str(); }

inline std::string decimal(const Real& x, int digits = 30) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------------------
// Systems.

inline NSystem system_from_json(const json& j) {
    bool floats = false;
    auto num = [&](const json& x) {
        auto p = read_number(x);
        floats = floats || p.from_float;
        return p.value;
    };
    const int n = j.at("n").get<int>();
    Rational q0 = j.contains("q0") ? num(j.at("q0")) : Rational(0);
    std::vector<Switch> sws;
    for (const auto& s : j.at("switches")) {
        Switch sw;
        sw.q = num(s.at("q"));
        for (const auto& v : s.at("values")) sw.values.push_back(num(v));
        sw.k = s.at("k").get<int>();
        sw.l = s.contains("l") && !s.at("l").is_null() ? s.at("l").get<int>() : 0;
        sws.push_back(std::move(sw));
    }
    Tail tail;
    if (j.contains("tail")) {
        const auto& t = j.at("tail");
        const std::string kind = t.at("kind").get<std::string>();
        if (kind == "finite") {
            tail.kind = Tail::Kind::finite;
        } else if (kind == "periodic") {
            tail.kind = Tail::Kind::periodic;
            tail.period = t.at("m").get<int>();
            tail.dq = num(t.at("dq"));
            for (const auto& v : t.at("dv")) tail.dv.push_back(num(v));
        } else if (kind == "scaling") {
            tail.kind = Tail::Kind::scaling;
            tail.period = t.at("m").get<int>();
            tail.factor = num(t.at("factor"));
        } else {
            throw std::invalid_argument("unknown tail kind: " + kind);
        }
    }
    std::optional<Rational> mesh;
    if (j.contains("mesh") && !j.at("mesh").is_null()) mesh = num(j.at("mesh"));
    NSystem sys(n, q0, std::move(sws), tail, mesh, floats);
    if (j.value("dual", false)) sys = sys.with_dual_flag(true);
    return sys;
}

inline json system_to_json(const NSystem& sys) {
    json j;
    j["n"] = sys.n();
    j["q0"] = write_rational(sys.q0());
    json arr = json::array();
    for (const auto& sw : sys.switches()) {
        json s;
        s["q"] = write_rational(sw.q);
        json vals = json::array();
        for (const auto& v : sw.values) vals.push_back(write_rational(v));
        s["values"] = vals;
        s["k"] = sw.k;
        if (sw.l) s["l"] = sw.l;
        arr.push_back(s);
    }
    j["switches"] = arr;
    const auto& t = sys.tail();
    if (t.kind == Tail::Kind::finite) {
        j["tail"] = {{"kind", "finite"}};
    } else if (t.kind == Tail::Kind::periodic) {
        json dv = json::array();
        for (const auto& v : t.dv) dv.push_back(write_rational(v));
        j["tail"] = {{"kind", "periodic"}, {"m", t.period}, {"dq", write_rational(t.dq)}, {"dv", dv}};
    } else {
        j["tail"] = {{"kind", "scaling"}, {"m", t.period}, {"factor", write_rational(t.factor)}};
    }
    if (sys.mesh()) j["mesh"] = write_rational(*sys.mesh());
    if (sys.is_dual()) j["dual"] = true;
    return j;
}

inline json violations_to_json(const std::vector<Violation>& vs, const std::string& object) {
    json arr = json::array();
    for (const auto& v : vs) arr.push_back({{"invariant", v.condition}, {"location", v.index}, {"message", v.message}});
    return {{"status", "violation"}, {"object", object}, {"violations", arr}};
}

// ---------------------------------------------------------------------------
// Expressions for coordinates of ξ: numbers, + − * /, ^ with rational exponent, sqrt(), parentheses.

struct ExprValue {
    Real value;
    std::optional<Rational> exact;
};

namespace detail {

inline Rational parse_rational_expression(std::string_view text);

template <class Value, class Ops>
class ExpressionParser {
public:
    ExpressionParser(std::string_view text, const Ops& ops) : s_(text), ops_(ops) {}

    Value parse() {
        Value v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression '" + std::string(s_) + "': " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    Value expr() {
        Value v = term();
        while (true) {
            if (eat('+'))
                v = ops_.add(v, term());
            else if (eat('-'))
                v = ops_.sub(v, term());
            else
                return v;
        }
    }
    Value term() {
        Value v = unary();
        while (true) {
            if (eat('*'))
                v = ops_.mul(v, unary());
            else if (eat('/'))
                v = ops_.div(v, unary());
            else
                return v;
        }
    }
    Value unary() {
        if (eat('-')) return ops_.neg(unary());
        if (eat('+')) return unary();
        return power();
    }
    Value power() {
        Value base = primary();
        if (eat('^')) {
            Rational e = exponent();
            return ops_.pow(base, e);
        }
        return base;
    }
    Rational exponent() {
        // Exponents are rational constants: a number or a parenthesized rational expression.
        skip();
        if (eat('(')) {
            std::size_t start = pos_;
            int depth = 1;
            while (pos_ < s_.size() && depth > 0) {
                if (s_[pos_] == '(') ++depth;
                if (s_[pos_] == ')') --depth;
                ++pos_;
            }
            if (depth != 0) fail("unbalanced parentheses in exponent");
            std::string inner(s_.substr(start, pos_ - start - 1));
            return parse_rational_expression(inner);
        }
        bool negative = eat('-');
        Rational r = number_literal();
        return negative ? Rational(-r) : r;
    }
    Value primary() {
        skip();
        if (eat('(')) {
            Value v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (s_.substr(pos_, 4) == "sqrt") {
            pos_ += 4;
            if (!eat('(')) fail("expected '(' after sqrt");
            Value v = expr();
            if (!eat(')')) fail("expected ')'");
            return ops_.pow(v, Rational(1, 2));
        }
        return ops_.constant(number_literal());
    }
    Rational number_literal() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E') && pos_ > start) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        if (start == pos_) fail("expected a number");
        return parse_rational(s_.substr(start, pos_ - start));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    const Ops& ops_;
};

struct RationalOps {
    Rational constant(const Rational& r) const { return r; }
    Rational add(const Rational& a, const Rational& b) const { return a + b; }
    Rational sub(const Rational& a, const Rational& b) const { return a - b; }
    Rational mul(const Rational& a, const Rational& b) const { return a * b; }
    Rational div(const Rational& a, const Rational& b) const {
        if (b == 0) throw std::invalid_argument("division by zero in exponent");
        return a / b;
    }
    Rational neg(const Rational& a) const { return -a; }
    Rational pow(const Rational& a, const Rational& e) const {
        if (e.get_den() != 1) throw std::invalid_argument("nested fractional exponent");
        return pow_rational(a, e.get_num().get_si());
    }
};

inline Rational parse_rational_expression(std::string_view text) {
    RationalOps ops;
    return ExpressionParser<Rational, RationalOps>(text, ops).parse();
}

struct RealOps {
    ExprValue constant(const Rational& r) const { return {to_real(r), r}; }
    ExprValue add(const ExprValue& a, const ExprValue& b) const {
        return {a.value + b.value, a.exact && b.exact ? std::optional<Rational>(canonical(*a.exact + *b.exact)) : std::nullopt};
    }
    ExprValue sub(const ExprValue& a, const ExprValue& b) const {
        return {a.value - b.value, a.exact && b.exact ? std::optional<Rational>(canonical(*a.exact - *b.exact)) : std::nullopt};
    }
    ExprValue mul(const ExprValue& a, const ExprValue& b) const {
        return {a.value * b.value, a.exact && b.exact ? std::optional<Rational>(canonical(*a.exact * *b.exact)) : std::nullopt};
    }
    ExprValue div(const ExprValue& a, const ExprValue& b) const {
        if (b.value == 0) throw std::invalid_argument("division by zero");
        return {a.value / b.value, a.exact && b.exact ? std::optional<Rational>(canonical(*a.exact / *b.exact)) : std::nullopt};
    }
    ExprValue neg(const ExprValue& a) const {
        return {-a.value, a.exact ? std::optional<Rational>(-*a.exact) : std::nullopt};
    }
    ExprValue pow(const ExprValue& a, const Rational& e) const {
        if (e.get_den() == 1) {
            long k = e.get_num().get_si();
            if (a.exact && !(k < 0 && *a.exact == 0)) return {to_real(pow_rational(*a.exact, k)), pow_rational(*a.exact, k)};
            return {boost::multiprecision::pow(a.value, k), std::nullopt};
        }
        if (a.value < 0) throw std::invalid_argument("fractional power of a negative number");
        Real v = boost::multiprecision::pow(a.value, to_real(e));
        // Exact when the root is rational.
        if (a.exact && *a.exact > 0) {
            Integer num = a.exact->get_num(), den = a.exact->get_den();
            unsigned long root = e.get_den().get_ui();
            Integer rn, rd;
            if (mpz_root(rn.get_mpz_t(), num.get_mpz_t(), root) && mpz_root(rd.get_mpz_t(), den.get_mpz_t(), root)) {
                Rational base(rn, rd);
                base.canonicalize();
                Rational r = pow_rational(base, e.get_num().get_si());
                return {to_real(r), r};
            }
        }
        return {v, std::nullopt};
    }
};

struct PAdicOps {
    long p;
    long precision;
    PAdic constant(const Rational& r) const { return PAdic::from_rational(r, p, precision); }
    PAdic add(const PAdic& a, const PAdic& b) const { return a + b; }
    PAdic sub(const PAdic& a, const PAdic& b) const { return a - b; }
    PAdic mul(const PAdic& a, const PAdic& b) const { return a * b; }
    PAdic div(const PAdic& a, const PAdic& b) const { return a / b; }
    PAdic neg(const PAdic& a) const { return -a; }
    PAdic pow(const PAdic& a, const Rational& e) const {
        if (e.get_den() == 1) {
            long k = e.get_num().get_si();
            PAdic out = PAdic::from_rational(1, p, precision);
            PAdic base = k < 0 ? PAdic::from_rational(1, p, precision) / a : a;
            for (long i = 0; i < std::abs(k); ++i) out = out * base;
            return out;
        }
        if (e != Rational(1, 2)) throw std::invalid_argument("p-adic expressions support only square roots");
        if (a.is_zero_to_precision()) return a;
        long v = a.valuation();
        if (v % 2 != 0) throw std::invalid_argument("no p-adic square root: odd valuation");
        // Lift the square root of the unit part, then restore p^{v/2}.
        long rel = a.relative_precision();
        PAdic unit = a * PAdic::from_rational(pow_rational(Rational(p), -v), p, rel - v);
        Integer root = hensel_sqrt(unit.residue(), p, rel, +1);
        return PAdic::from_rational(Rational(root) * pow_rational(Rational(p), v / 2), p, rel + v / 2);
    }
};

}  // namespace detail

using detail::parse_rational_expression;

inline ExprValue evaluate_expression(std::string_view text) {
    detail::RealOps ops;
    return detail::ExpressionParser<ExprValue, detail::RealOps>(text, ops).parse();
}

inline PAdic evaluate_padic_expression(std::string_view text, long p, long precision) {
    detail::PAdicOps ops{p, precision};
    return detail::ExpressionParser<PAdic, detail::PAdicOps>(text, ops).parse();
}

/// Splits "a,b,c" at top-level commas.
inline std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Targets.

inline FieldContext field_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational") return FieldContext::rational();
    if (kind == "quadratic") return FieldContext::quadratic(j.at("D").get<long>());
    throw std::invalid_argument("unknown field kind: " + kind);
}

/// Field descriptor strings: "rational", "Q", "D=2", "quadratic:2".
inline FieldContext field_from_string(const std::string& s) {
    if (s == "rational" || s == "Q" || s == "QQ") return FieldContext::rational();
    auto pos = s.find_first_of("=:");
    if (pos != std::string::npos) return FieldContext::quadratic(std::stol(s.substr(pos + 1)));
    throw std::invalid_argument("unknown field descriptor: " + s);
}

inline Place place_from_json(const FieldContext& K, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "inf") {
        auto places = places_above(K, 0);
        std::size_t idx = j.value("index", 0);
        if (idx >= places.size()) throw std::invalid_argument("archimedean place index out of range");
        return places[idx];
    }
    if (kind == "finite") {
        long p = j.at("p").get<long>();
        auto places = places_above(K, p);
        if (places.size() == 2) {
            std::string root = j.value("root", "+");
            return root == "-" ? places[1] : places[0];
        }
        return places[0];
    }
    throw std::invalid_argument("unknown place kind: " + kind);
}

/// "inf", "inf1", "p=7", "p=7-", "7".
inline Place place_from_string(const FieldContext& K, const std::string& s) {
    if (s.rfind("inf", 0) == 0) {
        json j = {{"kind", "inf"}, {"index", s.size() > 3 ? std::stoi(s.substr(3)) : 0}};
        return place_from_json(K, j);
    }
    std::string body = s.rfind("p=", 0) == 0 ? s.substr(2) : s;
    std::string root = "+";
    if (!body.empty() && (body.back() == '+' || body.back() == '-')) root = std::string(1, body.back()), body.pop_back();
    if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("malformed place: " + s);
    return place_from_json(K, {{"kind", "finite"}, {"p", std::stol(body)}, {"root", root}});
}

inline ApproximationTarget make_target(const FieldContext& K, const Place& w, const std::vector<std::string>& xi,
                                       long padic_precision = 40) {
    if (xi.size() < 1) throw std::invalid_argument("xi must have at least one coordinate");
    if (w.is_archimedean()) {
        if (w.complex) throw std::invalid_argument("complex places are not supported for targets given as real expressions");
        Vector<Real> vals;
        Vector<Rational> exact;
        bool all_exact = true;
        for (const auto& s : xi) {
            auto v = evaluate_expression(s);
            vals.push_back(v.value);
            if (v.exact)
                exact.push_back(*v.exact);
            else
                all_exact = false;
        }
        return ApproximationTarget::real_place(K, w, vals, all_exact ? std::optional<Vector<Rational>>(exact) : std::nullopt);
    }
    if (!K.is_rational() && w.splitting != Place::Splitting::split)
        throw std::invalid_argument("finite w over a quadratic field must be a split place");
    Vector<PAdic> vals;
    for (const auto& s : xi) vals.push_back(evaluate_padic_expression(s, w.p, padic_precision));
    return ApproximationTarget::finite_place(K, w, vals);
}

inline ApproximationTarget target_from_json(const json& j) {
    FieldContext K = j.contains("field") ? field_from_json(j.at("field")) : FieldContext::rational();
    Place w = j.contains("place") ? place_from_json(K, j.at("place")) : places_above(K, 0).front();
    std::vector<std::string> xi;
    for (const auto& x : j.at("xi")) xi.push_back(x.is_string() ? x.get<std::string>() : x.dump());
    return make_target(K, w, xi, j.value("padic_precision", 40L));
}

}  // namespace parageo::io

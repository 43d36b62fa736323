#pragma once

#include "exterior.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace parageo {

/// A rational or +∞.
struct ExtendedRational {
    bool infinite = false;
    Rational value = 0;

    static ExtendedRational inf() { return {true, 0}; }
    static ExtendedRational of(Rational v) { return {false, canonical(std::move(v))}; }
    /// 1/x − 1 for x ∈ [0,1], with 1/0 = ∞.
    static ExtendedRational reciprocal_minus_one(const Rational& x) {
        if (x == 0) return inf();
        return of(1 / x - 1);
    }
    double to_double() const { return infinite ? std::numeric_limits<double>::infinity() : value.get_d(); }
    std::string str() const { return infinite ? "inf" : value.get_str(); }
    friend bool operator==(const ExtendedRational& a, const ExtendedRational& b) {
        return a.infinite == b.infinite && (a.infinite || a.value == b.value);
    }
};

struct Switch {
    Rational q;
    Vector<Rational> values;  // sorted
    int k = 1;                // rank of the component rising on [q_i, q_{i+1})
    int l = 0;                // rank at which the previous riser arrives (0 at the first switch)
};

struct Tail {
    enum class Kind { finite, periodic, scaling };
    Kind kind = Kind::finite;
    int period = 0;            // number of stored switches forming one period
    Rational dq = 0;           // periodic: shift in q
    Vector<Rational> dv;       // periodic: shift in values
    Rational factor = 1;       // scaling: P(ρq) = ρP(q)
};

struct Violation {
    std::string condition;
    long index = -1;
    std::string message;
};

class NSystem {
public:
    NSystem() = default;
    NSystem(int n, Rational q0, std::vector<Switch> switches, Tail tail = {}, std::optional<Rational> mesh = std::nullopt,
            bool float_input = false)
        : n_(n), q0_(std::move(q0)), switches_(std::move(switches)), tail_(std::move(tail)), mesh_(std::move(mesh)),
          float_input_(float_input) {}

    int n() const { return n_; }
    const Rational& q0() const { return q0_; }
    const std::vector<Switch>& switches() const { return switches_; }
    const Tail& tail() const { return tail_; }
    const std::optional<Rational>& mesh() const { return mesh_; }
    bool float_input() const { return float_input_; }
    bool is_dual() const { return dual_; }
    bool is_finite() const { return tail_.kind == Tail::Kind::finite; }

    /// Switch i of the (possibly unrolled) sequence.
    Switch switch_at(std::size_t i) const {
        const std::size_t s = switches_.size();
        if (i < s) return switches_[i];
        if (is_finite()) throw std::out_of_range("switch index beyond a finite system");
        const std::size_t m = static_cast<std::size_t>(tail_.period);
        std::size_t j = i - (s - m);
        std::size_t cycles = j / m;
        Switch sw = switches_[s - m + j % m];
        if (tail_.kind == Tail::Kind::periodic) {
            sw.q += tail_.dq * static_cast<long>(cycles);
            for (int t = 0; t < n_; ++t) sw.values[static_cast<std::size_t>(t)] += tail_.dv[static_cast<std::size_t>(t)] * static_cast<long>(cycles);
        } else {
            Rational f = pow_rational(tail_.factor, static_cast<long>(cycles));
            sw.q *= f;
            for (auto& v : sw.values) v *= f;
        }
        return sw;
    }

    /// Switches with q ≤ upto (all stored ones plus unrolled tail copies).
    std::vector<Switch> switches_upto(const Rational& upto) const {
        std::vector<Switch> out;
        for (std::size_t i = 0;; ++i) {
            if (is_finite() && i >= switches_.size()) break;
            Switch sw = switch_at(i);
            if (sw.q > upto && i >= switches_.size()) break;
            out.push_back(std::move(sw));
        }
        return out;
    }

    /// P(q) of the underlying system (ignoring the dual flag).
    Vector<Rational> evaluate_primal(const Rational& q) const {
        if (switches_.empty()) throw std::logic_error("empty system");
        if (q < switches_.front().q) throw std::out_of_range("q below the start of the system");
        const std::size_t s = switches_.size();
        if (!is_finite()) {
            const std::size_t m = static_cast<std::size_t>(tail_.period);
            const Rational& base = switches_[s - m].q;
            if (q >= base) {
                if (tail_.kind == Tail::Kind::periodic) {
                    Rational c = (q - base) / tail_.dq;
                    Integer cycles;
                    mpz_fdiv_q(cycles.get_mpz_t(), c.get_num_mpz_t(), c.get_den_mpz_t());
                    auto v = evaluate_stored(q - tail_.dq * cycles);
                    for (int t = 0; t < n_; ++t) v[static_cast<std::size_t>(t)] += tail_.dv[static_cast<std::size_t>(t)] * cycles;
                    return v;
                }
                Rational scale = 1, x = q;
                const Rational limit = base * tail_.factor;
                while (x >= limit) x /= tail_.factor, scale *= tail_.factor;
                auto v = evaluate_stored(x);
                for (auto& c : v) c *= scale;
                return v;
            }
        }
        return evaluate_stored(q);
    }

    Vector<Rational> evaluate(const Rational& q) const {
        auto v = evaluate_primal(q);
        if (!dual_) return v;
        Vector<Rational> out;
        for (auto it = v.rbegin(); it != v.rend(); ++it) out.push_back(q - *it);
        return out;
    }

    NSystem with_dual_flag(bool dual) const {
        NSystem out = *this;
        out.dual_ = dual;
        return out;
    }

    void set_mesh(std::optional<Rational> mesh) { mesh_ = std::move(mesh); }

private:
    Vector<Rational> evaluate_stored(const Rational& q) const {
        auto it = std::upper_bound(switches_.begin(), switches_.end(), q,
                                   [](const Rational& x, const Switch& sw) { return x < sw.q; });
        const Switch& sw = *std::prev(it);
        Vector<Rational> v = sw.values;
        v[static_cast<std::size_t>(sw.k - 1)] += q - sw.q;
        std::sort(v.begin(), v.end());
        return v;
    }

    int n_ = 0;
    Rational q0_ = 0;
    std::vector<Switch> switches_;
    Tail tail_;
    std::optional<Rational> mesh_;
    bool float_input_ = false;
    bool dual_ = false;
};

// ---------------------------------------------------------------------------
// Validation of (S1)–(S3).

namespace detail {

struct Comparator {
    bool tolerant;
    bool eq(const Rational& a, const Rational& b, const Rational& scale) const {
        if (!tolerant) return a == b;
        return std::abs(Rational(a - b).get_d()) <= 1e-9 * (1 + std::abs(scale.get_d()));
    }
    bool gt(const Rational& a, const Rational& b) const {
        if (!tolerant) return a > b;
        return Rational(a - b).get_d() > 1e-9;
    }
    bool ge(const Rational& a, const Rational& b) const {
        if (!tolerant) return a >= b;
        return Rational(a - b).get_d() >= -1e-9;
    }
};

}  // namespace detail

inline std::vector<Violation> validate(const NSystem& sys) {
    std::vector<Violation> out;
    const int n = sys.n();
    const detail::Comparator cmp{sys.float_input()};
    auto fail = [&](std::string cond, long idx, std::string msg) { out.push_back({std::move(cond), idx, std::move(msg)}); };
    if (n < 1) {
        fail("shape", -1, "n must be positive");
        return out;
    }
    const auto& stored = sys.switches();
    if (stored.empty()) {
        fail("shape", -1, "no switches");
        return out;
    }
    if (stored.front().q != sys.q0() && !cmp.eq(stored.front().q, sys.q0(), sys.q0()))
        fail("S2", 0, "first switch must sit at q0");

    const auto& tail = sys.tail();
    std::size_t total = stored.size();
    if (!sys.is_finite()) {
        if (tail.period < 1 || static_cast<std::size_t>(tail.period) > stored.size()) {
            fail("tail", -1, "period length must be in 1..#switches");
            return out;
        }
        if (tail.kind == Tail::Kind::periodic) {
            if (static_cast<int>(tail.dv.size()) != n) {
                fail("tail", -1, "dv has wrong length");
                return out;
            }
            if (!cmp.gt(tail.dq, 0)) fail("tail", -1, "dq must be positive");
            Rational sum = 0;
            for (const auto& v : tail.dv) sum += v;
            if (!cmp.eq(sum, tail.dq, tail.dq)) fail("tail", -1, "sum of dv must equal dq");
            for (int j = 0; j + 1 < n; ++j)
                if (!cmp.ge(tail.dv[static_cast<std::size_t>(j + 1)], tail.dv[static_cast<std::size_t>(j)]))
                    fail("tail", -1, "dv must be nondecreasing");
            for (const auto& v : tail.dv)
                if (!cmp.ge(v, 0)) fail("tail", -1, "dv must be nonnegative");
        } else if (!cmp.gt(tail.factor, 1)) {
            fail("tail", -1, "scaling factor must exceed 1");
        }
        if (!out.empty()) return out;
        total += static_cast<std::size_t>(tail.period) + 1;  // one unrolled period plus its successor
    }

    std::optional<Switch> prev;
    for (std::size_t i = 0; i < total; ++i) {
        Switch sw = sys.switch_at(i);
        const long idx = static_cast<long>(i);
        if (static_cast<int>(sw.values.size()) != n) {
            fail("shape", idx, "values have wrong length");
            return out;
        }
        if (sw.k < 1 || sw.k > n) fail("shape", idx, "rise index k out of range");
        if (i > 0 && (sw.l < 1 || sw.l > n)) fail("shape", idx, "arrival index l out of range");
        if (!cmp.ge(sw.values.front(), 0)) fail("S1", idx, "negative component");
        Rational sum = 0;
        for (int j = 0; j < n; ++j) {
            sum += sw.values[static_cast<std::size_t>(j)];
            if (j + 1 < n && !cmp.ge(sw.values[static_cast<std::size_t>(j + 1)], sw.values[static_cast<std::size_t>(j)]))
                fail("S1", idx, "values not nondecreasing");
        }
        if (!cmp.eq(sum, sw.q, sw.q)) fail("S1", idx, "values do not sum to q");
        if (!out.empty()) return out;
        if (prev) {
            if (!cmp.gt(sw.q, prev->q)) {
                fail("S2", idx, "switch numbers not strictly increasing");
                return out;
            }
            Rational delta = sw.q - prev->q;
            Vector<Rational> expect = prev->values;
            Rational arrival = expect[static_cast<std::size_t>(prev->k - 1)] + delta;
            expect[static_cast<std::size_t>(prev->k - 1)] = arrival;
            std::sort(expect.begin(), expect.end());
            for (int j = 0; j < n; ++j)
                if (!cmp.eq(expect[static_cast<std::size_t>(j)], sw.values[static_cast<std::size_t>(j)], sw.q)) {
                    fail("S2", idx, "values are not reached by a single slope-1 segment from the previous switch");
                    return out;
                }
            if (!cmp.eq(sw.values[static_cast<std::size_t>(sw.l - 1)], arrival, sw.q))
                fail("S2", idx, "arrival rank l does not carry the end of the rising segment");
            // A single component never switches, so S3 is vacuous for n = 1.
            if (n > 1 && !cmp.gt(arrival, sw.values[static_cast<std::size_t>(sw.k - 1)]))
                fail("S3", idx, "rising segment does not end strictly above the start of the next one");
        }
        prev = std::move(sw);
    }
    return out;
}

inline bool is_valid(const NSystem& sys) { return validate(sys).empty(); }

/// Rigid of mesh χ at every switch with q ≥ from (and at `from` itself when it is not a switch).
inline bool is_rigid(const NSystem& sys, const Rational& mesh, std::optional<Rational> from = std::nullopt) {
    if (mesh <= 0) throw std::invalid_argument("mesh must be positive");
    auto rigid_values = [&](const Vector<Rational>& v) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] <= 0) return false;
            if (Rational(v[j] / mesh).get_den() != 1) return false;
            if (j > 0 && v[j] == v[j - 1]) return false;
        }
        return true;
    };
    const Rational start = from.value_or(sys.q0());
    if (from && !rigid_values(sys.evaluate_primal(*from))) return false;
    std::size_t count = sys.switches().size();
    if (!sys.is_finite()) {
        const auto& t = sys.tail();
        if (t.kind == Tail::Kind::periodic) {
            for (const auto& d : t.dv)
                if (Rational(d / mesh).get_den() != 1) return false;
        } else if (t.factor.get_den() != 1) {
            return false;
        }
        count += static_cast<std::size_t>(t.period);
    }
    for (std::size_t i = 0; i < count; ++i) {
        Switch sw = sys.switch_at(i);
        if (sw.q < start) continue;
        if (!rigid_values(sw.values)) return false;
    }
    return true;
}

/// P*(q) = (q − P_n(q), …, q − P_1(q)); an involution, and the identity for n = 2.
inline NSystem dual(const NSystem& sys) {
    if (sys.n() == 2) return sys.with_dual_flag(false);
    return sys.with_dual_flag(!sys.is_dual());
}

// ---------------------------------------------------------------------------
// Breakpoints of the sorted components.

/// All q ≤ upto at which some sorted component can change slope: switches and crossing points.
inline std::vector<Rational> breakpoints(const NSystem& sys, const Rational& upto) {
    std::vector<Rational> out;
    auto sws = sys.switches_upto(upto);
    for (std::size_t i = 0; i < sws.size(); ++i) {
        const auto& sw = sws[i];
        if (sw.q > upto) break;
        out.push_back(sw.q);
        std::optional<Rational> next;
        if (i + 1 < sws.size()) next = sws[i + 1].q;
        const Rational& start = sw.values[static_cast<std::size_t>(sw.k - 1)];
        for (const auto& v : sw.values) {
            if (v <= start) continue;
            Rational t = sw.q + (v - start);
            if ((!next || t < *next) && t <= upto) out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Exact sup over [from, upto] of max_k |A_k(q) − B_k(q)|.
inline Rational sup_distance(const NSystem& a, const NSystem& b, const Rational& from, const Rational& upto) {
    auto pa = breakpoints(a, upto), pb = breakpoints(b, upto);
    std::vector<Rational> pts;
    pts.push_back(from);
    pts.push_back(upto);
    for (auto* v : {&pa, &pb})
        for (const auto& q : *v)
            if (q >= from && q <= upto) pts.push_back(q);
    Rational best = 0;
    for (const auto& q : pts) {
        auto x = a.evaluate(q), y = b.evaluate(q);
        for (std::size_t j = 0; j < x.size(); ++j) best = std::max(best, Rational(abs(x[j] - y[j])));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exponents.

struct SystemExponents {
    Vector<Rational> phi_lower, phi_upper;  // j = 1..n
    Vector<Rational> psi_lower, psi_upper;  // j = 1..n−1
    ExtendedRational omega, omega_hat, lambda, lambda_hat;
    std::vector<ExtendedRational> omega_k, omega_hat_k;  // index k−1 = 0..n−2
};

inline SystemExponents exponents(const NSystem& sys) {
    if (sys.is_dual()) throw std::invalid_argument("exponents are defined for the system, not its dual");
    if (sys.is_finite())
        throw std::domain_error("first component is bounded for a finite system; exponents undefined");
    const int n = sys.n();
    const auto& tail = sys.tail();
    const std::size_t s = sys.switches().size(), m = static_cast<std::size_t>(tail.period);
    SystemExponents e;
    e.phi_lower.assign(static_cast<std::size_t>(n), 0);
    e.phi_upper.assign(static_cast<std::size_t>(n), 0);
    e.psi_lower.assign(static_cast<std::size_t>(std::max(n - 1, 0)), 0);
    e.psi_upper = e.psi_lower;

    if (tail.kind == Tail::Kind::periodic) {
        Rational acc = 0;
        for (int j = 0; j < n; ++j) {
            Rational r = canonical(tail.dv[static_cast<std::size_t>(j)] / tail.dq);
            e.phi_lower[static_cast<std::size_t>(j)] = e.phi_upper[static_cast<std::size_t>(j)] = r;
            acc += r;
            if (j < n - 1) e.psi_lower[static_cast<std::size_t>(j)] = e.psi_upper[static_cast<std::size_t>(j)] = canonical(acc);
        }
    } else {
        // P(q)/q is invariant under q ↦ ρq: extrema over one period at switches and crossings.
        const Rational start = sys.switch_at(s - m).q, end = sys.switch_at(s).q;
        std::vector<Rational> cands;
        for (std::size_t i = s - m; i < s; ++i) {
            Switch sw = sys.switch_at(i), nx = sys.switch_at(i + 1);
            cands.push_back(sw.q);
            const Rational& st = sw.values[static_cast<std::size_t>(sw.k - 1)];
            for (const auto& v : sw.values)
                if (v > st && sw.q + (v - st) < nx.q) cands.push_back(sw.q + (v - st));
        }
        cands.push_back(end);
        if (start <= 0) throw std::domain_error("scaling period must start at q > 0");
        bool first = true;
        for (const auto& q : cands) {
            auto v = sys.evaluate_primal(q);
            Rational acc = 0;
            for (int j = 0; j < n; ++j) {
                Rational r = canonical(v[static_cast<std::size_t>(j)] / q);
                auto& lo = e.phi_lower[static_cast<std::size_t>(j)];
                auto& hi = e.phi_upper[static_cast<std::size_t>(j)];
                if (first || r < lo) lo = r;
                if (first || r > hi) hi = r;
                acc += v[static_cast<std::size_t>(j)];
                if (j < n - 1) {
                    Rational ps = canonical(acc / q);
                    auto& plo = e.psi_lower[static_cast<std::size_t>(j)];
                    auto& phi = e.psi_upper[static_cast<std::size_t>(j)];
                    if (first || ps < plo) plo = ps;
                    if (first || ps > phi) phi = ps;
                }
            }
            first = false;
        }
    }
    if (e.phi_upper.front() == 0) throw std::domain_error("first component is bounded; exponents undefined");
    e.omega = ExtendedRational::reciprocal_minus_one(e.phi_lower.front());
    e.omega_hat = ExtendedRational::reciprocal_minus_one(e.phi_upper.front());
    e.lambda = ExtendedRational::reciprocal_minus_one(1 - e.phi_upper.back());
    e.lambda_hat = ExtendedRational::reciprocal_minus_one(1 - e.phi_lower.back());
    for (int k = 1; k <= n - 1; ++k) {
        e.omega_k.push_back(ExtendedRational::reciprocal_minus_one(e.psi_lower[static_cast<std::size_t>(n - k - 1)]));
        e.omega_hat_k.push_back(ExtendedRational::reciprocal_minus_one(e.psi_upper[static_cast<std::size_t>(n - k - 1)]));
    }
    return e;
}

/// Residual (1−2φ̄₁)(1−2φ̲₃) − φ̄₁φ̲₃ of Jarník's identity for a 3-system.
inline Rational jarnik_residual(const SystemExponents& e) {
    if (e.phi_lower.size() != 3) throw std::invalid_argument("Jarník's identity concerns 3-systems");
    const Rational& a = e.phi_upper[0];
    const Rational& b = e.phi_lower[2];
    return canonical((1 - 2 * a) * (1 - 2 * b) - a * b);
}

// ---------------------------------------------------------------------------
// Extension of scalars on systems: R_{d(i−1)+j}(q) = P_i(q/d).

class GeneralizedSystem {
public:
    GeneralizedSystem(NSystem base, int d) : base_(std::move(base)), d_(d) {
        if (d < 1) throw std::invalid_argument("d must be positive");
    }
    int n() const { return base_.n() * d_; }
    int d() const { return d_; }
    Rational slope() const { return Rational(1, d_); }
    const NSystem& base() const { return base_; }
    Vector<Rational> evaluate(const Rational& q) const {
        auto v = base_.evaluate(q / d_);
        Vector<Rational> out;
        for (const auto& c : v)
            for (int j = 0; j < d_; ++j) out.push_back(c);
        return out;
    }

private:
    NSystem base_;
    int d_;
};

inline GeneralizedSystem extend_scalars_system(const NSystem& sys, int d) { return GeneralizedSystem(sys, d); }

// ---------------------------------------------------------------------------
// Canonical template systems.

/// Template n-system with values (0,…,0,c′,2c′,…,ic′) at t_i = (1+⋯+i)c′, continued periodically
/// from t_n by the lowest component rising to the top.
inline NSystem template_system(int n, const Rational& cprime) {
    std::vector<Switch> sw;
    for (int i = 0; i <= n; ++i) {
        Switch s;
        s.q = cprime * (i * (i + 1) / 2);
        s.values.assign(static_cast<std::size_t>(n), 0);
        for (int j = 1; j <= i; ++j) s.values[static_cast<std::size_t>(n - i + j - 1)] = cprime * j;
        s.k = i < n ? n - i : 1;
        s.l = i == 0 ? 0 : n;
        sw.push_back(std::move(s));
    }
    Tail tail;
    tail.kind = Tail::Kind::periodic;
    tail.period = 1;
    tail.dq = cprime * n;
    tail.dv.assign(static_cast<std::size_t>(n), cprime);
    return NSystem(n, 0, std::move(sw), tail, cprime);
}

// ---------------------------------------------------------------------------
// Random systems.

/// A random valid n-system on [0,∞) with integer switch values and a finite tail.
inline NSystem random_system(int n, std::mt19937_64& rng, int steps, long max_jump = 6) {
    std::vector<Switch> sw;
    Switch cur;
    cur.q = 0;
    cur.values.assign(static_cast<std::size_t>(n), 0);
    cur.k = n;
    cur.l = 0;
    std::uniform_int_distribution<long> jump(1, max_jump);
    for (int step = 0; step < steps; ++step) {
        sw.push_back(cur);
        const auto& v = cur.values;
        Rational start = v[static_cast<std::size_t>(cur.k - 1)];
        Rational end;
        do {
            end = start + jump(rng);
        } while (std::count(v.begin(), v.end(), end) > 0);
        Vector<Rational> next = v;
        next[static_cast<std::size_t>(cur.k - 1)] = end;
        std::sort(next.begin(), next.end());
        int l = static_cast<int>(std::find(next.begin(), next.end(), end) - next.begin()) + 1;
        // Next riser: a rank strictly below the arrival, taken at the top of its tie group.
        std::vector<int> ranks;
        for (int r = 1; r < l; ++r)
            if (r == n || next[static_cast<std::size_t>(r)] != next[static_cast<std::size_t>(r - 1)]) ranks.push_back(r);
        if (ranks.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, ranks.size() - 1);
        Switch nx;
        nx.q = cur.q + (end - start);
        nx.values = std::move(next);
        nx.k = ranks[pick(rng)];
        nx.l = l;
        cur = std::move(nx);
    }
    if (sw.back().q != cur.q) sw.push_back(cur);
    return NSystem(n, 0, std::move(sw));
}

/// A random eventually-periodic n-system: a random prefix reaching a state S with positive distinct
/// values, then a searched path to ρ·S (scaling tail) or S + c·(1,…,1) (periodic tail).
inline NSystem random_eventually_periodic(int n, std::mt19937_64& rng, bool scaling = true) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        // Prefix.
        NSystem prefix = random_system(n, rng, n + 2 + static_cast<int>(rng() % 3), 4);
        auto sw = prefix.switches();
        const Switch anchor = sw.back();
        if (anchor.l == 0) continue;
        bool ok = anchor.values.front() > 0;
        for (int j = 1; j < n && ok; ++j) ok = anchor.values[static_cast<std::size_t>(j)] != anchor.values[static_cast<std::size_t>(j - 1)];
        if (!ok) continue;
        Vector<Rational> target = anchor.values;
        Rational shift = 0;
        if (scaling) {
            for (auto& v : target) v *= 2;
        } else {
            shift = static_cast<long>(2 + rng() % 4);
            for (auto& v : target) v += shift;
        }
        // Randomized depth-first search for a path anchor → target with matching arrival/rise ranks.
        std::vector<Switch> path;
        long budget = 20000;
        std::function<bool(Switch)> dfs = [&](Switch cur) -> bool {
            if (--budget < 0) return false;
            const auto& v = cur.values;
            Rational start = v[static_cast<std::size_t>(cur.k - 1)];
            std::vector<Rational> ends;
            for (Rational e = start + 1; e <= target.back(); e += 1)
                if (std::count(v.begin(), v.end(), e) == 0) ends.push_back(e);
            std::shuffle(ends.begin(), ends.end(), rng);
            for (const auto& e : ends) {
                Vector<Rational> next = v;
                next[static_cast<std::size_t>(cur.k - 1)] = e;
                std::sort(next.begin(), next.end());
                bool dominated = true;
                for (int j = 0; j < n && dominated; ++j) dominated = next[static_cast<std::size_t>(j)] <= target[static_cast<std::size_t>(j)];
                if (!dominated) continue;
                int l = static_cast<int>(std::find(next.begin(), next.end(), e) - next.begin()) + 1;
                Switch nx;
                nx.q = cur.q + (e - start);
                nx.values = next;
                nx.l = l;
                if (next == target) {
                    if (l != anchor.l) continue;
                    return true;  // the closing switch is the first unrolled copy of the anchor
                }
                std::vector<int> ranks;
                for (int r = 1; r < l; ++r) ranks.push_back(r);
                std::shuffle(ranks.begin(), ranks.end(), rng);
                for (int r : ranks) {
                    nx.k = r;
                    path.push_back(nx);
                    if (dfs(path.back())) return true;
                    path.pop_back();
                }
            }
            return false;
        };
        if (!dfs(anchor)) continue;
        std::vector<Switch> all = sw;
        all.insert(all.end(), path.begin(), path.end());
        Tail tail;
        tail.period = static_cast<int>(path.size()) + 1;
        if (scaling) {
            tail.kind = Tail::Kind::scaling;
            tail.factor = 2;
        } else {
            tail.kind = Tail::Kind::periodic;
            tail.dq = shift * n;
            tail.dv.assign(static_cast<std::size_t>(n), shift);
        }
        NSystem out(n, 0, std::move(all), tail);
        if (is_valid(out)) return out;
    }
    throw std::runtime_error("failed to generate an eventually periodic system");
}

// ---------------------------------------------------------------------------
// Rigidification.

struct RigidifyResult {
    NSystem system;
    Rational q0;
    Rational mesh;
    Rational horizon;
    Rational sup_distance;
    std::vector<Violation> violations;  // empty iff the contract holds
};

namespace detail {

/// Double-precision view of a system for the tracking search.
class FastSystem {
public:
    FastSystem(const NSystem& sys, const Rational& upto) {
        for (const auto& sw : sys.switches_upto(upto)) {
            q_.push_back(sw.q.get_d());
            std::vector<double> v;
            for (const auto& x : sw.values) v.push_back(x.get_d());
            values_.push_back(std::move(v));
            k_.push_back(sw.k);
        }
    }
    std::vector<double> eval(double q) const {
        auto it = std::upper_bound(q_.begin(), q_.end(), q);
        std::size_t i = it == q_.begin() ? 0 : static_cast<std::size_t>(it - q_.begin() - 1);
        std::vector<double> v = values_[i];
        v[static_cast<std::size_t>(k_[i] - 1)] += std::max(0.0, q - q_[i]);
        std::sort(v.begin(), v.end());
        return v;
    }
    /// Switch times and crossing times in (a, b).
    void events(double a, double b, std::vector<double>& out) const {
        auto it = std::upper_bound(q_.begin(), q_.end(), a);
        std::size_t i = it == q_.begin() ? 0 : static_cast<std::size_t>(it - q_.begin() - 1);
        for (; i < q_.size() && q_[i] < b; ++i) {
            if (q_[i] > a) out.push_back(q_[i]);
            double st = values_[i][static_cast<std::size_t>(k_[i] - 1)];
            double nx = i + 1 < q_.size() ? q_[i + 1] : std::numeric_limits<double>::infinity();
            for (double v : values_[i]) {
                double t = q_[i] + (v - st);
                if (v > st && t < nx && t > a && t < b) out.push_back(t);
            }
        }
    }
    /// (rank, end value, end time) of the riser active at q, or end = ∞ for the final riser.
    std::tuple<int, double, double> riser(double q, std::size_t ahead = 0) const {
        auto it = std::upper_bound(q_.begin(), q_.end(), q);
        std::size_t i = it == q_.begin() ? 0 : static_cast<std::size_t>(it - q_.begin() - 1);
        i += ahead;
        if (i >= q_.size()) return {0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        double st = values_[i][static_cast<std::size_t>(k_[i] - 1)];
        if (i + 1 >= q_.size()) return {k_[i], std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        return {k_[i], st + (q_[i + 1] - q_[i]), q_[i + 1]};
    }
    double last_switch() const { return q_.back(); }

private:
    std::vector<double> q_;
    std::vector<std::vector<double>> values_;
    std::vector<int> k_;
};

/// Mesh state: sorted integer multiples of the mesh unit.
struct MeshState {
    std::vector<long> values;
    long prev_end;  // value where the previous riser stopped
    long time;      // Σ values
};

struct MeshMove {
    int k;      // 1-based rank
    long end;   // stop value (LONG_MAX: rise forever)
};

class Tracker {
public:
    Tracker(const FastSystem& target, double unit, double horizon) : L_(target), mu_(unit), horizon_(horizon) {}

    /// max_j |R_j − L_j| over the rising interval of the move (exact on breakpoints, in double).
    double interval_cost(const MeshState& s, const MeshMove& mv) const {
        const long start = s.values[static_cast<std::size_t>(mv.k - 1)];
        const double a = static_cast<double>(s.time) * mu_;
        const double b = static_cast<double>(s.time + (mv.end - start)) * mu_;
        std::vector<double> pts{a, b};
        L_.events(a, b, pts);
        for (long v : s.values)
            if (v > start && v < mv.end) pts.push_back(a + static_cast<double>(v - start) * mu_);
        double worst = 0;
        std::vector<double> r(s.values.size());
        for (double q : pts) {
            for (std::size_t j = 0; j < r.size(); ++j) r[j] = static_cast<double>(s.values[j]) * mu_;
            r[static_cast<std::size_t>(mv.k - 1)] += q - a;
            std::sort(r.begin(), r.end());
            auto l = L_.eval(q);
            for (std::size_t j = 0; j < r.size(); ++j) worst = std::max(worst, std::abs(r[j] - l[j]));
        }
        return worst;
    }

    static MeshState apply(const MeshState& s, const MeshMove& mv) {
        MeshState out = s;
        long start = s.values[static_cast<std::size_t>(mv.k - 1)];
        out.values[static_cast<std::size_t>(mv.k - 1)] = mv.end;
        std::sort(out.values.begin(), out.values.end());
        out.prev_end = mv.end;
        out.time = s.time + (mv.end - start);
        return out;
    }

    std::vector<MeshMove> moves(const MeshState& s, bool first) const {
        std::vector<MeshMove> out;
        const std::size_t n = s.values.size();
        const double now = static_cast<double>(s.time) * mu_;
        std::vector<double> targets;
        for (std::size_t ahead = 0; ahead < 3; ++ahead) {
            auto [rk, end, when] = L_.riser(now, ahead);
            if (std::isfinite(end)) targets.push_back(end / mu_);
            (void)rk;
            (void)when;
        }
        auto lnow = L_.eval(now);
        for (double v : lnow) targets.push_back(v / mu_);
        for (std::size_t k = 1; k <= n; ++k) {
            if (first && k != 1) continue;
            const long start = s.values[k - 1];
            if (!first && start >= s.prev_end) continue;
            auto occupied = [&](long v) {
                for (std::size_t j = 0; j < n; ++j)
                    if (j != k - 1 && s.values[j] == v) return true;
                return false;
            };
            long min_other = std::numeric_limits<long>::max();
            for (std::size_t j = 0; j < n; ++j)
                if (j != k - 1) min_other = std::min(min_other, s.values[j]);
            long lowest = start + 1;
            if (first) lowest = std::max(lowest, start + 2);
            if (n > 1) lowest = std::max(lowest, min_other + 1);
            auto allowed = [&](long v) { return v >= lowest && !occupied(v); };
            std::vector<long> ends;
            auto add_near = [&](double t) {
                long c = std::max(lowest, static_cast<long>(std::llround(t)));
                for (long v = c, found = 0; found < 2 && v < c + 4 * static_cast<long>(n) + 8; ++v)
                    if (allowed(v)) ends.push_back(v), ++found;
                for (long v = c - 1, found = 0; found < 1 && v >= lowest; --v)
                    if (allowed(v)) ends.push_back(v), ++found;
            };
            add_near(static_cast<double>(lowest));
            for (double t : targets) add_near(t);
            std::sort(ends.begin(), ends.end());
            ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
            for (long e : ends) out.push_back({static_cast<int>(k), e});
        }
        return out;
    }

    /// Chooses the next move by a two-step lookahead on the sup deviation.
    MeshMove choose(const MeshState& s, bool first) const {
        auto cand = moves(s, first);
        if (cand.empty()) throw std::logic_error("rigidify: no admissible move");
        double best = std::numeric_limits<double>::infinity();
        double best_tail = std::numeric_limits<double>::infinity();
        MeshMove pick = cand.front();
        for (const auto& mv : cand) {
            double c1 = interval_cost(s, mv);
            if (c1 > best) continue;
            MeshState nx = apply(s, mv);
            double c2 = std::numeric_limits<double>::infinity();
            if (static_cast<double>(nx.time) * mu_ >= horizon_) {
                c2 = 0;
            } else {
                for (const auto& mv2 : moves(nx, false)) c2 = std::min(c2, interval_cost(nx, mv2));
            }
            double c = std::max(c1, c2);
            // Tie-break toward the state closest to the target at the stop time.
            auto l = L_.eval(static_cast<double>(nx.time) * mu_);
            double tail = 0;
            for (std::size_t j = 0; j < l.size(); ++j)
                tail = std::max(tail, std::abs(static_cast<double>(nx.values[j]) * mu_ - l[j]));
            if (c < best - 1e-12 || (c <= best + 1e-12 && tail < best_tail)) {
                best = c;
                best_tail = tail;
                pick = mv;
            }
        }
        return pick;
    }

private:
    const FastSystem& L_;
    double mu_;
    double horizon_;
};

}  // namespace detail

/// Checks the rigidification contract; returns the violations (empty iff it holds).
inline std::vector<Violation> check_rigidify_contract(const NSystem& input, const NSystem& output, const Rational& cprime,
                                                      const Rational& horizon, Rational* sup_out = nullptr) {
    std::vector<Violation> out;
    const int n = input.n();
    const Rational mesh = cprime / 2;
    const Rational q0 = Rational(n * n - n + 1) * cprime / 2;
    for (auto& v : validate(output)) out.push_back({"valid:" + v.condition, v.index, v.message});
    if (output.q0() != 0) out.push_back({"domain", -1, "output must start at 0"});
    if (!out.empty()) return out;
    if (!is_rigid(output, mesh, q0)) out.push_back({"rigid", -1, "not rigid of mesh c'/2 on [q0,∞)"});
    Rational sup = sup_distance(input, output, 0, horizon);
    if (sup_out) *sup_out = sup;
    if (sup > 4 * n * n * cprime)
        out.push_back({"distance", -1, "sup distance " + sup.get_str() + " exceeds 4n²c'"});
    auto a = output.evaluate(q0), b = output.evaluate(q0 + mesh);
    if (b.front() - a.front() != mesh) out.push_back({"slope", -1, "R_1 does not have slope 1 on [q0, q0+c'/2]"});
    return out;
}

/// An n-system on [0,∞), rigid of mesh c′/2 on [q0,∞) with q0 = (n²−n+1)c′/2, tracking the input.
/// Systems with periodic or scaling tails are tracked up to `horizon`.
inline RigidifyResult rigidify(const NSystem& input, const Rational& cprime, std::optional<Rational> horizon = std::nullopt) {
    if (cprime <= 0) throw std::invalid_argument("c' must be positive");
    if (input.is_dual()) throw std::invalid_argument("rigidify expects an n-system, not a dual map");
    if (input.q0() != 0) throw std::invalid_argument("rigidify expects a system on [0,∞)");
    if (auto v = validate(input); !v.empty()) throw std::invalid_argument("rigidify: input is not a valid n-system (" + v.front().condition + ")");
    const int n = input.n();
    const Rational mu = cprime / 2;
    const Rational q0 = Rational(n * n - n + 1) * mu;
    Rational H;
    if (horizon) {
        H = *horizon;
    } else if (input.is_finite()) {
        H = std::max(input.switches().back().q, q0) + 8 * n * n * cprime;
    } else {
        const auto& t = input.tail();
        H = input.switch_at(input.switches().size() + 2 * static_cast<std::size_t>(t.period)).q;
    }
    H = std::max(H, Rational(q0 + 4 * n * n * cprime));

    // Template prefix: R(t_i) = (0,…,0,2μ,…,2iμ) at t_i = i(i+1)μ.
    std::vector<Switch> out;
    for (int i = 0; i < n; ++i) {
        Switch s;
        s.q = mu * (i * (i + 1));
        s.values.assign(static_cast<std::size_t>(n), 0);
        for (int j = 1; j <= i; ++j) s.values[static_cast<std::size_t>(n - i + j - 1)] = mu * (2 * j);
        s.k = n - i;
        s.l = i == 0 ? 0 : n;
        out.push_back(std::move(s));
    }
    if (n == 1) {
        RigidifyResult r{NSystem(1, 0, out), q0, mu, H, 0, {}};
        r.violations = check_rigidify_contract(input, r.system, cprime, H, &r.sup_distance);
        return r;
    }

    // Mesh state at q0 = t_{n−1} + μ, with the rank-1 riser still rising.
    detail::FastSystem fast(input, H + 16 * n * n * cprime);
    const double unit = mu.get_d();
    detail::Tracker tracker(fast, unit, H.get_d());
    detail::MeshState st;
    st.values.push_back(1);
    for (int j = 1; j < n; ++j) st.values.push_back(2 * j);
    st.prev_end = std::numeric_limits<long>::max();
    st.time = n * n - n + 1;

    const double horizon_d = H.get_d();
    auto emit = [&](const detail::MeshState& state, int k, int l) {
        Switch s;
        s.q = mu * state.time;
        for (long v : state.values) s.values.push_back(mu * v);
        s.k = k;
        s.l = l;
        out.push_back(std::move(s));
    };
    auto arrival_rank = [](const detail::MeshState& state, long end) {
        return static_cast<int>(std::find(state.values.begin(), state.values.end(), end) - state.values.begin()) + 1;
    };
    // The first riser is the rank-1 component leaving t_{n−1}; it passes q0 and stops at ≥ 3μ.
    detail::MeshMove mv = tracker.choose(st, true);
    st = detail::Tracker::apply(st, mv);
    while (true) {
        int l = arrival_rank(st, mv.end);
        if (static_cast<double>(st.time) * unit >= horizon_d) {
            emit(st, 1, l);  // the lowest component rises forever
            break;
        }
        mv = tracker.choose(st, false);
        emit(st, mv.k, l);
        st = detail::Tracker::apply(st, mv);
    }

    NSystem R(n, 0, std::move(out), Tail{}, mu);
    RigidifyResult res{R, q0, mu, H, 0, {}};
    res.violations = check_rigidify_contract(input, R, cprime, H, &res.sup_distance);
    return res;
}

}  // namespace parageo

#pragma once

#include "lattice.hpp"
#include "minima.hpp"
#include "nsystem.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace parageo::construct {

using IntVector = Vector<Integer>;
using IntMatrix = Matrix<Integer>;

/// A broken construction invariant, with the name of the invariant and the chain position.
class ContractError : public std::runtime_error {
public:
    ContractError(std::string invariant, long location, const std::string& message)
        : std::runtime_error(message), invariant_(std::move(invariant)), location_(location) {}
    const std::string& invariant() const { return invariant_; }
    long location() const { return location_; }

private:
    std::string invariant_;
    long location_;
};

// ---------------------------------------------------------------------------
// Constants for K = ℚ, S = {∞}, w = ∞ (δ = 1, unit norm scale and covering radius).

struct ConstructionConstants {
    int n = 0;
    Integer C = 0;
    bool heuristic = false;  // C below the admissible bound: results are not rigorous

    static constexpr int delta = 1;
    static constexpr int norm_scale = 1;
    static constexpr int covering_radius = 1;

    static double e() { return std::exp(1.0); }
    double rounding_constant() const { return n * std::ldexp(1.0, n) * std::pow(2 * e() * norm_scale, 2); }
    /// Lower bound on C: the rounding budget of each step and the contraction of consecutive bases.
    double minimal_C() const {
        return std::max(n * std::ldexp(1.0, n + 1) * covering_radius * rounding_constant(), std::ldexp(1.0, n) * std::exp(4.0) * contraction_constant());
    }
    double contraction_constant() const { return std::pow(2 * e() * norm_scale, 2); }
    double chain_deviation() const { return 6 + std::log(contraction_constant()); }
    double mesh() const { return std::log(C.get_d()); }
    Real mesh_real() const { return boost::multiprecision::log(to_real(C)); }

    /// Constant in Σ_j L_j(q) ≥ q − slack from Minkowski's second theorem over ℤⁿ.
    double minkowski_slack() const {
        const double pi = boost::math::constants::pi<double>();
        double ball = std::pow(pi, (n - 1) / 2.0) / std::tgamma((n + 1) / 2.0);  // volume of the unit (n−1)-ball
        return std::lgamma(n + 1.0) + std::log(2 * ball) - n * std::log(2.0);
    }
    double deviation_bound() const { return chain_deviation() + n * (chain_deviation() + minkowski_slack()); }

    bool satisfies_bound() const { return C.get_d() >= minimal_C(); }

    /// The smallest integer C meeting the lower bound.
    static ConstructionConstants standard(int n) {
        if (n < 2) throw std::invalid_argument("construction needs n ≥ 2");
        ConstructionConstants k;
        k.n = n;
        k.C = Integer(std::ceil(k.minimal_C()));
        return k;
    }

    /// Explicit C; values below the bound are accepted only as a labelled heuristic.
    static ConstructionConstants with_C(int n, const Integer& C, bool allow_heuristic) {
        if (n < 2) throw std::invalid_argument("construction needs n ≥ 2");
        if (C < 2) throw std::invalid_argument("C must be an integer ≥ 2");
        ConstructionConstants k;
        k.n = n;
        k.C = C;
        k.heuristic = !k.satisfies_bound();
        if (k.heuristic && !allow_heuristic)
            throw ContractError("constants", -1,
                                "C = " + C.get_str() + " is below the admissible bound " + std::to_string(k.minimal_C()));
        return k;
    }
};

// ---------------------------------------------------------------------------
// Schedule of sizes and types read off a rigid system.

struct ScheduleEntry {
    Vector<long> a;       // sizes: R(q_i) in mesh units, strictly increasing
    int k = 1;            // rank rising on [q_i, q_{i+1})
    int l = 0;            // rank where the previous riser arrives
    Rational system_q;    // q_i in the units of the input system
};

struct Schedule {
    int n = 0;
    Rational unit;        // mesh of the input system
    NSystem system;
    std::vector<ScheduleEntry> entries;

    long size_sum(std::size_t i) const {
        long s = 0;
        for (long v : entries[i].a) s += v;
        return s;
    }
};

namespace detail {

template <class T>
Vector<T> erase_at(Vector<T> v, int pos) {
    v.erase(v.begin() + (pos - 1));
    return v;
}

inline Vector<long> mesh_units(const Vector<Rational>& values, const Rational& unit, long where) {
    Vector<long> a;
    for (const auto& v : values) {
        Rational r = v / unit;
        if (r.get_den() != 1 || !r.get_num().fits_slong_p())
            throw ContractError("rigid", where, "switch value " + v.get_str() + " is not a multiple of the mesh");
        a.push_back(r.get_num().get_si());
    }
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] <= 0 || (j > 0 && a[j] <= a[j - 1]))
            throw ContractError("rigid", where, "sizes must be strictly increasing positive multiples of the mesh");
    return a;
}

}  // namespace detail

/// Checks (P1)–(P3) between consecutive schedule entries; throws on the first failure.
inline void check_schedule(const Schedule& s) {
    const int n = s.n;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        const auto& e = s.entries[i];
        const long loc = static_cast<long>(i);
        if (i == 0) {
            if (e.k != 1 || e.l != n) throw ContractError("P1", loc, "the first entry must have k = 1 and l = n");
            continue;
        }
        if (!(1 <= e.k && e.k < e.l && e.l <= n)) throw ContractError("P1", loc, "need 1 ≤ k < l ≤ n");
        const auto& prev = s.entries[i - 1];
        if (e.l < prev.k) throw ContractError("P2", loc, "l_i < k_{i-1}");
        const auto li = static_cast<std::size_t>(e.l - 1);
        if (e.a[li] <= prev.a[li]) throw ContractError("P2", loc, "the arriving size does not increase");
        if (detail::erase_at(e.a, e.l) != detail::erase_at(prev.a, prev.k))
            throw ContractError("P3", loc, "sizes do not match after deleting positions l_i and k_{i-1}");
    }
}

/// Sizes and types of the construction from a system rigid of mesh `unit` on [from, ∞).
/// `from` defaults to the first switch from which the system is rigid with R₁ rising.
inline Schedule derive_schedule(const NSystem& R, const Rational& unit, std::size_t entries,
                                std::optional<Rational> from = std::nullopt) {
    if (R.is_dual()) throw std::invalid_argument("derive_schedule expects an n-system");
    if (auto v = validate(R); !v.empty()) throw ContractError("valid:" + v.front().condition, v.front().index, v.front().message);
    const int n = R.n();
    if (n < 2) throw std::invalid_argument("construction needs n ≥ 2");
    Schedule s{n, unit, R, {}};
    const std::size_t stored = R.switches().size() + (R.is_finite() ? 0 : static_cast<std::size_t>(R.tail().period));

    if (!from) {
        for (std::size_t i = 0; i < stored && !from; ++i) {
            Switch sw = R.switch_at(i);
            if (sw.k == 1 && is_rigid(R, unit, sw.q)) from = sw.q;
        }
        if (!from) throw ContractError("rigid", -1, "system is not rigid of the given mesh with R_1 rising at a switch");
    } else if (!is_rigid(R, unit, *from)) {
        throw ContractError("rigid", -1, "system is not rigid of the given mesh from q = " + from->get_str());
    }

    // Entry 0 at `from`, then every later switch.
    auto v0 = R.evaluate(*from), v1 = R.evaluate(*from + unit);
    if (v1.front() - v0.front() != unit) throw ContractError("P1", 0, "R_1 does not rise on the first mesh interval");
    s.entries.push_back({detail::mesh_units(v0, unit, 0), 1, n, *from});
    for (std::size_t i = 0; s.entries.size() < entries; ++i) {
        if (R.is_finite() && i >= R.switches().size()) break;
        Switch sw = R.switch_at(i);
        if (sw.q <= *from) continue;
        long loc = static_cast<long>(s.entries.size());
        s.entries.push_back({detail::mesh_units(sw.values, unit, loc), sw.k, sw.l, sw.q});
    }
    if (s.entries.size() < entries)
        throw ContractError("schedule", static_cast<long>(s.entries.size()), "finite system has too few switches");
    check_schedule(s);
    return s;
}

// ---------------------------------------------------------------------------
// Chain records and exact invariant checks.

struct StepRecord {
    IntMatrix basis;           // rows x_1..x_n
    Vector<long> a;            // size
    int k = 1, l = 0;          // type
    int epsilon = 1;
    IntVector alpha;           // coefficients of y_1..y_{l-1} removed from ε·x_h
    unsigned precision = 0;    // bits used for the coefficient solve
    double residual_ratio = 0; // ‖y_l − B·v‖ / (2⁻ⁿ C^{b_l})
};

struct Warning {
    std::string invariant;
    long location;
    std::string message;
};

namespace detail {

inline Integer dot(const IntVector& a, const IntVector& b) {
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Real dot(const Vector<Real>& a, const Vector<Real>& b) {
    Real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vector<Real> to_real(const IntVector& x) {
    Vector<Real> out;
    for (const auto& c : x) out.push_back(parageo::to_real(c));
    return out;
}

inline Matrix<Rational> to_rational(const IntMatrix& M) {
    Matrix<Rational> out;
    for (const auto& row : M) out.emplace_back(row.begin(), row.end());
    return out;
}

inline Vector<Rational> to_rational(const IntVector& x) { return Vector<Rational>(x.begin(), x.end()); }

/// Records a failure: a warning in heuristic mode, an exception otherwise.
struct FailureSink {
    bool heuristic;
    std::vector<Warning>* warnings;
    void fail(const std::string& invariant, long where, const std::string& message) const {
        if (!heuristic) throw ContractError(invariant, where, message);
        if (warnings) warnings->push_back({invariant, where, message});
    }
};

/// C^{2b} ≤ ‖x‖² ≤ (1+δ)² C^{2b}.
inline bool has_size(const IntVector& x, const Integer& C, long b) {
    Integer n2 = dot(x, x);
    Integer lo = pow_integer(C, static_cast<unsigned long>(2 * b));
    return lo <= n2 && n2 <= 4 * lo;
}

/// dist(x_l, span(x_1,…,x̂_k,…,x_{l−1})) ≥ 1 − 2^{1−l}, exactly.
inline bool has_type(const IntMatrix& x, int k, int l) {
    Matrix<Rational> W;
    for (int j = 1; j < l; ++j)
        if (j != k) W.push_back(to_rational(x[static_cast<std::size_t>(j - 1)]));
    if (W.empty()) return true;
    Rational d2 = dist_point_subspace_sq(to_rational(x[static_cast<std::size_t>(l - 1)]), W);
    Rational t = 1 - Rational(1, Integer(1) << (l - 1));
    return d2 >= t * t;
}

inline bool almost_orthogonal(const IntMatrix& seq) {
    return is_almost_orthogonal(to_rational(seq), PlaceMetric::archimedean());
}

inline IntMatrix without_row(const IntMatrix& x, int pos) {
    IntMatrix out = x;
    out.erase(out.begin() + (pos - 1));
    return out;
}

/// Integer vector orthogonal to n−1 independent rows (cofactor expansion), first nonzero coordinate positive.
inline IntVector orthogonal_vector(const IntMatrix& rows) {
    const std::size_t n = rows.size() + 1;
    IntVector u(n);
    for (std::size_t m = 0; m < n; ++m) {
        IntMatrix minor;
        for (const auto& r : rows) {
            IntVector row;
            for (std::size_t c = 0; c < n; ++c)
                if (c != m) row.push_back(r[c]);
            minor.push_back(std::move(row));
        }
        Integer d = minor.empty() ? Integer(1) : lattice::determinant(minor);
        u[m] = (m % 2 == 0) ? d : Integer(-d);
    }
    for (const auto& c : u)
        if (c != 0) {
            if (c < 0)
                for (auto& v : u) v = -v;
            break;
        }
    return u;
}

/// Orthonormalizes rows in order (two passes of modified Gram–Schmidt).
inline Matrix<Real> orthonormalize(const Matrix<Real>& rows) {
    Matrix<Real> Q;
    for (auto v : rows) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : Q) {
                Real c = dot(v, q);
                for (std::size_t t = 0; t < v.size(); ++t) v[t] -= c * q[t];
            }
        Real nrm = real_sqrt(dot(v, v));
        if (nrm == 0) throw PrecisionError("Gram-Schmidt: dependent vectors");
        for (auto& c : v) c /= nrm;
        Q.push_back(std::move(v));
    }
    return Q;
}

/// Solves G c = r by Gaussian elimination with partial pivoting.
inline Vector<Real> solve(Matrix<Real> G, Vector<Real> r) {
    const std::size_t m = G.size();
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < m; ++i)
            if (abs(G[i][c]) > abs(G[p][c])) p = i;
        std::swap(G[p], G[c]);
        std::swap(r[p], r[c]);
        if (G[c][c] == 0) throw PrecisionError("singular Gram matrix");
        for (std::size_t i = c + 1; i < m; ++i) {
            Real f = G[i][c] / G[c][c];
            for (std::size_t j = c; j < m; ++j) G[i][j] -= f * G[c][j];
            r[i] -= f * r[c];
        }
    }
    Vector<Real> x(m);
    for (std::size_t i = m; i-- > 0;) {
        Real s = r[i];
        for (std::size_t j = i + 1; j < m; ++j) s -= G[i][j] * x[j];
        x[i] = s / G[i][i];
    }
    return x;
}

inline Integer round_to_integer(const Real& x) {
    Integer z;
    Real r = boost::multiprecision::round(x);
    mpfr_get_z(z.get_mpz_t(), r.backend().data(), MPFR_RNDN);
    return z;
}

}  // namespace detail

/// One recursion step: replaces x_h by a new vector of size b_l inserted at position l, giving type (k, l).
inline StepRecord step(const IntMatrix& x, int h, int k, int l, const Vector<long>& a, const Vector<long>& b,
                       const ConstructionConstants& K, unsigned precision = 256, std::vector<Warning>* warnings = nullptr,
                       long location = -1) {
    const int n = K.n;
    if (static_cast<int>(x.size()) != n || static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("step: dimension mismatch");
    if (!(1 <= h && h <= n && 1 <= k && k < l && l <= n)) throw std::invalid_argument("step: need 1 ≤ k < l ≤ n, 1 ≤ h ≤ n");
    const auto li = static_cast<std::size_t>(l - 1);
    if (!(b[li] > a[li])) throw ContractError("step-hypothesis", location, "need b_l > a_l");
    if (detail::erase_at(b, l) != detail::erase_at(a, h))
        throw ContractError("step-hypothesis", location, "b without position l differs from a without position h");
    if (h > l) throw ContractError("step-hypothesis", location, "need h ≤ l");
    detail::FailureSink sink{K.heuristic, warnings};

    const IntMatrix rest = detail::without_row(x, h);                 // y_1..ŷ_l..y_n
    const IntMatrix V(rest.begin(), rest.begin() + (l - 1));          // y_1..y_{l−1}
    const IntVector& xh = x[static_cast<std::size_t>(h - 1)];
    const int epsilon = 1;
    const long bl = b[li];

    const double log2C = std::log2(K.C.get_d());
    unsigned bits = std::max<unsigned>(precision, static_cast<unsigned>(64 + log2C * (bl + 1) + 8 * n));
    std::optional<IntVector> previous_alpha;
    StepRecord rec;
    while (true) {
        PrecisionGuard guard(bits);
        Matrix<Real> Wreal;
        for (int j = 1; j < l; ++j)
            if (j != k) Wreal.push_back(detail::to_real(V[static_cast<std::size_t>(j - 1)]));
        Wreal.push_back(detail::to_real(V[static_cast<std::size_t>(k - 1)]));
        Vector<Real> v = detail::orthonormalize(Wreal).back();
        for (const auto& c : v)
            if (abs(c) > ldexp(Real(1), -static_cast<int>(bits / 2))) {
                if (c < 0)
                    for (auto& t : v) t = -t;
                break;
            }
        const Real B = Real(1.5) * pow(to_real(K.C), static_cast<long>(bl));

        // ε x_h − B v = c_u u + Σ c_j y_j with u ⊥ V, so (y_i · (ε x_h − B v)) = G c.
        Vector<Real> xr = detail::to_real(xh);
        Matrix<Real> G(V.size(), Vector<Real>(V.size()));
        Vector<Real> rhs(V.size());
        for (std::size_t i = 0; i < V.size(); ++i) {
            Vector<Real> yi = detail::to_real(V[i]);
            for (std::size_t j = 0; j < V.size(); ++j) G[i][j] = to_real(detail::dot(V[i], V[j]));
            rhs[i] = Real(epsilon) * detail::dot(yi, xr) - B * detail::dot(yi, v);
        }
        Vector<Real> coef = detail::solve(G, rhs);
        IntVector alpha;
        for (const auto& c : coef) alpha.push_back(detail::round_to_integer(c));

        IntVector y = xh;
        for (auto& c : y) c *= epsilon;
        for (std::size_t j = 0; j < V.size(); ++j)
            for (int t = 0; t < n; ++t) y[static_cast<std::size_t>(t)] -= alpha[j] * V[j][static_cast<std::size_t>(t)];

        Real res2 = 0;
        for (int t = 0; t < n; ++t) {
            Real d = to_real(y[static_cast<std::size_t>(t)]) - B * v[static_cast<std::size_t>(t)];
            res2 += d * d;
        }
        const Real bound = ldexp(pow(to_real(K.C), static_cast<long>(bl)), -n);
        const Real ratio = real_sqrt(res2) / bound;
        bool ok = ratio <= 1;
        if (!ok && (!previous_alpha || *previous_alpha != alpha) && bits < (1u << 15)) {
            // Retry at doubled precision unless the coefficients are already stable.
            previous_alpha = alpha;
            bits *= 2;
            continue;
        }
        if (!ok)
            sink.fail("residual", location,
                      "‖y_l − B·v‖ exceeds 2^-n C^b_l (ratio " + ratio.str(6) + ")");

        rec.basis = rest;
        rec.basis.insert(rec.basis.begin() + (l - 1), y);
        rec.a = b;
        rec.k = k;
        rec.l = l;
        rec.epsilon = epsilon;
        rec.alpha = alpha;
        rec.precision = bits;
        rec.residual_ratio = ratio.convert_to<double>();
        break;
    }

    const auto& y = rec.basis[li];
    if (!detail::has_size(y, K.C, bl)) sink.fail("size", location, "new vector outside [C^b, 2C^b]");
    if (!detail::has_type(rec.basis, k, l)) sink.fail("type", location, "type inequality fails");
    Integer det = lattice::determinant(rec.basis);
    if (abs(det) != 1) throw ContractError("unimodular", location, "determinant " + det.get_str());
    return rec;
}

/// Unimodular basis of size a and type (1, n) whose first n−1 vectors are almost orthogonal.
inline IntMatrix initial_basis(const Vector<long>& a, const ConstructionConstants& K, unsigned precision = 256,
                               std::vector<Warning>* warnings = nullptr) {
    const int n = K.n;
    if (static_cast<int>(a.size()) != n) throw std::invalid_argument("initial_basis: dimension mismatch");
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] <= 0 || (j > 0 && a[j] <= a[j - 1]))
            throw std::invalid_argument("initial_basis: sizes must be strictly increasing positive integers");
    IntMatrix x(static_cast<std::size_t>(n), IntVector(static_cast<std::size_t>(n), 0));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    Vector<long> cur(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        Vector<long> next(cur.begin() + 1, cur.end());
        next.push_back(a[static_cast<std::size_t>(j)]);
        x = step(x, 1, 1, n, cur, next, K, precision, warnings, 0).basis;
        cur = next;
    }
    detail::FailureSink sink{K.heuristic, warnings};
    if (!detail::almost_orthogonal(IntMatrix(x.begin(), x.end() - 1)))
        sink.fail("almost-orthogonal", 0, "x_1..x_{n-1} of the initial basis are not almost orthogonal");
    return x;
}

// ---------------------------------------------------------------------------
// Chain and synthesized point.

struct BasisChain {
    ConstructionConstants constants;
    Schedule schedule;
    std::vector<StepRecord> records;  // records[i] holds x^(i)
    std::vector<Warning> warnings;
    unsigned precision = 0;           // largest working precision used

    /// q_i = c · Σ_j a_j^(i).
    Real q(std::size_t i) const { return constants.mesh_real() * schedule.size_sum(i); }
    double schedule_q(std::size_t i) const { return constants.mesh() * static_cast<double>(schedule.size_sum(i)); }
};

inline BasisChain build_chain(const Schedule& schedule, const ConstructionConstants& K, std::size_t steps,
                              unsigned precision = 256) {
    if (schedule.n != K.n) throw std::invalid_argument("schedule and constants disagree on n");
    if (schedule.entries.size() < steps + 1) throw std::invalid_argument("schedule too short for the requested steps");
    BasisChain chain{K, schedule, {}, {}, precision};
    const auto& E = schedule.entries;
    StepRecord first;
    first.basis = initial_basis(E[0].a, K, precision, &chain.warnings);
    first.a = E[0].a;
    first.k = 1;
    first.l = K.n;
    first.precision = precision;
    chain.records.push_back(std::move(first));
    for (std::size_t i = 1; i <= steps; ++i) {
        const auto& prev = chain.records.back();
        chain.records.push_back(step(prev.basis, E[i - 1].k, E[i].k, E[i].l, E[i - 1].a, E[i].a, K, precision,
                                     &chain.warnings, static_cast<long>(i)));
        chain.precision = std::max(chain.precision, chain.records.back().precision);
    }
    return chain;
}

struct ChainCheck {
    std::vector<Warning> violations;
    double worst_convergence_margin = -1e300;  // max over i of log dist(u_i, ξ) − log(2e^{4−q_{i+1}})
    double worst_consecutive_margin = -1e300;  // max over i of log dist(u_{i−1}, u_i) − (4 − q_i)
    bool ok() const { return violations.empty(); }
};

struct SynthesizedPoint {
    IntVector direction;           // integer vector orthogonal to x̂^(i_max)
    Vector<Real> xi;               // its normalization
    std::vector<IntVector> u;      // u_{−1}, u_0, …, u_{i_max} as integer directions
    BasisChain chain;
    ChainCheck check;
    double limit_distance_bound;   // 2e^{4−q_{i_max+1}} when the next switch is known, else e^{4−q_{i_max}}·2
};

namespace detail {

/// ½·log of an exact positive rational.
inline Real half_log(const Rational& r) { return boost::multiprecision::log(parageo::to_real(r)) / 2; }

inline Rational dist_sq_int(const IntVector& a, const IntVector& b) {
    return parageo::dist_sq(to_rational(a), to_rational(b));
}

}  // namespace detail

/// Verifies unimodularity, size, type and almost-orthogonality of every basis and the u_i convergence bounds.
inline ChainCheck check_chain(const BasisChain& chain, const std::vector<IntVector>& u) {
    ChainCheck out;
    const auto& K = chain.constants;
    const int n = K.n;
    const unsigned bits = std::max(chain.precision, 256u);
    PrecisionGuard guard(bits);
    auto add = [&](const std::string& inv, long i, const std::string& msg) { out.violations.push_back({inv, i, msg}); };
    for (std::size_t i = 0; i < chain.records.size(); ++i) {
        const auto& r = chain.records[i];
        const long loc = static_cast<long>(i);
        if (abs(lattice::determinant(r.basis)) != 1) add("unimodular", loc, "determinant is not ±1");
        for (int j = 0; j < n; ++j)
            if (!detail::has_size(r.basis[static_cast<std::size_t>(j)], K.C, r.a[static_cast<std::size_t>(j)]))
                add("size", loc, "x_" + std::to_string(j + 1) + " outside [C^a, 2C^a]");
        if (!detail::has_type(r.basis, r.k, r.l)) add("type", loc, "type inequality fails");
        if (!detail::almost_orthogonal(detail::without_row(r.basis, r.k)))
            add("almost-orthogonal", loc, "basis without position k_i is not almost orthogonal");
    }
    if (!detail::almost_orthogonal(IntMatrix(chain.records[0].basis.begin(), chain.records[0].basis.end() - 1)))
        add("almost-orthogonal", -1, "x_1..x_{n-1} of the initial basis are not almost orthogonal");

    // u holds u_{−1}..u_{i_max}; u[i+1] = u_i.
    const std::size_t imax = chain.records.size() - 1;
    const Real log2 = boost::multiprecision::log(Real(2));
    for (std::size_t i = 0; i <= imax; ++i) {
        const Real lhs = detail::half_log(detail::dist_sq_int(u[i], u[i + 1]));
        if (lhs == -std::numeric_limits<double>::infinity()) continue;
        const Real margin = lhs - (4 - chain.q(i));
        out.worst_consecutive_margin = std::max(out.worst_consecutive_margin, margin.convert_to<double>());
        if (margin > 0) add("consecutive", static_cast<long>(i), "dist(u_{i-1}, u_i) > e^{4-q_i}");
    }
    for (std::size_t i = 0; i < imax; ++i) {
        Rational d2 = detail::dist_sq_int(u[i + 1], u[imax + 1]);
        if (d2 == 0) continue;
        const Real margin = detail::half_log(d2) - (log2 + 4 - chain.q(i + 1));
        out.worst_convergence_margin = std::max(out.worst_convergence_margin, margin.convert_to<double>());
        if (margin > 0) add("convergence", static_cast<long>(i), "dist(u_i, ξ) > 2e^{4-q_{i+1}}");
    }
    if (!K.heuristic) return out;
    for (auto& w : out.violations) w.message = "[heuristic] " + w.message;
    return out;
}

/// Builds the chain over `steps` steps and returns ξ = u_{steps} with every invariant checked.
inline SynthesizedPoint synthesize_point(const Schedule& schedule, const ConstructionConstants& K, std::size_t steps,
                                         unsigned precision = 256) {
    SynthesizedPoint out{{}, {}, {}, build_chain(schedule, K, steps, precision), {}, 0};
    const auto& recs = out.chain.records;
    const int n = K.n;
    out.u.push_back(detail::orthogonal_vector(IntMatrix(recs[0].basis.begin(), recs[0].basis.end() - 1)));
    for (const auto& r : recs) out.u.push_back(detail::orthogonal_vector(detail::without_row(r.basis, r.k)));
    out.direction = out.u.back();
    {
        PrecisionGuard guard(std::max(out.chain.precision, precision));
        out.xi = detail::to_real(out.direction);
        Real nrm = real_sqrt(detail::dot(out.xi, out.xi));
        for (auto& c : out.xi) c /= nrm;
        for (int j = 1; j <= n; ++j)
            if (j != recs.back().k && detail::dot(recs.back().basis[static_cast<std::size_t>(j - 1)], out.direction) != 0)
                throw ContractError("orthogonality", static_cast<long>(steps), "ξ is not orthogonal to x̂^(i_max)");
    }
    out.check = check_chain(out.chain, out.u);
    if (!out.check.ok() && !K.heuristic) {
        const auto& v = out.check.violations.front();
        throw ContractError(v.invariant, v.location, v.message);
    }
    if (K.heuristic)
        for (const auto& v : out.check.violations) out.chain.warnings.push_back(v);
    const double qnext = schedule.entries.size() > steps + 1 ? out.chain.schedule_q(steps + 1) : out.chain.q(steps).convert_to<double>();
    out.limit_distance_bound = 2 * std::exp(4 - qnext);
    return out;
}

// ---------------------------------------------------------------------------
// Verification of |L_j(q) − R_j(q)| ≤ deviation_bound().

/// R in the construction's units: R(q) = s·R_sys(q/s) with s = c / mesh of the input system.
class ScaledSystem {
public:
    ScaledSystem(const Schedule& s, double c, double qmax) : n_(s.n), scale_(c / s.unit.get_d()) {
        Rational upto = Rational(qmax / scale_ + 1) + 1;
        upto.canonicalize();
        switches_ = s.system.switches_upto(upto);
    }
    double scale() const { return scale_; }
    std::vector<double> operator()(double q) const {
        const double Q = q / scale_;
        auto it = std::upper_bound(switches_.begin(), switches_.end(), Q,
                                   [](double x, const Switch& sw) { return x < sw.q.get_d(); });
        if (it == switches_.begin()) throw std::out_of_range("q below the start of the system");
        const Switch& sw = *std::prev(it);
        std::vector<double> v;
        for (const auto& c : sw.values) v.push_back(c.get_d());
        v[static_cast<std::size_t>(sw.k - 1)] += Q - sw.q.get_d();
        std::sort(v.begin(), v.end());
        for (auto& c : v) c *= scale_;
        return v;
    }

private:
    int n_;
    double scale_;
    std::vector<Switch> switches_;
};

enum class VerifyMode { certificate, enumeration };

struct VerifyReport {
    VerifyMode mode = VerifyMode::certificate;
    bool rigorous = true;                     // false for heuristic C
    std::vector<double> q;
    std::vector<std::vector<double>> R, upper, lower, enumerated;
    double sup_deviation = 0;                 // certificate: max_j,q max(upper−R, R−lower); enumeration: max |L−R|
    double sup_upper_excess = -1e300;         // max_j (upper_j − R_j) over q ≥ q_0, the start of the schedule
    double chain_deviation = 0, deviation_bound = 0;
    bool enumeration_exact = true;
    bool ok() const { return sup_deviation <= deviation_bound; }
};

namespace detail {

/// log of an upper bound for the volume of {x : ‖x‖ ≤ 1, |x·ξ| ≤ e^{−q}}.
inline double log_body_volume(int n, double q) {
    const double pi = boost::math::constants::pi<double>();
    double log_ball_n = (n / 2.0) * std::log(pi) - std::lgamma(n / 2.0 + 1);
    double log_ball_m = ((n - 1) / 2.0) * std::log(pi) - std::lgamma((n - 1) / 2.0 + 1);
    return std::min(log_ball_n, std::log(2.0) - q + log_ball_m);
}

struct VectorLogs {
    double log_norm;
    double log_dot;  // log|x·ξ|, −∞ when orthogonal
};

}  // namespace detail

/// Certificate mode evaluates chain vectors only; enumeration mode also runs the minima engine on ξ.
inline VerifyReport verify(const SynthesizedPoint& pt, double qmax, double grid_step = 0.25,
                           VerifyMode mode = VerifyMode::certificate, const EnumerationBudget& budget = {}) {
    const auto& chain = pt.chain;
    const auto& K = chain.constants;
    const int n = K.n;
    const double limit = 0.8 * chain.q(chain.records.size() - 1).convert_to<double>();
    if (qmax > limit + 1e-12)
        throw std::invalid_argument("verify: qmax must not exceed 0.8·q_{i_max} = " + std::to_string(limit));
    if (grid_step <= 0) throw std::invalid_argument("verify: grid step must be positive");

    VerifyReport rep;
    rep.mode = mode;
    rep.rigorous = !K.heuristic;
    rep.chain_deviation = K.chain_deviation();
    rep.deviation_bound = K.deviation_bound();
    ScaledSystem R(chain.schedule, K.mesh(), qmax);

    // Logs of ‖x‖ and |x·ξ| for every vector of the standard basis and of every chain basis.
    std::vector<std::vector<detail::VectorLogs>> bases;
    {
        PrecisionGuard guard(std::max(chain.precision, 256u));
        const Real log_u = boost::multiprecision::log(to_real(detail::dot(pt.direction, pt.direction))) / 2;
        auto logs = [&](const IntVector& x) {
            detail::VectorLogs v;
            v.log_norm = (boost::multiprecision::log(to_real(detail::dot(x, x))) / 2).convert_to<double>();
            Integer d = detail::dot(x, pt.direction);
            v.log_dot = d == 0 ? -std::numeric_limits<double>::infinity()
                               : (boost::multiprecision::log(to_real(Integer(abs(d)))) - log_u).convert_to<double>();
            return v;
        };
        std::vector<detail::VectorLogs> std_basis;
        for (int j = 0; j < n; ++j) {
            IntVector e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(j)] = 1;
            std_basis.push_back(logs(e));
        }
        bases.push_back(std::move(std_basis));
        for (const auto& r : chain.records) {
            std::vector<detail::VectorLogs> b;
            for (const auto& x : r.basis) b.push_back(logs(x));
            bases.push_back(std::move(b));
        }
    }

    const std::size_t points = static_cast<std::size_t>(std::floor(qmax / grid_step + 1e-9)) + 1;
    rep.q.resize(points);
    rep.R.resize(points);
    rep.upper.resize(points);
    rep.lower.resize(points);
    const double minkowski = n * std::log(2.0) - std::lgamma(n + 1.0);
    parageo::detail::parallel_for(points, [&](std::size_t t) {
        const double q = grid_step * static_cast<double>(t);
        std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
        for (const auto& b : bases) {
            std::vector<double> L;
            for (const auto& v : b) L.push_back(std::max(v.log_norm, q + v.log_dot));
            std::sort(L.begin(), L.end());
            for (int j = 0; j < n; ++j) best[static_cast<std::size_t>(j)] = std::min(best[static_cast<std::size_t>(j)], L[static_cast<std::size_t>(j)]);
        }
        // Successive minima of one body are increasing, so later upper bounds also bound earlier minima.
        for (int j = n - 1; j-- > 0;)
            best[static_cast<std::size_t>(j)] = std::min(best[static_cast<std::size_t>(j)], best[static_cast<std::size_t>(j + 1)]);
        const double total_lower = minkowski - detail::log_body_volume(n, q);
        double sum = 0;
        for (double r : best) sum += r;
        std::vector<double> lo(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            double v = std::max(0.0, total_lower - (sum - best[static_cast<std::size_t>(j)]));
            lo[static_cast<std::size_t>(j)] = j > 0 ? std::max(v, lo[static_cast<std::size_t>(j - 1)]) : v;
        }
        rep.q[t] = q;
        rep.R[t] = R(q);
        rep.upper[t] = std::move(best);
        rep.lower[t] = std::move(lo);
    });

    const double q_start = chain.q(0).convert_to<double>();
    for (std::size_t t = 0; t < points; ++t)
        for (int j = 0; j < n; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            if (rep.q[t] >= q_start) rep.sup_upper_excess = std::max(rep.sup_upper_excess, rep.upper[t][jj] - rep.R[t][jj]);
            if (mode == VerifyMode::certificate)
                rep.sup_deviation = std::max({rep.sup_deviation, rep.upper[t][jj] - rep.R[t][jj], rep.R[t][jj] - rep.lower[t][jj]});
        }

    if (mode == VerifyMode::enumeration) {
        Vector<Rational> exact(pt.direction.begin(), pt.direction.end());
        auto Kq = FieldContext::rational();
        auto target = ApproximationTarget::real_place(Kq, places_above(Kq, 0).front(), pt.xi, exact);
        std::vector<Rational> grid;
        for (double q : rep.q) {
            Rational r(q);
            grid.push_back(canonical(r));
        }
        auto prof = profile(target, 1, grid, budget);
        rep.enumeration_exact = prof.exact;
        rep.enumerated.resize(points);
        for (std::size_t t = 0; t < points; ++t)
            for (int j = 0; j < n; ++j) {
                double L = prof.values[t][static_cast<std::size_t>(j)].convert_to<double>();
                rep.enumerated[t].push_back(L);
                rep.sup_deviation = std::max(rep.sup_deviation, std::abs(L - rep.R[t][static_cast<std::size_t>(j)]));
            }
    }
    return rep;
}

}  // namespace parageo::construct

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <parageo/exterior.hpp>
#include <parageo/io.hpp>
#include <parageo/minima.hpp>
#include <parageo/numberfield.hpp>
#include <parageo/nsystem.hpp>

namespace testsupport {

using namespace parageo;

inline Rational random_rational(std::mt19937_64& rng, long num = 9, long den = 5) {
    std::uniform_int_distribution<long> a(-num, num), b(1, den);
    return canonical(Rational(a(rng), b(rng)));
}

inline Vector<Rational> random_rational_vector(std::mt19937_64& rng, int n, long num = 9, long den = 5) {
    Vector<Rational> v;
    for (int i = 0; i < n; ++i) v.push_back(random_rational(rng, num, den));
    return v;
}

inline Vector<Rational> nonzero_rational_vector(std::mt19937_64& rng, int n) {
    for (;;) {
        auto v = random_rational_vector(rng, n);
        if (std::any_of(v.begin(), v.end(), [](const Rational& c) { return c != 0; })) return v;
    }
}

/// Rows of a random full-rank k × n rational matrix.
inline Matrix<Rational> random_full_rank(std::mt19937_64& rng, int k, int n) {
    for (;;) {
        Matrix<Rational> B;
        for (int i = 0; i < k; ++i) B.push_back(random_rational_vector(rng, n));
        if (rank(B) == k) return B;
    }
}

inline FieldElement random_field_element(std::mt19937_64& rng, const FieldContext& K, long num = 9, long den = 4) {
    Rational a = random_rational(rng, num, den);
    return K.is_rational() ? K.element(a) : K.element(a, random_rational(rng, num, den));
}

inline Matrix<FieldElement> random_full_rank_field(std::mt19937_64& rng, const FieldContext& K, int k, int n) {
    for (;;) {
        Matrix<FieldElement> B(static_cast<std::size_t>(k));
        for (auto& row : B)
            for (int j = 0; j < n; ++j) row.push_back(random_field_element(rng, K));
        if (rank(B) == k) return B;
    }
}

inline ApproximationTarget rational_target(const std::vector<std::string>& xi) {
    auto K = FieldContext::rational();
    return io::make_target(K, places_above(K, 0).front(), xi);
}

inline ApproximationTarget golden_target() { return rational_target({"1", "(1+5^(1/2))/2"}); }
inline ApproximationTarget degenerate_target() { return rational_target({"1", "0"}); }
inline ApproximationTarget cubic_target() { return rational_target({"1", "2^(1/3)", "2^(2/3)"}); }

/// The 2-system through (1,2), (2,4), (4,8), … at q = 3, 6, 12, …, with the lower component rising each time.
inline NSystem doubling_system() {
    std::vector<Switch> sw{{Rational(3), {Rational(1), Rational(2)}, 1, 0}, {Rational(6), {Rational(2), Rational(4)}, 1, 2}};
    Tail tail;
    tail.kind = Tail::Kind::scaling;
    tail.period = 1;
    tail.factor = 2;
    return NSystem(2, 3, std::move(sw), tail);
}

// ---------------------------------------------------------------------------
// Exhaustive successive minima over ℤⁿ for K = ℚ, w = ∞.
//
// L(x, q) = max(log‖x‖, q + log|x·ξ|) for primitive x and unit ξ. An upper bound U on
// the last minimum comes from a small box; every x with L(x, q) ≤ U then satisfies
// ‖x‖∞ ≤ e^U and |x·ξ| ≤ e^{U−q}, so slicing along the coordinate with the largest |ξ_s|
// enumerates all of them.

namespace oracle {

struct Point {
    std::vector<long> x;
    double approx;
};

inline bool primitive(const std::vector<long>& x) {
    long g = 0;
    for (long c : x) g = std::gcd(g, std::labs(c));
    return g == 1;
}

inline Real exact_L(const std::vector<long>& x, const Vector<Real>& xi, const Rational& q) {
    Real n2 = 0, d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        n2 += Real(x[i]) * x[i];
        d += Real(x[i]) * xi[i];
    }
    Real lh = log(n2) / 2;
    if (d == 0) return lh;
    Real ld = to_real(q) + log(boost::multiprecision::abs(d));
    return lh > ld ? lh : ld;
}

/// Greedy rank filter over ℚ on points sorted by value; returns the values of the first n independent points.
template <class Value>
std::vector<Value> greedy(std::vector<std::pair<Value, std::vector<long>>> pts, int n) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Matrix<Rational> chosen;
    std::vector<Value> out;
    for (const auto& [L, x] : pts) {
        Vector<Rational> row;
        for (long c : x) row.push_back(Rational(c));
        chosen.push_back(row);
        if (rank(chosen) == static_cast<int>(chosen.size())) {
            out.push_back(L);
            if (static_cast<int>(out.size()) == n) break;
        } else {
            chosen.pop_back();
        }
    }
    return out;
}

template <class Visit>
void box(int n, long M, std::vector<long>& x, int pos, int skip, Visit&& visit) {
    if (pos == n) {
        visit(x);
        return;
    }
    if (pos == skip) {
        box(n, M, x, pos + 1, skip, visit);
        return;
    }
    for (long c = -M; c <= M; ++c) {
        x[static_cast<std::size_t>(pos)] = c;
        box(n, M, x, pos + 1, skip, visit);
    }
}

inline std::vector<Real> minima(const Vector<Real>& xi, const Rational& q) {
    const int n = static_cast<int>(xi.size());
    std::vector<double> xd;
    for (const auto& c : xi) xd.push_back(c.convert_to<double>());
    const double qd = q.get_d();
    auto approx_L = [&](const std::vector<long>& x) {
        double n2 = 0, d = 0;
        for (int i = 0; i < n; ++i) n2 += double(x[i]) * x[i], d += x[i] * xd[i];
        double lh = 0.5 * std::log(n2);
        return d == 0 ? lh : std::max(lh, qd + std::log(std::fabs(d)));
    };

    // Upper bound from a small box.
    std::vector<std::pair<double, std::vector<long>>> seed;
    const long m0 = std::max(1L, static_cast<long>(std::ceil(std::exp(qd / n + 1))));
    const long m0c = std::min(m0, n == 2 ? 300L : 40L);
    std::vector<long> x(static_cast<std::size_t>(n), 0);
    box(n, m0c, x, 0, -1, [&](const std::vector<long>& v) {
        if (primitive(v)) seed.push_back({approx_L(v), v});
    });
    const double U = greedy(seed, n).back() + 1e-6;

    int s = 0;
    for (int i = 1; i < n; ++i)
        if (std::fabs(xd[i]) > std::fabs(xd[s])) s = i;
    const long M = static_cast<long>(std::floor(std::exp(U)));
    const double slab = std::exp(U - qd);
    std::vector<Point> cands;
    box(n, M, x, 0, s, [&](std::vector<long>& v) {
        double r = 0;
        for (int i = 0; i < n; ++i)
            if (i != s) r += v[i] * xd[i];
        long lo = static_cast<long>(std::floor((-slab - r) / std::fabs(xd[s]) * (xd[s] > 0 ? 1 : -1)));
        long hi = static_cast<long>(std::ceil((slab - r) / std::fabs(xd[s]) * (xd[s] > 0 ? 1 : -1)));
        if (lo > hi) std::swap(lo, hi);
        lo = std::max(lo - 1, -M), hi = std::min(hi + 1, M);
        for (long c = lo; c <= hi; ++c) {
            v[static_cast<std::size_t>(s)] = c;
            if (!primitive(v)) continue;
            double a = approx_L(v);
            if (a <= U + 1e-6) cands.push_back({v, a});
        }
        v[static_cast<std::size_t>(s)] = 0;
    });

    // Exact values only where the double estimate can matter.
    std::sort(cands.begin(), cands.end(), [](const Point& a, const Point& b) { return a.approx < b.approx; });
    std::vector<std::pair<Real, std::vector<long>>> pts;
    Matrix<Rational> basis;
    double cutoff = U + 1e-6;
    for (const auto& c : cands) {
        if (c.approx > cutoff) break;
        pts.push_back({exact_L(c.x, xi, q), c.x});
        if (static_cast<int>(basis.size()) < n) {
            Vector<Rational> row;
            for (long e : c.x) row.push_back(Rational(e));
            basis.push_back(row);
            if (rank(basis) != static_cast<int>(basis.size()))
                basis.pop_back();
            else if (static_cast<int>(basis.size()) == n)
                cutoff = c.approx + 1e-6;
        }
    }
    return greedy(std::move(pts), n);
}

}  // namespace oracle

/// Largest |a − b| over two profiles of equal shape.
inline double max_difference(const std::vector<std::vector<Real>>& a, const std::vector<std::vector<Real>>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            worst = std::max(worst, boost::multiprecision::abs(a[i][j] - b[i][j]).convert_to<double>());
    return worst;
}

}  // namespace testsupport

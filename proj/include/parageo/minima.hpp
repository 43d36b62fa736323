#pragma once

#include "lattice.hpp"
#include "numberfield.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace parageo {

// ---------------------------------------------------------------------------
// Budget and results.

struct EnumerationBudget {
    double max_log_height = 80.0;  // largest enumeration level t (heights up to e^t)
    std::size_t max_candidates = 20'000'000;
    bool reduction = true;
    double level_step = 0.5;
};

struct MinimaProfile {
    std::string target_id;
    int n = 0;
    int grade = 1;
    bool star = false;
    std::size_t N = 0;
    std::vector<Rational> q_grid;
    std::vector<std::vector<Real>> values;                         // values[i][j] = L_{j+1}(q_i)
    std::vector<std::vector<Vector<FieldElement>>> witnesses;      // projective representatives
    std::vector<bool> row_exact;
    bool exact = true;

    std::size_t size() const { return q_grid.size(); }
};

inline std::vector<Rational> make_grid(const Rational& qmax, const Rational& step, const Rational& qmin = 0) {
    if (step <= 0) throw std::invalid_argument("grid step must be positive");
    if (qmax < qmin) throw std::invalid_argument("grid upper end below lower end");
    std::vector<Rational> g;
    for (Rational q = qmin; q <= qmax; q += step) g.push_back(canonical(q));
    return g;
}

namespace detail {

inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PARAGEO_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
    }
    return hw;
}

/// Runs body(i) for i in [0, count) on up to worker_count() threads; results must be written by index.
template <class Body>
void parallel_for(std::size_t count, Body body) {
    unsigned threads = std::min<std::size_t>(worker_count(), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(failure_lock);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Linear map X ↦ ξ⌟X (grade k) or x ↦ x∧ξ, stored as signed references to coordinates of ξ.
struct SparseTerm {
    std::size_t col;
    int sign;
    std::size_t xi;
};
using SparseMap = std::vector<std::vector<SparseTerm>>;

inline SparseMap contraction_map(int n, int k) {
    const auto &si = SubsetIndex::get(n, k), &so = SubsetIndex::get(n, k - 1);
    SparseMap rows(so.size());
    for (std::size_t a = 0; a < si.size(); ++a) {
        std::uint32_t I = si.mask(a);
        int m = 0;
        for (std::uint32_t t = I; t; t &= t - 1, ++m) {
            int b = __builtin_ctz(t);
            rows[so.index(I & ~(1u << b))].push_back({a, m % 2 == 0 ? 1 : -1, static_cast<std::size_t>(b)});
        }
    }
    return rows;
}

inline SparseMap wedge_map(int n) {
    const auto& so = SubsetIndex::get(n, 2);
    SparseMap rows(so.size());
    for (int c = 0; c < n; ++c)
        for (int o = 0; o < n; ++o) {
            if (o == c) continue;
            rows[so.index((1u << c) | (1u << o))].push_back(
                {static_cast<std::size_t>(c), c < o ? 1 : -1, static_cast<std::size_t>(o)});
        }
    return rows;
}

/// Squared norm of the image, summing sorted squares so that equal multisets give equal bits.
inline Real image_norm_sq(const SparseMap& map, const Vector<Real>& xi, const Vector<Real>& x) {
    std::vector<Real> sq;
    sq.reserve(map.size());
    for (const auto& row : map) {
        Real acc = 0;
        for (const auto& t : row) {
            Real p = xi[t.xi] * x[t.col];
            if (t.sign > 0)
                acc += p;
            else
                acc -= p;
        }
        sq.push_back(acc * acc);
    }
    std::sort(sq.begin(), sq.end());
    Real s = 0;
    for (const auto& v : sq) s += v;
    return s;
}

template <class S>
bool image_is_zero_exact(const SparseMap& map, const Vector<S>& xi, const Vector<S>& x) {
    for (const auto& row : map) {
        S acc = scalar_traits<S>::zero_like(x.front());
        for (const auto& t : row) {
            S p = xi[t.xi] * x[t.col];
            if (t.sign > 0)
                acc += p;
            else
                acc -= p;
        }
        if (!scalar_traits<S>::is_zero(acc)) return false;
    }
    return true;
}

inline Vector<Integer> primitive_integer(const Vector<FieldElement>& x) {
    Integer den = 1;
    for (const auto& c : x) {
        if (!c.is_rational()) throw std::invalid_argument("expected a rational vector");
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.a().get_den_mpz_t());
    }
    Vector<Integer> v;
    Integer g = 0;
    for (const auto& c : x) {
        Integer z = Rational(c.a() * den).get_num();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
        v.push_back(z);
    }
    if (g == 0) throw std::invalid_argument("zero vector");
    if (g != 1)
        for (auto& z : v) z /= g;
    return v;
}

inline Vector<FieldElement> sign_normalized(Vector<FieldElement> x) {
    for (const auto& c : x) {
        if (c.is_zero()) continue;
        if (exact_sign(c) < 0)
            for (auto& e : x) e = -e;
        break;
    }
    return x;
}

/// Canonical projective key: divide by the first nonzero coordinate.
inline std::string projective_key(const Vector<FieldElement>& x) {
    std::size_t f = 0;
    while (f < x.size() && x[f].is_zero()) ++f;
    if (f == x.size()) throw std::invalid_argument("zero vector");
    std::string key;
    for (const auto& c : x) {
        key += (c / x[f]).str();
        key += ';';
    }
    return key;
}

struct Candidate {
    Vector<FieldElement> point;
    Real L;
    std::string key;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// The family of convex bodies attached to (target, grade) or to the wedge-form functional.

class MinimaProblem {
public:
    enum class Mode { rational_archimedean, rational_finite, quadratic_real };

    /// Compound grade k (1 ≤ k ≤ n); grade 1 gives the maps L_ξ,j.
    static MinimaProblem compound(const ApproximationTarget& t, int k) {
        if (k < 1 || k > t.n()) throw std::invalid_argument("grade must lie in 1..n");
        return MinimaProblem(t, k, false);
    }
    /// The maps L*_ξ,j built from ‖x∧ξ‖.
    static MinimaProblem star(const ApproximationTarget& t) {
        if (t.n() < 2) throw std::invalid_argument("wedge-form minima need n ≥ 2");
        return MinimaProblem(t, 1, true);
    }

    const ApproximationTarget& target() const { return target_; }
    int n() const { return target_.n(); }
    int grade() const { return grade_; }
    bool is_star() const { return star_; }
    std::size_t dimension() const { return N_; }
    Mode mode() const { return mode_; }

    /// L(X, q) = max(log H(X), q + log D(X)).
    Real L_value(const Vector<FieldElement>& X, const Rational& q) const {
        if (X.size() != N_) throw std::invalid_argument("L_value: dimension mismatch");
        require_nonzero_field(X);
        switch (mode_) {
            case Mode::rational_archimedean: return L_rational_inf(detail::primitive_integer(X), q);
            case Mode::rational_finite: return L_rational_finite(detail::primitive_integer(X), q);
            case Mode::quadratic_real: return L_quadratic(X, q);
        }
        throw std::logic_error("unreachable");
    }

    /// log λ(x, C(q)) with the least admissible dilation r ≥ e^{q d/d_w} in the value group at w.
    Real log_lambda(const Vector<FieldElement>& X, const Rational& q) const {
        if (mode_ != Mode::rational_finite) return L_value(X, q);
        auto v = detail::primitive_integer(X);
        Real logp = log(Real(target_.place().p));
        long steps = to_real(q) <= 0 ? 0 : static_cast<long>(ceil(to_real(q) / logp).convert_to<double>());
        long val = padic_valuation(v, steps);
        Real lognorm = log(to_real(norm_sq(v))) / 2;
        return lognorm + (steps - val) * logp;
    }

    /// All projective points X with L(X,q) ≤ t (one representative each).
    std::vector<detail::Candidate> enumerate(const Rational& q, const Real& t, const EnumerationBudget& budget) const {
        switch (mode_) {
            case Mode::rational_archimedean: return enumerate_rational_inf(q, t, budget);
            case Mode::rational_finite: return enumerate_rational_finite(q, t, budget);
            case Mode::quadratic_real: return enumerate_quadratic(q, t, budget);
        }
        throw std::logic_error("unreachable");
    }

private:
    MinimaProblem(const ApproximationTarget& t, int k, bool star) : target_(t), grade_(k), star_(star) {
        const auto& K = t.field();
        const auto& w = t.place();
        int n = t.n();
        N_ = star ? static_cast<std::size_t>(n) : binomial(n, k);
        map_ = star ? detail::wedge_map(n) : detail::contraction_map(n, k);
        if (w.is_archimedean()) {
            if (w.complex) throw std::invalid_argument("minima at a complex place are not supported");
            mode_ = K.is_rational() ? Mode::rational_archimedean : Mode::quadratic_real;
            xi_ = t.xi_real();
            A_ = Matrix<Real>(map_.size(), Vector<Real>(N_, Real(0)));
            for (std::size_t r = 0; r < map_.size(); ++r)
                for (const auto& term : map_[r]) A_[r][term.col] = term.sign > 0 ? xi_[term.xi] : Real(-xi_[term.xi]);
        } else {
            if (!K.is_rational()) throw std::invalid_argument("minima at a finite place require K = Q");
            mode_ = Mode::rational_finite;
            xi_res_ = t.xi_residues();
        }
    }

    static Integer norm_sq(const Vector<Integer>& v) {
        Integer s = 0;
        for (const auto& z : v) s += z * z;
        return s;
    }

    Real L_rational_inf(const Vector<Integer>& v, const Rational& q) const {
        Real lognorm = log(to_real(norm_sq(v))) / 2;
        if (target_.xi_exact()) {
            Vector<Rational> vr(v.begin(), v.end());
            if (detail::image_is_zero_exact(map_, *target_.xi_exact(), vr)) return lognorm;
        }
        Vector<Real> x;
        for (const auto& z : v) x.push_back(to_real(z));
        Real img = detail::image_norm_sq(map_, xi_, x);
        if (img == 0) return lognorm;
        return boost::multiprecision::max(lognorm, Real(to_real(q) + log(img) / 2));
    }

    /// min over rows of v_p((A v)_r), capped at `cap`.
    long padic_valuation(const Vector<Integer>& v, long cap) const {
        const long p = target_.place().p;
        long prec = target_.padic_precision();
        Integer mod = pow_integer(p, static_cast<unsigned long>(prec));
        long best = prec;
        for (const auto& row : map_) {
            Integer acc = 0;
            for (const auto& t : row) acc += t.sign * xi_res_[t.xi] * v[t.col];
            acc %= mod;
            if (acc != 0) best = std::min(best, valuation(acc, p));
        }
        if (best >= prec && prec < cap) throw PrecisionError("p-adic precision too small for this q");
        return std::min(best, cap);
    }

    Real L_rational_finite(const Vector<Integer>& v, const Rational& q) const {
        const long p = target_.place().p;
        Real logp = log(Real(p));
        Real qr = to_real(q);
        long cap = qr <= 0 ? 0 : static_cast<long>(ceil(qr / logp).convert_to<double>());
        long val = padic_valuation(v, cap);
        Real lognorm = log(to_real(norm_sq(v))) / 2;
        return lognorm + boost::multiprecision::max(Real(0), Real(qr - val * logp));
    }

    Real L_quadratic(const Vector<FieldElement>& X, const Rational& q) const {
        const auto& K = target_.field();
        Real logH = log(to_real(height_power_content(K, X))) / (2 * K.degree());
        int emb = target_.place().embedding();
        if (target_.xi_exact()) {
            Vector<FieldElement> xi;
            for (const auto& c : *target_.xi_exact()) xi.push_back(K.element(c));
            if (detail::image_is_zero_exact(map_, xi, X)) return logH;
        }
        Vector<Real> x;
        for (const auto& c : X) x.push_back(c.to_real(emb));
        Real img = detail::image_norm_sq(map_, xi_, x);
        if (img == 0) return logH;
        Real nx = 0;
        for (const auto& c : x) nx += c * c;
        Real rho = (log(img) - log(nx)) / 2;
        return logH + boost::multiprecision::max(Real(0), Real(to_real(q) + to_real(target_.weight()) * rho));
    }

    static std::vector<std::vector<double>> gram(const Matrix<Real>& rows) {
        std::size_t m = rows.size();
        std::vector<std::vector<double>> G(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j) {
                Real s = 0;
                for (std::size_t c = 0; c < rows[i].size(); ++c) s += rows[i][c] * rows[j][c];
                G[i][j] = G[j][i] = s.convert_to<double>();
            }
        return G;
    }

    /// Enumerates integer combinations y of `coeff` rows with ‖Σ y_i emb_i‖² ≤ radius_sq.
    template <class Visit>
    static void enumerate_body(Matrix<Real> emb, lattice::IntMatrix coeff, double radius_sq,
                               const EnumerationBudget& budget, Visit&& visit) {
        if (budget.reduction) {
            auto red = lattice::lll(std::move(emb), std::move(coeff));
            emb = std::move(red.embedded);
            coeff = std::move(red.coeff);
        }
        auto G = gram(emb);
        const std::size_t dim = coeff.front().size();
        lattice::fincke_pohst(
            G, radius_sq,
            [&](const std::vector<long>& y) {
                Vector<Integer> x(dim, 0);
                for (std::size_t i = 0; i < y.size(); ++i)
                    if (y[i] != 0)
                        for (std::size_t c = 0; c < dim; ++c) x[c] += y[i] * coeff[i][c];
                visit(x);
            },
            budget.max_candidates);
    }

    std::vector<detail::Candidate> enumerate_rational_inf(const Rational& q, const Real& t,
                                                          const EnumerationBudget& budget) const {
        const std::size_t m = A_.size();
        Real shrink = exp(-t), stretch = exp(to_real(q) - t);
        Matrix<Real> emb(N_, Vector<Real>(N_ + m, Real(0)));
        lattice::IntMatrix coeff(N_, Vector<Integer>(N_, 0));
        for (std::size_t i = 0; i < N_; ++i) {
            emb[i][i] = shrink;
            for (std::size_t r = 0; r < m; ++r) emb[i][N_ + r] = stretch * A_[r][i];
            coeff[i][i] = 1;
        }
        std::vector<detail::Candidate> out;
        enumerate_body(std::move(emb), std::move(coeff), 2.02, budget, [&](const Vector<Integer>& x) {
            Integer g = 0;
            for (const auto& z : x) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
            if (g != 1) return;
            Real L = L_rational_inf(x, q);
            if (L > t) return;
            auto pt = detail::sign_normalized(to_field(target_.field(), x));
            out.push_back({pt, L, detail::projective_key(pt)});
        });
        return out;
    }

    /// Basis of {x ∈ ℤ^N : A x ≡ 0 mod p^m}.
    lattice::IntMatrix congruence_lattice(long m) const {
        const long p = target_.place().p;
        const std::size_t rows = map_.size();
        Integer pm = pow_integer(p, static_cast<unsigned long>(m));
        Integer mod = pow_integer(p, static_cast<unsigned long>(std::max(m, 1L)));
        lattice::IntMatrix eq(rows, Vector<Integer>(N_ + rows, 0));
        for (std::size_t r = 0; r < rows; ++r) {
            for (const auto& t : map_[r]) {
                Integer c = (t.sign * xi_res_[t.xi]) % mod;
                eq[r][t.col] += c;
            }
            eq[r][N_ + r] = pm;
        }
        auto ker = lattice::integer_kernel(eq, N_ + rows);
        lattice::IntMatrix gens;
        for (auto& k : ker) gens.emplace_back(k.begin(), k.begin() + static_cast<long>(N_));
        auto basis = lattice::hnf(gens);
        if (basis.size() != N_) throw std::logic_error("congruence lattice is not of full rank");
        return basis;
    }

    std::vector<detail::Candidate> enumerate_rational_finite(const Rational& q, const Real& t,
                                                             const EnumerationBudget& budget) const {
        const long p = target_.place().p;
        Real logp = log(Real(p));
        Real qr = to_real(q);
        long M = qr <= 0 ? 0 : static_cast<long>(ceil(qr / logp).convert_to<double>());
        if (M >= target_.padic_precision()) throw PrecisionError("p-adic precision too small for this q");
        std::map<std::string, detail::Candidate> found;
        for (long m = 0; m <= M; ++m) {
            Real bound = boost::multiprecision::min(t, Real(t - qr + m * logp));
            if (bound < 0) continue;
            auto basis = congruence_lattice(m);
            Real scale = exp(-bound);
            Matrix<Real> emb;
            for (const auto& b : basis) {
                Vector<Real> row;
                for (const auto& z : b) row.push_back(to_real(z) * scale);
                emb.push_back(std::move(row));
            }
            enumerate_body(std::move(emb), basis, 1.0001, budget, [&](const Vector<Integer>& x) {
                Integer g = 0;
                for (const auto& z : x) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
                if (g != 1) return;
                auto pt = detail::sign_normalized(to_field(target_.field(), x));
                auto key = detail::projective_key(pt);
                if (found.count(key)) return;
                Real L = L_rational_finite(x, q);
                if (L > t) return;
                found.emplace(key, detail::Candidate{pt, L, key});
            });
        }
        std::vector<detail::Candidate> out;
        for (auto& [k, c] : found) out.push_back(std::move(c));
        return out;
    }

    /// Real quadratic K: points of O_K^N in ℤ^{2N}, with one representative per projective class
    /// inside a fundamental domain for the unit action (‖σ'x‖ ≤ β) and content of norm ≤ Minkowski bound.
    std::vector<detail::Candidate> enumerate_quadratic(const Rational& q, const Real& t,
                                                       const EnumerationBudget& budget) const {
        const auto& K = target_.field();
        const int emb_w = target_.place().embedding(), emb_o = -emb_w;
        const std::size_t m = A_.size();
        FieldElement eps = K.fundamental_unit();
        Real E = boost::multiprecision::max(boost::multiprecision::abs(eps.to_real(+1)),
                                            boost::multiprecision::abs(eps.to_real(-1)));
        Real nmax = Real(K.minkowski_bound());
        Real root = real_sqrt(Real(nmax * E));
        Real beta = exp(t) * root;
        Real bound_w = exp(t) * root;
        Real bound_img = exp(t - 2 * to_real(q)) * root;
        const std::size_t dim = 2 * N_;
        Matrix<Real> emb(dim, Vector<Real>(2 * N_ + m, Real(0)));
        lattice::IntMatrix coeff(dim, Vector<Integer>(dim, 0));
        FieldElement basis_elt[2] = {K.from_int(1), K.omega()};
        for (std::size_t c = 0; c < N_; ++c)
            for (int s = 0; s < 2; ++s) {
                std::size_t i = 2 * c + static_cast<std::size_t>(s);
                Real vw = basis_elt[s].to_real(emb_w), vo = basis_elt[s].to_real(emb_o);
                emb[i][c] = vo / beta;
                emb[i][N_ + c] = vw / bound_w;
                for (std::size_t r = 0; r < m; ++r) emb[i][2 * N_ + r] = A_[r][c] * vw / bound_img;
                coeff[i][i] = 1;
            }
        std::map<std::string, detail::Candidate> found;
        enumerate_body(std::move(emb), std::move(coeff), 3.03, budget, [&](const Vector<Integer>& y) {
            Vector<FieldElement> X;
            for (std::size_t c = 0; c < N_; ++c) X.push_back(K.from_basis_coords(Rational(y[2 * c]), Rational(y[2 * c + 1])));
            auto key = detail::projective_key(X);
            if (found.count(key)) return;
            Real L = L_quadratic(X, q);
            if (L > t) return;
            found.emplace(key, detail::Candidate{detail::sign_normalized(X), L, key});
        });
        std::vector<detail::Candidate> out;
        for (auto& [k, c] : found) out.push_back(std::move(c));
        return out;
    }

    ApproximationTarget target_;
    int grade_;
    bool star_;
    std::size_t N_ = 0;
    Mode mode_ = Mode::rational_archimedean;
    detail::SparseMap map_;
    Vector<Real> xi_;
    Matrix<Real> A_;
    Vector<Integer> xi_res_;
};

// ---------------------------------------------------------------------------
// Successive minima at one q and over a grid.

struct MinimaPoint {
    std::vector<Real> values;
    std::vector<Vector<FieldElement>> witnesses;
    bool exact = true;
};

namespace detail {

/// Incremental linear-independence test over K.
class IndependenceTracker {
public:
    bool try_add(const Vector<FieldElement>& v) {
        Matrix<FieldElement> trial = rows_;
        trial.push_back(v);
        if (row_reduce(trial).rank() == static_cast<int>(trial.size())) {
            rows_ = std::move(trial);
            return true;
        }
        return false;
    }
    std::size_t rank() const { return rows_.size(); }

private:
    Matrix<FieldElement> rows_;
};

}  // namespace detail

inline MinimaPoint minima_at(const MinimaProblem& problem, const Rational& q, const EnumerationBudget& budget = {}) {
    const std::size_t N = problem.dimension();
    const Real qr = to_real(q);
    MinimaPoint out;
    Real t = boost::multiprecision::max(Real(0), Real(qr / N - 0.5));
    while (true) {
        bool last = t >= qr;
        if (t > budget.max_log_height) {
            out.exact = false;
            return out;
        }
        std::vector<detail::Candidate> cands;
        try {
            cands = problem.enumerate(q, t, budget);
        } catch (const lattice::EnumerationBudgetExceeded&) {
            out.exact = false;
            return out;
        }
        std::sort(cands.begin(), cands.end(), [](const detail::Candidate& a, const detail::Candidate& b) {
            if (a.L != b.L) return a.L < b.L;
            return a.key < b.key;
        });
        detail::IndependenceTracker tracker;
        std::vector<Real> values;
        std::vector<Vector<FieldElement>> wit;
        for (const auto& c : cands) {
            if (tracker.try_add(c.point)) {
                values.push_back(c.L);
                wit.push_back(c.point);
                if (values.size() == N) break;
            }
        }
        if (values.size() == N) {
            out.values = std::move(values);
            out.witnesses = std::move(wit);
            return out;
        }
        if (last) throw std::logic_error("minima enumeration at level q did not reach full rank");
        t = boost::multiprecision::min(qr, Real(t + budget.level_step));
    }
}

inline std::string target_label(const ApproximationTarget& t) {
    std::string s = t.field().is_rational() ? "Q" : "Q(sqrt" + std::to_string(t.field().D()) + ")";
    s += "@" + t.place().name() + ":n=" + std::to_string(t.n());
    return s;
}

inline MinimaProfile profile(const MinimaProblem& problem, const std::vector<Rational>& grid,
                             const EnumerationBudget& budget = {}) {
    MinimaProfile prof;
    prof.target_id = target_label(problem.target());
    prof.n = problem.n();
    prof.grade = problem.grade();
    prof.star = problem.is_star();
    prof.N = problem.dimension();
    prof.q_grid = grid;
    prof.values.resize(grid.size());
    prof.witnesses.resize(grid.size());
    std::vector<char> exact(grid.size(), 1);
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        auto pt = minima_at(problem, grid[i], budget);
        prof.values[i] = std::move(pt.values);
        prof.witnesses[i] = std::move(pt.witnesses);
        exact[i] = pt.exact;
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        prof.row_exact.push_back(exact[i] != 0);
        prof.exact = prof.exact && exact[i];
    }
    return prof;
}

inline MinimaProfile profile(const ApproximationTarget& target, int grade, const std::vector<Rational>& grid,
                             const EnumerationBudget& budget = {}) {
    return profile(MinimaProblem::compound(target, grade), grid, budget);
}

inline MinimaProfile star_profile(const ApproximationTarget& target, const std::vector<Rational>& grid,
                                  const EnumerationBudget& budget = {}) {
    return profile(MinimaProblem::star(target), grid, budget);
}

/// L^(k)_ξ(X, q) for X ∈ ⋀^k K^n.
inline Real L_value(const ApproximationTarget& target, const GradedVector<FieldElement>& X, const Rational& q) {
    return MinimaProblem::compound(target, X.k()).L_value(X.coords(), q);
}

inline Real L_star_value(const ApproximationTarget& target, const Vector<FieldElement>& x, const Rational& q) {
    return MinimaProblem::star(target).L_value(x, q);
}

/// log λ(x, C_ξ(q)) for a point x ∈ K^n.
inline Real log_lambda_of_point(const ApproximationTarget& target, const Vector<FieldElement>& x, const Rational& q) {
    return MinimaProblem::compound(target, 1).log_lambda(x, q);
}

// ---------------------------------------------------------------------------
// Derived quantities.

struct RatioRange {
    double low = 0, high = 0;
};

/// 1/(r) − 1 with r = 0 mapped to +∞.
inline double exponent_from_ratio(double r) {
    return r <= 0 ? std::numeric_limits<double>::infinity() : 1.0 / r - 1.0;
}

struct ProfileExponents {
    int grade = 1;
    bool star = false;
    RatioRange first;  // range of L_1(q)/q over the tail
    RatioRange last;   // range of L_N(q)/q over the tail
    // Grade 1: ω, ω̂ from L_1 and λ, λ̂ from L_n.  Wedge form: λ, λ̂ from L*_1.
    // Grade g: ω_{n-g-1}, ω̂_{n-g-1} from L^(g)_1.
    double omega = 0, omega_hat = 0, lambda = 0, lambda_hat = 0;
    int intermediate_index = -1;
    double omega_k = 0, omega_hat_k = 0;
    std::size_t tail_points = 0;
    bool finite_horizon = true;
};

inline ProfileExponents exponents_from_profile(const MinimaProfile& prof) {
    if (!prof.exact) throw std::invalid_argument("exponent estimates need an exact profile");
    std::vector<std::size_t> tail;
    Rational qmax = prof.q_grid.back();
    for (std::size_t i = 0; i < prof.size(); ++i)
        if (prof.q_grid[i] > 0 && 2 * prof.q_grid[i] >= qmax) tail.push_back(i);
    if (tail.size() < 8) throw std::invalid_argument("grid too short: fewer than 8 points in the tail half");
    ProfileExponents e;
    e.grade = prof.grade;
    e.star = prof.star;
    e.tail_points = tail.size();
    e.first = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    e.last = e.first;
    for (auto i : tail) {
        double q = prof.q_grid[i].get_d();
        double r1 = prof.values[i].front().convert_to<double>() / q;
        double rN = prof.values[i].back().convert_to<double>() / q;
        e.first.low = std::min(e.first.low, r1), e.first.high = std::max(e.first.high, r1);
        e.last.low = std::min(e.last.low, rN), e.last.high = std::max(e.last.high, rN);
    }
    if (prof.star) {
        e.lambda = exponent_from_ratio(e.first.low);
        e.lambda_hat = exponent_from_ratio(e.first.high);
    } else {
        if (prof.grade == 1) {
            e.omega = exponent_from_ratio(e.first.low);
            e.omega_hat = exponent_from_ratio(e.first.high);
            e.lambda = exponent_from_ratio(1 - e.last.high);
            e.lambda_hat = exponent_from_ratio(1 - e.last.low);
        }
        e.intermediate_index = prof.n - prof.grade - 1;
        e.omega_k = exponent_from_ratio(e.first.low);
        e.omega_hat_k = exponent_from_ratio(e.first.high);
    }
    return e;
}

inline void require_matching_grids(const MinimaProfile& a, const MinimaProfile& b) {
    if (a.q_grid != b.q_grid) throw std::invalid_argument("profiles are sampled on different grids");
}

/// max over the grid of |Σ_j L_j(q) − q|.
inline double sum_rule_check(const MinimaProfile& prof) {
    double worst = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        Real s = 0;
        for (const auto& v : prof.values[i]) s += v;
        worst = std::max(worst, boost::multiprecision::abs(s - to_real(prof.q_grid[i])).convert_to<double>());
    }
    return worst;
}

/// max over the grid of |L*_j(q) + L_k(q) − q| for j + k = n + 1.
inline double duality_sum_check(const MinimaProfile& L, const MinimaProfile& Lstar) {
    require_matching_grids(L, Lstar);
    if (L.grade != 1 || L.star || !Lstar.star) throw std::invalid_argument("duality check needs L and L* profiles");
    const std::size_t n = L.N;
    double worst = 0;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Real d = Lstar.values[i][j] + L.values[i][n - 1 - j] - to_real(L.q_grid[i]);
            worst = std::max(worst, boost::multiprecision::abs(d).convert_to<double>());
        }
    return worst;
}

/// max over the grid of |L^(k)_j(q) − log Λ_j(q)|, where log Λ_j is the j-th smallest sum of k grade-1 minima.
inline double burger_comparability_check(const MinimaProfile& grade1, const MinimaProfile& compound) {
    require_matching_grids(grade1, compound);
    if (grade1.grade != 1 || grade1.star) throw std::invalid_argument("first profile must have grade 1");
    const int n = grade1.n, k = compound.grade;
    const auto& subsets = SubsetIndex::get(n, k);
    double worst = 0;
    for (std::size_t i = 0; i < grade1.size(); ++i) {
        std::vector<Real> sums;
        for (std::size_t a = 0; a < subsets.size(); ++a) {
            Real s = 0;
            for (int e : subsets.elements(a)) s += grade1.values[i][static_cast<std::size_t>(e)];
            sums.push_back(s);
        }
        std::sort(sums.begin(), sums.end());
        for (std::size_t j = 0; j < sums.size(); ++j)
            worst = std::max(worst, boost::multiprecision::abs(compound.values[i][j] - sums[j]).convert_to<double>());
    }
    return worst;
}

/// Structural checks: 0 ≤ L_1 ≤ … ≤ L_N ≤ q at every grid point.
inline std::vector<std::string> profile_violations(const MinimaProfile& prof) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const auto& v = prof.values[i];
        Real q = to_real(prof.q_grid[i]);
        if (v.size() != prof.N) {
            out.push_back("row " + std::to_string(i) + ": incomplete");
            continue;
        }
        if (v.front() < 0) out.push_back("row " + std::to_string(i) + ": L_1 < 0");
        for (std::size_t j = 1; j < v.size(); ++j)
            if (v[j] < v[j - 1]) out.push_back("row " + std::to_string(i) + ": not monotone at j=" + std::to_string(j + 1));
        if (v.back() > q) out.push_back("row " + std::to_string(i) + ": L_N > q");
    }
    return out;
}

}  // namespace parageo

#pragma once

#include "scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace parageo {

template <class S>
using Vector = std::vector<S>;

template <class S>
using Matrix = std::vector<Vector<S>>;  // row-major; rows are vectors

// ---------------------------------------------------------------------------
// k-subsets of {0..n-1} in lexicographic order, stored as bit masks.

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

class SubsetIndex {
public:
    SubsetIndex(int n, int k) : n_(n), k_(k) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        std::iota(idx.begin(), idx.end(), 0);
        if (k == 0) {
            masks_.push_back(0);
        } else if (k <= n) {
            while (true) {
                std::uint32_t m = 0;
                for (int i : idx) m |= 1u << i;
                masks_.push_back(m);
                int pos = k - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
                if (pos < 0) break;
                ++idx[static_cast<std::size_t>(pos)];
                for (int j = pos + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
        for (std::size_t i = 0; i < masks_.size(); ++i) position_[masks_[i]] = i;
    }
    static const SubsetIndex& get(int n, int k) {
        thread_local std::unordered_map<int, std::unique_ptr<SubsetIndex>> cache;
        auto& slot = cache[n * 64 + k];
        if (!slot) slot = std::make_unique<SubsetIndex>(n, k);
        return *slot;
    }
    std::size_t size() const { return masks_.size(); }
    std::uint32_t mask(std::size_t i) const { return masks_[i]; }
    std::size_t index(std::uint32_t mask) const { return position_.at(mask); }
    std::vector<int> elements(std::size_t i) const {
        std::vector<int> out;
        for (int b = 0; b < n_; ++b)
            if (masks_[i] >> b & 1u) out.push_back(b);
        return out;
    }

private:
    int n_, k_;
    std::vector<std::uint32_t> masks_;
    std::unordered_map<std::uint32_t, std::size_t> position_;
};

/// Sign of the permutation sorting the concatenation (I, J) of two disjoint sets.
inline int merge_sign(std::uint32_t I, std::uint32_t J) {
    int inversions = 0;
    for (std::uint32_t j = J; j; j &= j - 1) {
        int b = __builtin_ctz(j);
        inversions += __builtin_popcount(I >> (b + 1));
    }
    return inversions % 2 ? -1 : 1;
}

// ---------------------------------------------------------------------------

/// Element of the k-th exterior power of Kⁿ, coordinates indexed by lexicographic k-subsets.
template <class S>
class GradedVector {
public:
    GradedVector(int n, int k, Vector<S> coords) : n_(n), k_(k), coords_(std::move(coords)) {
        if (n < 0 || n > 24 || k < 0 || k > n) throw std::invalid_argument("GradedVector: bad dimensions");
        if (coords_.size() != binomial(n, k))
            throw std::invalid_argument("GradedVector: coordinate count must equal C(n,k)");
    }
    static GradedVector zero(int n, int k, const S& like) {
        return GradedVector(n, k, Vector<S>(binomial(n, k), scalar_traits<S>::zero_like(like)));
    }
    static GradedVector from_vector(const Vector<S>& x) { return GradedVector(static_cast<int>(x.size()), 1, x); }
    static GradedVector scalar(int n, const S& s) { return GradedVector(n, 0, Vector<S>{s}); }
    static GradedVector basis_element(int n, std::vector<int> indices, const S& like) {
        std::sort(indices.begin(), indices.end());
        GradedVector out = zero(n, static_cast<int>(indices.size()), like);
        std::uint32_t m = 0;
        for (int i : indices) m |= 1u << i;
        out.coords_[SubsetIndex::get(n, out.k_).index(m)] = scalar_traits<S>::one_like(like);
        return out;
    }

    int n() const { return n_; }
    int k() const { return k_; }
    const Vector<S>& coords() const { return coords_; }
    Vector<S>& coords() { return coords_; }
    const S& operator[](std::size_t i) const { return coords_[i]; }
    S& operator[](std::size_t i) { return coords_[i]; }
    std::size_t size() const { return coords_.size(); }

    bool is_zero() const {
        return std::all_of(coords_.begin(), coords_.end(), [](const S& c) { return scalar_traits<S>::is_zero(c); });
    }
    Vector<S> to_vector() const {
        if (k_ != 1) throw std::logic_error("to_vector requires grade 1");
        return coords_;
    }

    friend GradedVector operator+(GradedVector x, const GradedVector& y) {
        check_compatible(x, y);
        for (std::size_t i = 0; i < x.size(); ++i) x.coords_[i] += y.coords_[i];
        return x;
    }
    friend GradedVector operator-(GradedVector x, const GradedVector& y) {
        check_compatible(x, y);
        for (std::size_t i = 0; i < x.size(); ++i) x.coords_[i] -= y.coords_[i];
        return x;
    }
    friend GradedVector operator*(const S& s, GradedVector x) {
        for (auto& c : x.coords_) c = s * c;
        return x;
    }
    friend bool operator==(const GradedVector& x, const GradedVector& y) {
        return x.n_ == y.n_ && x.k_ == y.k_ && x.coords_ == y.coords_;
    }

private:
    static void check_compatible(const GradedVector& x, const GradedVector& y) {
        if (x.n_ != y.n_ || x.k_ != y.k_) throw std::invalid_argument("graded vectors of different shape");
    }
    int n_, k_;
    Vector<S> coords_;
};

template <class S>
GradedVector<S> wedge(const GradedVector<S>& X, const GradedVector<S>& Y) {
    if (X.n() != Y.n()) throw std::invalid_argument("wedge: dimension mismatch");
    int n = X.n(), j = X.k(), k = Y.k();
    if (j + k > n) throw std::invalid_argument("wedge: grade overflow");
    const S& like = X.size() ? X[0] : Y[0];
    auto out = GradedVector<S>::zero(n, j + k, like);
    const auto &sx = SubsetIndex::get(n, j), &sy = SubsetIndex::get(n, k), &so = SubsetIndex::get(n, j + k);
    for (std::size_t a = 0; a < sx.size(); ++a) {
        if (scalar_traits<S>::is_zero(X[a])) continue;
        std::uint32_t I = sx.mask(a);
        for (std::size_t b = 0; b < sy.size(); ++b) {
            std::uint32_t J = sy.mask(b);
            if (I & J || scalar_traits<S>::is_zero(Y[b])) continue;
            S term = X[a] * Y[b];
            auto& slot = out[so.index(I | J)];
            if (merge_sign(I, J) > 0)
                slot += term;
            else
                slot -= term;
        }
    }
    return out;
}

template <class S>
GradedVector<S> wedge_all(const std::vector<Vector<S>>& vectors, int n, const S& like) {
    auto acc = GradedVector<S>::scalar(n, scalar_traits<S>::one_like(like));
    for (const auto& v : vectors) acc = wedge(acc, GradedVector<S>::from_vector(v));
    return acc;
}

/// Plücker coordinates of the span of the given rows.
template <class S>
GradedVector<S> plucker(const Matrix<S>& basis, int n) {
    if (basis.empty()) throw std::invalid_argument("plucker: empty basis");
    return wedge_all(basis, n, basis.front().front());
}

/// Contraction y ⌋ X: on e_I, Σ_m (-1)^{m-1} y_{i_m} e_{I∖i_m}.
template <class S>
GradedVector<S> contract(const Vector<S>& y, const GradedVector<S>& X) {
    if (X.k() < 1) throw std::invalid_argument("contract: grade-0 input");
    if (static_cast<int>(y.size()) != X.n()) throw std::invalid_argument("contract: dimension mismatch");
    int n = X.n(), k = X.k();
    auto out = GradedVector<S>::zero(n, k - 1, y.front());
    const auto &si = SubsetIndex::get(n, k), &so = SubsetIndex::get(n, k - 1);
    for (std::size_t a = 0; a < si.size(); ++a) {
        if (scalar_traits<S>::is_zero(X[a])) continue;
        std::uint32_t I = si.mask(a);
        int m = 0;
        for (std::uint32_t t = I; t; t &= t - 1, ++m) {
            int b = __builtin_ctz(t);
            S term = y[static_cast<std::size_t>(b)] * X[a];
            auto& slot = out[so.index(I & ~(1u << b))];
            if (m % 2 == 0)
                slot += term;
            else
                slot -= term;
        }
    }
    return out;
}

/// The duality isomorphism: e_I ↦ sign(I, Iᶜ)·e_{Iᶜ}, so that (X∧Y)·E = hodge(X)·Y.
template <class S>
GradedVector<S> hodge(const GradedVector<S>& X) {
    int n = X.n(), k = X.k();
    auto out = GradedVector<S>::zero(n, n - k, X[0]);
    const auto &si = SubsetIndex::get(n, k), &so = SubsetIndex::get(n, n - k);
    std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1);
    for (std::size_t a = 0; a < si.size(); ++a) {
        std::uint32_t I = si.mask(a), J = full & ~I;
        out[so.index(J)] = merge_sign(I, J) > 0 ? X[a] : S(-X[a]);
    }
    return out;
}

template <class S>
S dot(const Vector<S>& x, const Vector<S>& y) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("dot: dimension mismatch");
    S acc = x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

template <class S>
S dot(const GradedVector<S>& X, const GradedVector<S>& Y) {
    if (X.n() != Y.n() || X.k() != Y.k()) throw std::invalid_argument("dot: shape mismatch");
    return dot(X.coords(), Y.coords());
}

// ---------------------------------------------------------------------------
// Places and norms.

struct PlaceMetric {
    enum class Kind { archimedean, nonarchimedean };
    Kind kind = Kind::archimedean;
    int delta = 1;
    long p = 0;
    int embedding = +1;  // which sign √D takes for quadratic scalars

    static PlaceMetric archimedean(int embedding = +1) { return {Kind::archimedean, 1, 0, embedding}; }
    static PlaceMetric nonarchimedean(long p) { return {Kind::nonarchimedean, 0, p, +1}; }
    bool is_archimedean() const { return kind == Kind::archimedean; }
};

/// Exact sign of an exact squared absolute value (or of any exact real scalar).
inline int exact_sign(const Rational& x) { return sgn(x); }
inline int exact_sign(const QuadraticNumber& x) { return x.is_rational() ? sgn(x.a()) : x.sign(+1); }
inline int exact_sign(const Real& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

template <class T>
int compare_exact(const T& a, const T& b) {
    return exact_sign(T(a - b));
}

/// Σ |c|² at an archimedean place; exact for exact scalar kinds.
template <class S>
typename scalar_traits<S>::abs2_type norm_sq(const Vector<S>& x, int embedding = +1) {
    using A = typename scalar_traits<S>::abs2_type;
    A acc = scalar_traits<S>::abs2(x.front(), embedding);
    for (std::size_t i = 1; i < x.size(); ++i) acc += scalar_traits<S>::abs2(x[i], embedding);
    return acc;
}

template <class S>
typename scalar_traits<S>::abs2_type norm_sq(const GradedVector<S>& X, int embedding = +1) {
    return norm_sq(X.coords(), embedding);
}

/// max_i |c_i|_p as an exact rational; zero vectors give 0.
template <class S>
Rational norm_nonarch(const Vector<S>& x, long p) {
    std::optional<long> best;
    bool unresolved = false;
    long unresolved_bound = 0;
    for (const auto& c : x) {
        if constexpr (std::is_same_v<S, PAdic>) {
            if (c.is_zero_to_precision()) {
                unresolved = true;
                unresolved_bound = std::min(unresolved_bound == 0 ? c.valuation_lower_bound() : unresolved_bound,
                                            c.valuation_lower_bound());
                continue;
            }
        } else if (scalar_traits<S>::is_zero(c)) {
            continue;
        }
        long v = scalar_traits<S>::valuation(c, p);
        best = best ? std::min(*best, v) : v;
    }
    if (unresolved && (!best || *best >= unresolved_bound))
        throw PrecisionError("non-archimedean norm not determined at tracked precision");
    if (!best) return 0;
    return pow_rational(Rational(p), -*best);
}

template <class S>
Rational norm_nonarch(const GradedVector<S>& X, long p) {
    return norm_nonarch(X.coords(), p);
}

inline Real real_sqrt(const Real& x) { return boost::multiprecision::sqrt(x); }

template <class S>
Real norm_at(const Vector<S>& x, const PlaceMetric& metric) {
    if (metric.is_archimedean()) {
        if constexpr (std::is_same_v<S, PAdic>)
            throw std::domain_error("p-adic scalars have no archimedean norm");
        else
            return real_sqrt(scalar_traits<S>::abs2_real(norm_sq(x, metric.embedding)));
    } else {
        if constexpr (std::is_same_v<S, Real>)
            throw std::domain_error("real scalars have no non-archimedean norm");
        else if constexpr (std::is_same_v<S, QuadraticNumber>)
            throw std::domain_error("use numberfield places for non-archimedean norms of quadratic scalars");
        else
            return to_real(norm_nonarch(x, metric.p));
    }
}

template <class S>
Real norm_at(const GradedVector<S>& X, const PlaceMetric& metric) {
    return norm_at(X.coords(), metric);
}

// ---------------------------------------------------------------------------
// Projective distances.

template <class S>
void require_nonzero(const Vector<S>& x, const char* what) {
    if (std::all_of(x.begin(), x.end(), [](const S& c) { return scalar_traits<S>::is_zero(c); }))
        throw std::invalid_argument(std::string(what) + ": zero vector");
}

/// dist(x, y)² at an archimedean place, exact for exact scalar kinds.
template <class S>
typename scalar_traits<S>::abs2_type dist_sq(const Vector<S>& x, const Vector<S>& y, int embedding = +1) {
    require_nonzero(x, "dist");
    require_nonzero(y, "dist");
    auto w = wedge(GradedVector<S>::from_vector(x), GradedVector<S>::from_vector(y));
    return norm_sq(w, embedding) / (norm_sq(x, embedding) * norm_sq(y, embedding));
}

template <class S>
Rational dist_nonarch(const Vector<S>& x, const Vector<S>& y, long p) {
    require_nonzero(x, "dist");
    require_nonzero(y, "dist");
    auto w = wedge(GradedVector<S>::from_vector(x), GradedVector<S>::from_vector(y));
    return norm_nonarch(w, p) / (norm_nonarch(x, p) * norm_nonarch(y, p));
}

template <class S>
Real dist(const Vector<S>& x, const Vector<S>& y, const PlaceMetric& metric) {
    if (metric.is_archimedean()) {
        if constexpr (std::is_same_v<S, PAdic>)
            throw std::domain_error("p-adic scalars have no archimedean distance");
        else
            return real_sqrt(scalar_traits<S>::abs2_real(dist_sq(x, y, metric.embedding)));
    } else {
        if constexpr (std::is_same_v<S, Real> || std::is_same_v<S, QuadraticNumber>)
            throw std::domain_error("unsupported scalar kind for a non-archimedean distance");
        else
            return to_real(dist_nonarch(x, y, metric.p));
    }
}

/// Distance between equal-dimensional subspaces: distance of their Plücker vectors.
template <class S>
typename scalar_traits<S>::abs2_type dist_subspaces_sq(const Matrix<S>& B1, const Matrix<S>& B2, int n,
                                                       int embedding = +1) {
    if (B1.size() != B2.size()) throw std::invalid_argument("dist_subspaces: unequal dimensions");
    auto X1 = plucker(B1, n), X2 = plucker(B2, n);
    if (X1.is_zero() || X2.is_zero()) throw std::invalid_argument("dist_subspaces: rank-deficient basis");
    return dist_sq(X1.coords(), X2.coords(), embedding);
}

template <class S>
Real dist_subspaces(const Matrix<S>& B1, const Matrix<S>& B2, int n, const PlaceMetric& metric) {
    if (B1.size() != B2.size()) throw std::invalid_argument("dist_subspaces: unequal dimensions");
    auto X1 = plucker(B1, n), X2 = plucker(B2, n);
    if (X1.is_zero() || X2.is_zero()) throw std::invalid_argument("dist_subspaces: rank-deficient basis");
    return dist(X1.coords(), X2.coords(), metric);
}

/// dist(x, span B)² = ‖x∧y₁∧…∧y_k‖² / (‖x‖²‖y₁∧…∧y_k‖²).
template <class S>
typename scalar_traits<S>::abs2_type dist_point_subspace_sq(const Vector<S>& x, const Matrix<S>& B,
                                                            int embedding = +1) {
    require_nonzero(x, "dist_point_subspace");
    int n = static_cast<int>(x.size());
    auto Y = plucker(B, n);
    if (Y.is_zero()) throw std::invalid_argument("dist_point_subspace: dependent basis");
    auto XY = wedge(GradedVector<S>::from_vector(x), Y);
    return norm_sq(XY, embedding) / (norm_sq(x, embedding) * norm_sq(Y, embedding));
}

template <class S>
Real dist_point_subspace(const Vector<S>& x, const Matrix<S>& B, const PlaceMetric& metric) {
    require_nonzero(x, "dist_point_subspace");
    int n = static_cast<int>(x.size());
    auto Y = plucker(B, n);
    if (Y.is_zero()) throw std::invalid_argument("dist_point_subspace: dependent basis");
    auto XY = wedge(GradedVector<S>::from_vector(x), Y);
    if (metric.is_archimedean()) return real_sqrt(scalar_traits<S>::abs2_real(dist_point_subspace_sq(x, B, metric.embedding)));
    if constexpr (std::is_same_v<S, Real> || std::is_same_v<S, QuadraticNumber>) {
        throw std::domain_error("unsupported scalar kind for a non-archimedean distance");
    } else {
        return to_real(norm_nonarch(XY, metric.p) / (norm_nonarch(x, metric.p) * norm_nonarch(Y, metric.p)));
    }
}

// ---------------------------------------------------------------------------
// Linear algebra over the coefficient field.

template <class S>
bool negligible(const S& x, double tol) {
    if constexpr (std::is_same_v<S, Real>)
        return boost::multiprecision::abs(x) <= tol;
    else
        return scalar_traits<S>::is_zero(x);
}

template <class S>
struct RowEchelon {
    Matrix<S> rows;            // reduced row echelon form (nonzero rows only)
    std::vector<int> pivots;   // pivot column of each row
    int rank() const { return static_cast<int>(pivots.size()); }
};

template <class S>
RowEchelon<S> row_reduce(Matrix<S> M, double tol = 0.0) {
    RowEchelon<S> out;
    if (M.empty()) return out;
    std::size_t cols = M.front().size(), r = 0;
    for (std::size_t c = 0; c < cols && r < M.size(); ++c) {
        std::size_t piv = M.size();
        if constexpr (std::is_same_v<S, Real>) {
            Real best = tol;
            for (std::size_t i = r; i < M.size(); ++i)
                if (boost::multiprecision::abs(M[i][c]) > best) best = boost::multiprecision::abs(M[i][c]), piv = i;
        } else {
            for (std::size_t i = r; i < M.size() && piv == M.size(); ++i)
                if (!negligible(M[i][c], tol)) piv = i;
        }
        if (piv == M.size()) continue;
        std::swap(M[r], M[piv]);
        S inv = scalar_traits<S>::one_like(M[r][c]) / M[r][c];
        for (auto& v : M[r]) v = v * inv;
        for (std::size_t i = 0; i < M.size(); ++i) {
            if (i == r || scalar_traits<S>::is_zero(M[i][c])) continue;
            S f = M[i][c];
            for (std::size_t j = 0; j < cols; ++j) M[i][j] -= f * M[r][j];
        }
        out.pivots.push_back(static_cast<int>(c));
        ++r;
    }
    M.resize(r);
    out.rows = std::move(M);
    return out;
}

template <class S>
int rank(const Matrix<S>& M, double tol = 0.0) {
    return row_reduce(M, tol).rank();
}

/// Basis of {y : M·y = 0}.
template <class S>
Matrix<S> kernel(const Matrix<S>& M, std::size_t cols, double tol = 0.0) {
    auto ech = row_reduce(M, tol);
    const S& like = M.front().front();
    std::vector<bool> is_pivot(cols, false);
    for (int p : ech.pivots) is_pivot[static_cast<std::size_t>(p)] = true;
    Matrix<S> out;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        Vector<S> v(cols, scalar_traits<S>::zero_like(like));
        v[f] = scalar_traits<S>::one_like(like);
        for (std::size_t r = 0; r < ech.pivots.size(); ++r) v[static_cast<std::size_t>(ech.pivots[r])] = -ech.rows[r][f];
        out.push_back(std::move(v));
    }
    return out;
}

/// Basis of V⊥ = {y : x·y = 0 for all x ∈ V}.
template <class S>
Matrix<S> orthogonal_complement(const Matrix<S>& B, double tol = 0.0) {
    if (B.empty()) throw std::invalid_argument("orthogonal_complement: empty basis");
    std::size_t n = B.front().size();
    if (rank(B, tol) != static_cast<int>(B.size())) throw std::invalid_argument("orthogonal_complement: rank deficiency");
    return kernel(B, n, tol);
}

template <class S>
bool same_span(const Matrix<S>& A, const Matrix<S>& B, double tol = 0.0) {
    Matrix<S> both = A;
    both.insert(both.end(), B.begin(), B.end());
    int r = rank(both, tol);
    return r == rank(A, tol) && r == rank(B, tol);
}

/// Linear independence plus dist(x_j, span(x_1..x_{j-1})) ≥ 1 − δ/2^{j−1} for every j ≥ 2.
template <class S>
bool is_almost_orthogonal(const Matrix<S>& seq, const PlaceMetric& metric) {
    if (seq.empty()) throw std::invalid_argument("is_almost_orthogonal: empty sequence");
    if (rank(seq) != static_cast<int>(seq.size())) return false;
    for (std::size_t j = 1; j < seq.size(); ++j) {
        Matrix<S> prev(seq.begin(), seq.begin() + static_cast<long>(j));
        Rational threshold = 1 - Rational(metric.delta, Integer(1) << j);
        threshold.canonicalize();
        if constexpr (scalar_traits<S>::exact && !std::is_same_v<S, PAdic>) {
            if (metric.is_archimedean()) {
                auto d2 = dist_point_subspace_sq(seq[j], prev, metric.embedding);
                using A = typename scalar_traits<S>::abs2_type;
                A t2 = [&] {
                    if constexpr (std::is_same_v<A, Rational>)
                        return Rational(threshold * threshold);
                    else
                        return QuadraticNumber::rational(threshold * threshold, seq[j][0].D());
                }();
                if (compare_exact(d2, t2) < 0) return false;
                continue;
            }
        }
        if (dist_point_subspace(seq[j], prev, metric) < to_real(threshold)) return false;
    }
    return true;
}

template <class S>
Vector<S> to_scalars(const std::vector<long>& v, const S& like) {
    Vector<S> out;
    for (long x : v) out.push_back(scalar_traits<S>::from_int(like, x));
    return out;
}

}  // namespace parageo

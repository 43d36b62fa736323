#pragma once

#include "lattice.hpp"
#include "minima.hpp"
#include "nsystem.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace parageo::extension {

// ---------------------------------------------------------------------------
// The ℚ-linear map T(x_1,…,x_d) = α_1x_1 + ⋯ + α_dx_d from (ℚⁿ)^d onto Kⁿ.

class ScalarExtension {
public:
    /// α defaults to the integral basis (1, ω) of K (to (1) when K = ℚ).
    ScalarExtension(FieldContext K, Place w, std::optional<Vector<FieldElement>> alpha = std::nullopt)
        : K_(std::move(K)), w_(std::move(w)) {
        if (!w_.is_archimedean() || w_.complex)
            throw std::invalid_argument("scalar extension needs a real archimedean place of K");
        if (alpha) {
            alpha_ = *alpha;
        } else {
            alpha_.push_back(K_.from_int(1));
            if (!K_.is_rational()) alpha_.push_back(K_.omega());
        }
        if (static_cast<int>(alpha_.size()) != d()) throw std::invalid_argument("α must have [K:ℚ] entries");
        // Coordinates of α in (1, ω); T is invertible iff this matrix is.
        for (const auto& a : alpha_) {
            if (a.D() != K_.D() && !(K_.is_rational() && a.is_rational()))
                throw std::invalid_argument("α must lie in K");
            auto [u, v] = K_.basis_coords(a);
            coords_.push_back(K_.is_rational() ? Vector<Rational>{u} : Vector<Rational>{u, v});
        }
        Rational det = d() == 1 ? coords_[0][0] : Rational(coords_[0][0] * coords_[1][1] - coords_[0][1] * coords_[1][0]);
        if (det == 0) throw std::invalid_argument("α is not a basis of K over ℚ");
        det_ = canonical(det);
    }

    int d() const { return K_.degree(); }
    const FieldContext& field() const { return K_; }
    const Place& place() const { return w_; }
    const Vector<FieldElement>& alpha() const { return alpha_; }

    /// α is a ℤ-basis of O_K.
    bool integral_basis() const {
        for (const auto& row : coords_)
            for (const auto& c : row)
                if (c.get_den() != 1) return false;
        return abs(det_) == 1;
    }

    /// σ(α_i) at the archimedean place with the given embedding sign.
    Vector<Real> alpha_at(int embedding) const {
        Vector<Real> out;
        for (const auto& a : alpha_) out.push_back(a.to_real(embedding));
        return out;
    }

    /// y_j = Σ_i α_i x_{(i−1)n+j}.
    Vector<FieldElement> apply(const Vector<Rational>& x) const {
        if (x.size() % static_cast<std::size_t>(d()) != 0) throw std::invalid_argument("T: length must be a multiple of d");
        const std::size_t n = x.size() / static_cast<std::size_t>(d());
        Vector<FieldElement> y(n, K_.from_int(0));
        for (int i = 0; i < d(); ++i)
            for (std::size_t j = 0; j < n; ++j)
                y[j] = y[j] + alpha_[static_cast<std::size_t>(i)] * K_.element(x[static_cast<std::size_t>(i) * n + j]);
        return y;
    }

    Vector<FieldElement> apply(const Vector<Integer>& x) const { return apply(Vector<Rational>(x.begin(), x.end())); }

    /// The unique x ∈ ℚ^{dn} with T(x) = y.
    Vector<Rational> invert(const Vector<FieldElement>& y) const {
        const std::size_t n = y.size();
        Vector<Rational> x(static_cast<std::size_t>(d()) * n);
        for (std::size_t j = 0; j < n; ++j) {
            auto [u, v] = K_.basis_coords(y[j]);
            if (d() == 1) {
                x[j] = canonical(u / coords_[0][0]);
                continue;
            }
            // (u, v) = x_1·coords_[0] + x_2·coords_[1].
            const auto& A = coords_;
            x[j] = canonical((u * A[1][1] - v * A[1][0]) / det_);
            x[n + j] = canonical((v * A[0][0] - u * A[0][1]) / det_);
        }
        return x;
    }

    /// Integer coordinates of y ∈ O_Kⁿ; requires α to be an integral basis.
    Vector<Integer> invert_integral(const Vector<FieldElement>& y) const {
        if (!integral_basis()) throw std::domain_error("integral inversion needs α to be a ℤ-basis of O_K");
        Vector<Integer> out;
        for (const auto& c : invert(y)) {
            if (c.get_den() != 1) throw std::domain_error("T_invert: input is not in O_K^n");
            out.push_back(c.get_num());
        }
        return out;
    }

    /// [O_Kⁿ : T(ℤ^{dn})] when T(ℤ^{dn}) ⊆ O_Kⁿ, computed by HNF; 0 if the image is not integral.
    Integer lattice_index(int n) const {
        lattice::IntMatrix gens;
        for (int k = 0; k < d() * n; ++k) {
            Vector<Rational> e(static_cast<std::size_t>(d() * n), 0);
            e[static_cast<std::size_t>(k)] = 1;
            Vector<Integer> row;
            for (const auto& c : apply(e)) {
                auto [u, v] = K_.basis_coords(c);
                if (u.get_den() != 1 || v.get_den() != 1) return 0;
                row.push_back(u.get_num());
                if (d() == 2) row.push_back(v.get_num());
            }
            gens.push_back(std::move(row));
        }
        return lattice::index_in_full_lattice(gens);
    }

private:
    FieldContext K_;
    Place w_;
    Vector<FieldElement> alpha_;
    Matrix<Rational> coords_;
    Rational det_;
};

// ---------------------------------------------------------------------------
// Ξ = α ⊗ ξ.

/// (σ_w(α_1)ξ, …, σ_w(α_d)ξ) for ξ ∈ ℝⁿ.
inline Vector<Real> extend_coordinates(const Vector<Real>& xi, const ScalarExtension& ext) {
    if (xi.empty()) throw std::invalid_argument("extend_point: empty ξ");
    Vector<Real> out;
    for (const auto& a : ext.alpha_at(ext.place().embedding()))
        for (const auto& c : xi) out.push_back(a * c);
    return out;
}

/// The target Ξ over ℚ at ∞ attached to a target ξ over K at w.
inline ApproximationTarget extend_point(const ApproximationTarget& target, const ScalarExtension& ext) {
    if (target.field().D() != ext.field().D()) throw std::invalid_argument("extend_point: field mismatch");
    if (target.xi_real().empty()) throw std::invalid_argument("extend_point: ξ must be given at a real place");
    auto Q = FieldContext::rational();
    std::optional<Vector<Rational>> exact;
    if (ext.d() == 1) exact = target.xi_exact();
    return ApproximationTarget::real_place(Q, places_above(Q, 0).front(), extend_coordinates(target.xi_real(), ext), exact);
}

// ---------------------------------------------------------------------------
// Bounded differences between the maps of Ξ at dq and those of ξ at q.

struct BoundedDifferenceReport {
    int n = 0, d = 1;
    std::vector<Rational> q;                   // grid for ξ; Ξ is evaluated at d·q
    std::vector<double> diff_L, diff_Lstar;    // per q: max over (i, j)
    double sup_L = 0, sup_Lstar = 0;
    double sup_L_first = 0, sup_L_second = 0, sup_Lstar_first = 0, sup_Lstar_second = 0;
    bool stable = true;                        // second half ≤ first half + threshold, both families
    double threshold = 0.5;
};

inline BoundedDifferenceReport verify_bounded_differences(const ApproximationTarget& target, const ScalarExtension& ext,
                                      const std::vector<Rational>& grid, const EnumerationBudget& budget = {},
                                      double threshold = 0.5) {
    if (grid.size() < 2) throw std::invalid_argument("verify_bounded_differences: grid needs at least two points");
    const int n = target.n(), d = ext.d();
    if (n < 2) throw std::invalid_argument("verify_bounded_differences: needs n ≥ 2");
    auto Xi = extend_point(target, ext);
    std::vector<Rational> dgrid;
    for (const auto& q : grid) dgrid.push_back(canonical(q * d));

    auto L = profile(target, 1, grid, budget);
    auto Ls = star_profile(target, grid, budget);
    auto LX = profile(Xi, 1, dgrid, budget);
    auto LXs = star_profile(Xi, dgrid, budget);
    if (!(L.exact && Ls.exact && LX.exact && LXs.exact))
        throw std::runtime_error("verify_bounded_differences: a profile is not exact within the enumeration budget");

    BoundedDifferenceReport rep;
    rep.n = n;
    rep.d = d;
    rep.q = grid;
    rep.threshold = threshold;
    const std::size_t half = grid.size() / 2;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const Real shift = to_real(grid[t]) * (d - 1);
        double a = 0, b = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) {
                const auto I = static_cast<std::size_t>(i), J = static_cast<std::size_t>(d * i + j);
                a = std::max(a, abs(LX.values[t][J] - L.values[t][I]).convert_to<double>());
                b = std::max(b, abs(LXs.values[t][J] - Ls.values[t][I] - shift).convert_to<double>());
            }
        rep.diff_L.push_back(a);
        rep.diff_Lstar.push_back(b);
        rep.sup_L = std::max(rep.sup_L, a);
        rep.sup_Lstar = std::max(rep.sup_Lstar, b);
        if (t < half) {
            rep.sup_L_first = std::max(rep.sup_L_first, a);
            rep.sup_Lstar_first = std::max(rep.sup_Lstar_first, b);
        } else {
            rep.sup_L_second = std::max(rep.sup_L_second, a);
            rep.sup_Lstar_second = std::max(rep.sup_Lstar_second, b);
        }
    }
    rep.stable = rep.sup_L_second <= rep.sup_L_first + threshold && rep.sup_Lstar_second <= rep.sup_Lstar_first + threshold;
    return rep;
}

// ---------------------------------------------------------------------------
// Exponents.

struct ExponentQuadruple {
    ExtendedRational omega, omega_hat, lambda, lambda_hat;
};

namespace detail {

/// d(x + 1) − 1 on [0, ∞].
inline ExtendedRational affine(const ExtendedRational& x, int d) {
    if (x.infinite) return x;
    return ExtendedRational::of(d * (x.value + 1) - 1);
}

/// 1/y = d(1/x + 1) − 1, with 1/0 = ∞ and 1/∞ = 0.
inline ExtendedRational reciprocal_affine(const ExtendedRational& x, int d) {
    if (!x.infinite && x.value == 0) return x;
    Rational inv = x.infinite ? Rational(0) : Rational(1 / x.value);
    Rational r = d * (inv + 1) - 1;
    if (r == 0) return ExtendedRational::inf();
    return ExtendedRational::of(1 / r);
}

}  // namespace detail

/// Exponents of Ξ = α ⊗ ξ predicted from those of ξ.
inline ExponentQuadruple exponent_transfer(const ExponentQuadruple& e, int d) {
    if (d < 1) throw std::invalid_argument("exponent_transfer: d ≥ 1");
    return {detail::affine(e.omega, d), detail::affine(e.omega_hat, d), detail::reciprocal_affine(e.lambda, d),
            detail::reciprocal_affine(e.lambda_hat, d)};
}

/// (1/λ̂ − (2d−1)) − d²/(ω̂ − (2d−1)); ∞ when exactly one side is infinite.
inline ExtendedRational jarnik_extended_residual(const ExtendedRational& omega_hat, const ExtendedRational& lambda_hat, int d) {
    const Rational m = 2 * d - 1;
    const bool lhs_inf = !lambda_hat.infinite && lambda_hat.value == 0;
    const bool rhs_inf = !omega_hat.infinite && omega_hat.value == m;
    if (lhs_inf || rhs_inf) return lhs_inf && rhs_inf ? ExtendedRational::of(0) : ExtendedRational::inf();
    Rational lhs = lambda_hat.infinite ? Rational(-m) : Rational(1 / lambda_hat.value - m);
    Rational rhs = omega_hat.infinite ? Rational(0) : Rational(d * d / (omega_hat.value - m));
    return ExtendedRational::of(lhs - rhs);
}

inline double jarnik_extended_residual(double omega_hat, double lambda_hat, int d) {
    const double m = 2.0 * d - 1;
    return (1 / lambda_hat - m) - static_cast<double>(d) * d / (omega_hat - m);
}

/// Extremal values λ̂ = 1/(dγ² − 1), ω̂ = d(γ² + 1) − 1 with γ the golden ratio.
struct BelValues {
    double lambda_hat, omega_hat;
};

inline BelValues bel_values(int d) {
    const double g = (1 + std::sqrt(5.0)) / 2;
    return {1 / (d * g * g - 1), d * (g * g + 1) - 1};
}

// ---------------------------------------------------------------------------
// Thunder's principle: minima of the pulled-back body against those of the K-body.

struct ThunderReport {
    int n = 0, d = 1;
    double q = 0;
    std::vector<double> lambda_pullback;   // dn minima over ℚ
    std::vector<double> lambda_field;      // n minima over K
    std::vector<double> ratios;            // λ_{d(i−1)+j}(pullback) / λ_i(K-body)
    double min_ratio = 0, max_ratio = 0;
    double bound = 1;                      // max |α_j|_v over archimedean v
    bool within_bounds = false;            // 1 ≤ ratio ≤ bound for all indices
};

/// Minima at q of the body {‖y‖_v ≤ 1 for v | ∞, |y·ξ|_w ≤ e^{−qd}} ∩ O_Kⁿ and of its pullback to ℤ^{dn}.
inline ThunderReport thunder_check(const ApproximationTarget& target, const ScalarExtension& ext, double q,
                                   std::size_t max_candidates = 5'000'000) {
    if (!ext.integral_basis()) throw std::domain_error("thunder_check needs α to be a ℤ-basis of O_K");
    if (target.xi_real().empty()) throw std::invalid_argument("thunder_check: ξ must be given at a real place");
    const int n = target.n(), d = ext.d(), N = d * n;
    const auto& K = ext.field();
    std::vector<int> embeddings = K.is_rational() ? std::vector<int>{+1} : std::vector<int>{+1, -1};
    const int w_emb = ext.place().embedding();

    PrecisionGuard guard(std::max(current_precision_bits(), 128u));
    const Real scale = exp(Real(q * d));
    const auto& xi = target.xi_real();

    // Rows: images of the standard basis of ℤ^{dn} in ⊕_v ℝⁿ ⊕ ℝ (ξ-coordinate scaled by e^{qd}).
    Matrix<Real> emb;
    lattice::IntMatrix coeff;
    for (int k = 0; k < N; ++k) {
        const int i = k / n, j = k % n;
        Vector<Real> row;
        for (int e : embeddings) {
            const Real a = ext.alpha()[static_cast<std::size_t>(i)].to_real(e);
            for (int t = 0; t < n; ++t) row.push_back(t == j ? a : Real(0));
        }
        row.push_back(scale * ext.alpha()[static_cast<std::size_t>(i)].to_real(w_emb) * xi[static_cast<std::size_t>(j)]);
        emb.push_back(std::move(row));
        lattice::IntVector c(static_cast<std::size_t>(N), 0);
        c[static_cast<std::size_t>(k)] = 1;
        coeff.push_back(std::move(c));
    }
    auto red = lattice::lll(emb, coeff);
    std::vector<std::vector<double>> G(static_cast<std::size_t>(N), std::vector<double>(static_cast<std::size_t>(N)));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            Real s = 0;
            for (std::size_t t = 0; t < red.embedded[0].size(); ++t)
                s += red.embedded[static_cast<std::size_t>(a)][t] * red.embedded[static_cast<std::size_t>(b)][t];
            G[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = s.convert_to<double>();
        }

    // Gauge λ(x) = max(max_v ‖T_v x‖, e^{qd}|T_w x · ξ|); λ² ≤ yᵀGy ≤ (d+1)λ².
    auto gauge = [&](const lattice::IntVector& x) {
        auto y = ext.apply(x);
        Real best = 0;
        for (int e : embeddings) {
            Real s = 0;
            for (const auto& c : parageo::detail::embed_real(y, e)) s += c * c;
            best = boost::multiprecision::max(best, real_sqrt(s));
        }
        Real dot = 0;
        auto yw = parageo::detail::embed_real(y, w_emb);
        for (int t = 0; t < n; ++t) dot += yw[static_cast<std::size_t>(t)] * xi[static_cast<std::size_t>(t)];
        return boost::multiprecision::max(best, Real(scale * abs(dot))).convert_to<double>();
    };

    double radius_sq = 0;
    for (int a = 0; a < N; ++a) radius_sq = std::max(radius_sq, G[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)]);
    ThunderReport rep;
    rep.n = n;
    rep.d = d;
    rep.q = q;
    while (true) {
        std::vector<std::pair<double, lattice::IntVector>> cands;
        lattice::fincke_pohst(G, radius_sq, [&](const std::vector<long>& y) {
            lattice::IntVector x(static_cast<std::size_t>(N), 0);
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b)
                    x[static_cast<std::size_t>(b)] += Integer(y[static_cast<std::size_t>(a)]) * red.coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            cands.emplace_back(gauge(x), std::move(x));
        }, max_candidates);
        std::sort(cands.begin(), cands.end());
        // Only gauges with (d+1)λ² ≤ radius² are certainly complete.
        const double certified = std::sqrt(radius_sq / (d + 1));
        std::vector<double> over_q, over_k;
        Matrix<Rational> qrows;
        parageo::detail::IndependenceTracker tracker;
        for (const auto& [g, x] : cands) {
            if (g > certified) break;
            if (over_q.size() < static_cast<std::size_t>(N)) {
                auto trial = qrows;
                trial.emplace_back(x.begin(), x.end());
                if (rank(trial) == static_cast<int>(trial.size())) {
                    qrows = std::move(trial);
                    over_q.push_back(g);
                }
            }
            if (over_k.size() < static_cast<std::size_t>(n) && tracker.try_add(ext.apply(x))) over_k.push_back(g);
        }
        if (over_q.size() == static_cast<std::size_t>(N) && over_k.size() == static_cast<std::size_t>(n)) {
            rep.lambda_pullback = over_q;
            rep.lambda_field = over_k;
            break;
        }
        radius_sq *= 4;
    }
    for (const auto& a : ext.alpha())
        for (int e : embeddings) rep.bound = std::max(rep.bound, std::abs(a.to_real(e).convert_to<double>()));
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.within_bounds = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double r = rep.lambda_pullback[static_cast<std::size_t>(d * i + j)] / rep.lambda_field[static_cast<std::size_t>(i)];
            rep.ratios.push_back(r);
            rep.min_ratio = std::min(rep.min_ratio, r);
            rep.max_ratio = std::max(rep.max_ratio, r);
            if (r < 1 - 1e-12 || r > rep.bound * (1 + 1e-12)) rep.within_bounds = false;
        }
    return rep;
}

}  // namespace parageo::extension

#pragma once

#include "exterior.hpp"
#include "lattice.hpp"

#include <complex>
#include <set>

namespace parageo {

using FieldElement = QuadraticNumber;

/// ℚ (D == 1) or ℚ(√D) with integral basis (1, ω).
class FieldContext {
public:
    static FieldContext rational() { return FieldContext(1); }
    static FieldContext quadratic(long D) {
        if (D == 0 || D == 1 || !is_squarefree(D)) throw std::invalid_argument("quadratic field needs squarefree D ∉ {0,1}");
        return FieldContext(D);
    }

    long D() const { return D_; }
    int degree() const { return D_ == 1 ? 1 : 2; }
    bool is_rational() const { return D_ == 1; }
    bool is_real() const { return D_ > 0; }
    /// ω = (1+√D)/2 when D ≡ 1 mod 4, else √D.
    bool omega_is_half() const { return D_ != 1 && mod_floor(D_, 4) == 1; }
    long discriminant() const { return D_ == 1 ? 1 : (omega_is_half() ? D_ : 4 * D_); }

    FieldElement element(Rational a, Rational b = 0) const { return {std::move(a), std::move(b), D_}; }
    FieldElement from_int(long v) const { return element(v); }
    FieldElement omega() const {
        if (D_ == 1) return element(0);
        return omega_is_half() ? element(Rational(1, 2), Rational(1, 2)) : element(0, 1);
    }

    /// Coordinates (u, v) with x = u + v·ω (rational in general, integral iff x ∈ O_K).
    std::pair<Rational, Rational> basis_coords(const FieldElement& x) const {
        if (D_ == 1) return {x.a(), 0};
        if (omega_is_half()) return {canonical(x.a() - x.b()), canonical(2 * x.b())};
        return {x.a(), x.b()};
    }
    FieldElement from_basis_coords(const Rational& u, const Rational& v) const {
        return element(u) + element(v) * omega();
    }
    bool is_integral(const FieldElement& x) const {
        auto [u, v] = basis_coords(x);
        return u.get_den() == 1 && v.get_den() == 1;
    }

    /// Fundamental unit ε > 1 of a real quadratic field (smallest solution of the norm equation).
    FieldElement fundamental_unit() const {
        if (D_ <= 1) throw std::domain_error("fundamental unit requires a real quadratic field");
        bool half = omega_is_half();
        long target = half ? 4 : 1;
        for (long y = 1; y < 100'000'000; ++y) {
            for (long sgn4 : {-target, target}) {
                Integer x2 = Integer(D_) * y * y + sgn4;
                if (x2 <= 0) continue;
                Integer x;
                mpz_sqrt(x.get_mpz_t(), x2.get_mpz_t());
                if (x * x == x2) {
                    Rational xr(x), yr(y);
                    if (half) xr /= 2, yr /= 2;
                    return element(canonical(xr), canonical(yr));
                }
            }
        }
        throw std::runtime_error("fundamental unit search exhausted");
    }

    /// Integer bound N such that every ideal class contains an integral ideal of norm ≤ N.
    long minkowski_bound() const {
        if (D_ == 1) return 1;
        double disc = std::abs(static_cast<double>(discriminant()));
        double b = D_ > 0 ? std::sqrt(disc) / 2 : 2 * std::sqrt(disc) / M_PI;
        return std::max(1L, static_cast<long>(std::floor(b)));
    }

    friend bool operator==(const FieldContext& a, const FieldContext& b) { return a.D_ == b.D_; }

private:
    explicit FieldContext(long D) : D_(D) {}
    long D_;
};

// ---------------------------------------------------------------------------

struct Place {
    enum class Kind { archimedean, finite };
    enum class Splitting { rational, split, inert, ramified };

    Kind kind = Kind::archimedean;
    int index = 0;          // archimedean: √D ↦ +√D (0) or −√D (1)
    bool complex = false;   // archimedean place of an imaginary field
    long p = 0;
    Splitting splitting = Splitting::rational;
    int root_sign = +1;     // split places: which Hensel root of X² = D
    int local_degree = 1;
    int ramification = 1;

    bool is_archimedean() const { return kind == Kind::archimedean; }
    int embedding() const { return index == 0 ? +1 : -1; }
    PlaceMetric metric() const {
        return is_archimedean() ? PlaceMetric::archimedean(embedding()) : PlaceMetric::nonarchimedean(p);
    }
    std::string name() const {
        if (is_archimedean()) return "inf" + std::to_string(index);
        std::string s = "p=" + std::to_string(p);
        if (splitting == Splitting::split) s += root_sign > 0 ? "+" : "-";
        return s;
    }
};

inline int legendre(long a, long p) {
    Integer A = a, P = p;
    return mpz_legendre(A.get_mpz_t(), P.get_mpz_t());
}

/// Places above the rational place u (u = 0 means ∞, otherwise a prime).
inline std::vector<Place> places_above(const FieldContext& K, long u) {
    std::vector<Place> out;
    if (u == 0) {
        if (K.is_rational()) {
            out.push_back(Place{});
        } else if (K.is_real()) {
            out.push_back(Place{Place::Kind::archimedean, 0, false});
            out.push_back(Place{Place::Kind::archimedean, 1, false});
        } else {
            Place v{Place::Kind::archimedean, 0, true};
            v.local_degree = 2;
            out.push_back(v);
        }
        return out;
    }
    if (u < 2 || mpz_probab_prime_p(Integer(u).get_mpz_t(), 30) == 0) throw std::invalid_argument("not a prime");
    Place v;
    v.kind = Place::Kind::finite;
    v.p = u;
    if (K.is_rational()) {
        out.push_back(v);
        return out;
    }
    long disc = K.discriminant();
    if (disc % u == 0) {
        v.splitting = Place::Splitting::ramified;
        v.local_degree = 2;
        v.ramification = 2;
        out.push_back(v);
        return out;
    }
    bool split = u == 2 ? mod_floor(K.D(), 8) == 1 : legendre(mod_floor(K.D(), u), u) == 1;
    if (split) {
        v.splitting = Place::Splitting::split;
        v.root_sign = +1;
        out.push_back(v);
        v.root_sign = -1;
        out.push_back(v);
    } else {
        v.splitting = Place::Splitting::inert;
        v.local_degree = 2;
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite valuations. ord(x) = r with |x|_v = p^{-r}.

/// x = (X + Y√D)/m with integers X, Y and m > 0.
struct IntegralForm {
    Integer X, Y, m;
};

inline IntegralForm integral_form(const FieldElement& x) {
    Integer m;
    mpz_lcm(m.get_mpz_t(), x.a().get_den_mpz_t(), x.b().get_den_mpz_t());
    Rational X = x.a() * m, Y = x.b() * m;
    return {X.get_num(), Y.get_num(), m};
}

inline Rational ord_at(const FieldElement& x, const Place& v) {
    if (v.is_archimedean()) throw std::invalid_argument("ord_at needs a finite place");
    if (x.is_zero()) throw std::domain_error("valuation of zero");
    if (v.splitting == Place::Splitting::rational) return valuation(x.a(), v.p);
    if (v.splitting != Place::Splitting::split) return Rational(valuation(x.norm(), v.p), 2);
    // Split: embed through a Hensel root r of X² = D in ℤ_p; precision beyond v_p(N(X+Y√D)) suffices.
    auto f = integral_form(x);
    Integer N = f.X * f.X - x.D() * f.Y * f.Y;
    long need = valuation(N, v.p) + 1;
    Integer r = hensel_sqrt(x.D(), v.p, need + (v.p == 2 ? 2 : 0), v.root_sign);
    Integer mod = pow_integer(v.p, static_cast<unsigned long>(need));
    Integer t = (f.X + f.Y * r) % mod;
    if (t < 0) t += mod;
    if (t == 0) throw PrecisionError("insufficient Hensel precision");
    return valuation(t, v.p) - valuation(f.m, v.p);
}

/// Normalized absolute value: exact exponent form at finite places, real value at archimedean ones.
struct LocalAbs {
    bool archimedean = true;
    long p = 0;
    Rational exponent = 0;  // finite: |a|_v = p^{exponent}
    Real value;
    Real log_value() const {
        return archimedean ? Real(log(value)) : Real(to_real(exponent) * log(Real(p)));
    }
};

inline LocalAbs abs_at(const FieldElement& a, const Place& v) {
    LocalAbs out;
    if (v.is_archimedean()) {
        out.archimedean = true;
        if (a.D() < 0)
            out.value = real_sqrt(to_real(a.norm()));
        else
            out.value = boost::multiprecision::abs(a.to_real(v.embedding()));
        return out;
    }
    out.archimedean = false;
    out.p = v.p;
    out.exponent = -ord_at(a, v);
    out.value = boost::multiprecision::pow(Real(v.p), to_real(out.exponent));
    return out;
}

/// Primes at which some coordinate can have nonzero valuation.
inline std::set<long> support_primes(const Vector<FieldElement>& x) {
    std::set<long> primes;
    auto add = [&](const Integer& z) {
        for (auto& [p, e] : factorize(z)) {
            if (!p.fits_slong_p()) throw std::domain_error("prime too large");
            primes.insert(p.get_si());
        }
    };
    for (const auto& c : x) {
        if (c.is_zero()) continue;
        add(c.a().get_den());
        add(c.b().get_den());
        Rational N = c.norm();
        add(N.get_num());
        add(N.get_den());
    }
    return primes;
}

/// Exact product formula check: ∏_v |a|_v^{d_v} = 1.
inline bool product_formula_exact(const FieldElement& a, const FieldContext& K) {
    if (a.is_zero()) throw std::domain_error("product formula of zero");
    Rational archimedean = K.is_rational() ? Rational(abs(a.a())) : Rational(abs(a.norm()));
    Rational finite = 1;
    for (long p : support_primes({a})) {
        for (const auto& v : places_above(K, p)) {
            auto abs = abs_at(a, v);
            Rational e = abs.exponent * v.local_degree;
            if (e.get_den() != 1) return false;
            finite *= pow_rational(Rational(p), e.get_num().get_si());
        }
    }
    return archimedean * finite == 1;
}

/// Σ_v (d_v/d)·log|a|_v in floating point (should vanish).
inline Real product_formula_log_residual(const FieldElement& a, const FieldContext& K) {
    Real s = 0;
    for (const auto& v : places_above(K, 0)) s += v.local_degree * abs_at(a, v).log_value();
    for (long p : support_primes({a}))
        for (const auto& v : places_above(K, p)) s += v.local_degree * abs_at(a, v).log_value();
    return s / K.degree();
}

// ---------------------------------------------------------------------------
// Heights.

inline Vector<FieldElement> to_field(const FieldContext& K, const Vector<Rational>& x) {
    Vector<FieldElement> out;
    for (const auto& c : x) out.push_back(K.element(c));
    return out;
}

inline Vector<FieldElement> to_field(const FieldContext& K, const Vector<Integer>& x) {
    Vector<FieldElement> out;
    for (const auto& c : x) out.push_back(K.element(Rational(c)));
    return out;
}

/// ∏_{v|∞} ‖x‖_v^{2 d_v}, exact.
inline Rational archimedean_height_part(const FieldContext& K, const Vector<FieldElement>& x) {
    if (K.is_rational()) {
        Rational s = 0;
        for (const auto& c : x) s += c.a() * c.a();
        return s;
    }
    if (K.is_real()) {
        FieldElement s = K.from_int(0);
        for (const auto& c : x) s += c * c;
        return s.norm();
    }
    Rational s = 0;
    for (const auto& c : x) s += c.norm();
    return s * s;
}

/// Norm of the content ideal Σ x_i O_K of an integral vector, via the HNF index of its ℤ-module.
inline Integer content_ideal_norm(const FieldContext& K, const Vector<FieldElement>& x) {
    lattice::IntMatrix gens;
    for (const auto& c : x) {
        if (c.is_zero()) continue;
        if (!K.is_integral(c)) throw std::invalid_argument("content_ideal_norm: non-integral coordinate");
        if (K.is_rational()) {
            gens.push_back({c.a().get_num()});
            continue;
        }
        for (const auto& g : {c, c * K.omega()}) {
            auto [u, v] = K.basis_coords(g);
            gens.push_back({u.get_num(), v.get_num()});
        }
    }
    if (gens.empty()) throw std::invalid_argument("content of the zero vector");
    return lattice::index_in_full_lattice(gens);
}

/// Scales x by a positive integer so that every coordinate lies in ℤ[√D] ⊆ O_K.
inline Vector<FieldElement> clear_denominators(const FieldContext& K, const Vector<FieldElement>& x) {
    Integer m = 1;
    for (const auto& c : x) {
        mpz_lcm(m.get_mpz_t(), m.get_mpz_t(), c.a().get_den_mpz_t());
        mpz_lcm(m.get_mpz_t(), m.get_mpz_t(), c.b().get_den_mpz_t());
    }
    Vector<FieldElement> out;
    for (const auto& c : x) out.push_back(c * K.element(Rational(m)));
    return out;
}

inline void require_nonzero_field(const Vector<FieldElement>& x) {
    if (std::all_of(x.begin(), x.end(), [](const FieldElement& c) { return c.is_zero(); }))
        throw std::invalid_argument("height of the zero vector");
}

/// H(x)^{2d} through the content ideal.
inline Rational height_power_content(const FieldContext& K, const Vector<FieldElement>& x) {
    require_nonzero_field(x);
    auto y = clear_denominators(K, x);
    Integer N = content_ideal_norm(K, y);
    return archimedean_height_part(K, y) / (Rational(N) * N);
}

/// H(x)^{2d} as the product over all places (independent code path).
inline Rational height_power_places(const FieldContext& K, const Vector<FieldElement>& x) {
    require_nonzero_field(x);
    Rational h = archimedean_height_part(K, x);
    for (long p : support_primes(x)) {
        for (const auto& v : places_above(K, p)) {
            std::optional<Rational> best;
            for (const auto& c : x) {
                if (c.is_zero()) continue;
                Rational e = -ord_at(c, v);
                if (!best || e > *best) best = e;
            }
            Rational e = *best * 2 * v.local_degree;
            if (e.get_den() != 1) throw std::logic_error("non-integral local height exponent");
            h *= pow_rational(Rational(p), e.get_num().get_si());
        }
    }
    return h;
}

struct HeightValue {
    Rational power;    // H^{exponent}, exact
    int exponent = 2;  // 2d
    Real value;
    Real error_radius;
    Real log_value() const { return log(value); }
};

inline HeightValue make_height(Rational power, int exponent) {
    HeightValue h{std::move(power), exponent, Real(0), Real(0)};
    h.value = boost::multiprecision::pow(to_real(h.power), Real(1) / exponent);
    h.error_radius = h.value * boost::multiprecision::pow(Real(2), -static_cast<int>(current_precision_bits()) + 4);
    return h;
}

inline HeightValue height_vector(const FieldContext& K, const Vector<FieldElement>& x) {
    return make_height(height_power_content(K, x), 2 * K.degree());
}

inline HeightValue height_subspace(const FieldContext& K, const Matrix<FieldElement>& B, int n) {
    if (B.empty()) return make_height(1, 2 * K.degree());
    auto X = plucker(B, n);
    if (X.is_zero()) throw std::invalid_argument("height_subspace: rank deficiency");
    return height_vector(K, X.coords());
}

// ---------------------------------------------------------------------------
// Approximation targets (K, w, ξ).

struct ComplexReal {
    Real re = 0, im = 0;
};

class ApproximationTarget {
public:
    /// Archimedean real place: ξ stored as a unit vector (exact direction kept when rational).
    static ApproximationTarget real_place(FieldContext K, Place w, Vector<Real> xi,
                                          std::optional<Vector<Rational>> exact = std::nullopt) {
        if (!w.is_archimedean() || w.complex) throw std::invalid_argument("real_place needs a real archimedean place");
        ApproximationTarget t(std::move(K), std::move(w));
        Real nrm = 0;
        for (auto& c : xi) nrm += c * c;
        if (nrm == 0) throw std::invalid_argument("target ξ must be nonzero");
        nrm = real_sqrt(nrm);
        for (auto& c : xi) c /= nrm;
        t.xi_real_ = std::move(xi);
        t.xi_exact_ = std::move(exact);
        t.norm_w_xi_ = 1;
        return t;
    }

    static ApproximationTarget complex_place(FieldContext K, Place w, std::vector<ComplexReal> xi) {
        if (!w.is_archimedean() || !w.complex) throw std::invalid_argument("complex_place needs a complex place");
        ApproximationTarget t(std::move(K), std::move(w));
        Real nrm = 0;
        for (auto& c : xi) nrm += c.re * c.re + c.im * c.im;
        if (nrm == 0) throw std::invalid_argument("target ξ must be nonzero");
        nrm = real_sqrt(nrm);
        for (auto& c : xi) c.re /= nrm, c.im /= nrm;
        t.xi_complex_ = std::move(xi);
        t.norm_w_xi_ = 1;
        return t;
    }

    /// Finite place with K_w = ℚ_p: ξ given by integer residues mod p^precision, made primitive.
    static ApproximationTarget finite_place(FieldContext K, Place w, Vector<PAdic> xi) {
        if (w.is_archimedean()) throw std::invalid_argument("finite_place needs a finite place");
        if (w.splitting == Place::Splitting::ramified || w.splitting == Place::Splitting::inert)
            throw std::invalid_argument("finite w over a quadratic field must be a split place");
        ApproximationTarget t(std::move(K), std::move(w));
        long vmin = std::numeric_limits<long>::max();
        for (auto& c : xi)
            if (!c.is_zero_to_precision()) vmin = std::min(vmin, c.valuation());
        if (vmin == std::numeric_limits<long>::max()) throw std::invalid_argument("target ξ must be nonzero");
        PAdic scale = PAdic::from_rational(pow_rational(Rational(t.w_.p), -vmin), t.w_.p, 1 << 20);
        long prec = std::numeric_limits<long>::max();
        for (auto& c : xi) {
            c = c * scale;
            prec = std::min(prec, c.absolute_precision());
        }
        t.xi_padic_ = std::move(xi);
        t.padic_precision_ = prec;
        t.norm_w_xi_ = 1;
        return t;
    }

    const FieldContext& field() const { return K_; }
    const Place& place() const { return w_; }
    int n() const {
        if (!xi_real_.empty()) return static_cast<int>(xi_real_.size());
        if (!xi_complex_.empty()) return static_cast<int>(xi_complex_.size());
        return static_cast<int>(xi_padic_.size());
    }
    const Vector<Real>& xi_real() const { return xi_real_; }
    const std::optional<Vector<Rational>>& xi_exact() const { return xi_exact_; }
    const std::vector<ComplexReal>& xi_complex() const { return xi_complex_; }
    const Vector<PAdic>& xi_padic() const { return xi_padic_; }
    long padic_precision() const { return padic_precision_; }
    const Rational& norm_w_xi() const { return norm_w_xi_; }
    /// d_w / d.
    Rational weight() const { return Rational(w_.local_degree, K_.degree()); }

    /// Integer residues of ξ modulo p^precision (finite places).
    Vector<Integer> xi_residues() const {
        Vector<Integer> out;
        for (const auto& c : xi_padic_) out.push_back(c.residue());
        return out;
    }

    /// Image of a field element in ℤ_p/p^N at the split (or rational) place w, scaled by its denominator.
    /// Returns (residue of X + Y·r, v_p(m)) where x = (X + Y√D)/m.
    std::pair<Integer, long> local_residue(const FieldElement& x, long precision) const {
        auto f = integral_form(x);
        Integer root = K_.is_rational() ? Integer(0) : hensel_sqrt(K_.D(), w_.p, precision + 2, w_.root_sign);
        Integer mod = pow_integer(w_.p, static_cast<unsigned long>(precision));
        Integer t = (f.X + f.Y * root) % mod;
        if (t < 0) t += mod;
        return {t, valuation(f.m, w_.p)};
    }

private:
    ApproximationTarget(FieldContext K, Place w) : K_(std::move(K)), w_(std::move(w)) {}
    FieldContext K_;
    Place w_;
    Vector<Real> xi_real_;
    std::optional<Vector<Rational>> xi_exact_;
    std::vector<ComplexReal> xi_complex_;
    Vector<PAdic> xi_padic_;
    long padic_precision_ = 0;
    Rational norm_w_xi_ = 1;
};

namespace detail {

inline Vector<Real> embed_real(const Vector<FieldElement>& x, int embedding) {
    Vector<Real> out;
    for (const auto& c : x) out.push_back(c.to_real(embedding));
    return out;
}

inline std::vector<ComplexReal> embed_complex(const Vector<FieldElement>& x) {
    std::vector<ComplexReal> out;
    Real s = real_sqrt(Real(-x.front().D()));
    for (const auto& c : x) out.push_back({to_real(c.a()), to_real(c.b()) * s});
    return out;
}

/// log of the w-adic quantity |x·ξ|_w (dot) or ‖x∧ξ‖_w (wedge) relative to ‖x‖_w, and log ‖x‖_w.
struct LocalRatio {
    Real log_ratio;  // may be -inf
};

inline Real neg_inf() { return -std::numeric_limits<Real>::infinity(); }

inline LocalRatio archimedean_ratio(const ApproximationTarget& t, const Vector<FieldElement>& x, bool wedge_form) {
    const auto& w = t.place();
    if (w.complex) {
        auto xs = embed_complex(x);
        const auto& xi = t.xi_complex();
        Real nx = 0;
        for (auto& c : xs) nx += c.re * c.re + c.im * c.im;
        Real num = 0;
        if (!wedge_form) {
            Real re = 0, im = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                re += xs[i].re * xi[i].re - xs[i].im * xi[i].im;
                im += xs[i].re * xi[i].im + xs[i].im * xi[i].re;
            }
            num = re * re + im * im;
        } else {
            for (std::size_t i = 0; i < xs.size(); ++i)
                for (std::size_t j = i + 1; j < xs.size(); ++j) {
                    Real re = xs[i].re * xi[j].re - xs[i].im * xi[j].im - (xs[j].re * xi[i].re - xs[j].im * xi[i].im);
                    Real im = xs[i].re * xi[j].im + xs[i].im * xi[j].re - (xs[j].re * xi[i].im + xs[j].im * xi[i].re);
                    num += re * re + im * im;
                }
        }
        if (num == 0) return {neg_inf()};
        return {Real(log(num / nx) / 2)};
    }
    // Exact zero detection when ξ has a rational direction.
    if (t.xi_exact() && x.front().D() == 1) {
        const auto& e = *t.xi_exact();
        Vector<Rational> xr;
        for (const auto& c : x) xr.push_back(c.a());
        if (!wedge_form) {
            if (dot(xr, e) == 0) return {neg_inf()};
        } else if (wedge(GradedVector<Rational>::from_vector(xr), GradedVector<Rational>::from_vector(e)).is_zero()) {
            return {neg_inf()};
        }
    }
    auto xs = embed_real(x, w.embedding());
    const auto& xi = t.xi_real();
    Real nx = 0;
    for (auto& c : xs) nx += c * c;
    Real num = 0;
    if (!wedge_form) {
        Real d = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) d += xs[i] * xi[i];
        num = d * d;
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                Real m = xs[i] * xi[j] - xs[j] * xi[i];
                num += m * m;
            }
    }
    if (num == 0) return {neg_inf()};
    return {Real(log(num / nx) / 2)};
}

inline LocalRatio finite_ratio(const ApproximationTarget& t, const Vector<FieldElement>& x, bool wedge_form) {
    const long p = t.place().p;
    const long N = t.padic_precision();
    // Projective invariance: work with an integral multiple of x and its images in ℤ_p.
    auto y = clear_denominators(t.field(), x);
    long probe = 1;
    for (const auto& c : y)
        if (!c.is_zero()) probe = std::max(probe, valuation(c.norm(), p) + 1);
    long shift = std::numeric_limits<long>::max();
    for (const auto& c : y) {
        if (c.is_zero()) continue;
        auto [r, vm] = t.local_residue(c, probe);
        if (r == 0) throw PrecisionError("local image vanishes to the probe precision");
        shift = std::min(shift, valuation(r, p) - vm);
    }
    Integer mod = pow_integer(p, static_cast<unsigned long>(N));
    Integer unit_scale = pow_integer(p, static_cast<unsigned long>(shift));
    Vector<Integer> ys;
    for (const auto& c : y) {
        if (c.is_zero()) {
            ys.push_back(0);
            continue;
        }
        auto [r, vm] = t.local_residue(c, N + shift);
        ys.push_back((r / unit_scale) % mod);
    }
    auto xi = t.xi_residues();
    long vmin = N;
    auto account = [&](Integer s) {
        s %= mod;
        if (s < 0) s += mod;
        if (s != 0) vmin = std::min(vmin, valuation(s, p));
    };
    if (!wedge_form) {
        Integer s = 0;
        for (std::size_t i = 0; i < ys.size(); ++i) s += ys[i] * xi[i];
        account(s);
    } else {
        for (std::size_t i = 0; i < ys.size(); ++i)
            for (std::size_t j = i + 1; j < ys.size(); ++j) account(ys[i] * xi[j] - ys[j] * xi[i]);
    }
    if (vmin >= N) throw PrecisionError("w-adic quantity vanishes to the tracked precision");
    return {Real(-vmin * log(Real(p)))};
}

}  // namespace detail

/// log D_ξ(x) (dot form) or log D*_ξ(x) (wedge form); −∞ when the quantity vanishes.
inline Real log_D(const ApproximationTarget& t, const Vector<FieldElement>& x, bool wedge_form = false) {
    if (static_cast<int>(x.size()) != t.n()) throw std::invalid_argument("dot_distance: dimension mismatch");
    require_nonzero_field(x);
    Real logH = height_vector(t.field(), x).log_value();
    auto ratio = t.place().is_archimedean() ? detail::archimedean_ratio(t, x, wedge_form)
                                            : detail::finite_ratio(t, x, wedge_form);
    if (boost::multiprecision::isinf(ratio.log_ratio)) return ratio.log_ratio;
    return logH + to_real(t.weight()) * ratio.log_ratio;
}

inline Real dot_distance(const ApproximationTarget& t, const Vector<FieldElement>& x) { return exp(log_D(t, x, false)); }
inline Real wedge_distance(const ApproximationTarget& t, const Vector<FieldElement>& x) { return exp(log_D(t, x, true)); }

}  // namespace parageo

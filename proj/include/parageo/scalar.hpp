#pragma once

#include <gmpxx.h>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parageo {

using Integer = mpz_class;
using Rational = mpq_class;
using Real = boost::multiprecision::mpfr_float;

class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Sets the working precision of newly created `Real` values for the guard's lifetime.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned bits) : saved_(Real::default_precision()) {
        Real::default_precision(bits_to_digits10(bits));
    }
    ~PrecisionGuard() { Real::default_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_;
};

inline unsigned current_precision_bits() {
    return static_cast<unsigned>(std::floor((Real::default_precision() - 1) / 0.30102999566398120));
}

inline Real to_real(const Integer& z) {
    Real r;
    mpfr_set_z(r.backend().data(), z.get_mpz_t(), MPFR_RNDN);
    return r;
}

inline Real to_real(const Rational& q) {
    Real r;
    mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
    return r;
}

inline Rational canonical(Rational q) {
    q.canonicalize();
    return q;
}

inline Rational make_rational(long num, long den = 1) { return canonical(Rational(num, den)); }

/// Parses "p/q", integers, and decimal strings (with optional exponent) into an exact rational.
inline Rational parse_rational(std::string_view text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw std::invalid_argument("empty number");
    if (auto slash = s.find('/'); slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + s);
        return canonical(num / den);
    }
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        exp10 = std::stol(s.substr(e + 1));
        s = s.substr(0, e);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::string digits;
    long frac = 0;
    bool seen_dot = false;
    for (; pos < s.size(); ++pos) {
        char ch = s[pos];
        if (ch == '.') {
            if (seen_dot) throw std::invalid_argument("malformed number: " + std::string(text));
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits.push_back(ch);
            if (seen_dot) ++frac;
        } else {
            throw std::invalid_argument("malformed number: " + std::string(text));
        }
    }
    if (digits.empty()) throw std::invalid_argument("malformed number: " + std::string(text));
    Integer num(digits, 10);
    if (negative) num = -num;
    exp10 -= frac;
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    return exp10 >= 0 ? Rational(num * scale) : canonical(Rational(num, scale));
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Integer pow_integer(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Rational pow_rational(const Rational& base, long e) {
    if (e < 0) return pow_rational(1 / base, -e);
    Rational r(pow_integer(base.get_num(), static_cast<unsigned long>(e)),
               pow_integer(base.get_den(), static_cast<unsigned long>(e)));
    return canonical(r);
}

/// p-adic valuation of a nonzero integer.
inline long valuation(const Integer& z, long p) {
    if (z == 0) throw std::domain_error("valuation of zero");
    Integer q = abs(z);
    long v = 0;
    Integer pz = p;
    while (mpz_divisible_p(q.get_mpz_t(), pz.get_mpz_t())) {
        q /= pz;
        ++v;
    }
    return v;
}

inline long valuation(const Rational& q, long p) {
    return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

/// Prime factorization by trial division followed by a primality-tested remainder.
inline std::map<Integer, long> factorize(Integer z) {
    std::map<Integer, long> out;
    z = abs(z);
    if (z <= 1) return out;
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        while (mpz_divisible_ui_p(z.get_mpz_t(), p)) {
            z /= p;
            ++out[Integer(p)];
        }
    }
    static constexpr unsigned long wheel[] = {4, 2, 4, 2, 4, 6, 2, 6};
    unsigned long d = 7;
    for (std::size_t i = 0; z > 1 && Integer(d) * d <= z; d += wheel[i++ % 8]) {
        if (mpz_probab_prime_p(z.get_mpz_t(), 30) == 2) break;
        while (mpz_divisible_ui_p(z.get_mpz_t(), d)) {
            z /= d;
            ++out[Integer(d)];
        }
    }
    if (z > 1) ++out[z];
    return out;
}

inline bool is_squarefree(long D) {
    for (auto& [p, e] : factorize(Integer(D)))
        if (e > 1) return false;
    return true;
}

inline long mod_floor(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

// ---------------------------------------------------------------------------
// a + b·√D with rational a, b. D == 1 encodes the rational field (b is kept 0).

class QuadraticNumber {
public:
    QuadraticNumber() = default;
    explicit QuadraticNumber(long D) : D_(D) {}
    QuadraticNumber(Rational a, Rational b, long D) : a_(std::move(a)), b_(std::move(b)), D_(D) {
        normalize();
    }
    static QuadraticNumber rational(Rational a, long D) { return {std::move(a), 0, D}; }
    static QuadraticNumber sqrt_d(long D) { return {0, 1, D}; }

    const Rational& a() const { return a_; }
    const Rational& b() const { return b_; }
    long D() const { return D_; }
    bool is_rational() const { return b_ == 0; }
    bool is_zero() const { return a_ == 0 && b_ == 0; }

    QuadraticNumber conj() const { return {a_, -b_, D_}; }
    Rational norm() const { return canonical(a_ * a_ - D_ * b_ * b_); }
    Rational trace() const { return 2 * a_; }

    QuadraticNumber inverse() const {
        if (is_zero()) throw std::domain_error("inverse of zero");
        Rational nrm = norm();
        return {a_ / nrm, -b_ / nrm, D_};
    }

    friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
        return {x.a_ + y.a_, x.b_ + y.b_, join(x, y)};
    }
    friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) {
        return {x.a_ - y.a_, x.b_ - y.b_, join(x, y)};
    }
    friend QuadraticNumber operator-(const QuadraticNumber& x) { return {-x.a_, -x.b_, x.D_}; }
    friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
        long D = join(x, y);
        return {x.a_ * y.a_ + D * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_, D};
    }
    friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
        return x * y.inverse();
    }
    QuadraticNumber& operator+=(const QuadraticNumber& y) { return *this = *this + y; }
    QuadraticNumber& operator-=(const QuadraticNumber& y) { return *this = *this - y; }
    QuadraticNumber& operator*=(const QuadraticNumber& y) { return *this = *this * y; }
    friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
        return x.a_ == y.a_ && x.b_ == y.b_;
    }

    /// Exact sign of the real embedding √D ↦ sign·√|D| (D > 0 or D == 1).
    int sign(int embedding = +1) const {
        if (D_ < 0) throw std::domain_error("sign of a non-real quadratic number");
        Rational b = embedding >= 0 ? b_ : Rational(-b_);
        int sa = sgn(a_), sb = sgn(b);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        int cmp = ::cmp(a_ * a_, D_ * b * b);
        return cmp > 0 ? sa : (cmp < 0 ? sb : 0);
    }

    /// Exact |σ(x)|² where σ is the embedding with √D ↦ embedding·√D.
    QuadraticNumber abs2(int embedding = +1) const {
        if (D_ < 0) return rational(norm(), D_);
        QuadraticNumber s = embedding >= 0 ? *this : conj();
        return s * s;
    }

    Real to_real(int embedding = +1) const {
        if (D_ < 0) throw std::domain_error("real value of a non-real quadratic number");
        Real r = parageo::to_real(a_);
        if (b_ != 0) r += (embedding >= 0 ? 1 : -1) * parageo::to_real(b_) * boost::multiprecision::sqrt(Real(D_));
        return r;
    }

    std::string str() const {
        if (b_ == 0) return a_.get_str();
        return a_.get_str() + (b_ > 0 ? "+" : "-") + Rational(abs(b_)).get_str() + "*sqrt(" + std::to_string(D_) + ")";
    }

private:
    static long join(const QuadraticNumber& x, const QuadraticNumber& y) {
        if (x.D_ == y.D_) return x.D_;
        if (x.is_rational() && x.D_ == 1) return y.D_;
        if (y.is_rational() && y.D_ == 1) return x.D_;
        if (x.is_rational()) return y.D_;
        if (y.is_rational()) return x.D_;
        throw std::domain_error("quadratic numbers from different fields");
    }
    void normalize() {
        a_.canonicalize();
        b_.canonicalize();
        if (D_ == 1) {
            a_ += b_;
            b_ = 0;
        }
    }

    Rational a_ = 0, b_ = 0;
    long D_ = 1;
};

// ---------------------------------------------------------------------------
// Truncated p-adic numbers: value = p^val · unit, unit known modulo p^rel.
// A value with rel == 0 is "zero to absolute precision val".

class PAdic {
public:
    PAdic() = default;
    PAdic(long p, long absolute_precision) : p_(p), val_(absolute_precision), rel_(0), unit_(0) {}

    static PAdic from_rational(const Rational& q, long p, long absolute_precision) {
        PAdic r(p, absolute_precision);
        if (q == 0) return r;
        long v = parageo::valuation(q, p);
        if (v >= absolute_precision) return r;
        r.val_ = v;
        r.rel_ = absolute_precision - v;
        Integer mod = pow_integer(p, static_cast<unsigned long>(r.rel_));
        Rational u = q / pow_rational(Rational(p), v);
        Integer den_inv;
        Integer den = u.get_den();
        mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
        r.unit_ = (u.get_num() * den_inv) % mod;
        if (r.unit_ < 0) r.unit_ += mod;
        return r;
    }

    long p() const { return p_; }
    long absolute_precision() const { return val_ + rel_; }
    long relative_precision() const { return rel_; }
    bool is_zero_to_precision() const { return rel_ == 0; }

    long valuation() const {
        if (rel_ == 0)
            throw PrecisionError("p-adic valuation below tracked precision (zero to O(" + std::to_string(p_) + "^" +
                                 std::to_string(val_) + "))");
        return val_;
    }
    /// Lower bound on the valuation, valid even for values that are zero to precision.
    long valuation_lower_bound() const { return val_; }

    /// Integer representative of the value modulo p^absolute_precision (requires valuation ≥ 0).
    Integer residue() const {
        if (val_ < 0) throw std::domain_error("p-adic residue of a non-integral value");
        if (rel_ == 0) return 0;
        return pow_integer(p_, static_cast<unsigned long>(val_)) * unit_;
    }

    /// |x|_p = p^{-v} as an exact rational.
    Rational abs() const {
        long v = valuation();
        return pow_rational(Rational(p_), -v);
    }

    friend PAdic operator+(const PAdic& x, const PAdic& y) { return x.add(y, false); }
    friend PAdic operator-(const PAdic& x, const PAdic& y) { return x.add(y, true); }
    friend PAdic operator-(const PAdic& x) { return PAdic(x.p_, x.absolute_precision()) - x; }
    friend PAdic operator*(const PAdic& x, const PAdic& y) {
        check_same(x, y);
        if (x.rel_ == 0 || y.rel_ == 0) return PAdic(x.p_, x.val_ + y.val_);
        PAdic r(x.p_, 0);
        r.val_ = x.val_ + y.val_;
        r.rel_ = std::min(x.rel_, y.rel_);
        Integer mod = pow_integer(x.p_, static_cast<unsigned long>(r.rel_));
        r.unit_ = (x.unit_ * y.unit_) % mod;
        return r;
    }
    friend PAdic operator/(const PAdic& x, const PAdic& y) {
        check_same(x, y);
        if (y.rel_ == 0) throw PrecisionError("p-adic division by a value that is zero to precision");
        Integer mod = pow_integer(y.p_, static_cast<unsigned long>(y.rel_));
        PAdic inv(y.p_, 0);
        inv.val_ = -y.val_;
        inv.rel_ = y.rel_;
        mpz_invert(inv.unit_.get_mpz_t(), y.unit_.get_mpz_t(), mod.get_mpz_t());
        return x * inv;
    }
    PAdic& operator+=(const PAdic& y) { return *this = *this + y; }
    PAdic& operator-=(const PAdic& y) { return *this = *this - y; }
    PAdic& operator*=(const PAdic& y) { return *this = *this * y; }

    /// Equality is only decidable when the difference has a known valuation or both agree to precision.
    friend bool operator==(const PAdic& x, const PAdic& y) { return (x - y).is_zero_to_precision(); }

    std::string str() const {
        if (rel_ == 0) return "O(" + std::to_string(p_) + "^" + std::to_string(val_) + ")";
        return unit_.get_str() + "*" + std::to_string(p_) + "^" + std::to_string(val_) + " + O(" +
               std::to_string(p_) + "^" + std::to_string(absolute_precision()) + ")";
    }

private:
    static void check_same(const PAdic& x, const PAdic& y) {
        if (x.p_ != y.p_) throw std::domain_error("p-adic numbers over different primes");
    }
    PAdic add(const PAdic& y, bool subtract) const {
        check_same(*this, y);
        long cap = std::min(absolute_precision(), y.absolute_precision());
        long base = std::min(val_, y.val_);
        if (cap <= base) return PAdic(p_, cap);
        Integer mod = pow_integer(p_, static_cast<unsigned long>(cap - base));
        Integer xs = rel_ == 0 ? Integer(0) : pow_integer(p_, static_cast<unsigned long>(val_ - base)) * unit_;
        Integer ys = y.rel_ == 0 ? Integer(0) : pow_integer(p_, static_cast<unsigned long>(y.val_ - base)) * y.unit_;
        Integer s = subtract ? Integer(xs - ys) : Integer(xs + ys);
        s %= mod;
        if (s < 0) s += mod;
        if (s == 0) return PAdic(p_, cap);
        long extra = parageo::valuation(s, p_);
        PAdic r(p_, 0);
        r.val_ = base + extra;
        r.rel_ = cap - r.val_;
        r.unit_ = s / pow_integer(p_, static_cast<unsigned long>(extra));
        r.unit_ %= pow_integer(p_, static_cast<unsigned long>(r.rel_));
        return r;
    }

    long p_ = 2;
    long val_ = 0;
    long rel_ = 0;
    Integer unit_ = 0;
};

/// Square root of D in ℤ_p (p odd, D a nonzero residue, or p = 2 with D ≡ 1 mod 8) to the given precision.
/// `root_sign` selects between the two roots by the parity of the residue mod p (or mod 4 for p=2).
inline Integer hensel_sqrt(const Integer& D, long p, long precision, int root_sign = +1) {
    if (precision < 1) precision = 1;
    Integer x;
    if (p == 2) {
        Integer d8 = D % 8;
        if (d8 < 0) d8 += 8;
        if (d8 != 1) throw std::domain_error("no 2-adic square root");
        x = 1;
        // Lift roots of x² ≡ D mod 2^{k} with x ≡ 1 mod 4 using Newton iteration on odd residues.
        Integer mod = pow_integer(2, static_cast<unsigned long>(precision + 2));
        for (long k = 3; k < precision + 2; ++k) {
            Integer m = pow_integer(2, static_cast<unsigned long>(k + 1));
            Integer r = (x * x - D) % m;
            if (r < 0) r += m;
            if (r != 0) x += pow_integer(2, static_cast<unsigned long>(k - 1));
        }
        x %= mod;
        if (root_sign < 0) x = mod - x;
        return x % pow_integer(2, static_cast<unsigned long>(precision));
    }
    long r0 = -1;
    Integer dp = D % p;
    if (dp < 0) dp += p;
    for (long t = 1; t < p; ++t)
        if ((Integer(t) * t - dp) % p == 0) {
            r0 = t;
            break;
        }
    if (r0 < 0) throw std::domain_error("no p-adic square root");
    if (root_sign < 0) r0 = p - r0;
    x = r0;
    Integer mod = p;
    for (long k = 1; k < precision; k *= 2) {
        mod = pow_integer(p, static_cast<unsigned long>(std::min(2 * k, precision)));
        Integer f = x * x - D;
        Integer df = 2 * x, inv;
        mpz_invert(inv.get_mpz_t(), df.get_mpz_t(), mod.get_mpz_t());
        x = (x - f * inv) % mod;
        if (x < 0) x += mod;
    }
    return x % pow_integer(p, static_cast<unsigned long>(precision));
}

// ---------------------------------------------------------------------------
// Scalar traits: the coefficient interface shared by the exterior-algebra routines.

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static constexpr bool field = true;
    using abs2_type = Rational;
    static Rational zero_like(const Rational&) { return 0; }
    static Rational one_like(const Rational&) { return 1; }
    static Rational from_int(const Rational&, long v) { return v; }
    static bool is_zero(const Rational& x) { return x == 0; }
    static Rational abs2(const Rational& x, int) { return x * x; }
    static Real abs2_real(const Rational& q) { return to_real(q); }
    static Real to_real_value(const Rational& x, int) { return to_real(x); }
    static long valuation(const Rational& x, long p) { return parageo::valuation(x, p); }
};

template <>
struct scalar_traits<QuadraticNumber> {
    static constexpr bool exact = true;
    static constexpr bool field = true;
    using abs2_type = QuadraticNumber;
    static QuadraticNumber zero_like(const QuadraticNumber& x) { return QuadraticNumber(x.D()); }
    static QuadraticNumber one_like(const QuadraticNumber& x) { return QuadraticNumber::rational(1, x.D()); }
    static QuadraticNumber from_int(const QuadraticNumber& x, long v) { return QuadraticNumber::rational(v, x.D()); }
    static bool is_zero(const QuadraticNumber& x) { return x.is_zero(); }
    static QuadraticNumber abs2(const QuadraticNumber& x, int emb) { return x.abs2(emb); }
    static Real abs2_real(const QuadraticNumber& q) { return q.D() < 0 ? to_real(q.a()) : q.to_real(+1); }
    static Real to_real_value(const QuadraticNumber& x, int emb) { return x.to_real(emb); }
};

template <>
struct scalar_traits<Real> {
    static constexpr bool exact = false;
    static constexpr bool field = true;
    using abs2_type = Real;
    static Real zero_like(const Real&) { return Real(0); }
    static Real one_like(const Real&) { return Real(1); }
    static Real from_int(const Real&, long v) { return Real(v); }
    static bool is_zero(const Real& x) { return x == 0; }
    static Real abs2(const Real& x, int) { return x * x; }
    static Real abs2_real(const Real& x) { return x; }
    static Real to_real_value(const Real& x, int) { return x; }
};

template <>
struct scalar_traits<PAdic> {
    static constexpr bool exact = false;
    static constexpr bool field = true;
    using abs2_type = Rational;
    static PAdic zero_like(const PAdic& x) { return PAdic(x.p(), x.absolute_precision()); }
    static PAdic one_like(const PAdic& x) { return PAdic::from_rational(1, x.p(), x.absolute_precision()); }
    static PAdic from_int(const PAdic& x, long v) { return PAdic::from_rational(v, x.p(), x.absolute_precision()); }
    static bool is_zero(const PAdic& x) { return x.is_zero_to_precision(); }
    static long valuation(const PAdic& x, long p) {
        if (p != x.p()) throw std::domain_error("p-adic scalar evaluated at a different prime");
        return x.valuation();
    }
};

template <class S>
concept ExactScalar = scalar_traits<S>::exact;

}  // namespace parageo

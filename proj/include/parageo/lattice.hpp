#pragma once

#include "exterior.hpp"

#include <cmath>
#include <functional>

namespace parageo::lattice {

using IntVector = Vector<Integer>;
using IntMatrix = Matrix<Integer>;

/// Row-style Hermite normal form of the lattice spanned by the rows of M (zero rows dropped).
inline IntMatrix hnf(IntMatrix M) {
    if (M.empty()) return M;
    std::size_t cols = M.front().size(), r = 0;
    for (std::size_t c = 0; c < cols && r < M.size(); ++c) {
        // Euclid on column c among rows r..end.
        while (true) {
            std::size_t piv = M.size();
            for (std::size_t i = r; i < M.size(); ++i)
                if (M[i][c] != 0 && (piv == M.size() || abs(M[i][c]) < abs(M[piv][c]))) piv = i;
            if (piv == M.size()) break;
            std::swap(M[r], M[piv]);
            bool done = true;
            for (std::size_t i = r + 1; i < M.size(); ++i) {
                if (M[i][c] == 0) continue;
                Integer f;
                mpz_fdiv_q(f.get_mpz_t(), M[i][c].get_mpz_t(), M[r][c].get_mpz_t());
                for (std::size_t j = c; j < cols; ++j) M[i][j] -= f * M[r][j];
                if (M[i][c] != 0) done = false;
            }
            if (done) break;
        }
        if (r >= M.size() || M[r][c] == 0) continue;
        if (M[r][c] < 0)
            for (auto& v : M[r]) v = -v;
        for (std::size_t i = 0; i < r; ++i) {
            Integer f;
            mpz_fdiv_q(f.get_mpz_t(), M[i][c].get_mpz_t(), M[r][c].get_mpz_t());
            if (f != 0)
                for (std::size_t j = c; j < cols; ++j) M[i][j] -= f * M[r][j];
        }
        ++r;
    }
    M.resize(r);
    return M;
}

/// Index of a full-rank sublattice of ℤ^c given by generating rows; 0 if not full rank.
inline Integer index_in_full_lattice(const IntMatrix& generators) {
    if (generators.empty()) return 0;
    auto H = hnf(generators);
    std::size_t c = generators.front().size();
    if (H.size() != c) return 0;
    Integer det = 1;
    for (std::size_t i = 0; i < c; ++i) det *= H[i][i];
    return abs(det);
}

/// Basis of the integer kernel {z ∈ ℤ^c : M z = 0}, M given by equation rows.
inline IntMatrix integer_kernel(const IntMatrix& M, std::size_t c) {
    // Rows of [Mᵀ | I_c]; integer row reduction of the left block exposes kernel vectors on the right.
    std::size_t r = M.size();
    IntMatrix T(c, IntVector(r + c, 0));
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < r; ++j) T[i][j] = M[j][i];
        T[i][r + i] = 1;
    }
    std::size_t row = 0;
    for (std::size_t col = 0; col < r && row < c; ++col) {
        while (true) {
            std::size_t piv = c;
            for (std::size_t i = row; i < c; ++i)
                if (T[i][col] != 0 && (piv == c || abs(T[i][col]) < abs(T[piv][col]))) piv = i;
            if (piv == c) break;
            std::swap(T[row], T[piv]);
            bool done = true;
            for (std::size_t i = row + 1; i < c; ++i) {
                if (T[i][col] == 0) continue;
                Integer f;
                mpz_fdiv_q(f.get_mpz_t(), T[i][col].get_mpz_t(), T[row][col].get_mpz_t());
                for (std::size_t j = 0; j < r + c; ++j) T[i][j] -= f * T[row][j];
                if (T[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (T[row][col] != 0) ++row;
    }
    IntMatrix out;
    for (std::size_t i = row; i < c; ++i) out.emplace_back(T[i].begin() + static_cast<long>(r), T[i].end());
    return out;
}

inline Integer determinant(IntMatrix M) {
    std::size_t n = M.size();
    Matrix<Rational> Q(n, Vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Q[i][j] = M[i][j];
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && Q[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) std::swap(Q[p], Q[c]), det = -det;
        det *= Q[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (Q[i][c] == 0) continue;
            Rational f = Q[i][c] / Q[c][c];
            for (std::size_t j = c; j < n; ++j) Q[i][j] -= f * Q[c][j];
        }
    }
    return det.get_num();
}

// ---------------------------------------------------------------------------
// LLL on an embedded basis: rows of `emb` are the real images of the lattice basis vectors.
// The unimodular transform is applied to `coeff` (integer coordinates of the same basis).

struct ReducedBasis {
    Matrix<Real> embedded;  // rows: reduced vectors in the real embedding
    IntMatrix coeff;        // rows: integer coordinates of the reduced vectors
};

inline ReducedBasis lll(Matrix<Real> emb, IntMatrix coeff, double delta = 0.99) {
    const std::size_t n = emb.size();
    if (n == 0) return {emb, coeff};
    auto dotr = [](const Vector<Real>& a, const Vector<Real>& b) {
        Real s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    Matrix<Real> mu(n, Vector<Real>(n, Real(0)));
    Vector<Real> bstar_sq(n);
    Matrix<Real> bstar(n);
    auto gso = [&](std::size_t from) {
        for (std::size_t i = from; i < n; ++i) {
            bstar[i] = emb[i];
            for (std::size_t j = 0; j < i; ++j) {
                mu[i][j] = bstar_sq[j] == 0 ? Real(0) : Real(dotr(emb[i], bstar[j]) / bstar_sq[j]);
                for (std::size_t t = 0; t < bstar[i].size(); ++t) bstar[i][t] -= mu[i][j] * bstar[j][t];
            }
            bstar_sq[i] = dotr(bstar[i], bstar[i]);
        }
    };
    gso(0);
    std::size_t k = 1;
    std::size_t guard = 0;
    while (k < n) {
        if (++guard > 200000) throw PrecisionError("LLL failed to converge (insufficient precision)");
        for (std::size_t jj = k; jj-- > 0;) {
            Real r = boost::multiprecision::round(mu[k][jj]);
            if (r == 0) continue;
            Integer ri;
            mpfr_get_z(ri.get_mpz_t(), r.backend().data(), MPFR_RNDN);
            for (std::size_t t = 0; t < emb[k].size(); ++t) emb[k][t] -= r * emb[jj][t];
            for (std::size_t t = 0; t < coeff[k].size(); ++t) coeff[k][t] -= ri * coeff[jj][t];
            for (std::size_t t = 0; t < jj; ++t) mu[k][t] -= r * mu[jj][t];
            mu[k][jj] -= r;
        }
        if (bstar_sq[k] >= (Real(delta) - mu[k][k - 1] * mu[k][k - 1]) * bstar_sq[k - 1]) {
            ++k;
        } else {
            std::swap(emb[k], emb[k - 1]);
            std::swap(coeff[k], coeff[k - 1]);
            gso(k - 1);
            k = std::max<std::size_t>(k - 1, 1);
        }
    }
    return {emb, coeff};
}

// ---------------------------------------------------------------------------
// Fincke–Pohst enumeration of {y ∈ ℤⁿ∖0 : yᵀ G y ≤ R}, one representative per ±pair.

class EnumerationBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void fincke_pohst(const std::vector<std::vector<double>>& G, double radius_sq,
                         const std::function<void(const std::vector<long>&)>& visit,
                         std::size_t max_points = 50'000'000) {
    const std::size_t n = G.size();
    // Cholesky-style decomposition yᵀGy = Σ_i q_ii (y_i + Σ_{j>i} q_ij y_j)².
    std::vector<std::vector<double>> q = G;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(q[i][i] > 0)) throw PrecisionError("Fincke-Pohst: Gram matrix not positive definite");
        for (std::size_t j = i + 1; j < n; ++j) {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for (std::size_t k = i + 1; k < n; ++k)
            for (std::size_t l = k; l < n; ++l) q[k][l] -= q[k][i] * q[i][l];
    }
    std::vector<long> y(n, 0);
    std::vector<double> remaining(n + 1, 0), center(n, 0);
    std::size_t count = 0;
    // Recursive descent from the last coordinate.
    std::function<void(std::size_t, double)> descend = [&](std::size_t i, double rem) {
        double c = 0;
        for (std::size_t j = i + 1; j < n; ++j) c -= q[i][j] * static_cast<double>(y[j]);
        double half = std::sqrt(std::max(rem, 0.0) / q[i][i]);
        long lo = static_cast<long>(std::ceil(c - half - 1e-9)), hi = static_cast<long>(std::floor(c + half + 1e-9));
        for (long v = lo; v <= hi; ++v) {
            double t = static_cast<double>(v) - c;
            double r = rem - q[i][i] * t * t;
            if (r < -1e-9 * (1 + radius_sq)) continue;
            y[i] = v;
            if (i == 0) {
                bool all_zero = true, positive = false;
                for (std::size_t j = n; j-- > 0;)
                    if (y[j] != 0) {
                        all_zero = false;
                        positive = y[j] > 0;
                        break;
                    }
                if (!all_zero && positive) {
                    if (++count > max_points) throw EnumerationBudgetExceeded("enumeration candidate budget exceeded");
                    visit(y);
                }
            } else {
                descend(i - 1, r);
            }
        }
        y[i] = 0;
    };
    descend(n - 1, radius_sq * (1 + 1e-9));
}

}  // namespace parageo::lattice

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dupin/errors.hpp"
#include "dupin/jet.hpp"

// The four normed division algebras via Cayley-Dickson doubling, and 3x3
// Hermitian projectors over them.
//
// Doubling convention, fixed once for the whole library:
//     (a, b) (c, d) = (ac - conj(d) b,  d a + b conj(c))
// so i*j = +k in the quaternions and the multiplication-table tests below are
// deterministic.  Elements are templated over the scalar type; with Jet2
// coordinates an algebra product carries second derivatives through the
// doubling recursion unchanged.

namespace dupin {

enum class Algebra : int { R = 1, C = 2, H = 4, O = 8 };

inline int algebra_dim(Algebra a) { return static_cast<int>(a); }

inline std::string algebra_name(Algebra a) {
    switch (a) {
        case Algebra::R: return "R";
        case Algebra::C: return "C";
        case Algebra::H: return "H";
        case Algebra::O: return "O";
    }
    return "?";
}

// mu in {1,2,3,4} with coordinate count 2^{mu-1}.
inline int algebra_mu(Algebra a) {
    switch (a) {
        case Algebra::R: return 1;
        case Algebra::C: return 2;
        case Algebra::H: return 3;
        case Algebra::O: return 4;
    }
    return 0;
}

template <class S>
struct AlgebraElementT {
    Algebra algebra = Algebra::R;
    std::vector<S> coords;

    AlgebraElementT() = default;
    AlgebraElementT(Algebra a, std::vector<S> c) : algebra(a), coords(std::move(c)) {
        if (static_cast<int>(coords.size()) != algebra_dim(algebra))
            throw contract_violation("AlgebraElement: coordinate count does not match algebra " +
                                     algebra_name(algebra));
    }
};

using AlgebraElement = AlgebraElementT<double>;

namespace detail {

// out = x * y over 2^k coordinates; buffers must not alias.
template <class S>
void cd_mul(const S* x, const S* y, S* out, int n) {
    if (n == 1) {
        out[0] = x[0] * y[0];
        return;
    }
    const int h = n / 2;
    std::vector<S> tmp(static_cast<std::size_t>(h), x[0]);
    std::vector<S> ch(static_cast<std::size_t>(h), x[0]);
    // first half:  x1 y1 - conj(y2) x2
    cd_mul(x, y, out, h);
    for (int i = 0; i < h; ++i) ch[i] = (i == 0) ? y[h] : -y[h + i];
    cd_mul(ch.data(), x + h, tmp.data(), h);
    for (int i = 0; i < h; ++i) out[i] = out[i] - tmp[i];
    // second half: y2 x1 + x2 conj(y1)
    cd_mul(y + h, x, out + h, h);
    for (int i = 0; i < h; ++i) ch[i] = (i == 0) ? y[i] : -y[i];
    cd_mul(x + h, ch.data(), tmp.data(), h);
    for (int i = 0; i < h; ++i) out[h + i] = out[h + i] + tmp[i];
}

}  // namespace detail

template <class S>
AlgebraElementT<S> multiply(const AlgebraElementT<S>& a, const AlgebraElementT<S>& b) {
    if (a.algebra != b.algebra)
        throw contract_violation("multiply: algebra mismatch " + algebra_name(a.algebra) +
                                 " vs " + algebra_name(b.algebra));
    const int n = algebra_dim(a.algebra);
    AlgebraElementT<S> out;
    out.algebra = a.algebra;
    out.coords.resize(n, a.coords[0]);
    detail::cd_mul(a.coords.data(), b.coords.data(), out.coords.data(), n);
    return out;
}

template <class S>
AlgebraElementT<S> operator*(const AlgebraElementT<S>& a, const AlgebraElementT<S>& b) {
    return multiply(a, b);
}

template <class S>
AlgebraElementT<S> operator+(const AlgebraElementT<S>& a, const AlgebraElementT<S>& b) {
    if (a.algebra != b.algebra) throw contract_violation("operator+: algebra mismatch");
    AlgebraElementT<S> out = a;
    for (std::size_t i = 0; i < out.coords.size(); ++i)
        out.coords[i] = out.coords[i] + b.coords[i];
    return out;
}

template <class S>
AlgebraElementT<S> operator-(const AlgebraElementT<S>& a, const AlgebraElementT<S>& b) {
    if (a.algebra != b.algebra) throw contract_violation("operator-: algebra mismatch");
    AlgebraElementT<S> out = a;
    for (std::size_t i = 0; i < out.coords.size(); ++i)
        out.coords[i] = out.coords[i] - b.coords[i];
    return out;
}

template <class S>
AlgebraElementT<S> operator*(const AlgebraElementT<S>& a, const S& scalar) {
    AlgebraElementT<S> out = a;
    for (auto& c : out.coords) c = c * scalar;
    return out;
}

template <class S>
AlgebraElementT<S> conj(const AlgebraElementT<S>& a) {
    AlgebraElementT<S> out = a;
    for (std::size_t i = 1; i < out.coords.size(); ++i) out.coords[i] = -out.coords[i];
    return out;
}

template <class S>
S re(const AlgebraElementT<S>& a) {
    return a.coords[0];
}

// Squared Euclidean coordinate norm; equals Re(a conj(a)) for every algebra.
template <class S>
S norm2(const AlgebraElementT<S>& a) {
    S s = a.coords[0] * a.coords[0];
    for (std::size_t i = 1; i < a.coords.size(); ++i) s = s + a.coords[i] * a.coords[i];
    return s;
}

inline double norm(const AlgebraElement& a) { return std::sqrt(norm2(a)); }

inline AlgebraElement basis_element(Algebra alg, int i) {
    const int n = algebra_dim(alg);
    if (i < 0 || i >= n) throw invalid_input("basis_element: index out of range");
    std::vector<double> c(n, 0.0);
    c[i] = 1.0;
    return {alg, std::move(c)};
}

inline AlgebraElement real_element(Algebra alg, double x) {
    std::vector<double> c(algebra_dim(alg), 0.0);
    c[0] = x;
    return {alg, std::move(c)};
}

// ---- 3x3 Hermitian matrices -------------------------------------------

// Entries above the diagonal; (j,i) is conj of (i,j), diagonal is real.
// off_diagonal stores (0,1), (0,2), (1,2).
template <class S>
struct HermitianMatrix3T {
    Algebra algebra = Algebra::R;
    std::array<S, 3> diagonal;
    std::array<AlgebraElementT<S>, 3> off_diagonal;
};

using HermitianMatrix3 = HermitianMatrix3T<double>;

// M = v v* with M_ij = v_i conj(v_j).  The caller must supply a unit vector;
// octonionic inputs must come from an affine chart (two of the three entries
// in a common associative subalgebra) for the projector property to hold.
template <class S>
HermitianMatrix3T<S> hermitian_projector(const std::array<AlgebraElementT<S>, 3>& v) {
    const S total = norm2(v[0]) + norm2(v[1]) + norm2(v[2]);
    if (std::abs(value(total) - 1.0) > 1e-8)
        throw invalid_input("hermitian_projector: input vector is not unit");
    HermitianMatrix3T<S> m;
    m.algebra = v[0].algebra;
    // v_i conj(v_i) is real with vanishing imaginary part; store the exact
    // coordinate norm rather than the product's first coordinate.
    for (int i = 0; i < 3; ++i) m.diagonal[i] = norm2(v[i]);
    m.off_diagonal[0] = multiply(v[0], conj(v[1]));
    m.off_diagonal[1] = multiply(v[0], conj(v[2]));
    m.off_diagonal[2] = multiply(v[1], conj(v[2]));
    return m;
}

// Max-norm residual of the Jordan idempotent property M o M = M, where
// M o M = (MM + MM)/2 = MM computed entrywise with (j,i) = conj((i,j)).
inline double projector_residual(const HermitianMatrix3& m) {
    std::array<std::array<AlgebraElement, 3>, 3> e;
    for (int i = 0; i < 3; ++i) e[i][i] = real_element(m.algebra, m.diagonal[i]);
    e[0][1] = m.off_diagonal[0];
    e[0][2] = m.off_diagonal[1];
    e[1][2] = m.off_diagonal[2];
    e[1][0] = conj(e[0][1]);
    e[2][0] = conj(e[0][2]);
    e[2][1] = conj(e[1][2]);
    double res = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            AlgebraElement sum = real_element(m.algebra, 0.0);
            for (int k = 0; k < 3; ++k) sum = sum + multiply(e[i][k], e[k][j]);
            const AlgebraElement diff = sum - e[i][j];
            for (double c : diff.coords) res = std::max(res, std::abs(c));
        }
    }
    return res;
}

// Real inner product Re trace(A o B) on Hermitian 3x3 matrices:
// sum of diagonal products plus twice the real coordinate pairings of the
// off-diagonal entries.
inline double hermitian_inner(const HermitianMatrix3& a, const HermitianMatrix3& b) {
    if (a.algebra != b.algebra) throw contract_violation("hermitian_inner: algebra mismatch");
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += a.diagonal[i] * b.diagonal[i];
    for (int k = 0; k < 3; ++k)
        for (std::size_t c = 0; c < a.off_diagonal[k].coords.size(); ++c)
            s += 2.0 * a.off_diagonal[k].coords[c] * b.off_diagonal[k].coords[c];
    return s;
}

}  // namespace dupin

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "dupin/errors.hpp"
#include "dupin/rng.hpp"

// Indefinite inner-product spaces and the projective layer on top of them.
//
// Two signature families appear throughout:
//   lie(d):     (-1, +1, ..., +1, -1) on R^{d+3}, two timelike axes
//   mobius(d):  (-1, +1, ..., +1)     on R^{d+2}, one timelike axis
// The Mobius space sits inside the Lie space as the subspace with vanishing
// last coordinate; projectivized null vectors of the Lie form encode
// oriented hyperspheres of S^d, with the last coordinate carrying the radius.

namespace dupin {

enum class SignatureKind { Lie, Mobius };

struct Signature {
    SignatureKind kind = SignatureKind::Lie;
    int d = 0;  // dimension of the underlying sphere geometry

    int dim() const { return kind == SignatureKind::Lie ? d + 3 : d + 2; }

    // Diagonal weights of the bilinear form.
    double weight(int i) const {
        if (i == 0) return -1.0;
        if (kind == SignatureKind::Lie && i == dim() - 1) return -1.0;
        return 1.0;
    }

    Eigen::VectorXd weights() const {
        Eigen::VectorXd w(dim());
        for (int i = 0; i < dim(); ++i) w(i) = weight(i);
        return w;
    }

    bool operator==(const Signature& o) const { return kind == o.kind && d == o.d; }
    bool operator!=(const Signature& o) const { return !(*this == o); }

    std::string str() const {
        return (kind == SignatureKind::Lie ? "lie(" : "mobius(") + std::to_string(d) +
               ")";
    }
};

inline Signature lie_signature(int d) { return {SignatureKind::Lie, d}; }
inline Signature mobius_signature(int d) { return {SignatureKind::Mobius, d}; }

struct SignedVector {
    Signature sig;
    Eigen::VectorXd coords;

    SignedVector() = default;
    SignedVector(Signature s, Eigen::VectorXd c) : sig(s), coords(std::move(c)) {
        if (coords.size() != sig.dim())
            throw contract_violation("SignedVector: coordinate count does not match " + sig.str());
    }
};

inline double signed_inner(const SignedVector& a, const SignedVector& b) {
    if (a.sig != b.sig)
        throw contract_violation("signed_inner: mixed signatures " + a.sig.str() + " vs " +
                                 b.sig.str());
    double s = 0.0;
    for (int i = 0; i < a.sig.dim(); ++i) s += a.sig.weight(i) * a.coords(i) * b.coords(i);
    return s;
}

inline double signed_quadrance(const SignedVector& a) { return signed_inner(a, a); }

// ---- projective points ------------------------------------------------

// A point of the projective space, stored via one nonzero representative.
struct ProjectivePoint {
    SignedVector rep;

    ProjectivePoint() = default;
    explicit ProjectivePoint(SignedVector v) : rep(std::move(v)) {
        if (rep.coords.norm() < 1e-14)
            throw invalid_input("ProjectivePoint: zero vector has no projective class");
    }
};

// Equality as projective classes: the unit representatives must span a line
// of numerical rank one.  With c = |<x,y>| for unit x, y the second singular
// value of the pair is sqrt(1 - c), which is the residual tested here.
inline bool projective_equal(const ProjectivePoint& a, const ProjectivePoint& b,
                             double tol = 1e-9) {
    if (a.rep.sig != b.rep.sig)
        throw contract_violation("projective_equal: mixed signatures");
    const Eigen::VectorXd x = a.rep.coords.normalized();
    const Eigen::VectorXd y = b.rep.coords.normalized();
    // Rejection form of sin(angle): the cosine route sqrt(1 - |x.y|) cannot
    // resolve angles below sqrt(ulp) ~ 1e-8, this one goes down to rounding.
    return (x - x.dot(y) * y).norm() <= tol;
}

// ---- orthogonal maps --------------------------------------------------

inline double orthogonality_residual(const Signature& sig, const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd g = sig.weights().asDiagonal();
    return (m.transpose() * g * m - g).cwiseAbs().maxCoeff();
}

// A linear map preserving the signed inner product; validated on construction.
struct OrthogonalMap {
    Signature sig;
    Eigen::MatrixXd mat;

    OrthogonalMap() = default;

    OrthogonalMap(Signature s, Eigen::MatrixXd m, double tol = 1e-8) : sig(s), mat(std::move(m)) {
        if (mat.rows() != sig.dim() || mat.cols() != sig.dim())
            throw contract_violation("OrthogonalMap: shape does not match " + sig.str());
        const double r = orthogonality_residual(sig, mat);
        if (!(r <= tol))
            throw invalid_map("OrthogonalMap: residual " + std::to_string(r) + " exceeds " +
                              std::to_string(tol) + " for " + sig.str());
    }

    // For L with L^T G L = G the inverse is G L^T G; cheaper and better
    // conditioned than a linear solve.
    OrthogonalMap inverse() const {
        const Eigen::MatrixXd g = sig.weights().asDiagonal();
        return {sig, g * mat.transpose() * g};
    }

    OrthogonalMap compose(const OrthogonalMap& rhs) const {
        if (sig != rhs.sig) throw contract_violation("OrthogonalMap::compose: mixed signatures");
        return {sig, mat * rhs.mat};
    }
};

inline SignedVector apply_map(const OrthogonalMap& l, const SignedVector& v) {
    if (l.sig != v.sig) throw contract_violation("apply_map: mixed signatures");
    return {l.sig, l.mat * v.coords};
}

inline ProjectivePoint apply_map(const OrthogonalMap& l, const ProjectivePoint& p) {
    return ProjectivePoint{apply_map(l, p.rep)};
}

// ---- indefinite Gram-Schmidt ------------------------------------------

namespace detail {

inline double indefinite_dot(const Eigen::VectorXd& w, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
    return (w.array() * a.array() * b.array()).sum();
}

}  // namespace detail

// Completes prescribed columns to a full pseudo-orthonormal basis: column j
// of the result satisfies <u_j, u_j> = weight(j) and all cross products
// vanish, so the matrix lies in the orthogonal group of the signature.
//
// Slots are filled timelike-first.  Candidates are the prescribed vectors for
// their slots, then coordinate axes in index order, then seeded Gaussian
// draws; a candidate is rejected when its projected self-product has the
// wrong sign or magnitude below 1e-10.  The procedure is deterministic for a
// fixed seed, which keeps downstream frames and factorizations reproducible.
inline Eigen::MatrixXd complete_pseudo_orthonormal(
    const Signature& sig, const std::vector<std::pair<int, Eigen::VectorXd>>& prescribed,
    std::uint64_t seed = 0x5eedf00dULL) {
    const int n = sig.dim();
    const Eigen::VectorXd w = sig.weights();
    Eigen::MatrixXd basis(n, n);
    std::vector<bool> filled(n, false);

    std::vector<Eigen::VectorXd> accepted;   // unit columns so far
    std::vector<double> accepted_sign;       // their self-products (+1 / -1)

    auto project_out = [&](Eigen::VectorXd v) {
        for (std::size_t j = 0; j < accepted.size(); ++j)
            v -= accepted_sign[j] * detail::indefinite_dot(w, v, accepted[j]) * accepted[j];
        return v;
    };

    auto try_accept = [&](int slot, const Eigen::VectorXd& cand, double tol) -> bool {
        Eigen::VectorXd v = project_out(cand);
        const double q = detail::indefinite_dot(w, v, v);
        if (std::abs(q) < tol) return false;
        if (q * w(slot) < 0.0) return false;
        v /= std::sqrt(std::abs(q));
        basis.col(slot) = v;
        filled[slot] = true;
        accepted.push_back(v);
        accepted_sign.push_back(w(slot));
        return true;
    };

    for (const auto& [slot, vec] : prescribed) {
        if (slot < 0 || slot >= n) throw contract_violation("prescribed slot out of range");
        if (filled[slot]) throw contract_violation("prescribed slot repeated");
        if (vec.size() != n) throw contract_violation("prescribed vector has wrong size");
        if (!try_accept(slot, vec, 1e-10))
            throw invalid_input("complete_pseudo_orthonormal: prescribed vector is degenerate "
                                "or has the wrong causal type for its slot");
    }

    // Timelike slots first: a spacelike-heavy partial basis can otherwise
    // swallow every timelike direction and leave slot candidates degenerate.
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (!filled[i] && w(i) < 0) order.push_back(i);
    for (int i = 0; i < n; ++i)
        if (!filled[i] && w(i) > 0) order.push_back(i);

    Rng rng(seed);
    for (int slot : order) {
        bool done = false;
        for (int i = 0; i < n && !done; ++i) {
            // Try axes of matching causal type first.
            const int axis = (w(slot) < 0) ? ((i + slot) % n) : i;
            if (w(axis) * w(slot) < 0) continue;
            done = try_accept(slot, Eigen::VectorXd::Unit(n, axis), 1e-10);
        }
        for (int i = 0; i < n && !done; ++i)
            done = try_accept(slot, Eigen::VectorXd::Unit(n, i), 1e-10);
        for (int tries = 0; tries < 256 && !done; ++tries)
            done = try_accept(slot, rng.gaussian_vector(n), 1e-6);
        if (!done)
            throw invalid_input("complete_pseudo_orthonormal: could not fill slot " +
                                std::to_string(slot));
    }
    return basis;
}

inline OrthogonalMap random_orthogonal(const Signature& sig, std::uint64_t seed) {
    // All slots free; Gaussian candidates only, so the law is rotation-friendly.
    const int n = sig.dim();
    const Eigen::VectorXd w = sig.weights();
    Rng rng(seed);
    for (int attempt = 0; attempt < 32; ++attempt) {
        Eigen::MatrixXd basis(n, n);
        std::vector<Eigen::VectorXd> accepted;
        std::vector<double> accepted_sign;
        bool ok = true;
        std::vector<int> order;
        for (int i = 0; i < n; ++i)
            if (w(i) < 0) order.push_back(i);
        for (int i = 0; i < n; ++i)
            if (w(i) > 0) order.push_back(i);
        for (int slot : order) {
            bool done = false;
            for (int tries = 0; tries < 256 && !done; ++tries) {
                Eigen::VectorXd v = rng.gaussian_vector(n);
                // Bias draws toward the needed causal type: timelike slots get
                // amplified timelike components.
                if (w(slot) < 0)
                    for (int i = 0; i < n; ++i)
                        if (w(i) < 0) v(i) *= 3.0;
                for (std::size_t j = 0; j < accepted.size(); ++j)
                    v -= accepted_sign[j] * detail::indefinite_dot(w, v, accepted[j]) * accepted[j];
                const double q = detail::indefinite_dot(w, v, v);
                if (std::abs(q) < 1e-6 || q * w(slot) < 0.0) continue;
                v /= std::sqrt(std::abs(q));
                basis.col(slot) = v;
                accepted.push_back(v);
                accepted_sign.push_back(w(slot));
                done = true;
            }
            if (!done) {
                ok = false;
                break;
            }
        }
        if (ok && orthogonality_residual(sig, basis) <= 1e-8) return {sig, basis};
    }
    throw error("random_orthogonal: generation failed for " + sig.str());
}

}  // namespace dupin

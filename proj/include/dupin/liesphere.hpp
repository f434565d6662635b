#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dupin/errors.hpp"
#include "dupin/minkowski.hpp"

// Oriented spheres of the round sphere S^d, their lifts to the projective
// quadric of the Lie metric, the Mobius and parallel subgroups, the
// constructive three-factor decomposition of a general transformation, and
// the conformal charts joining the three space forms to S^m.

namespace dupin {

// ---- oriented spheres and quadric lifts --------------------------------

// S(x, r): the distance-r sphere about x in S^d, cooriented by the sign of
// r.  (x, r) and (-x, r + pi) label the same oriented sphere.
struct OrientedSphere {
    Eigen::VectorXd center;  // unit vector in R^{d+1}
    double signed_radius = 0.0;

    OrientedSphere() = default;
    OrientedSphere(Eigen::VectorXd x, double r) : center(std::move(x)), signed_radius(r) {
        const double n = center.norm();
        if (std::abs(n - 1.0) > 1e-12)
            throw invalid_input("OrientedSphere: center must be a unit vector");
        center /= n;
    }

    int d() const { return static_cast<int>(center.size()) - 1; }
};

// S(x, r) -> [(cos r, x, sin r)] on the quadric of lie_signature(d).
inline ProjectivePoint sphere_to_quadric(const OrientedSphere& s) {
    const int dim = s.d() + 3;
    Eigen::VectorXd k(dim);
    k(0) = std::cos(s.signed_radius);
    k.segment(1, s.d() + 1) = s.center;
    k(dim - 1) = std::sin(s.signed_radius);
    return ProjectivePoint(SignedVector(lie_signature(s.d()), k));
}

// Reads (x, r) off the stored representative: positive rescaling makes the
// middle block a unit vector, then r = atan2(last, first) in (-pi, pi].
// The label is recovered modulo 2pi; the projectively equal representative
// of opposite sign yields the equivalent label (-x, r + pi).
inline OrientedSphere quadric_to_sphere(const ProjectivePoint& p) {
    if (p.rep.sig.kind != SignatureKind::Lie)
        throw invalid_input("quadric_to_sphere: representative must carry the Lie signature");
    const Eigen::VectorXd& k = p.rep.coords;
    const int dim = static_cast<int>(k.size());
    const double scale2 = k.squaredNorm();
    if (std::abs(signed_quadrance(p.rep)) > 1e-9 * scale2)
        throw invalid_input("quadric_to_sphere: representative is off the quadric");
    const Eigen::VectorXd mid = k.segment(1, dim - 3 + 1);
    const double mn = mid.norm();
    if (mn < 1e-14 * std::sqrt(scale2))
        throw invalid_input("quadric_to_sphere: degenerate representative with zero middle block");
    OrientedSphere s;
    s.center = mid / mn;
    s.signed_radius = std::atan2(k(dim - 1) / mn, k(0) / mn);
    return s;
}

// Continuity-preserving variant: among the labels (x, r + 2 pi k) and
// (-x, r + pi + 2 pi k) of the same oriented sphere, returns the one whose
// radius is closest to prev_radius.  Used when following sphere families
// along curves, where the principal value of atan2 would jump.
inline OrientedSphere quadric_to_sphere_tracked(const ProjectivePoint& p, double prev_radius) {
    OrientedSphere s = quadric_to_sphere(p);
    const double base[2] = {s.signed_radius, s.signed_radius + M_PI};
    OrientedSphere best = s;
    double best_gap = std::abs(s.signed_radius - prev_radius);
    for (int alt = 0; alt < 2; ++alt) {
        const double turns = std::round((prev_radius - base[alt]) / (2.0 * M_PI));
        const double r = base[alt] + 2.0 * M_PI * turns;
        if (std::abs(r - prev_radius) < best_gap) {
            best_gap = std::abs(r - prev_radius);
            best.signed_radius = r;
            best.center = (alt == 0) ? s.center : Eigen::VectorXd(-s.center);
        }
    }
    return best;
}

// Oriented contact through the quadric: the lifts are Lie-orthogonal.
inline bool oriented_contact(const OrientedSphere& s1, const OrientedSphere& s2,
                             double tol = 1e-9) {
    if (s1.d() != s2.d()) throw contract_violation("oriented_contact: dimension mismatch");
    const ProjectivePoint k1 = sphere_to_quadric(s1);
    const ProjectivePoint k2 = sphere_to_quadric(s2);
    const double denom = k1.rep.coords.norm() * k2.rep.coords.norm();
    return std::abs(signed_inner(k1.rep, k2.rep)) <= tol * denom;
}

// Independent geometric route: first-order tangency on the sphere reads
// cos(dist(x1, x2)) = cos(r1 - r2).
inline bool oriented_contact_geometric(const OrientedSphere& s1, const OrientedSphere& s2,
                                       double tol = 1e-9) {
    if (s1.d() != s2.d()) throw contract_violation("oriented_contact: dimension mismatch");
    const double lhs = s1.center.dot(s2.center);
    const double rhs = std::cos(s1.signed_radius - s2.signed_radius);
    return std::abs(lhs - rhs) <= tol;
}

// ---- transformations ---------------------------------------------------

enum class LieKind { General, Mobius, ParallelSpherical, ParallelEuclidean, ParallelHyperbolic };

inline std::string lie_kind_name(LieKind k) {
    switch (k) {
        case LieKind::General: return "general";
        case LieKind::Mobius: return "mobius";
        case LieKind::ParallelSpherical: return "parallel_spherical";
        case LieKind::ParallelEuclidean: return "parallel_euclidean";
        case LieKind::ParallelHyperbolic: return "parallel_hyperbolic";
    }
    return "general";
}

inline LieKind lie_kind_from_name(const std::string& name) {
    if (name == "general") return LieKind::General;
    if (name == "mobius") return LieKind::Mobius;
    if (name == "parallel_spherical") return LieKind::ParallelSpherical;
    if (name == "parallel_euclidean") return LieKind::ParallelEuclidean;
    if (name == "parallel_hyperbolic") return LieKind::ParallelHyperbolic;
    throw invalid_input("unknown transformation kind '" + name + "'");
}

// A quadric-preserving projective map, tagged with what is known about it.
// The tag is advisory; `map` alone is authoritative.
struct LieTransformation {
    OrthogonalMap map;
    LieKind kind = LieKind::General;
    double t = 0.0;  // parameter of the parallel kinds

    int d() const { return map.sig.d; }
};

inline LieTransformation lie_identity(int d) {
    return {OrthogonalMap(lie_signature(d), Eigen::MatrixXd::Identity(d + 3, d + 3)),
            LieKind::Mobius, 0.0};
}

// Applies the transformation to a quadric representative.
inline ProjectivePoint apply_lie(const LieTransformation& g, const ProjectivePoint& p) {
    return apply_map(g.map, p);
}

// Block-diagonal extension of a Mobius-signature map: acts on the first
// d+2 coordinates and sends the last basis vector to sign * itself.  The
// result fixes the projective class of e_{d+3}, hence maps point spheres to
// point spheres; sign = -1 reverses all orientations.
inline LieTransformation mobius_extend(const OrthogonalMap& l, int sign = +1) {
    if (l.sig.kind != SignatureKind::Mobius)
        throw invalid_map("mobius_extend: input must carry the Mobius signature");
    if (sign != 1 && sign != -1) throw invalid_input("mobius_extend: sign must be +1 or -1");
    const int dim = l.sig.dim() + 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    m.topLeftCorner(dim - 1, dim - 1) = l.mat;
    m(dim - 1, dim - 1) = static_cast<double>(sign);
    return {OrthogonalMap(lie_signature(l.sig.d), m), LieKind::Mobius, 0.0};
}

// The three one-parameter families of parallel transformations.  Spherical:
// rotation of the (e1, e_{d+3}) plane, adds t to every signed radius.
// Euclidean and hyperbolic: the matrices conjugating radius addition through
// the corresponding space-form chart; euclidean is parabolic (shear-like on
// the null pair), hyperbolic a boost of the (e2, e_{d+3}) plane.
inline LieTransformation parallel_transformation(LieKind kind, double t, int d) {
    const int dim = d + 3;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
    switch (kind) {
        case LieKind::ParallelSpherical:
            m(0, 0) = std::cos(t);
            m(0, dim - 1) = -std::sin(t);
            m(dim - 1, 0) = std::sin(t);
            m(dim - 1, dim - 1) = std::cos(t);
            break;
        case LieKind::ParallelEuclidean:
            m(0, 0) = 1.0 - t * t / 2.0;
            m(0, 1) = -t * t / 2.0;
            m(0, dim - 1) = -t;
            m(1, 0) = t * t / 2.0;
            m(1, 1) = 1.0 + t * t / 2.0;
            m(1, dim - 1) = t;
            m(dim - 1, 0) = t;
            m(dim - 1, 1) = t;
            break;
        case LieKind::ParallelHyperbolic:
            m(1, 1) = std::cosh(t);
            m(1, dim - 1) = std::sinh(t);
            m(dim - 1, 1) = std::sinh(t);
            m(dim - 1, dim - 1) = std::cosh(t);
            break;
        default:
            throw invalid_input("parallel_transformation: kind must be one of the parallel "
                                "families");
    }
    return {OrthogonalMap(lie_signature(d), m), kind, t};
}

// ---- three-factor decomposition ----------------------------------------

struct LieFactorization {
    LieTransformation phi1;   // Mobius
    LieKind kind = LieKind::Mobius;
    double t = 0.0;
    LieTransformation phi2;   // Mobius
    double residual = 0.0;    // max-abs reconstruction error, up to sign
};

namespace detail {

// Reconstruction residual of g ~ phi1 P_t phi2, minimized over the overall
// projective sign.
inline double reconstruction_residual(const Eigen::MatrixXd& g, const LieFactorization& f) {
    const Eigen::MatrixXd prod = f.phi1.map.mat *
                                 parallel_transformation(f.kind == LieKind::Mobius
                                                             ? LieKind::ParallelSpherical
                                                             : f.kind,
                                                         f.kind == LieKind::Mobius ? 0.0 : f.t,
                                                         f.phi1.d())
                                     .map.mat *
                                 f.phi2.map.mat;
    return std::min((prod - g).cwiseAbs().maxCoeff(), (prod + g).cwiseAbs().maxCoeff());
}

// Mobius-signature complement basis orthogonal to the null Witt pair
// (n, m): project the pair out of seed vectors, then Gram-Schmidt in the
// Mobius metric.  The complement is positive definite, so pivoted GS with a
// fixed candidate order is deterministic and stable.
inline Eigen::MatrixXd witt_complement(const Signature& sig, const Eigen::VectorXd& n,
                                       const Eigen::VectorXd& m) {
    const int dim = sig.dim();
    const Eigen::VectorXd w = sig.weights();
    auto dot = [&w](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (w.array() * a.array() * b.array()).sum();
    };
    Eigen::MatrixXd basis(dim, dim - 2);
    int got = 0;
    for (int axis = 0; axis < dim && got < dim - 2; ++axis) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, axis);
        v -= dot(v, m) * n + dot(v, n) * m;  // remove Witt-pair components
        for (int j = 0; j < got; ++j) v -= dot(v, basis.col(j)) * basis.col(j);
        const double q = dot(v, v);
        if (q < 1e-10) continue;
        basis.col(got++) = v / std::sqrt(q);
    }
    if (got < dim - 2)
        throw decomposition_failed("witt_complement: could not complete the complement basis",
                                   1.0);
    return basis;
}

}  // namespace detail

// Constructive three-factor decomposition g = Phi1 P_t Phi2 with Phi1, Phi2
// point-sphere-preserving.  The branch is read off w = g e_last, normalized
// to nonnegative last coordinate a: the Lie norm identity <u,u> = a^2 - 1
// for the Mobius part u of w makes each branch's frame vector exactly unit.
//   a < 1:  spherical, t = arccos a,  Phi1 e1 = -u / sin t   (timelike)
//   a > 1:  hyperbolic, t = arccosh a, Phi1 e2 =  u / sinh t (spacelike)
//   a ~ 1:  euclidean, u is null; Phi1 maps the null vector t(e2 - e1) to u
//           through a Witt-pair basis exchange (t = |u|/sqrt(2) fixes the
//           scale in units of e2 - e1, so pure P_t inputs round-trip)
//   w ~ e_last: g is already Mobius, t = 0.
// Phi2 = P_{-t} Phi1^{-1} g, so reconstruction is exact by construction;
// each candidate is validated and the best residual is reported on failure.
inline LieFactorization cecil_chern_decompose(const LieTransformation& g) {
    if (g.map.sig.kind != SignatureKind::Lie)
        throw invalid_map("cecil_chern_decompose: Lie-signature transformation required");
    const int d = g.map.sig.d;
    const int dim = d + 3;
    const Signature msig = mobius_signature(d);

    Eigen::VectorXd w = g.map.mat.col(dim - 1);
    if (w(dim - 1) < 0.0) w = -w;
    const double a = w(dim - 1);
    const Eigen::VectorXd u = w.head(dim - 1);

    auto attempt = [&](LieKind kind) -> LieFactorization {
        LieFactorization f;
        f.kind = kind;
        switch (kind) {
            case LieKind::Mobius: {
                // g itself fixes [e_last]; split off nothing.
                f.t = 0.0;
                f.phi1 = lie_identity(d);
                f.phi2 = g;
                f.phi2.kind = LieKind::Mobius;
                break;
            }
            case LieKind::ParallelSpherical: {
                f.t = std::acos(std::clamp(a, -1.0, 1.0));
                const double s = std::sin(f.t);
                if (s < 1e-14) throw decomposition_failed("degenerate spherical angle", 1.0);
                const Eigen::VectorXd first = -u / s;
                const Eigen::MatrixXd l = complete_pseudo_orthonormal(msig, {{0, first}});
                f.phi1 = mobius_extend(OrthogonalMap(msig, l));
                break;
            }
            case LieKind::ParallelHyperbolic: {
                if (a <= 1.0) throw decomposition_failed("hyperbolic branch needs a > 1", 1.0);
                f.t = std::acosh(a);
                const double s = std::sinh(f.t);
                if (s < 1e-14) throw decomposition_failed("degenerate hyperbolic angle", 1.0);
                const Eigen::VectorXd second = u / s;
                const Eigen::MatrixXd l = complete_pseudo_orthonormal(msig, {{1, second}});
                f.phi1 = mobius_extend(OrthogonalMap(msig, l));
                break;
            }
            case LieKind::ParallelEuclidean: {
                // The generator moves e_last by t (e2 - e1), a null vector
                // of Euclidean norm sqrt(2): measuring t in that unit makes
                // pure P_t inputs round-trip, even though Mobius conjugation
                // could rescale the parabolic parameter at will.
                f.t = u.norm() / std::sqrt(2.0);
                if (f.t < 1e-14) throw decomposition_failed("euclidean branch needs u != 0", 1.0);
                const Eigen::VectorXd w8 = msig.weights();
                auto mdot = [&w8](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
                    return (w8.array() * x.array() * y.array()).sum();
                };
                const Eigen::VectorXd n0 =
                    Eigen::VectorXd::Unit(dim - 1, 1) - Eigen::VectorXd::Unit(dim - 1, 0);
                const Eigen::VectorXd m0 = 0.5 * (Eigen::VectorXd::Unit(dim - 1, 0) +
                                                  Eigen::VectorXd::Unit(dim - 1, 1));
                const Eigen::VectorXd n1 = u / f.t;
                // Null partner of n1: start from a seed z with <n1, z> != 0.
                Eigen::VectorXd m1;
                {
                    Eigen::VectorXd z = m0;
                    double beta = mdot(n1, z);
                    for (int axis = 0; axis < dim - 1 && std::abs(beta) < 1e-6; ++axis) {
                        z = Eigen::VectorXd::Unit(dim - 1, axis);
                        beta = mdot(n1, z);
                    }
                    if (std::abs(beta) < 1e-6)
                        throw decomposition_failed("euclidean branch: no Witt partner", 1.0);
                    m1 = z / beta - (mdot(z, z) / (2.0 * beta * beta)) * n1;
                }
                Eigen::MatrixXd b0(dim - 1, dim - 1), b1(dim - 1, dim - 1);
                b0.col(0) = n0;
                b0.col(1) = m0;
                b0.rightCols(dim - 3) = detail::witt_complement(msig, n0, m0);
                b1.col(0) = n1;
                b1.col(1) = m1;
                b1.rightCols(dim - 3) = detail::witt_complement(msig, n1, m1);
                const Eigen::MatrixXd l = b1 * b0.inverse();
                f.phi1 = mobius_extend(OrthogonalMap(msig, l));
                break;
            }
            default:
                throw decomposition_failed("not a decomposition branch", 1.0);
        }
        const LieKind pk = (kind == LieKind::Mobius) ? LieKind::ParallelSpherical : kind;
        const LieTransformation pinv = parallel_transformation(pk, -f.t, d);
        f.phi2 = {OrthogonalMap(g.map.sig, pinv.map.mat * f.phi1.map.inverse().mat * g.map.mat),
                  LieKind::Mobius, 0.0};
        // Phi2 must fix [e_last]; anything else means the branch was wrong.
        Eigen::VectorXd fix = f.phi2.map.mat.col(dim - 1);
        fix -= fix(dim - 1) * Eigen::VectorXd::Unit(dim, dim - 1);
        if (fix.norm() > 1e-7)
            throw decomposition_failed("factor does not preserve point spheres", fix.norm());
        f.residual = detail::reconstruction_residual(g.map.mat, f);
        return f;
    };

    // Natural branch from a, then the exhaustive fallback order.
    std::vector<LieKind> order;
    if ((w - Eigen::VectorXd::Unit(dim, dim - 1)).norm() <= 1e-8)
        order.push_back(LieKind::Mobius);
    else if (a < 1.0 - 1e-9)
        order.push_back(LieKind::ParallelSpherical);
    else if (a > 1.0 + 1e-9)
        order.push_back(LieKind::ParallelHyperbolic);
    else
        order.push_back(LieKind::ParallelEuclidean);
    for (LieKind k : {LieKind::ParallelSpherical, LieKind::ParallelHyperbolic,
                      LieKind::ParallelEuclidean, LieKind::Mobius})
        if (k != order.front()) order.push_back(k);

    double best = std::numeric_limits<double>::infinity();
    for (LieKind k : order) {
        try {
            LieFactorization f = attempt(k);
            if (f.residual <= 1e-8) return f;
            best = std::min(best, f.residual);
        } catch (const decomposition_failed& e) {
            best = std::min(best, e.best_residual);
        } catch (const error&) {
            // branch construction failed outright (e.g. frame completion)
        }
    }
    throw decomposition_failed("cecil_chern_decompose: no branch reached tolerance", best);
}

// ---- conformal charts of the space forms -------------------------------

// Inverse stereographic chart R^m -> S^m, pole sigma = (-1, 0, ..., 0).
inline Eigen::VectorXd stereographic_euclidean(const Eigen::VectorXd& x) {
    const double q = x.squaredNorm();
    Eigen::VectorXd y(x.size() + 1);
    y(0) = (1.0 - q) / (1.0 + q);
    y.tail(x.size()) = 2.0 * x / (1.0 + q);
    return y;
}

inline Eigen::VectorXd stereographic_euclidean_inverse(const Eigen::VectorXd& y) {
    if (std::abs(y.norm() - 1.0) > 1e-8)
        throw invalid_input("stereographic inverse: input must lie on the unit sphere");
    if (y(0) <= -1.0 + 1e-12)
        throw invalid_input("stereographic inverse: the pole has no preimage");
    return y.tail(y.size() - 1) / (1.0 + y(0));
}

// Chart of the hyperboloid H^m_c (c < 0, |x|^2 = 1/c in the Lorentz metric,
// positive first coordinate) onto the open upper half of S^m: scale to the
// unit hyperboloid, pass to the Poincare ball, then invert the stereographic
// chart.  The image has positive first coordinate, so the pole is never hit.
inline Eigen::VectorXd stereographic_hyperbolic(const Eigen::VectorXd& x, double c) {
    if (!(c < 0.0)) throw invalid_input("stereographic hyperbolic: c must be negative");
    const int m = static_cast<int>(x.size()) - 1;
    if (m < 1) throw invalid_input("stereographic hyperbolic: input too small");
    const double q = -x(0) * x(0) + x.tail(m).squaredNorm();
    if (std::abs(q - 1.0 / c) > 1e-8)
        throw invalid_input("stereographic hyperbolic: input off the hyperboloid");
    if (!(x(0) > 0.0))
        throw invalid_input("stereographic hyperbolic: input on the wrong sheet");
    const Eigen::VectorXd z = std::sqrt(-c) * x;
    const Eigen::VectorXd b = z.tail(m) / (1.0 + z(0));
    return stereographic_euclidean(b);
}

inline Eigen::VectorXd stereographic_hyperbolic_inverse(const Eigen::VectorXd& y, double c) {
    if (!(c < 0.0)) throw invalid_input("stereographic hyperbolic: c must be negative");
    if (std::abs(y.norm() - 1.0) > 1e-8)
        throw invalid_input("stereographic inverse: input must lie on the unit sphere");
    if (!(y(0) > 0.0))
        throw invalid_input("stereographic hyperbolic inverse: image lies in the open upper "
                            "hemisphere");
    const Eigen::VectorXd b = stereographic_euclidean_inverse(y);
    const double q = b.squaredNorm();
    Eigen::VectorXd z(y.size());
    z(0) = (1.0 + q) / (1.0 - q);
    z.tail(b.size()) = 2.0 * b / (1.0 - q);
    return z / std::sqrt(-c);
}

// theta_c(x) = sqrt(c) x : the sphere of radius 1/sqrt(c) to the unit sphere.
inline Eigen::VectorXd similarity(const Eigen::VectorXd& x, double c) {
    if (!(c > 0.0)) throw invalid_input("similarity: c must be positive");
    if (std::abs(x.squaredNorm() - 1.0 / c) > 1e-10)
        throw invalid_input("similarity: input not on the radius 1/sqrt(c) sphere");
    return std::sqrt(c) * x;
}

inline Eigen::VectorXd similarity_inverse(const Eigen::VectorXd& y, double c) {
    if (!(c > 0.0)) throw invalid_input("similarity: c must be positive");
    if (std::abs(y.squaredNorm() - 1.0) > 1e-10)
        throw invalid_input("similarity inverse: input not on the unit sphere");
    return y / std::sqrt(c);
}

}  // namespace dupin

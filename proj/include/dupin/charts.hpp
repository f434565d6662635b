#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dupin/algebra.hpp"
#include "dupin/errors.hpp"
#include "dupin/immersion.hpp"
#include "dupin/rng.hpp"

// Built-in charts.
//
// Every chart here is produced from a single templated body, so analytic
// first and second derivatives are available through the jet scalars; the
// finite-difference path exists for stripped copies and externally supplied
// evaluators (Mobius-deformed charts compose jets analytically).

namespace dupin {

struct envelope_degenerate : error {
    using error::error;
};

namespace detail {

// Inverse stereographic chart of the unit k-sphere from R^k:
//   x  ->  ((1-|x|^2)/(1+|x|^2), 2x/(1+|x|^2))
// covers the sphere minus the pole (-1, 0, ..., 0).
template <class S>
std::vector<S> unit_sphere_point(const std::vector<S>& x) {
    S q = x[0] * x[0];
    for (std::size_t i = 1; i < x.size(); ++i) q = q + x[i] * x[i];
    const S s = 1.0 + q;
    std::vector<S> out;
    out.reserve(x.size() + 1);
    out.push_back((1.0 - q) / s);
    for (const S& xi : x) out.push_back(2.0 * xi / s);
    return out;
}

}  // namespace detail

// ---- standard projective-plane embeddings -----------------------------

// psi_F through the Hermitian projector model: a chart point (x, y) of F P^2
// gives v = (1, x, y)/sqrt(1+|x|^2+|y|^2) (chart_index rotates which slot
// holds the 1), M = v v*, and the image is the traceless part M - I/3 scaled
// to the unit sphere of the traceless Hermitian space.  Coordinates are taken
// in an orthonormal basis of that space: two diagonal combinations plus
// sqrt(2)-weighted off-diagonal coordinates, all rescaled by sqrt(3/2).
inline ImmersionChart veronese(Algebra alg, int chart_index = 0) {
    if (chart_index < 0 || chart_index > 2)
        throw invalid_input("veronese: chart_index must be 0, 1 or 2");
    const int k = algebra_dim(alg);
    const int n = 2 * k;
    const int coords = 2 + 3 * k;

    auto body = [alg, k, chart_index](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::sqrt;
        const S& model = u[0];
        std::vector<S> unit_coords(static_cast<std::size_t>(k), const_like(model, 0.0));
        unit_coords[0] = const_like(model, 1.0);
        AlgebraElementT<S> unity(alg, std::move(unit_coords));
        AlgebraElementT<S> x(alg, std::vector<S>(u.begin(), u.begin() + k));
        AlgebraElementT<S> y(alg, std::vector<S>(u.begin() + k, u.begin() + 2 * k));

        std::array<AlgebraElementT<S>, 3> w;
        w[chart_index % 3] = unity;
        w[(chart_index + 1) % 3] = x;
        w[(chart_index + 2) % 3] = y;

        const S s2 = norm2(w[0]) + norm2(w[1]) + norm2(w[2]);
        const S inv = 1.0 / sqrt(s2);
        const std::array<AlgebraElementT<S>, 3> v = {w[0] * inv, w[1] * inv, w[2] * inv};
        const HermitianMatrix3T<S> m = hermitian_projector<S>(v);

        std::vector<S> out;
        out.reserve(static_cast<std::size_t>(2 + 3 * k));
        const double root3 = std::sqrt(3.0);
        out.push_back((m.diagonal[0] - m.diagonal[1]) * (root3 / 2.0));
        out.push_back((m.diagonal[0] + m.diagonal[1] - 2.0 * m.diagonal[2]) * 0.5);
        for (int e = 0; e < 3; ++e)
            for (int c = 0; c < k; ++c) out.push_back(m.off_diagonal[e].coords[c] * root3);
        return out;
    };

    std::string name = "veronese-" + algebra_name(alg);
    if (chart_index != 0) name += ":" + std::to_string(chart_index);
    return chart_from_body(std::move(name), n, coords, 1.0,
                           Eigen::VectorXd::Constant(n, -0.8),
                           Eigen::VectorXd::Constant(n, 0.8), body);
}

// ---- products and classical surfaces ----------------------------------

// S^{d1}_{c1} x S^{d2}_{c2} inside the unit sphere; requires 1/c1 + 1/c2 = 1.
inline ImmersionChart sphere_product(int d1, int d2, double c1, double c2) {
    if (d1 < 1 || d2 < 1) throw invalid_input("sphere_product: factor dimensions must be >= 1");
    if (!(c1 > 0.0) || !(c2 > 0.0) || std::abs(1.0 / c1 + 1.0 / c2 - 1.0) > 1e-9)
        throw invalid_input("sphere_product: need positive curvatures with 1/c1 + 1/c2 = 1");
    const double r1 = 1.0 / std::sqrt(c1);
    const double r2 = 1.0 / std::sqrt(c2);
    const int n = d1 + d2;

    auto body = [d1, d2, r1, r2](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        const std::vector<S> x1(u.begin(), u.begin() + d1);
        const std::vector<S> x2(u.begin() + d1, u.end());
        const std::vector<S> s1 = detail::unit_sphere_point(x1);
        const std::vector<S> s2 = detail::unit_sphere_point(x2);
        std::vector<S> out;
        out.reserve(s1.size() + s2.size());
        for (const S& c : s1) out.push_back(c * r1);
        for (const S& c : s2) out.push_back(c * r2);
        return out;
    };
    std::ostringstream name;
    name << "sphere-product(" << d1 << "," << d2 << ")";
    return chart_from_body(name.str(), n, n + 2, 1.0, Eigen::VectorXd::Constant(n, -0.7),
                           Eigen::VectorXd::Constant(n, 0.7), body);
}

inline ImmersionChart clifford_torus() {
    ImmersionChart ch = sphere_product(1, 1, 2.0, 2.0);
    ch.name = "clifford-torus";
    return ch;
}

inline ImmersionChart torus_of_revolution(double ring = 2.0, double tube = 0.5) {
    if (!(ring > tube) || !(tube > 0.0))
        throw invalid_input("torus_of_revolution: need ring radius > tube radius > 0");
    auto body = [ring, tube](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::cos, std::sin;
        const S w = ring + tube * cos(u[1]);
        return std::vector<S>{w * cos(u[0]), w * sin(u[0]), tube * sin(u[1])};
    };
    return chart_from_body("torus-of-revolution", 2, 3, 0.0, Eigen::VectorXd::Constant(2, -3.0),
                           Eigen::VectorXd::Constant(2, 3.0), body);
}

inline ImmersionChart round_sphere(int n = 2, double r = 1.0) {
    if (n < 1 || !(r > 0.0)) throw invalid_input("round_sphere: bad parameters");
    auto body = [r](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        std::vector<S> s = detail::unit_sphere_point(std::vector<S>(u.begin(), u.end()));
        for (S& c : s) c = c * r;
        return s;
    };
    return chart_from_body("round-sphere", n, n + 1, 0.0, Eigen::VectorXd::Constant(n, -0.7),
                           Eigen::VectorXd::Constant(n, 0.7), body);
}

inline ImmersionChart flat_plane(int n = 2, int m = 3) {
    if (n < 1 || m <= n) throw invalid_input("flat_plane: need 1 <= n < m");
    auto body = [n, m](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        std::vector<S> out(u.begin(), u.end());
        for (int i = n; i < m; ++i) out.push_back(const_like(u[0], 0.0));
        return out;
    };
    return chart_from_body("flat-plane", n, m, 0.0, Eigen::VectorXd::Constant(n, -1.0),
                           Eigen::VectorXd::Constant(n, 1.0), body);
}

inline ImmersionChart ellipsoid(double a = 1.3, double b = 1.0, double c = 0.8) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) throw invalid_input("ellipsoid: bad semi-axes");
    auto body = [a, b, c](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::cos, std::sin;
        return std::vector<S>{a * (cos(u[0]) * cos(u[1])), b * (sin(u[0]) * cos(u[1])),
                              c * sin(u[1])};
    };
    Eigen::VectorXd lo(2), hi(2);
    lo << -3.0, -1.1;
    hi << 3.0, 1.1;
    return chart_from_body("ellipsoid", 2, 3, 0.0, lo, hi, body);
}

// Distance sphere of geodesic radius rho about (1, 0, ..., 0) in the unit
// sphere; a hypersurface chart with constant principal curvature |cot rho|.
inline ImmersionChart geodesic_sphere(int n = 2, double rho = 0.7) {
    if (n < 1 || !(rho > 0.0) || !(rho < M_PI)) throw invalid_input("geodesic_sphere: bad radius");
    auto body = [n, rho](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        const std::vector<S> s = detail::unit_sphere_point(std::vector<S>(u.begin(), u.end()));
        std::vector<S> out;
        out.reserve(s.size() + 1);
        out.push_back(const_like(u[0], std::cos(rho)));
        for (const S& c : s) out.push_back(c * std::sin(rho));
        return out;
    };
    return chart_from_body("geodesic-sphere", n, n + 2, 1.0, Eigen::VectorXd::Constant(n, -0.7),
                           Eigen::VectorXd::Constant(n, 0.7), body);
}

// Great circle in S^3; codimension-2 base for cyclide tubes.
inline ImmersionChart great_circle() {
    auto body = [](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::cos, std::sin;
        return std::vector<S>{cos(u[0]), sin(u[0]), const_like(u[0], 0.0),
                              const_like(u[0], 0.0)};
    };
    return chart_from_body("great-circle", 1, 4, 1.0, Eigen::VectorXd::Constant(1, -3.0),
                           Eigen::VectorXd::Constant(1, 3.0), body);
}

// Zero-dimensional chart (a single point); base case for cylinders.
inline ImmersionChart point_chart(const Eigen::VectorXd& q, double c = 0.0) {
    ImmersionChart ch;
    ch.name = "point";
    ch.intrinsic_dim = 0;
    ch.ambient_coords = static_cast<int>(q.size());
    ch.curvature = c;
    ch.domain_lo = Eigen::VectorXd(0);
    ch.domain_hi = Eigen::VectorXd(0);
    ch.eval = [q](const Eigen::VectorXd&) { return q; };
    ch.jet1 = [q](const Eigen::VectorXd&, Eigen::VectorXd& val, Eigen::MatrixXd& jac) {
        val = q;
        jac.resize(q.size(), 0);
    };
    ch.jet2 = [q](const Eigen::VectorXd&) {
        ChartJet jet;
        jet.value = q;
        jet.jacobian.resize(q.size(), 0);
        jet.hessian.assign(q.size(), Eigen::MatrixXd(0, 0));
        return jet;
    };
    return ch;
}

// ---- Mobius deformation ------------------------------------------------

namespace detail {

inline Eigen::MatrixXd seeded_rotation(int n, Rng& rng) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd qmat = qr.householderQ();
    const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
        if (rmat(i, i) < 0) qmat.col(i) *= -1.0;
    if (qmat.determinant() < 0) qmat.col(n - 1) *= -1.0;
    return qmat;
}

}  // namespace detail

// Conformal automorphism of S^m as a matrix of the group O(m+1, 1) acting on
// the projectivized light cone: rotation, boost of rapidity `strength` in the
// (e0, e1) plane, rotation.  The boost keeps the cone coordinate w0 >=
// exp(-strength) > 0 on the whole sphere, so the induced sphere map is
// globally smooth for every seed.
inline Eigen::MatrixXd random_mobius_matrix(int m, std::uint64_t seed, double strength = 0.4) {
    Rng rng(seed);
    const int dim = m + 2;
    Eigen::MatrixXd boost = Eigen::MatrixXd::Identity(dim, dim);
    boost(0, 0) = std::cosh(strength);
    boost(0, 1) = std::sinh(strength);
    boost(1, 0) = std::sinh(strength);
    boost(1, 1) = std::cosh(strength);
    Eigen::MatrixXd left = Eigen::MatrixXd::Identity(dim, dim);
    left.bottomRightCorner(m + 1, m + 1) = detail::seeded_rotation(m + 1, rng);
    Eigen::MatrixXd right = Eigen::MatrixXd::Identity(dim, dim);
    right.bottomRightCorner(m + 1, m + 1) = detail::seeded_rotation(m + 1, rng);
    return left * boost * right;
}

// Post-composes a unit-sphere chart with the conformal map of
// random_mobius_matrix.  Jets are composed in closed form (the cone lift is
// affine in f, the chart map is a quotient), so the deformed chart keeps the
// analytic-jet status of its base.
inline ImmersionChart mobius_deform(const ImmersionChart& base, std::uint64_t seed,
                                    double strength = 0.4) {
    if (base.curvature != 1.0)
        throw invalid_input("mobius_deform: base chart must map into the unit sphere");
    const int mc = base.ambient_coords;
    const Eigen::MatrixXd l = random_mobius_matrix(mc - 1, seed, strength);
    const Eigen::VectorXd l0 = l.col(0);
    const Eigen::MatrixXd lc = l.rightCols(mc);

    auto map_value = [l0, lc, mc](const Eigen::VectorXd& f) {
        const Eigen::VectorXd w = l0 + lc * f;
        return Eigen::VectorXd(w.tail(mc) / w(0));
    };

    ImmersionChart ch = base;
    ch.name = base.name + "+mobius";
    const auto base_eval = base.eval;
    const auto base_jet1 = base.jet1;
    const auto base_jet2 = base.jet2;

    ch.eval = [base_eval, map_value](const Eigen::VectorXd& u) { return map_value(base_eval(u)); };

    if (base_jet1) {
        ch.jet1 = [base_jet1, l0, lc, mc](const Eigen::VectorXd& u, Eigen::VectorXd& val,
                                          Eigen::MatrixXd& jac) {
            Eigen::VectorXd bval;
            Eigen::MatrixXd bjac;
            base_jet1(u, bval, bjac);
            const Eigen::VectorXd w = l0 + lc * bval;
            const Eigen::MatrixXd dw = lc * bjac;
            val = w.tail(mc) / w(0);
            jac.resize(mc, u.size());
            for (int kk = 0; kk < mc; ++kk)
                jac.row(kk) = (dw.row(kk + 1) - val(kk) * dw.row(0)) / w(0);
        };
    } else {
        ch.jet1 = nullptr;
    }

    if (base_jet2) {
        ch.jet2 = [base_jet2, l0, lc, mc](const Eigen::VectorXd& u) {
            const ChartJet bj = base_jet2(u);
            const int n = static_cast<int>(bj.jacobian.cols());
            const Eigen::VectorXd w = l0 + lc * bj.value;
            const Eigen::MatrixXd dw = lc * bj.jacobian;
            std::vector<Eigen::MatrixXd> hw(mc + 1, Eigen::MatrixXd::Zero(n, n));
            for (int i = 0; i <= mc; ++i)
                for (int j = 0; j < mc; ++j)
                    if (lc(i, j) != 0.0) hw[i] += lc(i, j) * bj.hessian[j];

            ChartJet jet;
            jet.value = w.tail(mc) / w(0);
            jet.jacobian.resize(mc, n);
            jet.hessian.assign(mc, Eigen::MatrixXd::Zero(n, n));
            const double b = w(0);
            const Eigen::VectorXd gb = dw.row(0).transpose();
            for (int kk = 0; kk < mc; ++kk) {
                const double v = jet.value(kk);
                const Eigen::VectorXd ga = dw.row(kk + 1).transpose();
                jet.jacobian.row(kk) = ((ga - v * gb) / b).transpose();
                jet.hessian[kk] = (hw[kk + 1] - v * hw[0] -
                                   (ga * gb.transpose() + gb * ga.transpose()) / b +
                                   2.0 * v * (gb * gb.transpose()) / b) /
                                  b;
            }
            return jet;
        };
    } else {
        ch.jet2 = nullptr;
    }
    return ch;
}

// ---- generalized cylinders ---------------------------------------------

using NormalField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Exponential image of the parallel flat normal subbundle spanned by
// `fields` along the base.  The fields must be G-orthonormal normal fields
// with vanishing normal-connection derivative; this is validated by sampling
// (pointwise parallelism via central differences, plus the loop integral of
// the connection form around coordinate squares) before the chart is built.
inline ImmersionChart generalized_cylinder_chart(const ImmersionChart& base,
                                                 std::vector<NormalField> fields,
                                                 double fiber_halfwidth = 0.8) {
    const int k = base.intrinsic_dim;
    const int q = static_cast<int>(fields.size());
    if (q < 1) throw invalid_input("generalized_cylinder_chart: no fiber directions supplied");
    const int coords = base.ambient_coords;
    const double c = base.curvature;
    const Eigen::VectorXd w = base.ambient_weights();

    auto gdot = [&w](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (w.array() * a.array() * b.array()).sum();
    };

    // Validation samples: domain center plus a few deterministic points.
    std::vector<Eigen::VectorXd> samples;
    if (k == 0) {
        samples.emplace_back(0);
    } else {
        samples.push_back(base.domain_center());
        const Eigen::VectorXd lo = base.domain_lo + 0.15 * (base.domain_hi - base.domain_lo);
        const Eigen::VectorXd hi = base.domain_hi - 0.15 * (base.domain_hi - base.domain_lo);
        for (auto& pt : box_covering(lo, hi, 4, 0x9a11c7ULL)) samples.push_back(pt);
    }

    const double h = 1e-5;
    double worst_parallel = 0.0;
    for (const auto& u : samples) {
        Eigen::VectorXd pos;
        Eigen::MatrixXd jac(coords, k);
        if (k > 0) {
            const FrameData fd = frame_data(base, u);
            pos = fd.position;
            jac = fd.jacobian;
        } else {
            pos = base.eval(u);
        }
        std::vector<Eigen::VectorXd> vals(q);
        for (int a = 0; a < q; ++a) {
            vals[a] = fields[a](u);
            if (vals[a].size() != coords)
                throw invalid_input("generalized_cylinder_chart: field has wrong ambient size");
        }
        for (int a = 0; a < q; ++a) {
            for (int b = a; b < q; ++b) {
                const double want = (a == b) ? 1.0 : 0.0;
                if (std::abs(gdot(vals[a], vals[b]) - want) > 1e-8)
                    throw invalid_input("generalized_cylinder_chart: fields not orthonormal");
            }
            for (int i = 0; i < k; ++i)
                if (std::abs(gdot(vals[a], jac.col(i))) > 1e-8)
                    throw invalid_input("generalized_cylinder_chart: field not normal to base");
            if (c != 0.0 && std::abs(gdot(vals[a], pos)) > 1e-8)
                throw invalid_input("generalized_cylinder_chart: field not tangent to the "
                                    "space form");
        }
        if (k == 0) continue;

        // Pointwise parallelism: project d V_a / d u_i onto the normal space.
        const FrameData fd = frame_data(base, u);
        for (int a = 0; a < q; ++a) {
            for (int i = 0; i < k; ++i) {
                Eigen::VectorXd up = u, um = u;
                up(i) += h;
                um(i) -= h;
                const Eigen::VectorXd dv = (fields[a](up) - fields[a](um)) / (2.0 * h);
                Eigen::VectorXd normal_part = Eigen::VectorXd::Zero(coords);
                for (int b = 0; b < fd.normal_frame.cols(); ++b)
                    normal_part += gdot(dv, fd.normal_frame.col(b)) * fd.normal_frame.col(b);
                worst_parallel = std::max(worst_parallel, normal_part.norm());
            }
        }
    }

    // Loop holonomy: integrate the connection form <V_a, dV_b> around a
    // coordinate square at the domain center (Simpson along each leg).
    double worst_holonomy = 0.0;
    if (k >= 2) {
        const Eigen::VectorXd u0 = base.domain_center();
        const double side = 0.1;
        auto gamma = [&](const Eigen::VectorXd& u, int dir, int a, int b) {
            Eigen::VectorXd up = u, um = u;
            up(dir) += h;
            um(dir) -= h;
            return gdot(fields[a](u), (fields[b](up) - fields[b](um)) / (2.0 * h));
        };
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                for (int a = 0; a < q; ++a) {
                    for (int b = 0; b < q; ++b) {
                        double loop = 0.0;
                        // Four legs of the square, Simpson with 3 nodes per leg.
                        const std::array<std::array<double, 2>, 4> starts = {
                            {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
                        const std::array<std::array<double, 2>, 4> dirs = {
                            {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
                        for (int leg = 0; leg < 4; ++leg) {
                            double acc = 0.0;
                            for (int node = 0; node < 3; ++node) {
                                const double s = 0.5 * node;
                                Eigen::VectorXd u = u0;
                                u(i) += side * (starts[leg][0] + s * dirs[leg][0]);
                                u(j) += side * (starts[leg][1] + s * dirs[leg][1]);
                                const double g = dirs[leg][0] != 0.0 ? gamma(u, i, a, b)
                                                                     : gamma(u, j, a, b);
                                const double sgn = dirs[leg][0] + dirs[leg][1];
                                const double weight = (node == 1) ? 4.0 : 1.0;
                                acc += weight * sgn * g;
                            }
                            loop += acc * side / 6.0;
                        }
                        worst_holonomy = std::max(worst_holonomy, std::abs(loop));
                    }
                }
            }
        }
    }
    if (worst_parallel > 1e-6 || worst_holonomy > 1e-6)
        throw invalid_input("generalized_cylinder_chart: subbundle not parallel/flat; "
                            "parallelism residual " + std::to_string(worst_parallel) +
                            ", holonomy residual " + std::to_string(worst_holonomy));

    const int n = k + q;
    ImmersionChart ch;
    ch.name = base.name + "+cylinder";
    ch.intrinsic_dim = n;
    ch.ambient_coords = coords;
    ch.curvature = c;
    ch.domain_lo.resize(n);
    ch.domain_hi.resize(n);
    ch.domain_lo.head(k) = base.domain_lo;
    ch.domain_hi.head(k) = base.domain_hi;
    ch.domain_lo.tail(q).setConstant(-fiber_halfwidth);
    ch.domain_hi.tail(q).setConstant(fiber_halfwidth);

    const auto base_eval = base.eval;
    ch.eval = [base_eval, fields, k, q, c, w](const Eigen::VectorXd& uv) {
        const Eigen::VectorXd u = uv.head(k);
        const Eigen::VectorXd s = uv.tail(q);
        const Eigen::VectorXd pos = base_eval(u);
        Eigen::VectorXd gam = Eigen::VectorXd::Zero(pos.size());
        for (int a = 0; a < q; ++a) gam += s(a) * fields[a](u);
        if (c == 0.0) return Eigen::VectorXd(pos + gam);
        const double rho2 = (w.array() * gam.array() * gam.array()).sum();
        if (c > 0.0) return Eigen::VectorXd(cos_sqrt(c * rho2) * pos + sinc_sqrt(c * rho2) * gam);
        return Eigen::VectorXd(cosh_sqrt(-c * rho2) * pos + sinhc_sqrt(-c * rho2) * gam);
    };
    return ch;
}

// ---- sphere envelopes --------------------------------------------------

struct RadiusFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;  // chart partials
};

// An envelope chart bundles the hypersurface chart with the sphere-center
// data (g, r) it was built from, so residual checks can see both sides.
struct EnvelopeChart {
    ImmersionChart chart;  // (u, t) -> R^{n+1}
    ImmersionChart base;   // g : L^k -> R^{n+1}
    RadiusFunction radius;
    int base_dim = 0;
    int fiber_sphere_dim = 0;  // n - k
};

// Envelope of the sphere family S(g(u), r(u)):
//   f = g - r grad r - r sqrt(1 - |grad r|^2) phi(u, t)
// with phi sweeping the unit sphere of the normal space of g.  The two
// defining identities |f-g|^2 = r^2 and <f-g, dg/du_i> = -r dr/du_i hold by
// construction; envelope_residuals measures them on samples.
inline EnvelopeChart envelope_chart(const ImmersionChart& base, RadiusFunction r,
                                    double t_halfwidth = 1.1) {
    if (base.curvature != 0.0)
        throw invalid_input("envelope_chart: sphere-center chart must be Euclidean");
    if (base.intrinsic_dim < 1) throw invalid_input("envelope_chart: base must have dim >= 1");
    const int k = base.intrinsic_dim;
    const int coords = base.ambient_coords;
    const int n = coords - 1;
    const int fs = n - k;
    if (fs < 1) throw invalid_input("envelope_chart: base codimension too small");

    EnvelopeChart env;
    env.base = base;
    env.radius = r;
    env.base_dim = k;
    env.fiber_sphere_dim = fs;

    ImmersionChart ch;
    ch.name = base.name + "+envelope";
    ch.intrinsic_dim = n;
    ch.ambient_coords = coords;
    ch.curvature = 0.0;
    ch.domain_lo.resize(n);
    ch.domain_hi.resize(n);
    ch.domain_lo.head(k) = base.domain_lo;
    ch.domain_hi.head(k) = base.domain_hi;
    ch.domain_lo.tail(fs).setConstant(-t_halfwidth);
    ch.domain_hi.tail(fs).setConstant(t_halfwidth);

    const ImmersionChart base_copy = base;
    ch.eval = [base_copy, r, k, fs](const Eigen::VectorXd& ut) {
        const Eigen::VectorXd u = ut.head(k);
        const FrameData fd = frame_data(base_copy, u);
        const double rv = r.value(u);
        if (!(rv > 0.0)) throw envelope_degenerate("envelope_chart: nonpositive radius");
        const Eigen::VectorXd gr = r.gradient(u);
        const Eigen::VectorXd a = fd.metric.ldlt().solve(gr);
        const double m2 = gr.dot(a);
        if (m2 >= 1.0) throw envelope_degenerate("envelope_chart: |grad r| >= 1 at sample");
        const Eigen::VectorXd grad_amb = fd.jacobian * a;
        const std::vector<double> t(ut.data() + k, ut.data() + k + fs);
        const std::vector<double> phi_hat = detail::unit_sphere_point(t);
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(fd.position.size());
        for (int b = 0; b < static_cast<int>(phi_hat.size()); ++b)
            phi += phi_hat[static_cast<std::size_t>(b)] * fd.normal_frame.col(b);
        return Eigen::VectorXd(fd.position - rv * grad_amb - rv * std::sqrt(1.0 - m2) * phi);
    };
    env.chart = std::move(ch);
    return env;
}

// Named envelope families with fully analytic bodies.

// Constant radius over a straight line: a circular cylinder.
inline EnvelopeChart envelope_cylinder(double radius = 0.3) {
    if (!(radius > 0.0)) throw invalid_input("envelope_cylinder: bad radius");
    auto line_body = [](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        return std::vector<S>{u[0], const_like(u[0], 0.0), const_like(u[0], 0.0)};
    };
    auto body = [radius](const auto& ut) {
        using S = typename std::decay_t<decltype(ut)>::value_type;
        const std::vector<S> phi = detail::unit_sphere_point(std::vector<S>{ut[1]});
        return std::vector<S>{ut[0], (-radius) * phi[0], (-radius) * phi[1]};
    };
    EnvelopeChart env;
    env.base = chart_from_body("line", 1, 3, 0.0, Eigen::VectorXd::Constant(1, -1.0),
                               Eigen::VectorXd::Constant(1, 1.0), line_body);
    env.radius.value = [radius](const Eigen::VectorXd&) { return radius; };
    env.radius.gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    env.base_dim = 1;
    env.fiber_sphere_dim = 1;
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, -1.1;
    hi << 1.0, 1.1;
    env.chart = chart_from_body("cylinder-envelope", 2, 3, 0.0, lo, hi, body);
    return env;
}

// Constant radius over a circle: a torus of revolution.
inline EnvelopeChart envelope_torus(double ring = 1.0, double radius = 0.3) {
    if (!(ring > radius) || !(radius > 0.0)) throw invalid_input("envelope_torus: bad radii");
    auto circle_body = [ring](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::cos, std::sin;
        return std::vector<S>{ring * cos(u[0]), ring * sin(u[0]), const_like(u[0], 0.0)};
    };
    auto body = [ring, radius](const auto& ut) {
        using S = typename std::decay_t<decltype(ut)>::value_type;
        using std::cos, std::sin;
        const std::vector<S> phi = detail::unit_sphere_point(std::vector<S>{ut[1]});
        const S w = ring - radius * phi[0];
        return std::vector<S>{w * cos(ut[0]), w * sin(ut[0]), (-radius) * phi[1]};
    };
    EnvelopeChart env;
    env.base = chart_from_body("circle", 1, 3, 0.0, Eigen::VectorXd::Constant(1, -3.0),
                               Eigen::VectorXd::Constant(1, 3.0), circle_body);
    env.radius.value = [radius](const Eigen::VectorXd&) { return radius; };
    env.radius.gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    env.base_dim = 1;
    env.fiber_sphere_dim = 1;
    Eigen::VectorXd lo(2), hi(2);
    lo << -3.0, -1.1;
    hi << 3.0, 1.1;
    env.chart = chart_from_body("torus-envelope", 2, 3, 0.0, lo, hi, body);
    return env;
}

// Seeded variable radius over the unit circle.  Amplitudes keep |r'| well
// below 1 and r well above 0, so the envelope stays immersed.
inline EnvelopeChart envelope_generic(std::uint64_t seed) {
    Rng rng(seed);
    const double r0 = rng.uniform(0.25, 0.35);
    const double a1 = rng.uniform(0.03, 0.08);
    const double a2 = rng.uniform(0.02, 0.05);
    const double p1 = rng.uniform(0.0, 2.0 * M_PI);
    const double p2 = rng.uniform(0.0, 2.0 * M_PI);

    auto circle_body = [](const auto& u) {
        using S = typename std::decay_t<decltype(u)>::value_type;
        using std::cos, std::sin;
        return std::vector<S>{cos(u[0]), sin(u[0]), const_like(u[0], 0.0)};
    };
    auto body = [r0, a1, a2, p1, p2](const auto& ut) {
        using S = typename std::decay_t<decltype(ut)>::value_type;
        using std::cos, std::sin, std::sqrt;
        const S& u = ut[0];
        const S r = r0 + a1 * sin(u + p1) + a2 * sin(2.0 * u + p2);
        const S rp = a1 * cos(u + p1) + 2.0 * a2 * cos(2.0 * u + p2);
        const S root = sqrt(1.0 - rp * rp);
        const std::vector<S> phi = detail::unit_sphere_point(std::vector<S>{ut[1]});
        // frame along the unit circle: tangent T = (-sin u, cos u, 0),
        // normals nu0 = (cos u, sin u, 0), nu1 = e3; grad r = r' T.
        const S co = cos(u), si = sin(u);
        const S f0 = co + r * rp * si - (r * root * phi[0]) * co;
        const S f1 = si - r * rp * co - (r * root * phi[0]) * si;
        const S f2 = -(r * root * phi[1]);
        return std::vector<S>{f0, f1, f2};
    };
    EnvelopeChart env;
    env.base = chart_from_body("circle", 1, 3, 0.0, Eigen::VectorXd::Constant(1, -3.0),
                               Eigen::VectorXd::Constant(1, 3.0), circle_body);
    env.radius.value = [r0, a1, a2, p1, p2](const Eigen::VectorXd& u) {
        return r0 + a1 * std::sin(u(0) + p1) + a2 * std::sin(2.0 * u(0) + p2);
    };
    env.radius.gradient = [a1, a2, p1, p2](const Eigen::VectorXd& u) {
        Eigen::VectorXd g(1);
        g(0) = a1 * std::cos(u(0) + p1) + 2.0 * a2 * std::cos(2.0 * u(0) + p2);
        return g;
    };
    env.base_dim = 1;
    env.fiber_sphere_dim = 1;
    Eigen::VectorXd lo(2), hi(2);
    lo << -3.0, -1.1;
    hi << 3.0, 1.1;
    env.chart = chart_from_body("generic-envelope", 2, 3, 0.0, lo, hi, body);
    return env;
}

// Max residuals of the two envelope identities over a deterministic sample
// of the (u, t) domain: (max | |f-g|^2 - r^2 |, max |<f-g, dg_i> + r r_i|).
inline std::pair<double, double> envelope_residuals(const EnvelopeChart& env, int samples = 200,
                                                    std::uint64_t seed = 7) {
    double res_a = 0.0, res_b = 0.0;
    const auto pts = box_covering(env.chart.domain_lo, env.chart.domain_hi, samples, seed);
    for (const auto& ut : pts) {
        const Eigen::VectorXd u = ut.head(env.base_dim);
        const Eigen::VectorXd f = env.chart.eval(ut);
        Eigen::VectorXd g;
        Eigen::MatrixXd jac;
        chart_jet1(env.base, u, g, jac);
        const double rv = env.radius.value(u);
        const Eigen::VectorXd gr = env.radius.gradient(u);
        const Eigen::VectorXd d = f - g;
        res_a = std::max(res_a, std::abs(d.squaredNorm() - rv * rv));
        for (int i = 0; i < env.base_dim; ++i)
            res_b = std::max(res_b, std::abs(d.dot(jac.col(i)) + rv * gr(i)));
    }
    return {res_a, res_b};
}

// The fiber spheres S(g(u), r(u)) are curvature spheres of the envelope:
// with the unit normal oriented away from the center, the spectrum has a
// cluster at 1/r whose multiplicity is the fiber dimension n - k.  Returns
// the worst |value - 1/r| over interior samples and the multiplicity of the
// nearest cluster (the smallest seen, so a broken sample shows up).
struct EnvelopeClusterReport {
    double value_residual = 0.0;
    int multiplicity = 0;
};

inline EnvelopeClusterReport envelope_cluster_check(const EnvelopeChart& env, int samples = 32,
                                                    std::uint64_t seed = 11) {
    const Eigen::VectorXd span = env.chart.domain_hi - env.chart.domain_lo;
    const Eigen::VectorXd lo = env.chart.domain_lo + 0.1 * span;
    const Eigen::VectorXd hi = env.chart.domain_hi - 0.1 * span;
    EnvelopeClusterReport out;
    out.multiplicity = env.chart.intrinsic_dim;
    for (const auto& ut : box_covering(lo, hi, samples, seed)) {
        const FundamentalForms ff = fundamental_forms(env.chart, ut);
        const Eigen::VectorXd u = ut.head(env.base_dim);
        const Eigen::VectorXd center = env.base.eval(u);
        const double rv = env.radius.value(u);
        // Gram-Schmidt picks an arbitrary sheet; flip onto the outward one.
        const double side = ff.normal_frame.col(0).dot(ff.position - center) >= 0.0 ? 1.0 : -1.0;
        const ShapeSpectrum spec = principal_spectrum(ff, Eigen::VectorXd::Constant(1, side),
                                                      env.chart.default_cluster_tol());
        double best = std::numeric_limits<double>::infinity();
        int mult = 0;
        for (const auto& cl : spec.clusters)
            if (std::abs(cl.value - 1.0 / rv) < best) {
                best = std::abs(cl.value - 1.0 / rv);
                mult = cl.multiplicity;
            }
        out.value_residual = std::max(out.value_residual, best);
        out.multiplicity = std::min(out.multiplicity, mult);
    }
    return out;
}

// ---- name-based factory ------------------------------------------------

// Parses "name" or "name:p1,p2,..." into a chart.  Unknown names raise
// invalid_input, which the CLI maps to a usage error.
inline ImmersionChart builtin_chart(const std::string& spec) {
    std::string name = spec;
    std::vector<double> params;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                params.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw invalid_input("builtin_chart: bad parameter '" + tok + "' in " + spec);
            }
        }
    }
    auto param = [&params](std::size_t i, double fallback) {
        return i < params.size() ? params[i] : fallback;
    };

    if (name == "veronese-R") return veronese(Algebra::R, static_cast<int>(param(0, 0)));
    if (name == "veronese-C") return veronese(Algebra::C, static_cast<int>(param(0, 0)));
    if (name == "veronese-H") return veronese(Algebra::H, static_cast<int>(param(0, 0)));
    if (name == "veronese-O") return veronese(Algebra::O, static_cast<int>(param(0, 0)));
    if (name == "sphere-product")
        return sphere_product(static_cast<int>(param(0, 1)), static_cast<int>(param(1, 1)),
                              param(2, 2.0), param(3, 2.0));
    if (name == "clifford-torus") return clifford_torus();
    if (name == "torus-of-revolution") return torus_of_revolution(param(0, 2.0), param(1, 0.5));
    if (name == "round-sphere") return round_sphere(static_cast<int>(param(0, 2)), param(1, 1.0));
    if (name == "flat-plane")
        return flat_plane(static_cast<int>(param(0, 2)), static_cast<int>(param(1, 3)));
    if (name == "ellipsoid") return ellipsoid(param(0, 1.3), param(1, 1.0), param(2, 0.8));
    if (name == "geodesic-sphere")
        return geodesic_sphere(static_cast<int>(param(0, 2)), param(1, 0.7));
    if (name == "great-circle") return great_circle();
    throw invalid_input("builtin_chart: unknown chart '" + name + "'");
}

}  // namespace dupin

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dupin/charts.hpp"
#include "dupin/errors.hpp"
#include "dupin/immersion.hpp"
#include "dupin/liesphere.hpp"
#include "dupin/minkowski.hpp"
#include "dupin/rng.hpp"

// Legendre lifts of unit-sphere immersions, their curvature spheres, tubes
// and focal loci, the action of quadric-preserving transformations on lifts,
// and a numerical span test for reducibility.
//
// A sample of the unit normal bundle is a pair (u, w): u a chart point of
// the base, w a unit coefficient vector against the deterministic normal
// frame at u, so xi = sum_a w_a nu_a(u).  No global normal frame is assumed.

namespace dupin {

// ---- lift samples ------------------------------------------------------

struct LiftSample {
    Eigen::VectorXd u;         // base chart point
    Eigen::VectorXd w;         // unit frame coefficients, size p
    Eigen::VectorXd position;  // f(u) on the unit sphere
    Eigen::VectorXd xi;        // unit normal at f(u)
    SignedVector y1;           // (1, f, 0): the point sphere at f
    SignedVector yend;         // (0, xi, 1): the great sphere normal to xi
};

struct LegendreLift {
    ImmersionChart base;
    int p = 1;  // codimension

    int n() const { return base.intrinsic_dim; }
    int d() const { return base.intrinsic_dim + p; }

    LiftSample at(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
        if (w.size() != p) throw contract_violation("LegendreLift: coefficient size != p");
        if (std::abs(w.norm() - 1.0) > 1e-8)
            throw invalid_input("LegendreLift: normal coefficients must be unit length");
        const FrameData fd = frame_data(base, u);
        LiftSample s;
        s.u = u;
        s.w = w;
        s.position = fd.position;
        s.xi = fd.normal_frame * w;
        const int dim = d() + 3;
        const Signature sig = lie_signature(d());
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        a(0) = 1.0;
        a.segment(1, dim - 2) = s.position;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
        b.segment(1, dim - 2) = s.xi;
        b(dim - 1) = 1.0;
        s.y1 = SignedVector(sig, a);
        s.yend = SignedVector(sig, b);
        return s;
    }
};

// Lifts a unit-sphere immersion to its Legendre submanifold.  Charts into
// other space forms must be conformally repositioned onto the sphere first
// (similarity / stereographic charts); this is the only supported route.
inline LegendreLift legendre_lift(const ImmersionChart& chart) {
    if (chart.curvature != 1.0)
        throw invalid_input("legendre_lift: chart must map into the unit sphere; compose with "
                            "the similarity or stereographic chart first");
    LegendreLift lift;
    lift.base = chart;
    lift.p = chart.codim();
    if (lift.p < 1) throw invalid_input("legendre_lift: chart has no normal directions");
    return lift;
}

// ---- curvature spheres -------------------------------------------------

// A degenerate sphere of the parabolic pencil through (Y1, Yend): the
// representative is value * Y1 + Yend for finite values and Y1 itself for
// the infinite one.  principal_space_basis holds the directions realizing
// the rank drop: intrinsic tangent coordinates (n rows) for finite spheres,
// normal-frame coefficients (p rows, orthogonal to w) for the infinite one.
struct CurvatureSphere {
    ProjectivePoint representative;
    bool infinite = false;
    double principal_value = 0.0;  // meaningful only when !infinite
    int multiplicity = 1;
    Eigen::MatrixXd principal_space_basis;
    bool collided = false;            // cluster merged distinct nearby values
    double degeneracy_residual = 0.0; // tube-differential collapse along the basis
};

inline std::vector<CurvatureSphere> curvature_spheres(const LegendreLift& lift,
                                                      const Eigen::VectorXd& u,
                                                      const Eigen::VectorXd& w,
                                                      double cluster_tol = -1.0) {
    if (cluster_tol <= 0.0) cluster_tol = lift.base.default_cluster_tol();
    const LiftSample s = lift.at(u, w);
    const FundamentalForms ff = fundamental_forms(lift.base, u);
    const ShapeSpectrum spec = principal_spectrum(ff, w, cluster_tol);
    const Signature sig = lie_signature(lift.d());

    std::vector<CurvatureSphere> out;
    for (const SpectrumCluster& cl : spec.clusters) {
        CurvatureSphere cs;
        cs.infinite = false;
        cs.principal_value = -cl.value;  // pencil parameter of the degenerate sphere
        cs.multiplicity = cl.multiplicity;
        cs.representative =
            ProjectivePoint(SignedVector(sig, cs.principal_value * s.y1.coords + s.yend.coords));
        cs.principal_space_basis = spec.eigenbasis.middleCols(cl.first, cl.multiplicity);
        double spread = 0.0;
        for (int j = 0; j < cl.multiplicity; ++j)
            spread = std::max(spread, std::abs(spec.eigenvalues(cl.first + j) - cl.value));
        cs.collided = cl.multiplicity > 1 && spread > 1e-9;
        // The tube at t = arccot(value) collapses along the cluster: rows
        // J (cos t I + sin t A) X_j vanish there.
        const double t = std::atan2(1.0, cs.principal_value);
        const Eigen::MatrixXd a = shape_operator(ff, w);
        const Eigen::MatrixXd collapse =
            ff.jacobian * ((std::cos(t) * Eigen::MatrixXd::Identity(ff.n(), ff.n()) +
                            std::sin(t) * a) *
                           cs.principal_space_basis);
        cs.degeneracy_residual = collapse.cwiseAbs().maxCoeff();
        out.push_back(std::move(cs));
    }

    if (lift.p >= 2) {
        // The point-sphere family [Y1] with multiplicity p-1: moving xi in
        // its fiber (eta orthogonal to xi) leaves (1, f, 0) exactly fixed.
        CurvatureSphere cs;
        cs.infinite = true;
        cs.multiplicity = lift.p - 1;
        cs.representative = ProjectivePoint(s.y1);
        Eigen::MatrixXd basis(lift.p, lift.p - 1);
        int got = 0;
        for (int axis = 0; axis < lift.p && got < lift.p - 1; ++axis) {
            Eigen::VectorXd v = Eigen::VectorXd::Unit(lift.p, axis);
            v -= v.dot(w) * w;
            for (int j = 0; j < got; ++j) v -= v.dot(basis.col(j)) * basis.col(j);
            if (v.norm() < 1e-8) continue;
            basis.col(got++) = v.normalized();
        }
        if (got < lift.p - 1)
            throw degenerate_chart("curvature_spheres: could not frame the normal fiber");
        cs.principal_space_basis = basis;
        cs.degeneracy_residual = 0.0;  // fiber derivative of (1, f, 0) is identically zero
        out.push_back(std::move(cs));
    }
    return out;
}

// ---- tubes and focal points --------------------------------------------

// Tube of geodesic radius t: f_t(x, xi) = cos t f(x) + sin t xi.  For p = 1
// the domain is the base chart; for p >= 2 it is (u, s) with s a chart of
// the fiber sphere, xi = sum_a phihat_a(s) nu_a(u).
inline ImmersionChart tube_chart(const ImmersionChart& chart, double t) {
    if (chart.curvature != 1.0)
        throw invalid_input("tube_chart: chart must map into the unit sphere");
    const int p = chart.codim();
    const int n = chart.intrinsic_dim;
    if (p < 1) throw invalid_input("tube_chart: chart has no normal directions");
    const int fiber = p - 1;

    ImmersionChart ch;
    ch.name = chart.name + "+tube";
    ch.intrinsic_dim = n + fiber;
    ch.ambient_coords = chart.ambient_coords;
    ch.curvature = 1.0;
    ch.domain_lo.resize(n + fiber);
    ch.domain_hi.resize(n + fiber);
    ch.domain_lo.head(n) = chart.domain_lo;
    ch.domain_hi.head(n) = chart.domain_hi;
    ch.domain_lo.tail(fiber).setConstant(-1.0);
    ch.domain_hi.tail(fiber).setConstant(1.0);

    const ImmersionChart base = chart.without_jets();
    ch.eval = [base, t, n, p, fiber](const Eigen::VectorXd& us) {
        const Eigen::VectorXd u = us.head(n);
        const FrameData fd = frame_data(base, u);
        Eigen::VectorXd xi;
        if (p == 1) {
            xi = fd.normal_frame.col(0);
        } else {
            const std::vector<double> s(us.data() + n, us.data() + n + fiber);
            const std::vector<double> phi = detail::unit_sphere_point(s);
            xi = Eigen::VectorXd::Zero(fd.position.size());
            for (int a = 0; a < p; ++a) xi += phi[static_cast<std::size_t>(a)] * fd.normal_frame.col(a);
        }
        return Eigen::VectorXd(std::cos(t) * fd.position + std::sin(t) * xi);
    };
    return ch;
}

// Rank analysis of the tube differential at one unit-normal sample, using
// the displayed form of the differential: tangent columns
// J (cos t I + sin t A_xi) and fiber columns sin t * eta.
struct FocalReport {
    int rank = 0;
    int drop = 0;           // (n + p - 1) - rank
    int expected_drop = 0;  // multiplicity of cot t among the sphere values
    Eigen::VectorXd singular_values;
    double cot_t = 0.0;
};

inline FocalReport focal_detect(const ImmersionChart& chart, double t, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& w, double sv_tol = 1e-6) {
    const LegendreLift lift = legendre_lift(chart);
    const FundamentalForms ff = fundamental_forms(chart, u);
    const int n = ff.n();
    const int p = ff.p();
    const Eigen::MatrixXd a = shape_operator(ff, w);

    Eigen::MatrixXd diff(chart.ambient_coords, n + p - 1);
    diff.leftCols(n) =
        ff.jacobian * (std::cos(t) * Eigen::MatrixXd::Identity(n, n) + std::sin(t) * a);
    // fiber directions: orthonormal complement of w inside the normal frame
    Eigen::MatrixXd fiber_basis(p, std::max(p - 1, 1));
    int got = 0;
    for (int axis = 0; axis < p && got < p - 1; ++axis) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(p, axis);
        v -= v.dot(w) * w;
        for (int j = 0; j < got; ++j) v -= v.dot(fiber_basis.col(j)) * fiber_basis.col(j);
        if (v.norm() < 1e-8) continue;
        fiber_basis.col(got) = v.normalized();
        diff.col(n + got) = std::sin(t) * (ff.normal_frame * fiber_basis.col(got));
        ++got;
    }
    if (got < p - 1) throw degenerate_chart("focal_detect: could not frame the normal fiber");

    FocalReport rep;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
    rep.singular_values = svd.singularValues();
    rep.rank = 0;
    for (int i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values(i) > sv_tol) ++rep.rank;
    rep.drop = static_cast<int>(diff.cols()) - rep.rank;
    rep.cot_t = std::cos(t) / std::sin(t);

    const double cluster_tol = chart.default_cluster_tol();
    rep.expected_drop = 0;
    for (const CurvatureSphere& cs : curvature_spheres(lift, u, w)) {
        if (cs.infinite) {
            if (std::abs(std::sin(t)) <= 1e-9) rep.expected_drop += cs.multiplicity;
        } else if (std::abs(cs.principal_value - rep.cot_t) <= std::max(cluster_tol, 1e-9) *
                                                                  (1.0 + std::abs(rep.cot_t))) {
            rep.expected_drop += cs.multiplicity;
        }
    }
    return rep;
}

// Shift rule for tube spectra: a sphere of pencil value kappa at radius 0
// appears at radius t with value cot(arccot kappa - t); the point-sphere
// family enters at -cot t.
inline double tube_shifted_value(double pencil_value, double t) {
    return 1.0 / std::tan(std::atan2(1.0, pencil_value) - t);
}

// ---- transformed lifts -------------------------------------------------

struct TransformedLiftSample {
    bool gauge_ok = true;
    SignedVector y1;           // (1, f', 0) after gauge extraction
    SignedVector yend;         // (0, xi', 1)
    Eigen::VectorXd position;  // f'
    Eigen::VectorXd xi;        // xi'
};

// The image of a Legendre lift under a quadric-preserving map, re-expressed
// in the point-sphere/great-sphere gauge.  The pencil spanned by the two
// image vectors is intersected with the affine slices (first, last) = (1, 0)
// and (0, 1); a degenerate 2x2 system marks the improper configuration.
struct TransformedLift {
    LieTransformation g;
    LegendreLift lift;

    TransformedLiftSample at(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
        const LiftSample s = lift.at(u, w);
        const Eigen::VectorXd z1 = g.map.mat * s.y1.coords;
        const Eigen::VectorXd zend = g.map.mat * s.yend.coords;
        const int dim = static_cast<int>(z1.size());

        TransformedLiftSample out;
        Eigen::Matrix2d m;
        m << z1(0), zend(0), z1(dim - 1), zend(dim - 1);
        const double scale = m.cwiseAbs().maxCoeff();
        if (std::abs(m.determinant()) < 1e-10 * std::max(1.0, scale * scale)) {
            out.gauge_ok = false;
            out.y1 = SignedVector(g.map.sig, z1);
            out.yend = SignedVector(g.map.sig, zend);
            return out;
        }
        const Eigen::Vector2d ab1 = m.inverse() * Eigen::Vector2d(1.0, 0.0);
        const Eigen::Vector2d ab2 = m.inverse() * Eigen::Vector2d(0.0, 1.0);
        out.y1 = SignedVector(g.map.sig, ab1(0) * z1 + ab1(1) * zend);
        out.yend = SignedVector(g.map.sig, ab2(0) * z1 + ab2(1) * zend);
        out.position = out.y1.coords.segment(1, dim - 2);
        out.xi = out.yend.coords.segment(1, dim - 2);
        return out;
    }
};

inline TransformedLift apply_lie_to_lift(const LieTransformation& g, const LegendreLift& lift) {
    if (g.map.sig.kind != SignatureKind::Lie || g.map.sig.d != lift.d())
        throw contract_violation("apply_lie_to_lift: signature mismatch with lift dimension");
    return {g, lift};
}

// ---- reducibility ------------------------------------------------------

struct ReducibilityReport {
    int rank = 0;
    int ambient_dim = 0;        // d + 3
    bool reducible_candidate = false;  // span codimension >= 2
    Eigen::VectorXd singular_values;
    int samples_used = 0;
};

// Numerical span of one curvature-sphere family over the unit normal
// bundle.  Families are indexed by sorting finite pencil values ascending,
// with the infinite family last.  Constant multiplicity across samples is a
// precondition; its violation aborts rather than mixing families.
//
// For p = 1 the unit normal bundle is a double cover of the chart and the
// per-point frame carries no preferred orientation; samples are kept on one
// sheet by choosing, at each point, the orientation whose sorted value
// pattern is nearer the first sample's (a frame flip negates the spectrum).
//
// sv_tol <= 0 picks the chart's jet noise floor: 1e-8 with analytic jets,
// 1e-5 with divided-difference jets.
inline ReducibilityReport reducibility_rank(const LegendreLift& lift, int sphere_index,
                                            int sample_count = 64,
                                            std::uint64_t seed = 0x5eedULL,
                                            double sv_tol = 0.0) {
    if (sv_tol <= 0.0) sv_tol = lift.base.has_analytic_jet() ? 1e-8 : 1e-5;
    const int dim = lift.d() + 3;
    if (sample_count < dim)
        throw insufficient_samples("reducibility_rank: need at least d + 3 samples");

    const auto points = box_covering(lift.base.domain_lo, lift.base.domain_hi, sample_count, seed);
    const auto normals = sphere_covering(lift.p, sample_count + sample_count % 2, seed ^ 0x9e37ULL);

    auto sorted_spheres = [&lift](const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
        auto spheres = curvature_spheres(lift, u, w);
        std::sort(spheres.begin(), spheres.end(),
                  [](const CurvatureSphere& a, const CurvatureSphere& b) {
                      if (a.infinite != b.infinite) return b.infinite;
                      return a.principal_value < b.principal_value;
                  });
        return spheres;
    };
    auto value_gap = [](const std::vector<CurvatureSphere>& a,
                        const std::vector<CurvatureSphere>& b) {
        if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
        double gap = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].infinite != b[i].infinite) return std::numeric_limits<double>::infinity();
            if (!a[i].infinite) gap += std::abs(a[i].principal_value - b[i].principal_value);
        }
        return gap;
    };

    Eigen::MatrixXd rows(sample_count, dim);
    int expected_mult = -1;
    std::vector<CurvatureSphere> reference;
    for (int i = 0; i < sample_count; ++i) {
        auto spheres = sorted_spheres(points[i], normals[i]);
        if (lift.p == 1) {
            if (reference.empty()) {
                reference = spheres;
            } else {
                auto flipped = sorted_spheres(points[i], Eigen::VectorXd(-normals[i]));
                if (value_gap(flipped, reference) < value_gap(spheres, reference))
                    spheres = std::move(flipped);
            }
        }
        if (sphere_index < 0 || sphere_index >= static_cast<int>(spheres.size()))
            throw invalid_input("reducibility_rank: sphere_index out of range at a sample");
        const CurvatureSphere& cs = spheres[static_cast<std::size_t>(sphere_index)];
        if (expected_mult < 0) expected_mult = cs.multiplicity;
        if (cs.multiplicity != expected_mult)
            throw contract_violation("reducibility_rank: family multiplicity varies over "
                                     "samples");
        rows.row(i) = cs.representative.rep.coords.normalized();
    }

    ReducibilityReport rep;
    rep.ambient_dim = dim;
    rep.samples_used = sample_count;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
    rep.singular_values = svd.singularValues();
    for (int i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values(i) > sv_tol) ++rep.rank;
    rep.reducible_candidate = rep.rank <= dim - 2;
    return rep;
}

}  // namespace dupin

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "dupin/charts.hpp"
#include "dupin/legendre.hpp"
#include "dupin/rng.hpp"

using namespace dupin;

TEST_CASE("legendre lifts satisfy the contact conditions") {
    for (const char* name : {"veronese-R", "clifford-torus", "great-circle"}) {
        const ImmersionChart ch = builtin_chart(name);
        const LegendreLift lift = legendre_lift(ch);
        INFO(name);
        REQUIRE(lift.n() == ch.intrinsic_dim);
        REQUIRE(lift.d() == ch.intrinsic_dim + lift.p);

        Rng rng(61);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd u = ch.domain_lo +
                                0.5 * (ch.domain_hi - ch.domain_lo) +
                                0.2 * rng.gaussian_vector(ch.intrinsic_dim);
            u = u.cwiseMax(ch.domain_lo).cwiseMin(ch.domain_hi);
            const Eigen::VectorXd w = rng.unit_vector(lift.p);
            const LiftSample s = lift.at(u, w);
            REQUIRE(std::abs(signed_quadrance(s.y1)) < 1e-12);
            REQUIRE(std::abs(signed_quadrance(s.yend)) < 1e-12);
            REQUIRE(std::abs(signed_inner(s.y1, s.yend)) < 1e-10);
            REQUIRE(std::abs(s.position.norm() - 1.0) < 1e-10);
            REQUIRE(std::abs(s.xi.norm() - 1.0) < 1e-8);
            REQUIRE(std::abs(s.position.dot(s.xi)) < 1e-8);
        }
    }
}

TEST_CASE("lift input validation") {
    REQUIRE_THROWS_AS(legendre_lift(round_sphere(2, 1.0)), invalid_input);  // euclidean chart
    const LegendreLift lift = legendre_lift(veronese(Algebra::R));
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    REQUIRE_THROWS_AS(lift.at(lift.base.domain_center(), w), invalid_input);
    REQUIRE_THROWS_AS(lift.at(lift.base.domain_center(), Eigen::VectorXd::Unit(3, 0)),
                      contract_violation);
}

TEST_CASE("curvature spheres of the quadratic projective chart") {
    const ImmersionChart ch = veronese(Algebra::R);
    const LegendreLift lift = legendre_lift(ch);
    const Eigen::VectorXd u = ch.domain_center();
    const Eigen::VectorXd w = Eigen::VectorXd::Unit(2, 0);
    const LiftSample s = lift.at(u, w);
    const auto spheres = curvature_spheres(lift, u, w);

    // Two simple finite spheres plus the point-sphere family of rank p - 1.
    REQUIRE(spheres.size() == 3);
    int finite = 0, infinite = 0, total_mult = 0;
    for (const auto& cs : spheres) {
        total_mult += cs.multiplicity;
        if (cs.infinite) {
            ++infinite;
            REQUIRE(cs.multiplicity == 1);
            REQUIRE(projective_equal(cs.representative, ProjectivePoint(s.y1), 1e-10));
            REQUIRE(cs.degeneracy_residual == 0.0);
        } else {
            ++finite;
            REQUIRE(cs.multiplicity == 1);
            REQUIRE(std::abs(std::abs(cs.principal_value) - 1.0 / std::sqrt(3.0)) < 1e-9);
            const SignedVector pencil{s.y1.sig,
                                      cs.principal_value * s.y1.coords + s.yend.coords};
            REQUIRE(projective_equal(cs.representative, ProjectivePoint(pencil), 1e-10));
            REQUIRE(std::abs(signed_quadrance(cs.representative.rep)) < 1e-10);
            // The tube differential collapses along the principal direction.
            REQUIRE(cs.degeneracy_residual < 1e-8);
            REQUIRE_FALSE(cs.collided);
        }
    }
    REQUIRE(finite == 2);
    REQUIRE(infinite == 1);
    REQUIRE(total_mult == lift.n() + lift.p - 1);
}

TEST_CASE("complex chart carries a double point-sphere family") {
    const ImmersionChart ch = veronese(Algebra::C);
    const LegendreLift lift = legendre_lift(ch);
    Rng rng(66);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd u = ch.domain_center() +
                                  Eigen::VectorXd(0.15 * rng.gaussian_vector(4));
        const Eigen::VectorXd w = rng.unit_vector(3);
        const auto spheres = curvature_spheres(lift, u, w);
        int total = 0;
        int infinite_mult = 0;
        std::vector<double> finite_values;
        for (const auto& cs : spheres) {
            total += cs.multiplicity;
            if (cs.infinite)
                infinite_mult = cs.multiplicity;
            else
                finite_values.push_back(cs.principal_value);
        }
        REQUIRE(infinite_mult == 2);
        REQUIRE(total == 6);  // n + p - 1
        REQUIRE(finite_values.size() == 2);
        std::sort(finite_values.begin(), finite_values.end());
        REQUIRE(std::abs(finite_values[0] + finite_values[1]) < 1e-8);
    }
}

TEST_CASE("tube charts shift the spectrum by a cotangent law") {
    const ImmersionChart base = veronese(Algebra::R);
    const ImmersionChart tube = tube_chart(base, 0.4);
    REQUIRE(tube.intrinsic_dim == 3);  // n + (p - 1)
    REQUIRE(tube.curvature == 1.0);
    REQUIRE(tube.name == base.name + "+tube");

    const Eigen::VectorXd u = tube.domain_center();
    const FundamentalForms ff = fundamental_forms(tube, u);
    const ShapeSpectrum sp = principal_spectrum(ff, Eigen::VectorXd::Unit(1, 0),
                                                tube.default_cluster_tol());
    REQUIRE(sp.eigenvalues.size() == 3);

    const double c = 1.0 / std::sqrt(3.0);
    std::vector<double> predicted = {
        tube_shifted_value(c, 0.4), tube_shifted_value(-c, 0.4),
        tube_shifted_value(std::numeric_limits<double>::infinity(), 0.4)};
    std::vector<double> got(sp.eigenvalues.data(), sp.eigenvalues.data() + 3);
    // The tube's fiber orientation negates the sheet; compare as multisets.
    for (auto& v : predicted) v = -v;
    std::sort(predicted.begin(), predicted.end());
    std::sort(got.begin(), got.end());
    for (int i = 0; i < 3; ++i) REQUIRE(got[i] == Catch::Approx(predicted[i]).margin(1e-5));
}

TEST_CASE("cotangent shift law") {
    REQUIRE(tube_shifted_value(0.7, 0.0) == Catch::Approx(0.7).margin(1e-12));
    // Shifting by t then by -t returns the start.
    const double once = tube_shifted_value(0.7, 0.25);
    REQUIRE(tube_shifted_value(once, -0.25) == Catch::Approx(0.7).margin(1e-12));
    // cot(acot(k) - t) for k = cot(s) is cot(s - t).
    const double s = 1.1, t = 0.3;
    REQUIRE(tube_shifted_value(1.0 / std::tan(s), t) ==
            Catch::Approx(1.0 / std::tan(s - t)).margin(1e-12));
}

TEST_CASE("focal radii are flagged by rank drops") {
    const ImmersionChart ch = veronese(Algebra::R);
    const Eigen::VectorXd u = ch.domain_center();
    const Eigen::VectorXd w = Eigen::VectorXd::Unit(2, 0);
    const double focal_t = std::atan2(std::sqrt(3.0), 1.0);  // cot t = 1/sqrt(3)

    const FocalReport at_focal = focal_detect(ch, focal_t, u, w);
    REQUIRE(at_focal.drop == 1);
    REQUIRE(at_focal.expected_drop == 1);
    REQUIRE(at_focal.rank == 2);
    REQUIRE(at_focal.cot_t == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-12));

    const FocalReport generic = focal_detect(ch, 0.5, u, w);
    REQUIRE(generic.drop == 0);
    REQUIRE(generic.expected_drop == 0);
    REQUIRE(generic.rank == 3);
}

TEST_CASE("quadric-preserving maps act on lifts") {
    const ImmersionChart ch = veronese(Algebra::R);
    const LegendreLift lift = legendre_lift(ch);
    const Eigen::VectorXd u = ch.domain_center();
    Eigen::VectorXd w(2);
    w << std::sqrt(0.5), std::sqrt(0.5);
    const LiftSample s = lift.at(u, w);

    SECTION("parallel transformations rotate position against normal") {
        const double t = 0.3;
        const TransformedLift moved = apply_lie_to_lift(
            parallel_transformation(LieKind::ParallelSpherical, t, lift.d()), lift);
        const TransformedLiftSample ts = moved.at(u, w);
        REQUIRE(ts.gauge_ok);
        const Eigen::VectorXd f_pred = std::cos(t) * s.position - std::sin(t) * s.xi;
        const Eigen::VectorXd xi_pred = std::sin(t) * s.position + std::cos(t) * s.xi;
        REQUIRE((ts.position - f_pred).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((ts.xi - xi_pred).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("rotations act coordinate-wise") {
        const int dim = lift.d() + 2;  // mobius coordinates
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(dim, dim);
        const double a = 0.7;
        // Rotate two spacelike axes of the point block.
        rot(1, 1) = std::cos(a);
        rot(1, 2) = -std::sin(a);
        rot(2, 1) = std::sin(a);
        rot(2, 2) = std::cos(a);
        const TransformedLift moved = apply_lie_to_lift(
            mobius_extend(OrthogonalMap(mobius_signature(lift.d()), rot)), lift);
        const TransformedLiftSample ts = moved.at(u, w);
        REQUIRE(ts.gauge_ok);
        Eigen::VectorXd f_pred = s.position;
        f_pred(0) = std::cos(a) * s.position(0) - std::sin(a) * s.position(1);
        f_pred(1) = std::sin(a) * s.position(0) + std::cos(a) * s.position(1);
        REQUIRE((ts.position - f_pred).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("signature mismatch is rejected") {
        REQUIRE_THROWS_AS(
            apply_lie_to_lift(parallel_transformation(LieKind::ParallelSpherical, 0.1, 2),
                              lift),
            contract_violation);
    }
}

TEST_CASE("sphere families span or collapse") {
    SECTION("irreducible chart: every family fills the ambient space") {
        const LegendreLift lift = legendre_lift(veronese(Algebra::R));
        for (int family = 0; family < 3; ++family) {
            const ReducibilityReport rep = reducibility_rank(lift, family, 64);
            INFO("family " << family);
            REQUIRE(rep.ambient_dim == 7);
            REQUIRE(rep.samples_used == 64);
            REQUIRE(rep.rank >= 6);
            REQUIRE_FALSE(rep.reducible_candidate);
        }
    }
    SECTION("totally umbilic chart: the sphere family is a single point") {
        const LegendreLift lift = legendre_lift(geodesic_sphere(2, 0.7));
        const ReducibilityReport rep = reducibility_rank(lift, 0, 48);
        REQUIRE(rep.rank == 1);
        REQUIRE(rep.reducible_candidate);
    }
    SECTION("tube around a circle: families stay in a three-dimensional slice") {
        const LegendreLift lift = legendre_lift(tube_chart(great_circle(), 0.4));
        const ReducibilityReport rep = reducibility_rank(lift, 0, 48);
        REQUIRE(rep.rank == 3);
        REQUIRE(rep.reducible_candidate);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "dupin/charts.hpp"
#include "dupin/rng.hpp"

using namespace dupin;

namespace {

double max_unit_defect(const ImmersionChart& ch, int samples = 12) {
    double worst = 0.0;
    for (const auto& u : box_covering(ch.domain_lo, ch.domain_hi, samples, 5)) {
        worst = std::max(worst, std::abs(ch.eval(u).norm() - 1.0));
    }
    return worst;
}

}  // namespace

TEST_CASE("projective-plane charts over the four algebras") {
    struct Expect {
        Algebra alg;
        int n, p, coords;
    };
    const Expect table[] = {{Algebra::R, 2, 2, 5},
                            {Algebra::C, 4, 3, 8},
                            {Algebra::H, 8, 5, 14},
                            {Algebra::O, 16, 9, 26}};
    for (const auto& e : table) {
        const ImmersionChart ch = veronese(e.alg);
        INFO(ch.name);
        REQUIRE(ch.intrinsic_dim == e.n);
        REQUIRE(ch.codim() == e.p);
        REQUIRE(ch.ambient_coords == e.coords);
        REQUIRE(ch.curvature == 1.0);
        REQUIRE(ch.has_analytic_jet());
        REQUIRE(max_unit_defect(ch, 8) < 1e-12);
    }
}

TEST_CASE("the three affine charts agree on the overlap in image") {
    for (int index : {0, 1, 2}) {
        const ImmersionChart ch = veronese(Algebra::C, index);
        REQUIRE(ch.intrinsic_dim == 4);
        REQUIRE(max_unit_defect(ch, 6) < 1e-12);
    }
    REQUIRE_THROWS_AS(veronese(Algebra::C, 3), invalid_input);
    REQUIRE_THROWS_AS(veronese(Algebra::C, -1), invalid_input);
}

TEST_CASE("classical charts") {
    SECTION("clifford torus sits on the unit sphere") {
        const ImmersionChart ch = clifford_torus();
        REQUIRE(ch.curvature == 1.0);
        REQUIRE(ch.ambient_coords == 4);
        REQUIRE(max_unit_defect(ch) < 1e-12);
    }
    SECTION("torus of revolution is a euclidean surface") {
        const ImmersionChart ch = torus_of_revolution(2.0, 0.5);
        REQUIRE(ch.curvature == 0.0);
        REQUIRE(ch.ambient_coords == 3);
        Eigen::VectorXd u = ch.domain_center();
        const Eigen::VectorXd f = ch.eval(u);
        // Distance from the core circle of radius 2 equals the tube radius.
        const double ring = std::hypot(f(0), f(1));
        REQUIRE(std::hypot(ring - 2.0, f(2)) == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("great circle") {
        const ImmersionChart ch = great_circle();
        REQUIRE(ch.intrinsic_dim == 1);
        REQUIRE(ch.codim() == 2);
        REQUIRE(max_unit_defect(ch) < 1e-12);
    }
    SECTION("sphere product") {
        const ImmersionChart ch = sphere_product(1, 1, 2.0, 2.0);
        REQUIRE(ch.intrinsic_dim == 2);
        REQUIRE(ch.curvature == 1.0);
        REQUIRE(max_unit_defect(ch) < 1e-12);
    }
    SECTION("flat plane has a vanishing shape operator") {
        const ImmersionChart ch = flat_plane(2, 3);
        const FundamentalForms ff = fundamental_forms(ch, ch.domain_center());
        const Eigen::MatrixXd a = shape_operator(ff, Eigen::VectorXd::Unit(1, 0));
        REQUIRE(a.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ellipsoid has near-umbilic points but varying curvatures") {
    const ImmersionChart ch = ellipsoid(1.2, 1.0, 0.8);
    double min_spread = 1e9, max_spread = 0.0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) {
            Eigen::VectorXd u(2);
            u << ch.domain_lo(0) + (ch.domain_hi(0) - ch.domain_lo(0)) * i / 40.0,
                ch.domain_lo(1) + (ch.domain_hi(1) - ch.domain_lo(1)) * j / 40.0;
            try {
                const ShapeSpectrum sp = principal_spectrum(
                    fundamental_forms(ch, u), Eigen::VectorXd::Unit(1, 0), 1e-12);
                const double spread = sp.eigenvalues(1) - sp.eigenvalues(0);
                min_spread = std::min(min_spread, spread);
                max_spread = std::max(max_spread, spread);
            } catch (const degenerate_chart&) {
                // chart boundary
            }
        }
    REQUIRE(min_spread < 2e-2);   // the grid passes close to an umbilic
    REQUIRE(max_spread > 0.3);    // and is far from one elsewhere
}

TEST_CASE("conformal deformation") {
    const ImmersionChart base = veronese(Algebra::R);
    const ImmersionChart d1 = mobius_deform(base, 7);
    const ImmersionChart d2 = mobius_deform(base, 7);
    const ImmersionChart d3 = mobius_deform(base, 8);
    const Eigen::VectorXd u = base.domain_center();
    // Still spherical, deterministic in the seed, and actually moved.
    REQUIRE(max_unit_defect(d1) < 1e-10);
    REQUIRE((d1.eval(u) - d2.eval(u)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((d1.eval(u) - d3.eval(u)).cwiseAbs().maxCoeff() > 1e-4);
    REQUIRE((d1.eval(u) - base.eval(u)).cwiseAbs().maxCoeff() > 1e-4);
    REQUIRE(d1.has_analytic_jet());
}

TEST_CASE("envelopes satisfy their defining identities") {
    SECTION("cylinder") {
        const EnvelopeChart env = envelope_cylinder(0.3);
        REQUIRE(env.base_dim == 1);
        REQUIRE(env.fiber_sphere_dim == 1);
        const auto [ra, rb] = envelope_residuals(env, 150, 7);
        REQUIRE(ra < 1e-12);
        REQUIRE(rb < 1e-12);
        const EnvelopeClusterReport cl = envelope_cluster_check(env, 24, 11);
        REQUIRE(cl.value_residual < 1e-8);
        REQUIRE(cl.multiplicity == 1);
    }
    SECTION("torus") {
        const EnvelopeChart env = envelope_torus(1.0, 0.3);
        const auto [ra, rb] = envelope_residuals(env, 150, 7);
        REQUIRE(ra < 1e-12);
        REQUIRE(rb < 1e-12);
        const EnvelopeClusterReport cl = envelope_cluster_check(env, 24, 11);
        REQUIRE(cl.value_residual < 1e-8);
        REQUIRE(cl.multiplicity == 1);
    }
    SECTION("generic variable-radius envelope") {
        const EnvelopeChart env = envelope_generic(42);
        const auto [ra, rb] = envelope_residuals(env, 150, 7);
        REQUIRE(ra < 1e-12);
        REQUIRE(rb < 1e-12);
        const EnvelopeClusterReport cl = envelope_cluster_check(env, 24, 11);
        REQUIRE(cl.value_residual < 1e-8);
        REQUIRE(cl.multiplicity == 1);
    }
}

TEST_CASE("generalized cylinder construction and validation") {
    const ImmersionChart line = flat_plane(1, 3);  // u -> (u, 0, 0)
    NormalField up = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Unit(3, 2); };
    NormalField tangent = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Unit(3, 0); };
    NormalField long_field = [](const Eigen::VectorXd&) {
        return Eigen::VectorXd(2.0 * Eigen::VectorXd::Unit(3, 2));
    };

    const ImmersionChart strip = generalized_cylinder_chart(line, {up});
    REQUIRE(strip.intrinsic_dim == 2);
    Eigen::VectorXd u(2);
    u << 0.2, 0.3;
    const Eigen::VectorXd f = strip.eval(u);
    REQUIRE(f(0) == Catch::Approx(0.2).margin(1e-12));
    REQUIRE(f(2) == Catch::Approx(0.3).margin(1e-12));

    REQUIRE_THROWS_AS(generalized_cylinder_chart(line, {}), invalid_input);
    REQUIRE_THROWS_AS(generalized_cylinder_chart(line, {tangent}), invalid_input);
    REQUIRE_THROWS_AS(generalized_cylinder_chart(line, {long_field}), invalid_input);
}

TEST_CASE("name-based factory") {
    REQUIRE(builtin_chart("veronese-C").intrinsic_dim == 4);
    REQUIRE(builtin_chart("clifford-torus").ambient_coords == 4);
    const ImmersionChart rs = builtin_chart("round-sphere:3,2.0");
    REQUIRE(rs.intrinsic_dim == 3);
    REQUIRE(std::abs(rs.eval(rs.domain_center()).norm() - 2.0) < 1e-12);
    const ImmersionChart gs = builtin_chart("geodesic-sphere:2,0.4");
    const ShapeSpectrum sp = principal_spectrum(fundamental_forms(gs, gs.domain_center()),
                                                Eigen::VectorXd::Unit(1, 0),
                                                gs.default_cluster_tol());
    REQUIRE(std::abs(std::abs(sp.clusters[0].value) - 1.0 / std::tan(0.4)) < 1e-9);
    REQUIRE_THROWS_AS(builtin_chart("hyperboloid"), invalid_input);
}

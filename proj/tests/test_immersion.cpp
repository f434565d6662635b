#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "dupin/charts.hpp"
#include "dupin/immersion.hpp"

using namespace dupin;

namespace {

double jet_error(const ChartJet& got, const ChartJet& truth) {
    double e = (got.jacobian - truth.jacobian).cwiseAbs().maxCoeff();
    for (std::size_t c = 0; c < truth.hessian.size(); ++c)
        e = std::max(e, (got.hessian[c] - truth.hessian[c]).cwiseAbs().maxCoeff());
    return e;
}

}  // namespace

TEST_CASE("finite differences track the analytic jets") {
    const ImmersionChart analytic = veronese(Algebra::R);
    REQUIRE(analytic.has_analytic_jet());
    ImmersionChart fd = analytic.without_jets();
    REQUIRE_FALSE(fd.has_analytic_jet());

    Eigen::VectorXd u = analytic.domain_center();
    u(0) += 0.17;
    u(1) -= 0.31;
    const ChartJet truth = chart_jet(analytic, u);
    const ChartJet approx = chart_jet(fd, u);
    REQUIRE((approx.value - truth.value).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((approx.jacobian - truth.jacobian).cwiseAbs().maxCoeff() < 1e-8);
    for (int c = 0; c < analytic.ambient_coords; ++c)
        REQUIRE((approx.hessian[c] - truth.hessian[c]).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("richardson extrapolation sharpens the fallback jets") {
    const ImmersionChart analytic = veronese(Algebra::R);
    ImmersionChart coarse = analytic.without_jets();
    coarse.fd_step = 1e-3;  // large step so truncation error dominates roundoff
    ImmersionChart rich = coarse;
    rich.richardson = true;

    Eigen::VectorXd u = analytic.domain_center();
    u(0) += 0.23;
    const ChartJet truth = chart_jet(analytic, u);
    const double plain_err = jet_error(chart_jet(coarse, u), truth);
    const double rich_err = jet_error(chart_jet(rich, u), truth);
    REQUIRE(rich_err < plain_err / 10.0);
}

TEST_CASE("round sphere forms") {
    SECTION("unit radius") {
        const ImmersionChart ch = round_sphere(2, 1.0);
        REQUIRE(ch.curvature == 0.0);
        const Eigen::VectorXd u = ch.domain_center();
        const FundamentalForms ff = fundamental_forms(ch, u);
        REQUIRE(ff.n() == 2);
        REQUIRE(ff.p() == 1);
        REQUIRE(std::abs(ff.position.norm() - 1.0) < 1e-12);
        // Outward normal; the shape operator is the identity.
        REQUIRE(ff.normal_frame.col(0).dot(ff.position) == Catch::Approx(1.0).margin(1e-10));
        const Eigen::MatrixXd a = shape_operator(ff, Eigen::VectorXd::Unit(1, 0));
        REQUIRE((a - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);
    }
    SECTION("radius two scales the spectrum to 1/2") {
        const ImmersionChart ch = round_sphere(2, 2.0);
        const FundamentalForms ff = fundamental_forms(ch, ch.domain_center());
        const ShapeSpectrum sp =
            principal_spectrum(ff, Eigen::VectorXd::Unit(1, 0), ch.default_cluster_tol());
        REQUIRE(sp.clusters.size() == 1);
        REQUIRE(sp.clusters[0].multiplicity == 2);
        REQUIRE(sp.clusters[0].value == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("clifford torus forms") {
    const ImmersionChart ch = clifford_torus();
    REQUIRE(ch.curvature == 1.0);
    const Eigen::VectorXd u = ch.domain_center();
    const FundamentalForms ff = fundamental_forms(ch, u);
    REQUIRE(std::abs(ff.position.norm() - 1.0) < 1e-12);
    const Eigen::MatrixXd a = shape_operator(ff, Eigen::VectorXd::Unit(1, 0));
    Eigen::MatrixXd expect(2, 2);
    expect << 1.0, 0.0, 0.0, -1.0;
    REQUIRE((a - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("geodesic spheres are totally umbilic") {
    const double t = 0.7;
    const ImmersionChart ch = geodesic_sphere(2, t);
    for (double off : {0.0, 0.2, -0.35}) {
        Eigen::VectorXd u = ch.domain_center();
        u(0) += off;
        const ShapeSpectrum sp = principal_spectrum(fundamental_forms(ch, u),
                                                    Eigen::VectorXd::Unit(1, 0),
                                                    ch.default_cluster_tol());
        REQUIRE(sp.clusters.size() == 1);
        REQUIRE(sp.clusters[0].multiplicity == 2);
        REQUIRE(std::abs(std::abs(sp.clusters[0].value) - 1.0 / std::tan(t)) < 1e-9);
    }
}

TEST_CASE("spectrum clustering") {
    const ImmersionChart ch = veronese(Algebra::R);
    const FundamentalForms ff = fundamental_forms(ch, ch.domain_center());
    const Eigen::VectorXd xi = Eigen::VectorXd::Unit(2, 0);

    const ShapeSpectrum fine = principal_spectrum(ff, xi, 1e-6);
    REQUIRE(fine.clusters.size() == 2);
    REQUIRE(fine.clusters[0].multiplicity == 1);
    REQUIRE(fine.clusters[1].multiplicity == 1);
    const double c = 1.0 / std::sqrt(3.0);
    REQUIRE(fine.eigenvalues(0) == Catch::Approx(-c).margin(1e-9));
    REQUIRE(fine.eigenvalues(1) == Catch::Approx(c).margin(1e-9));

    // A tolerance wider than the gap merges everything into one cluster.
    const ShapeSpectrum blunt = principal_spectrum(ff, xi, 5.0);
    REQUIRE(blunt.clusters.size() == 1);
    REQUIRE(blunt.clusters[0].multiplicity == 2);
}

TEST_CASE("normal curvature of the quadratic projective chart") {
    const ImmersionChart ch = veronese(Algebra::R);
    const double expected = 2.0 * std::sqrt(2.0) / 3.0;
    for (double off : {0.0, 0.21, -0.4}) {
        Eigen::VectorXd u = ch.domain_center();
        u(1) += off;
        REQUIRE(normal_curvature_norm(ch, u) == Catch::Approx(expected).margin(1e-9));
    }
    // Flat normal bundle on a hypersurface-like product: the norm vanishes.
    const ImmersionChart cl = clifford_torus();
    REQUIRE(normal_curvature_norm(cl, cl.domain_center()) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("shape operator input validation") {
    const ImmersionChart ch = veronese(Algebra::R);
    const FundamentalForms ff = fundamental_forms(ch, ch.domain_center());
    Eigen::VectorXd bad(2);
    bad << 0.5, 0.5;  // not unit
    REQUIRE_THROWS_AS(shape_operator(ff, bad), invalid_input);
    REQUIRE_THROWS_AS(shape_operator(ff, Eigen::VectorXd::Unit(3, 0)), contract_violation);
    REQUIRE_THROWS_AS(fundamental_forms(ch, Eigen::VectorXd::Zero(3)), contract_violation);
}

TEST_CASE("degenerate charts are reported") {
    // A rank-one image of a two-parameter chart has a singular metric.
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
    const ImmersionChart ch =
        chart_from_body("collapsed", 2, 3, 0.0, lo, hi, [](const auto& u) {
            using S = typename std::decay_t<decltype(u)>::value_type;
            return std::vector<S>{u[0], u[0], const_like(u[0], 0.0)};
        });
    REQUIRE_THROWS_AS(fundamental_forms(ch, ch.domain_center()), degenerate_chart);
}

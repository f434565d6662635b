#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "dupin/minkowski.hpp"

using namespace dupin;

TEST_CASE("signature families") {
    const Signature lie = lie_signature(2);
    REQUIRE(lie.dim() == 5);
    REQUIRE(lie.weight(0) == -1.0);
    REQUIRE(lie.weight(1) == 1.0);
    REQUIRE(lie.weight(3) == 1.0);
    REQUIRE(lie.weight(4) == -1.0);
    REQUIRE(lie.str() == "lie(2)");

    const Signature mob = mobius_signature(2);
    REQUIRE(mob.dim() == 4);
    REQUIRE(mob.weight(0) == -1.0);
    REQUIRE(mob.weight(3) == 1.0);
    REQUIRE(mob.str() == "mobius(2)");

    REQUIRE(lie != mob);
    REQUIRE(lie == lie_signature(2));
    REQUIRE(lie != lie_signature(3));

    const Eigen::VectorXd w = lie.weights();
    REQUIRE(w.size() == 5);
    REQUIRE(w.sum() == Catch::Approx(1.0));  // -1 + 3 - 1
}

TEST_CASE("signed inner product") {
    const Signature sig = lie_signature(2);
    Eigen::VectorXd a(5), b(5);
    a << 1.0, 2.0, 0.0, 0.0, 3.0;
    b << 2.0, 1.0, 0.0, 0.0, 1.0;
    const SignedVector va{sig, a}, vb{sig, b};

    // -1*2 + 2*1 - 3*1 = -3
    REQUIRE(signed_inner(va, vb) == Catch::Approx(-3.0));
    REQUIRE(signed_inner(va, vb) == signed_inner(vb, va));
    // -1 + 4 - 9 = -6
    REQUIRE(signed_quadrance(va) == Catch::Approx(-6.0));

    const SignedVector vm{mobius_signature(3), Eigen::VectorXd::Zero(5)};
    REQUIRE_THROWS_AS(signed_inner(va, vm), contract_violation);
    REQUIRE_THROWS_AS(SignedVector(sig, Eigen::VectorXd::Zero(4)), contract_violation);
}

TEST_CASE("projective points") {
    const Signature sig = mobius_signature(2);
    Eigen::VectorXd a(4);
    a << 1.0, 0.5, -0.2, 0.1;
    const ProjectivePoint pa{SignedVector{sig, a}};
    const ProjectivePoint pb{SignedVector{sig, Eigen::VectorXd(-3.7 * a)}};
    REQUIRE(projective_equal(pa, pb));

    Eigen::VectorXd c = a;
    c(1) += 0.05;
    const ProjectivePoint pc{SignedVector{sig, c}};
    REQUIRE_FALSE(projective_equal(pa, pc));
    REQUIRE(projective_equal(pa, pc, 0.5));  // generous tolerance merges them

    REQUIRE_THROWS_AS(ProjectivePoint(SignedVector(sig, Eigen::VectorXd::Zero(4))),
                      invalid_input);

    const ProjectivePoint pl{SignedVector{lie_signature(1), a}};
    REQUIRE_THROWS_AS(projective_equal(pa, pl), contract_violation);
}

TEST_CASE("orthogonal maps") {
    const Signature sig = lie_signature(2);
    const int n = sig.dim();

    SECTION("identity and validation") {
        REQUIRE(orthogonality_residual(sig, Eigen::MatrixXd::Identity(n, n)) == 0.0);
        Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(n, n);
        bad(0, 1) = 0.3;
        REQUIRE(orthogonality_residual(sig, bad) > 0.1);
        REQUIRE_THROWS_AS(OrthogonalMap(sig, bad), invalid_map);
        REQUIRE_THROWS_AS(OrthogonalMap(sig, Eigen::MatrixXd::Identity(n - 1, n - 1)),
                          contract_violation);
    }

    SECTION("boost preserves the form") {
        // Hyperbolic rotation in the (0, 1) plane: weights (-, +).
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
        const double t = 0.8;
        m(0, 0) = std::cosh(t);
        m(0, 1) = std::sinh(t);
        m(1, 0) = std::sinh(t);
        m(1, 1) = std::cosh(t);
        const OrthogonalMap l{sig, m};

        Eigen::VectorXd a(5), b(5);
        a << 0.3, 1.0, -0.4, 0.2, 0.9;
        b << 1.1, 0.0, 0.7, -0.3, 0.25;
        const SignedVector va{sig, a}, vb{sig, b};
        REQUIRE(signed_inner(apply_map(l, va), apply_map(l, vb)) ==
                Catch::Approx(signed_inner(va, vb)).margin(1e-12));
    }

    SECTION("inverse and composition") {
        const OrthogonalMap l = random_orthogonal(sig, 101);
        const OrthogonalMap li = l.inverse();
        REQUIRE((l.mat * li.mat - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
                1e-10);
        const OrthogonalMap c = l.compose(li);
        REQUIRE((c.mat - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE_THROWS_AS(l.compose(random_orthogonal(lie_signature(3), 5)),
                          contract_violation);
    }
}

TEST_CASE("pseudo-orthonormal completion") {
    const Signature sig = lie_signature(3);
    const int n = sig.dim();

    SECTION("prescribed spacelike column is kept") {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(1) = 2.0;
        v(2) = 1.0;
        const Eigen::MatrixXd basis = complete_pseudo_orthonormal(sig, {{1, v}});
        REQUIRE(orthogonality_residual(sig, basis) < 1e-10);
        // Column 1 is the normalized input.
        const Eigen::VectorXd got = basis.col(1);
        REQUIRE((got - v.normalized()).norm() < 1e-12);
    }

    SECTION("prescribed timelike column") {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(0) = 1.5;
        const Eigen::MatrixXd basis = complete_pseudo_orthonormal(sig, {{0, v}});
        REQUIRE(orthogonality_residual(sig, basis) < 1e-10);
    }

    SECTION("null vector is rejected") {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(0) = 1.0;
        v(1) = 1.0;  // lightlike: <v, v> = 0
        REQUIRE_THROWS_AS(complete_pseudo_orthonormal(sig, {{0, v}}), invalid_input);
    }

    SECTION("wrong causal type is rejected") {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(1) = 1.0;  // spacelike, offered for the timelike slot 0
        REQUIRE_THROWS_AS(complete_pseudo_orthonormal(sig, {{0, v}}), invalid_input);
        REQUIRE_THROWS_AS(complete_pseudo_orthonormal(sig, {{7, v}}), contract_violation);
    }
}

TEST_CASE("random orthogonal maps") {
    for (std::uint64_t seed : {1ULL, 2ULL, 77ULL}) {
        const OrthogonalMap l = random_orthogonal(lie_signature(2), seed);
        REQUIRE(orthogonality_residual(l.sig, l.mat) < 1e-8);
        const OrthogonalMap m = random_orthogonal(mobius_signature(4), seed);
        REQUIRE(orthogonality_residual(m.sig, m.mat) < 1e-8);
    }
    // Deterministic in the seed; different seeds give different maps.
    const OrthogonalMap a = random_orthogonal(lie_signature(2), 9);
    const OrthogonalMap b = random_orthogonal(lie_signature(2), 9);
    const OrthogonalMap c = random_orthogonal(lie_signature(2), 10);
    REQUIRE((a.mat - b.mat).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((a.mat - c.mat).cwiseAbs().maxCoeff() > 1e-3);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "dupin/algebra.hpp"
#include "dupin/rng.hpp"

using namespace dupin;

namespace {

AlgebraElement random_element(Algebra alg, Rng& rng) {
    std::vector<double> c(static_cast<std::size_t>(algebra_dim(alg)));
    for (auto& x : c) x = rng.uniform(-1.0, 1.0);
    return {alg, std::move(c)};
}

double max_abs(const AlgebraElement& a) {
    double m = 0.0;
    for (double c : a.coords) m = std::max(m, std::abs(c));
    return m;
}

}  // namespace

TEST_CASE("algebra dimensions and names") {
    REQUIRE(algebra_dim(Algebra::R) == 1);
    REQUIRE(algebra_dim(Algebra::C) == 2);
    REQUIRE(algebra_dim(Algebra::H) == 4);
    REQUIRE(algebra_dim(Algebra::O) == 8);
    REQUIRE(algebra_mu(Algebra::R) == 1);
    REQUIRE(algebra_mu(Algebra::C) == 2);
    REQUIRE(algebra_mu(Algebra::H) == 3);
    REQUIRE(algebra_mu(Algebra::O) == 4);
    REQUIRE(algebra_name(Algebra::O) == "O");
}

TEST_CASE("element construction") {
    REQUIRE_THROWS_AS(AlgebraElement(Algebra::H, {1.0, 2.0}), contract_violation);
    REQUIRE_THROWS_AS(basis_element(Algebra::C, 2), invalid_input);
    const AlgebraElement one = real_element(Algebra::O, 1.0);
    REQUIRE(re(one) == 1.0);
    REQUIRE(norm(one) == 1.0);
    const AlgebraElement a = basis_element(Algebra::H, 2);
    const AlgebraElement b = basis_element(Algebra::C, 1);
    REQUIRE_THROWS_AS(multiply(a, AlgebraElement(Algebra::O, std::vector<double>(8, 0.5))),
                      contract_violation);
    REQUIRE_THROWS_AS(a + AlgebraElement(Algebra::C, {1.0, 0.0}), contract_violation);
    (void)b;
}

TEST_CASE("basis multiplication") {
    SECTION("complex: i^2 = -1") {
        const AlgebraElement i = basis_element(Algebra::C, 1);
        const AlgebraElement sq = i * i;
        REQUIRE(sq.coords[0] == Catch::Approx(-1.0));
        REQUIRE(sq.coords[1] == Catch::Approx(0.0));
    }
    SECTION("quaternions: e1 e2 = e3 and anticommute") {
        const AlgebraElement e1 = basis_element(Algebra::H, 1);
        const AlgebraElement e2 = basis_element(Algebra::H, 2);
        const AlgebraElement p = e1 * e2;
        const AlgebraElement q = e2 * e1;
        REQUIRE(p.coords[3] == Catch::Approx(1.0));
        REQUIRE(max_abs(p + q) < 1e-15);
        REQUIRE(max_abs(e1 * e1 + real_element(Algebra::H, 1.0)) < 1e-15);
    }
    SECTION("every imaginary basis unit squares to -1") {
        for (Algebra alg : {Algebra::C, Algebra::H, Algebra::O}) {
            for (int i = 1; i < algebra_dim(alg); ++i) {
                const AlgebraElement e = basis_element(alg, i);
                REQUIRE(max_abs(e * e + real_element(alg, 1.0)) < 1e-15);
            }
        }
    }
    SECTION("identity is neutral") {
        Rng rng(3);
        for (Algebra alg : {Algebra::R, Algebra::C, Algebra::H, Algebra::O}) {
            const AlgebraElement one = real_element(alg, 1.0);
            const AlgebraElement a = random_element(alg, rng);
            REQUIRE(max_abs(one * a - a) < 1e-15);
            REQUIRE(max_abs(a * one - a) < 1e-15);
        }
    }
}

TEST_CASE("norm multiplicativity") {
    Rng rng(11);
    for (Algebra alg : {Algebra::R, Algebra::C, Algebra::H, Algebra::O}) {
        for (int trial = 0; trial < 50; ++trial) {
            const AlgebraElement a = random_element(alg, rng);
            const AlgebraElement b = random_element(alg, rng);
            REQUIRE(norm(a * b) == Catch::Approx(norm(a) * norm(b)).margin(1e-12));
        }
    }
}

TEST_CASE("conjugation") {
    Rng rng(12);
    for (Algebra alg : {Algebra::C, Algebra::H, Algebra::O}) {
        for (int trial = 0; trial < 20; ++trial) {
            const AlgebraElement a = random_element(alg, rng);
            const AlgebraElement b = random_element(alg, rng);
            // (ab)* = b* a*
            REQUIRE(max_abs(conj(a * b) - conj(b) * conj(a)) < 1e-13);
            // a a* is real and equals |a|^2
            const AlgebraElement aa = a * conj(a);
            REQUIRE(aa.coords[0] == Catch::Approx(norm2(a)).margin(1e-13));
            for (std::size_t i = 1; i < aa.coords.size(); ++i)
                REQUIRE(std::abs(aa.coords[i]) < 1e-13);
        }
    }
}

TEST_CASE("associativity up to the quaternions") {
    Rng rng(13);
    for (Algebra alg : {Algebra::R, Algebra::C, Algebra::H}) {
        for (int trial = 0; trial < 20; ++trial) {
            const AlgebraElement a = random_element(alg, rng);
            const AlgebraElement b = random_element(alg, rng);
            const AlgebraElement c = random_element(alg, rng);
            REQUIRE(max_abs((a * b) * c - a * (b * c)) < 1e-13);
        }
    }
}

TEST_CASE("octonions are alternative but not associative") {
    Rng rng(14);
    // Some basis triple has a nonvanishing associator.
    double worst = 0.0;
    for (int i = 1; i < 8; ++i)
        for (int j = 1; j < 8; ++j)
            for (int k = 1; k < 8; ++k) {
                const AlgebraElement a = basis_element(Algebra::O, i);
                const AlgebraElement b = basis_element(Algebra::O, j);
                const AlgebraElement c = basis_element(Algebra::O, k);
                worst = std::max(worst, max_abs((a * b) * c - a * (b * c)));
            }
    REQUIRE(worst > 1.0);

    // Alternativity: the associator vanishes when two arguments coincide.
    for (int trial = 0; trial < 20; ++trial) {
        const AlgebraElement a = random_element(Algebra::O, rng);
        const AlgebraElement b = random_element(Algebra::O, rng);
        REQUIRE(max_abs((a * a) * b - a * (a * b)) < 1e-13);
        REQUIRE(max_abs((a * b) * b - a * (b * b)) < 1e-13);
    }
}

TEST_CASE("hermitian projectors") {
    Rng rng(15);
    SECTION("associative algebras: any unit vector works") {
        for (Algebra alg : {Algebra::R, Algebra::C, Algebra::H}) {
            for (int trial = 0; trial < 10; ++trial) {
                std::array<AlgebraElement, 3> v = {random_element(alg, rng),
                                                   random_element(alg, rng),
                                                   random_element(alg, rng)};
                const double s = std::sqrt(norm2(v[0]) + norm2(v[1]) + norm2(v[2]));
                for (auto& x : v) x = x * (1.0 / s);
                const HermitianMatrix3 m = hermitian_projector(v);
                REQUIRE(projector_residual(m) < 1e-12);
                REQUIRE(m.diagonal[0] + m.diagonal[1] + m.diagonal[2] ==
                        Catch::Approx(1.0).margin(1e-12));
                REQUIRE(hermitian_inner(m, m) == Catch::Approx(1.0).margin(1e-12));
            }
        }
    }
    SECTION("octonions: affine-chart vectors") {
        // One real entry keeps the three components inside an associative
        // subalgebra generated by the other two (Artin).
        for (int trial = 0; trial < 10; ++trial) {
            std::array<AlgebraElement, 3> v = {real_element(Algebra::O, 1.0),
                                               random_element(Algebra::O, rng),
                                               random_element(Algebra::O, rng)};
            const double s = std::sqrt(norm2(v[0]) + norm2(v[1]) + norm2(v[2]));
            for (auto& x : v) x = x * (1.0 / s);
            const HermitianMatrix3 m = hermitian_projector(v);
            REQUIRE(projector_residual(m) < 1e-12);
            REQUIRE(m.diagonal[0] + m.diagonal[1] + m.diagonal[2] ==
                    Catch::Approx(1.0).margin(1e-12));
        }
    }
    SECTION("non-unit input is rejected") {
        std::array<AlgebraElement, 3> v = {real_element(Algebra::C, 1.0),
                                           real_element(Algebra::C, 1.0),
                                           real_element(Algebra::C, 0.0)};
        REQUIRE_THROWS_AS(hermitian_projector(v), invalid_input);
    }
    SECTION("inner product basics") {
        std::array<AlgebraElement, 3> v = {real_element(Algebra::C, 1.0),
                                           real_element(Algebra::C, 0.0),
                                           real_element(Algebra::C, 0.0)};
        std::array<AlgebraElement, 3> w = {real_element(Algebra::C, 0.0),
                                           real_element(Algebra::C, 1.0),
                                           real_element(Algebra::C, 0.0)};
        const HermitianMatrix3 p = hermitian_projector(v);
        const HermitianMatrix3 q = hermitian_projector(w);
        // Orthogonal rank-one projectors: trace inner product vanishes.
        REQUIRE(hermitian_inner(p, q) == Catch::Approx(0.0).margin(1e-14));
        HermitianMatrix3 r = q;
        r.algebra = Algebra::H;
        for (auto& o : r.off_diagonal) o = real_element(Algebra::H, 0.0);
        REQUIRE_THROWS_AS(hermitian_inner(p, r), contract_violation);
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qtc/entropy.hpp"

using namespace qtc;

TEST_CASE("relative entropy against the oracle")
{
    for (int i = 0; i < 30; ++i) {
        Rng rng = stream_rng(21, i);
        int d = 2 + i % 3;
        DensityMatrix a = random_full_rank_state(rng, d, 0.02), b = random_full_rank_state(rng, d, 0.02);
        double v = relative_entropy(a, b).value;
        CHECK(v == doctest::Approx(oracle::relative_entropy(a.matrix(), b.matrix())).epsilon(1e-10));
        CHECK(v >= 0.0);
        CHECK(relative_entropy(a, a).value < 1e-12);
        // maximal divergence dominates Umegaki
        CHECK(maximal_divergence(a, b).value >= v - 1e-12);
    }
}

TEST_CASE("relative entropy on a rank-deficient pair")
{
    Matrix p = Matrix::Zero(2, 2);
    p(0, 0) = 1.0;
    DensityMatrix pure(p);
    DensityMatrix mixed = maximally_mixed(2);
    CHECK(relative_entropy(pure, mixed).value == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(relative_entropy(mixed, pure), SupportError);
}

TEST_CASE("Dirichlet form: derivation form equals generator form for every s")
{
    for (int i = 0; i < 10; ++i) {
        Rng rng = stream_rng(22, i);
        DBGenerator gen = random_db_generator(rng, 2 + i % 3);
        Matrix f = random_hermitian(rng, gen.dim()), g = random_hermitian(rng, gen.dim());
        for (double s : {0.0, 0.25, 0.5, 1.0}) {
            cplx a = dirichlet_form(gen, f, g, s), b = dirichlet_form_direct(gen, f, g, s);
            CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
            CHECK(dirichlet_form(gen, f, f, s).real() >= -1e-12);
        }
    }
}

TEST_CASE("ent_1 and E_1 reproduce D and I under rho = Gamma(f)")
{
    Rng rng = stream_rng(23, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    DensityMatrix rho = random_full_rank_state(rng, 3, 0.05);
    Matrix f = gamma_map(gen.sigma(), rho.matrix(), Direction::inverse);
    CHECK(ent_1(gen.sigma(), f) == doctest::Approx(relative_entropy(rho, gen.sigma()).value).epsilon(1e-9));
    CHECK(2.0 * dirichlet_form_1(gen, f) == doctest::Approx(fisher_information(gen, rho)).epsilon(1e-9));
}

TEST_CASE("Fisher information is the entropy production")
{
    for (int i = 0; i < 10; ++i) {
        Rng rng = stream_rng(24, i);
        DBGenerator gen = random_db_generator(rng, 2 + i % 2);
        double rate = -spectral_gap(gen).eigenvalues.back();
        gen = scaled(gen, 1.0 / rate);
        DensityMatrix rho = random_full_rank_state(rng, gen.dim(), 0.05);
        double info = fisher_information(gen, rho);
        CHECK(info >= 0.0);
        // oracle derivative from the explicit state path ρ + hL*(ρ)
        const double h = 1e-6;
        Matrix lr = apply_adjoint(gen, rho.matrix());
        double dp = oracle::relative_entropy(rho.matrix() + h * lr, gen.sigma().matrix());
        double dm = oracle::relative_entropy(rho.matrix() - h * lr, gen.sigma().matrix());
        CHECK(-(dp - dm) / (2 * h) == doctest::Approx(info).epsilon(1e-6));
        double r1 = de_bruijn_residual(gen, rho, 0.3, 1e-3), r2 = de_bruijn_residual(gen, rho, 0.3, 5e-4);
        CHECK(r1 / r2 > 3.5);
    }
}

TEST_CASE("Fisher information vanishes at the invariant state")
{
    Rng rng = stream_rng(25, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    CHECK(std::abs(fisher_information(gen, gen.sigma())) < 1e-10);
    CHECK_THROWS_AS(de_bruijn_residual(gen, gen.sigma(), -1.0), InvalidInput);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qtc/entropy.hpp"
#include "qtc/inequalities.hpp"

using namespace qtc;

TEST_CASE("MLSI holds with the depolarizing constant and fails above it")
{
    Rng rng = stream_rng(41, 0);
    DensityMatrix s = random_full_rank_state(rng, 2, 0.1);
    DBGenerator gen = depolarizing_generator(s);
    double alpha = mlsi_constant_depolarizing(s);
    double worst = INFINITY;
    std::vector<DensityMatrix> states;
    for (int i = 0; i < 200; ++i) {
        Rng r = stream_rng(42, i);
        states.push_back(random_full_rank_state(r, 2, 0.01));
        worst = std::min(worst, mlsi_margin(gen, states.back(), alpha));
    }
    CHECK(worst >= -1e-10);
    MlsiEstimate est = mlsi_estimate(gen, states);
    CHECK(est.used == 200);
    CHECK(est.value >= alpha - 1e-10);
    CHECK(est.witness.has_value());
}

TEST_CASE("Pinsker and mixing")
{
    for (int i = 0; i < 50; ++i) {
        Rng rng = stream_rng(43, i);
        int d = 2 + i % 3;
        DensityMatrix a = random_full_rank_state(rng, d, 0.01), b = random_full_rank_state(rng, d, 0.01);
        CHECK(pinsker_check(a, b) >= -1e-12);
    }
    Rng rng = stream_rng(44, 0);
    DensityMatrix s = random_full_rank_state(rng, 3, 0.1);
    DBGenerator gen = depolarizing_generator(s);
    double alpha = mlsi_constant_depolarizing(s);
    for (double m : mixing_check(gen, random_full_rank_state(rng, 3, 0.05), {0.0, 0.5, 1.0, 3.0}, alpha))
        CHECK(m >= -1e-12);
}

TEST_CASE("TC2 and TC1 on a depolarizing qubit")
{
    Rng rng = stream_rng(45, 0);
    DensityMatrix s = random_full_rank_state(rng, 2, 0.1);
    DBGenerator gen = depolarizing_generator(s);
    double c2 = 1.0 / mlsi_constant_depolarizing(s);
    for (int i = 0; i < 5; ++i) {
        DensityMatrix rho = random_full_rank_state(rng, 2, 0.05);
        TransportMargin t2 = tc2_check(gen, rho, c2);
        CHECK(t2.margin >= -1e-6);
        CHECK(t2.bound == doctest::Approx(std::sqrt(2 * c2 * oracle::relative_entropy(rho.matrix(), s.matrix()))));
        CHECK(tc1_check(gen, rho, gen.lipschitz_dim() * c2).margin >= -1e-6);
    }
    CHECK_THROWS_AS(tc2_check(gen, s, -1.0), InvalidInput);
}

TEST_CASE("Schur multiplier norm bracket")
{
    // PSD with unit diagonal: norm exactly 1
    Rng rng = stream_rng(46, 0);
    Matrix g = ginibre(rng, 4, 4);
    Matrix p = g * g.adjoint();
    RMatrix m(4, 4);
    RMatrix pr = p.real();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = pr(i, j) / std::sqrt(pr(i, i) * pr(j, j));
    Bracket b = schur_multiplier_norm(m);
    CHECK(b.lower <= b.upper + 1e-12);
    CHECK(b.lower == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-3));
    // rank one u vᵀ: norm max|u| max|v|
    RVector u(3), v(3);
    u << 0.5, -2.0, 1.0;
    v << 1.5, 0.2, -0.7;
    Bracket r = schur_multiplier_norm(u * v.transpose());
    CHECK(r.lower == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(r.upper == doctest::Approx(3.0).epsilon(1e-3));
    // 2×2 [[1, 1], [1, −1]] has norm √2
    RMatrix h(2, 2);
    h << 1, 1, 1, -1;
    Bracket hb = schur_multiplier_norm(h);
    CHECK(hb.lower == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(hb.upper == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("kappa")
{
    Rng rng = stream_rng(47, 0);
    DensityMatrix s = random_full_rank_state(rng, 3, 0.1);
    RMatrix m = kappa_multiplier(s, 0.9);
    for (int i = 0; i < 3; ++i) CHECK(m(i, i) == doctest::Approx(1.0));
    // all frequencies zero: κ = 1
    Bracket k = kappa(depolarizing_generator(maximally_mixed(3)));
    CHECK(k.lower == doctest::Approx(1.0));
    CHECK(k.upper == doctest::Approx(1.0));
    Bracket kd = kappa(depolarizing_generator(s));
    CHECK(kd.lower > 1.0);
    CHECK(kd.lower <= kd.upper + 1e-12);
    Bracket kr = kappa(random_db_generator(rng, s));
    CHECK(kr.lower >= 1.0);
    CHECK(kr.lower <= kr.upper + 1e-12);
}

TEST_CASE("Poincare margin at the gap")
{
    for (int i = 0; i < 10; ++i) {
        Rng rng = stream_rng(48, i);
        DBGenerator gen = random_db_generator(rng, 2 + i % 2);
        double gap = spectral_gap(gen).spectral_gap;
        const int d = gen.dim();
        Matrix f = random_hermitian(rng, d);
        f -= (gen.sigma().matrix() * f).trace().real() * Matrix::Identity(d, d);
        CHECK(poincare_margin(gen, f, gap) >= -1e-9);
        CHECK_THROWS_AS(poincare_margin(gen, f + Matrix::Identity(d, d), gap), InvalidInput);
    }
}

TEST_CASE("tail probability against the oracle")
{
    Rng rng = stream_rng(49, 0);
    for (int i = 0; i < 10; ++i) {
        DensityMatrix s = random_full_rank_state(rng, 3, 0.05);
        Matrix f = random_hermitian(rng, 3);
        for (double r : {-5.0, 0.0, 0.3, 1.0, 10.0})
            CHECK(tail_probability(s, f, r) == doctest::Approx(oracle::spectral_tail(s.matrix(), f, r)).epsilon(1e-12));
    }
    // closed interval at the eigenvalue
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    CHECK(tail_probability(maximally_mixed(2), z, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("concentration bounds")
{
    Rng rng = stream_rng(50, 0);
    for (int i = 0; i < 10; ++i) {
        int d = 2 + i % 3;
        DensityMatrix s = random_full_rank_state(rng, d, 0.05);
        DBGenerator gen = depolarizing_generator(s);
        Matrix f = random_hermitian(rng, d);
        ExpConcentration ec = exp_concentration(gen, f);
        CHECK(ec.c > 1.0);
        CHECK(ec.bound(0.0) == doctest::Approx(3.0));
        auto [gr, gi] = modular_parts(s, f);
        Matrix sq = gen.sigma_sqrt(), isq = gen.sigma_isqrt();
        CHECK((gr + cplx(0, 1) * gi - isq * f * sq).norm() < 1e-10);
        double alpha = mlsi_constant_depolarizing(s);
        GaussConcentration gc = gauss_concentration(gen, f, gen.lipschitz_dim() / alpha);
        DepolarizingGauss dg = depolarizing_gauss(s, f);
        for (int k = 0; k <= 30; ++k) {
            double r = 0.1 * k, tail = oracle::spectral_tail(s.matrix(), f, r);
            CHECK(ec.bound(r) >= tail);
            CHECK(gc.bound(r) >= tail);
            CHECK(dg.bound(r) >= tail);
        }
    }
    CHECK_THROWS_AS(exp_concentration(depolarizing_generator(maximally_mixed(2)), Matrix::Identity(2, 2)),
                    DegenerateObservable);
}

TEST_CASE("site average and product bound")
{
    Rng rng = stream_rng(51, 0);
    Matrix f = random_hermitian(rng, 2);
    Matrix id = Matrix::Identity(2, 2);
    Matrix ref = (oracle::kron(oracle::kron(f, id), id) + oracle::kron(oracle::kron(id, f), id) +
                  oracle::kron(oracle::kron(id, id), f)) /
                 3.0;
    CHECK((site_average(f, 3) - ref).norm() < 1e-14);
    CHECK_THROWS_AS(site_average(f, 7), ResourceLimit);
    DensityMatrix s = random_full_rank_state(rng, 2, 0.1);
    ProductConcentration pc = product_concentration(depolarizing_generator(s), f);
    CHECK(pc.log_term == doctest::Approx(11.0 + std::log(16.0 / s.min_eigenvalue())));
    CHECK(pc.exponent(4, 1.0) == doctest::Approx(2.0 * pc.exponent(2, 1.0)));
}

TEST_CASE("chain check is deterministic across pool sizes")
{
    Rng rng = stream_rng(52, 0);
    DBGenerator gen = depolarizing_generator(random_full_rank_state(rng, 2, 0.1));
    ChainOptions opt;
    opt.samples = 6;
    opt.seed = 9;
    ThreadPool one(1), many(4);
    ChainResult a = chain_check(gen, opt, one), b = chain_check(gen, opt, many);
    REQUIRE(a.reports.size() == 7);
    for (std::size_t k = 0; k < a.reports.size(); ++k) {
        CHECK(a.reports[k].worst_margin == b.reports[k].worst_margin);
        CHECK(a.reports[k].worst_margin >= -1e-6);
    }
    CHECK(a.alpha_exact);
    CHECK(a.gap == doctest::Approx(1.0));
}

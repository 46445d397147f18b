#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qtc/estimation.hpp"

using namespace qtc;

TEST_CASE("SLD of the diagonal family")
{
    ParametricFamily fam = diag_family();
    for (double t : {0.1, 0.3, 0.75}) {
        Matrix l = sld(fam, t).matrix();
        CHECK(l(0, 0).real() == doctest::Approx(1.0 / t));
        CHECK(l(1, 1).real() == doctest::Approx(-1.0 / (1.0 - t)));
        CHECK(sld_fisher(fam, t) == doctest::Approx(1.0 / (t * (1.0 - t))));
        Matrix f = estimator_observable(fam, t).matrix();
        CHECK(std::abs(f(0, 0) - 1.0) < 1e-12);
        CHECK(std::abs(f(1, 1)) < 1e-12);
    }
    CHECK_THROWS_AS(fam.at(1.2), InvalidInput);
}

TEST_CASE("rotation family Fisher information is the squared transverse Bloch length")
{
    ParametricFamily fam = rotation_family();
    for (double t : {0.0, 0.4, 2.0}) CHECK(sld_fisher(fam, t) == doctest::Approx(0.36).epsilon(1e-10));
}

TEST_CASE("locally unbiased estimator for every family")
{
    for (const char* name : {"diag", "rotation", "gibbs"}) {
        ParametricFamily fam = family_by_name(name);
        for (double t : {0.2, 0.45}) {
            Matrix f = estimator_observable(fam, t).matrix();
            CHECK((fam.at(t).matrix() * f).trace().real() == doctest::Approx(t).epsilon(1e-10));
            CHECK((fam.tangent(t) * f).trace().real() == doctest::Approx(1.0).epsilon(1e-7));
        }
    }
    CHECK_THROWS_AS(family_by_name("nope"), InvalidInput);
}

TEST_CASE("Richardson tangent matches a fine central difference")
{
    ParametricFamily fam = gibbs_family();
    const double t = 0.3, h = 1e-4;
    Matrix ref = (fam.state(t + h) - fam.state(t - h)) / (2 * h);
    CHECK((fam.tangent(t) - ref).norm() < 1e-7);
    ParametricFamily rot = rotation_family();
    ParametricFamily numeric = rot;
    numeric.derivative = nullptr;
    CHECK((numeric.tangent(0.7) - rot.tangent(0.7)).norm() < 1e-9);
}

TEST_CASE("degenerate families")
{
    Rng rng = stream_rng(61, 0);
    ParametricFamily c = constant_family(random_full_rank_state(rng, 2, 0.1));
    CHECK_THROWS_AS(estimator_observable(c, 0.5), UninformativeFamily);
    // conjugating by a unitary leaves the Fisher information unchanged
    Matrix u = haar_unitary(rng, 2);
    ParametricFamily cf = conjugated_family(rotation_family(), u);
    CHECK(sld_fisher(cf, 0.3) == doctest::Approx(0.36).epsilon(1e-10));
}

TEST_CASE("exact error probability is a binomial tail for the diagonal family")
{
    ParametricFamily fam = diag_family();
    for (int n : {1, 4, 8, 25})
        for (double eps : {0.05, 0.2, 0.5})
            CHECK(exact_error_probability(fam, 0.3, n, eps) ==
                  doctest::Approx(oracle::binomial_error(n, 0.3, 0.3, eps)).epsilon(1e-10));
    CHECK_THROWS_AS(exact_error_probability(fam, 0.3, 500, 0.1), ResourceLimit);
}

TEST_CASE("Monte Carlo agrees with enumeration and is pool-size independent")
{
    ParametricFamily fam = diag_family();
    ThreadPool one(1), four(4);
    ErrorEstimate a = monte_carlo_error_probability(fam, 0.3, 6, 0.25, 20000, 3, one);
    ErrorEstimate b = monte_carlo_error_probability(fam, 0.3, 6, 0.25, 20000, 3, four);
    CHECK(a.probability == b.probability);
    double ex = exact_error_probability(fam, 0.3, 6, 0.25);
    CHECK(std::abs(a.probability - ex) <= 4.0 * a.std_error);
    CHECK_THROWS_AS(monte_carlo_error_probability(fam, 0.3, 100000, 0.1, 1000000, 1, one), ResourceLimit);
}

TEST_CASE("finite-n bounds")
{
    ParametricFamily fam = diag_family();
    DensityMatrix rho = fam.at(0.3);
    Matrix f = estimator_observable(fam, 0.3).matrix();
    DBGenerator gen = depolarizing_generator(rho);
    double bd = error_bound_dissipative(gen, f, 8, 0.5);
    double bp = error_bound_depolarizing(rho, f, 8, 0.5);
    // both bounds decay with n
    CHECK(error_bound_dissipative(gen, f, 80, 0.5) < bd);
    CHECK(error_bound_depolarizing(rho, f, 80, 0.5) < bp);
    CHECK(bd >= oracle::binomial_error(8, 0.3, 0.3, 0.5));
    CHECK(bp >= oracle::binomial_error(8, 0.3, 0.3, 0.5));
    CHECK_THROWS_AS(error_bound_depolarizing(rho, Matrix::Identity(2, 2), 8, 0.5), DegenerateObservable);
}

TEST_CASE("per-copy measurement induces the law of the global averaged observable at n = 2")
{
    for (const char* name : {"diag", "rotation", "gibbs"}) {
        ParametricFamily fam = family_by_name(name);
        const double t = 0.35;
        Matrix rho = fam.at(t).matrix();
        Matrix f = estimator_observable(fam, t).matrix();
        Matrix id = Matrix::Identity(2, 2);
        Matrix f2 = 0.5 * (oracle::kron(f, id) + oracle::kron(id, f));
        Matrix r2 = oracle::kron(rho, rho);
        Eigen::SelfAdjointEigenSolver<Matrix> es(f2);
        for (double eps : {0.01, 0.3, 0.9}) {
            double p = 0.0;
            for (int i = 0; i < 4; ++i)
                if (std::abs(es.eigenvalues()(i) - t) > eps) {
                    Eigen::VectorXcd v = es.eigenvectors().col(i);
                    p += (v.adjoint() * r2 * v)(0, 0).real();
                }
            CHECK(exact_error_probability(fam, t, 2, eps) == doctest::Approx(p).epsilon(1e-10));
        }
    }
}

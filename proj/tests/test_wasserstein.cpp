#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qtc/entropy.hpp"
#include "qtc/wasserstein.hpp"

using namespace qtc;

namespace {

double quad(const DensityMatrix& rho, double omega, const Matrix& y)
{
    return (y.adjoint() * tilted_multiplier(rho, omega, y, Direction::forward)).trace().real();
}

// sup over random traceless directions of Tr(fΔ)/Lip(f), refined by coordinate hill climbing
double w1_search(const DBGenerator& gen, const Matrix& delta, LipVariant v, std::uint64_t seed)
{
    auto basis = hermitian_basis(gen.dim());
    Rng rng = stream_rng(seed, 0);
    auto ratio = [&](const RVector& x) {
        Matrix f = from_coordinates(basis, x);
        return (f * delta).trace().real() / lipschitz_constant(gen, f, v);
    };
    RVector best(basis.size());
    double bv = -1;
    for (int i = 0; i < 4000; ++i) {
        RVector x(basis.size());
        for (auto& c : x) c = normal(rng);
        double r = ratio(x);
        if (r > bv) {
            bv = r;
            best = x;
        }
    }
    for (double step = 0.3; step > 1e-7; step *= 0.5)
        for (int sweep = 0; sweep < 20; ++sweep) {
            bool moved = false;
            for (int k = 0; k < best.size(); ++k)
                for (double sgn : {-1.0, 1.0}) {
                    RVector x = best;
                    x(k) += sgn * step * best.norm();
                    double r = ratio(x);
                    if (r > bv) {
                        bv = r;
                        best = x;
                        moved = true;
                    }
                }
            if (!moved) break;
        }
    return bv;
}

}  // namespace

TEST_CASE("variant names round trip")
{
    for (LipVariant v : {LipVariant::Lip, LipVariant::Lip2, LipVariant::LipG, LipVariant::LipH, LipVariant::ClH})
        CHECK(parse_variant(variant_name(v)) == v);
    CHECK_THROWS_AS(parse_variant("lip3"), InvalidInput);
}

TEST_CASE("Lipschitz seminorms are seminorms")
{
    Rng rng = stream_rng(31, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    Matrix f = random_hermitian(rng, 3), g = random_hermitian(rng, 3);
    Matrix id = Matrix::Identity(3, 3);
    for (LipVariant v : {LipVariant::Lip, LipVariant::Lip2, LipVariant::LipG, LipVariant::LipH, LipVariant::ClH}) {
        CHECK(lipschitz_constant(gen, id, v) < 1e-12);
        CHECK(lipschitz_constant(gen, f + 2.0 * id, v) == doctest::Approx(lipschitz_constant(gen, f, v)));
        CHECK(lipschitz_constant(gen, -3.0 * f, v) == doctest::Approx(3.0 * lipschitz_constant(gen, f, v)));
        CHECK(lipschitz_constant(gen, f + g, v) <= lipschitz_constant(gen, f, v) + lipschitz_constant(gen, g, v) + 1e-12);
    }
    CHECK_THROWS_AS(lipschitz_constant(gen, ginibre(rng, 3, 3), LipVariant::Lip), InvalidInput);
}

TEST_CASE("ClH W1 is half the trace distance")
{
    Rng rng = stream_rng(32, 0);
    for (int d = 2; d <= 4; ++d) {
        DBGenerator gen = depolarizing_generator(random_full_rank_state(rng, d, 0.05));
        DensityMatrix a = random_full_rank_state(rng, d, 0.05), b = random_full_rank_state(rng, d, 0.05);
        WassersteinResult r = w1(gen, a, b, LipVariant::ClH);
        CHECK(r.value == doctest::Approx(0.5 * oracle::trace_norm_hermitian(a.matrix() - b.matrix())).epsilon(1e-12));
        CHECK(lipschitz_constant(gen, r.certificate, LipVariant::ClH) <= 1.0 + 1e-12);
    }
}

TEST_CASE("W1 certificates are feasible and attain the value")
{
    for (int i = 0; i < 4; ++i) {
        Rng rng = stream_rng(33, i);
        DBGenerator gen = i % 2 ? random_db_generator(rng, 2) : depolarizing_generator(random_full_rank_state(rng, 2, 0.1));
        DensityMatrix a = random_full_rank_state(rng, 2, 0.05), b = random_full_rank_state(rng, 2, 0.05);
        Matrix delta = a.matrix() - b.matrix();
        for (LipVariant v : {LipVariant::Lip, LipVariant::Lip2, LipVariant::LipG, LipVariant::LipH}) {
            WassersteinResult r = w1(gen, a, b, v);
            CHECK(lipschitz_constant(gen, r.certificate, v) <= 1.0 + 1e-8);
            CHECK((r.certificate * delta).trace().real() == doctest::Approx(r.value).epsilon(1e-8));
            // an independent search does not beat the solver
            CHECK(w1_search(gen, delta, v, 100 + i) <= r.value * (1 + 1e-6) + 1e-10);
        }
        CHECK(w1(gen, a, a, LipVariant::Lip).value == 0.0);
    }
}

TEST_CASE("tilted quadratic gradient matches finite differences")
{
    Rng rng = stream_rng(34, 0);
    for (double omega : {0.0, 0.7, -1.2}) {
        DensityMatrix rho = random_full_rank_state(rng, 3, 0.05);
        Matrix y = ginibre(rng, 3, 3);
        Matrix g = tilted_quadratic_gradient(rho, omega, y);
        for (int k = 0; k < 3; ++k) {
            Matrix h = random_hermitian(rng, 3);
            h -= (h.trace() / 3.0) * Matrix::Identity(3, 3);
            const double e = 1e-6;
            double fd = (quad(DensityMatrix(rho.matrix() + e * h), omega, y) -
                         quad(DensityMatrix(rho.matrix() - e * h), omega, y)) /
                        (2 * e);
            CHECK((g * h).trace().real() == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("metric operator solve")
{
    Rng rng = stream_rng(35, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    DensityMatrix rho = random_full_rank_state(rng, 3, 0.05);
    Matrix tau = random_hermitian(rng, 3);
    tau -= (tau.trace() / 3.0) * Matrix::Identity(3, 3);
    MetricSolve ms = metric_norm_squared(gen, rho, tau);
    CHECK((metric_operator(gen, rho, ms.potential) - tau).norm() < 1e-9);
    CHECK(ms.value == doctest::Approx((ms.potential * tau).trace().real()).epsilon(1e-10));
    CHECK(ms.value > 0.0);
    // value is the minimum of ⟨U, K U⟩ with K U = τ: perturbing U along the kernel costs nothing, elsewhere it costs
    MetricSolve twice = metric_norm_squared(gen, rho, 2.0 * tau);
    CHECK(twice.value == doctest::Approx(4.0 * ms.value).epsilon(1e-10));
    // gradient-flow identity
    Matrix flow = apply_adjoint(gen, rho.matrix());
    CHECK(metric_norm_squared(gen, rho, flow).value == doctest::Approx(fisher_information(gen, rho)).epsilon(1e-8));
}

TEST_CASE("W2 upper bound: path, refinement, bracket")
{
    Rng rng = stream_rng(36, 0);
    DBGenerator gen = depolarizing_generator(random_full_rank_state(rng, 2, 0.1));
    DensityMatrix a = random_full_rank_state(rng, 2, 0.05), b = random_full_rank_state(rng, 2, 0.05);
    WassersteinResult r = w2_upper(gen, a, b);
    CHECK(r.value > 0.0);
    CHECK(r.states.size() == static_cast<std::size_t>(r.segments + 1));
    CHECK((r.states.front() - a.matrix()).norm() < 1e-12);
    CHECK((r.states.back() - b.matrix()).norm() < 1e-12);
    CHECK(std::sqrt(path_action(gen, r.states)) == doctest::Approx(r.value).epsilon(1e-10));
    for (std::size_t k = 1; k < r.refinement.size(); ++k)
        CHECK(r.refinement[k].second <= r.refinement[k - 1].second + 1e-12);
    // the straight line is an admissible path, so it bounds the optimum
    std::vector<Matrix> line;
    for (int k = 0; k <= r.segments; ++k) {
        double s = static_cast<double>(k) / r.segments;
        line.push_back((1 - s) * a.matrix() + s * b.matrix());
    }
    CHECK(r.value <= std::sqrt(path_action(gen, line)) + 1e-12);
    WassersteinResult rev = w2_upper(gen, b, a);
    CHECK(rev.value == doctest::Approx(r.value).epsilon(1e-3));

    WassersteinResult br = w2_bracket(gen, a, b);
    CHECK(br.lower <= br.upper + 1e-6);
    CHECK(is_depolarizing(gen));
    CHECK(!is_depolarizing(random_db_generator(rng, 2)));
    CHECK(w2_upper(gen, a, a).value < 1e-8);
}

TEST_CASE("W2 from the invariant state scales like the square root of the metric norm")
{
    // for ρ close to σ, W2(ρ, σ)² ≈ ‖ρ − σ‖²_g at σ
    Rng rng = stream_rng(37, 0);
    DBGenerator gen = random_db_generator(rng, 2);
    Matrix tau = random_hermitian(rng, 2);
    tau -= (tau.trace() / 2.0) * Matrix::Identity(2, 2);
    const double e = 1e-3;
    DensityMatrix rho(gen.sigma().matrix() + e * tau);
    double w = w2_upper(gen, rho, gen.sigma()).value;
    double ref = std::sqrt(metric_norm_squared(gen, gen.sigma(), e * tau).value);
    CHECK(w == doctest::Approx(ref).epsilon(1e-2));
}

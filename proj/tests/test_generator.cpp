#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qtc/generator.hpp"

using namespace qtc;

namespace {

// Σ_j c_j (e^{−ω/2} L*[f, L] + e^{ω/2} [L, f] L*), the Alicki form written out term by term.
Matrix alicki(const DBGenerator& gen, const Matrix& f)
{
    Matrix out = Matrix::Zero(f.rows(), f.cols());
    for (const Term& t : gen.terms()) {
        Matrix l = t.L, la = t.L.adjoint();
        out += t.c * (std::exp(-t.omega / 2) * la * (f * l - l * f) + std::exp(t.omega / 2) * (l * f - f * l) * la);
    }
    return out;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("heisenberg action equals the Alicki form")
{
    for (int i = 0; i < 12; ++i) {
        Rng rng = stream_rng(11, i);
        DBGenerator gen = random_db_generator(rng, 2 + i % 3);
        Matrix f = ginibre(rng, gen.dim(), gen.dim());
        CHECK(max_abs(qtc::apply(gen, f) - alicki(gen, f)) < 1e-10 * std::max(1.0, max_abs(f)));
    }
}

TEST_CASE("generator properties")
{
    for (int i = 0; i < 20; ++i) {
        Rng rng = stream_rng(12, i);
        DBGenerator gen = random_db_generator(rng, 2 + i % 3);
        const int d = gen.dim();
        Matrix id = Matrix::Identity(d, d);
        const Matrix& s = gen.sigma().matrix();
        CHECK(validate(gen).ok());
        // unital, invariant σ, trace preserving, KMS symmetric
        CHECK(max_abs(qtc::apply(gen, id)) < 1e-10);
        CHECK(max_abs(apply_adjoint(gen, s)) < 1e-10);
        Matrix rho = random_density(rng, d).matrix();
        CHECK(std::abs(apply_adjoint(gen, rho).trace()) < 1e-10);
        Matrix f = random_hermitian(rng, d), g = random_hermitian(rng, d);
        Matrix sq = gen.sigma_sqrt();
        cplx lhs = (f.adjoint() * sq * qtc::apply(gen, g) * sq).trace();
        cplx rhs = (qtc::apply(gen, f).adjoint() * sq * g * sq).trace();
        CHECK(std::abs(lhs - rhs) < 1e-9);
        // Hermiticity preserving, negative semidefinite Dirichlet form
        CHECK(is_hermitian(qtc::apply(gen, f), 1e-10));
        CHECK((f * sq * qtc::apply(gen, f) * sq).trace().real() <= 1e-12);
    }
}

TEST_CASE("superoperator pictures and propagator")
{
    Rng rng = stream_rng(13, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    Matrix f = random_hermitian(rng, 3);
    Matrix h = superoperator(gen, Picture::heisenberg).matrix();
    Matrix s = superoperator(gen, Picture::schrodinger).matrix();
    CHECK(max_abs(s - h.adjoint()) < 1e-12);
    CHECK(max_abs(unvectorize(h * vectorize(f), 3) - qtc::apply(gen, f)) < 1e-11);

    Propagator prop(gen);
    const double t = 0.37;
    // Taylor series of e^{tH} as the reference
    Eigen::VectorXcd v = vectorize(f), term = v, acc = v;
    for (int k = 1; k < 80; ++k) {
        term = (t / k) * (h * term);
        acc += term;
    }
    CHECK(max_abs(prop.heisenberg(f, t) - unvectorize(acc, 3)) < 1e-9);
    DensityMatrix rho = random_full_rank_state(rng, 3, 0.05);
    Matrix a = prop.schrodinger(rho.matrix(), t);
    // duality Tr(ρ_t f) = Tr(ρ f_t)
    CHECK(std::abs((a * f).trace() - (rho.matrix() * prop.heisenberg(f, t)).trace()) < 1e-10);
    CHECK(max_abs(prop.schrodinger(rho.matrix(), 60.0) - gen.sigma().matrix()) < 1e-8);
}

TEST_CASE("spectrum of the depolarizing generator")
{
    for (int d = 2; d <= 4; ++d) {
        Rng rng = stream_rng(14, d);
        DensityMatrix s = random_full_rank_state(rng, d, 0.05);
        DBGenerator gen = depolarizing_generator(s);
        CHECK(validate(gen).ok());
        GeneratorSpectrum sp = spectral_gap(gen);
        CHECK(sp.kernel_dim == 1);
        CHECK(sp.spectral_gap == doctest::Approx(1.0).epsilon(1e-10));
        // L(f) = Tr(σf) I − f
        Matrix f = ginibre(rng, d, d);
        Matrix ref = (s.matrix() * f).trace() * Matrix::Identity(d, d) - f;
        CHECK(max_abs(qtc::apply(gen, f) - ref) < 1e-11);
    }
}

TEST_CASE("non-primitive generator is rejected by the gap computation")
{
    // a single dephasing term has a degenerate kernel
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    DBGenerator gen(maximally_mixed(2), {Term{1.0, 0.0, z}});
    CHECK_THROWS_AS(spectral_gap(gen), NonPrimitive);
}

TEST_CASE("binary relative entropy and alpha objective")
{
    for (double x : {0.1, 0.35, 0.8})
        for (double y : {0.2, 0.5}) CHECK(binary_relative_entropy(x, y) == doctest::Approx(oracle::binary_kl(x, y)));
    CHECK(binary_relative_entropy(0.0, 0.3) == doctest::Approx(-std::log(0.7)));
    // q is 1 at x = y, smooth across the removable point
    CHECK(alpha_objective(0.3, 0.3) == doctest::Approx(alpha_objective(0.3 + 2e-5, 0.3)).epsilon(1e-4));
    CHECK(mlsi_constant_depolarizing(maximally_mixed(2)) == doctest::Approx(1.0).epsilon(1e-9));
    double y = 0.15;
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = y;
    m(1, 1) = 1 - y;
    CHECK(mlsi_constant_depolarizing(DensityMatrix(m)) ==
          doctest::Approx(oracle::alpha_grid_min(y, 200000)).epsilon(1e-8));
}

TEST_CASE("gradient and divergence are adjoint")
{
    Rng rng = stream_rng(15, 0);
    DBGenerator gen = random_db_generator(rng, 3);
    Matrix f = random_hermitian(rng, 3);
    std::vector<Matrix> grad = gradient(gen, f);
    std::vector<Matrix> a;
    for (std::size_t j = 0; j < gen.size(); ++j) a.push_back(ginibre(rng, 3, 3));
    // ⟨∇f, A⟩ weighted by c_j equals ⟨f, div A⟩ up to sign convention
    cplx lhs = 0.0;
    for (std::size_t j = 0; j < gen.size(); ++j) lhs += gen.terms()[j].c * (grad[j].adjoint() * a[j]).trace();
    cplx rhs = (f * divergence(gen, a)).trace();
    CHECK(std::abs(lhs + rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    CHECK(max_abs(derivation(gen, 0, f) - commutator(gen.terms()[0].L, f)) == 0.0);
}

TEST_CASE("tensorization")
{
    Rng rng = stream_rng(16, 0);
    DBGenerator site = random_db_generator(rng, 2);
    DBGenerator two = tensorize(site, 2);
    CHECK(two.dim() == 4);
    CHECK(validate(two).ok());
    Matrix f = random_hermitian(rng, 2), g = random_hermitian(rng, 2);
    Matrix id = Matrix::Identity(2, 2);
    Matrix lhs = qtc::apply(two, oracle::kron(f, g));
    Matrix rhs = oracle::kron(qtc::apply(site, f), g) + oracle::kron(f, qtc::apply(site, g));
    CHECK(max_abs(lhs - rhs) < 1e-10);
    CHECK(spectral_gap(two).spectral_gap == doctest::Approx(spectral_gap(site).spectral_gap).epsilon(1e-9));
    CHECK_THROWS_AS(tensorize(site, 7), ResourceLimit);
    CHECK(spectral_gap(scaled(site, 2.5)).spectral_gap ==
          doctest::Approx(2.5 * spectral_gap(site).spectral_gap).epsilon(1e-10));
    (void)id;
}

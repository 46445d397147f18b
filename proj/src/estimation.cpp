#include "qtc/estimation.hpp"

#include "qtc/inequalities.hpp"
#include "qtc/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace qtc {

DensityMatrix ParametricFamily::at(double theta) const
{
    if (!(theta > lo && theta < hi)) throw InvalidInput("parameter outside the family's range");
    return DensityMatrix(hermitian_part(state(theta)), 1e-10);
}

Matrix ParametricFamily::tangent(double theta) const
{
    if (!(theta > lo && theta < hi)) throw InvalidInput("parameter outside the family's range");
    if (derivative) return hermitian_part(derivative(theta));
    // Richardson on central differences at h and h/2
    auto central = [&](double h) { return Matrix((state(theta + h) - state(theta - h)) / (2 * h)); };
    double h = std::min(step, 0.25 * std::min(theta - lo, hi - theta));
    Matrix d = (4.0 * central(h / 2) - central(h)) / 3.0;
    return hermitian_part(d);
}

namespace {
Matrix pauli_x()
{
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Matrix pauli_z()
{
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
Matrix expm_hermitian(const Matrix& h)
{
    return eig_function(eigh(hermitian_part(h)), [](double x) { return std::exp(x); });
}
}  // namespace

ParametricFamily diag_family()
{
    ParametricFamily f;
    f.name = "diag";
    f.dim = 2;
    f.lo = 0.0;
    f.hi = 1.0;
    f.state = [](double t) {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = t;
        m(1, 1) = 1 - t;
        return m;
    };
    f.derivative = [](double) { return Matrix(pauli_z()); };
    return f;
}

ParametricFamily rotation_family()
{
    ParametricFamily f;
    f.name = "rotation";
    f.dim = 2;
    f.lo = -1e6;
    f.hi = 1e6;
    Matrix rho0 = 0.5 * (Matrix::Identity(2, 2) + 0.6 * pauli_x() + 0.3 * pauli_z());
    auto u = [](double t) {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = std::exp(cplx(0, -t / 2));
        m(1, 1) = std::exp(cplx(0, t / 2));
        return m;
    };
    f.state = [rho0, u](double t) { return Matrix(u(t) * rho0 * u(t).adjoint()); };
    f.derivative = [rho0, u](double t) {
        Matrix r = u(t) * rho0 * u(t).adjoint();
        return Matrix(cplx(0, -0.5) * commutator(pauli_z(), r));
    };
    return f;
}

ParametricFamily gibbs_family()
{
    ParametricFamily f;
    f.name = "gibbs";
    f.dim = 2;
    f.lo = -1e3;
    f.hi = 1e3;
    f.state = [](double t) {
        Matrix e = expm_hermitian(-(pauli_z() + t * pauli_x()));
        return Matrix(e / e.trace().real());
    };
    return f;
}

ParametricFamily family_by_name(const std::string& name)
{
    if (name == "diag") return diag_family();
    if (name == "rotation") return rotation_family();
    if (name == "gibbs") return gibbs_family();
    throw InvalidInput("unknown family '" + name + "' (expected diag, rotation or gibbs)");
}

ParametricFamily constant_family(const DensityMatrix& rho)
{
    ParametricFamily f;
    f.name = "constant";
    f.dim = rho.dim();
    f.lo = -1e300;
    f.hi = 1e300;
    Matrix m = rho.matrix();
    f.state = [m](double) { return m; };
    f.derivative = [m](double) { return Matrix(Matrix::Zero(m.rows(), m.cols())); };
    return f;
}

ParametricFamily conjugated_family(const ParametricFamily& base, const Matrix& u)
{
    ParametricFamily f = base;
    f.name = base.name + "_conjugated";
    auto st = base.state;
    f.state = [st, u](double t) { return Matrix(u * st(t) * u.adjoint()); };
    if (base.derivative) {
        auto dv = base.derivative;
        f.derivative = [dv, u](double t) { return Matrix(u * dv(t) * u.adjoint()); };
    }
    return f;
}

HermitianOperator sld(const ParametricFamily& fam, double theta)
{
    DensityMatrix rho = fam.at(theta);
    require_full_rank(rho);
    Matrix dr = fam.tangent(theta);
    const Eig& e = rho.eig();
    Matrix l = to_eigenbasis(e, dr);
    const int d = rho.dim();
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) l(k, j) *= 2.0 / (e.w(k) + e.w(j));
    Matrix out = hermitian_part(from_eigenbasis(e, l));
    double res = (0.5 * (rho.matrix() * out + out * rho.matrix()) - dr).norm();
    if (res > 1e-8 * std::max(1.0, dr.norm())) throw InternalConsistency("SLD equation residual too large");
    return HermitianOperator(out, 1e-9);
}

double sld_fisher(const ParametricFamily& fam, double theta)
{
    DensityMatrix rho = fam.at(theta);
    HermitianOperator l = sld(fam, theta);
    return std::max(0.0, (rho.matrix() * l.matrix() * l.matrix()).trace().real());
}

HermitianOperator estimator_observable(const ParametricFamily& fam, double theta)
{
    HermitianOperator l = sld(fam, theta);
    DensityMatrix rho = fam.at(theta);
    double j = std::max(0.0, (rho.matrix() * l.matrix() * l.matrix()).trace().real());
    if (j <= 1e-12) throw UninformativeFamily("SLD Fisher information vanishes: no unbiased estimator");
    Matrix f = l.matrix() / j + theta * Matrix::Identity(fam.dim, fam.dim);
    return HermitianOperator(hermitian_part(f), 1e-9);
}

double error_bound_dissipative(const DBGenerator& gen, const Matrix& f, int n, double eps)
{
    if (n < 1) throw InvalidInput("number of copies must be positive");
    if (eps < 0) throw InvalidInput("negative accuracy");
    return 2.0 * product_concentration(gen, f).bound(n, eps);
}

double error_bound_depolarizing(const DensityMatrix& rho, const Matrix& f, int n, double eps)
{
    if (n < 1) throw InvalidInput("number of copies must be positive");
    if (eps < 0) throw InvalidInput("negative accuracy");
    require_full_rank(rho);
    DepolarizingGauss g = depolarizing_gauss(rho, f);
    if (g.width_sq <= 1e-28 * std::max(1.0, f.squaredNorm()))
        throw DegenerateObservable("estimator observable is a multiple of the identity");
    const double d = rho.dim();
    double log_term = 11.0 + std::log(std::pow(d, 4) / rho.min_eigenvalue());
    return 2.0 * std::exp(-n * eps * eps / (16.0 * log_term * g.width_sq));
}

namespace {

struct OutcomeLaw {
    std::vector<double> values;
    std::vector<double> probs;
};

OutcomeLaw outcome_law(const ParametricFamily& fam, double theta)
{
    DensityMatrix rho = fam.at(theta);
    HermitianOperator f = estimator_observable(fam, theta);
    SpectralDecomposition sd = spectral_decompose(f);
    OutcomeLaw law;
    double total = 0.0;
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
        double p = std::max(0.0, (rho.matrix() * sd.projectors[i]).trace().real());
        law.values.push_back(sd.eigenvalues[i]);
        law.probs.push_back(p);
        total += p;
    }
    for (double& p : law.probs) p /= total;
    return law;
}

}  // namespace

ErrorEstimate monte_carlo_error_probability(const ParametricFamily& fam, double theta, int n, double eps, long trials,
                                            std::uint64_t seed, ThreadPool& pool)
{
    if (n < 1 || trials < 1) throw InvalidInput("copies and trials must be positive");
    if (static_cast<double>(n) * static_cast<double>(trials) > 1e10)
        throw ResourceLimit("n·trials exceeds the Monte Carlo budget of 1e10 samples");
    OutcomeLaw law = outcome_law(fam, theta);
    std::vector<double> cdf(law.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = (acc += law.probs[i]);
    cdf.back() = 1.0;

    const long chunk = 4096;
    const std::size_t chunks = static_cast<std::size_t>((trials + chunk - 1) / chunk);
    std::vector<long> hits(chunks, 0);
    pool.parallel_for(chunks, [&](std::size_t c) {
        long begin = static_cast<long>(c) * chunk, end = std::min(trials, begin + chunk);
        long h = 0;
        for (long t = begin; t < end; ++t) {
            Rng rng = stream_rng(seed, static_cast<std::uint64_t>(t));
            double sum = 0.0;
            for (int k = 0; k < n; ++k) {
                double u = uniform01(rng);
                std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                sum += law.values[std::min(i, cdf.size() - 1)];
            }
            if (std::abs(sum / n - theta) > eps) ++h;
        }
        hits[c] = h;
    });
    long total = 0;
    for (long h : hits) total += h;
    ErrorEstimate e;
    e.trials = trials;
    e.probability = static_cast<double>(total) / trials;
    e.std_error = std::sqrt(e.probability * (1 - e.probability) / trials);
    return e;
}

double exact_error_probability(const ParametricFamily& fam, double theta, int n, double eps)
{
    if (n < 1) throw InvalidInput("number of copies must be positive");
    if (n > 200) throw ResourceLimit("exact enumeration limited to n ≤ 200");
    OutcomeLaw law = outcome_law(fam, theta);
    const std::size_t k = law.values.size();
    std::vector<double> logp(k);
    for (std::size_t i = 0; i < k; ++i) logp[i] = law.probs[i] > 0 ? std::log(law.probs[i]) : -INFINITY;
    double total = 0.0;
    std::vector<int> counts(k, 0);
    // enumerate compositions of n into k parts
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == k) {
            counts[i] = left;
            double mean = 0.0, lp = std::lgamma(n + 1.0);
            for (std::size_t j = 0; j < k; ++j) {
                mean += counts[j] * law.values[j];
                lp -= std::lgamma(counts[j] + 1.0);
                if (counts[j] > 0) lp += counts[j] * logp[j];
            }
            if (std::abs(mean / n - theta) > eps && std::isfinite(lp)) total += std::exp(lp);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[i] = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, n);
    return std::min(1.0, total);
}

}  // namespace qtc

#include "qtc/generator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>

namespace qtc {

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix power_of(const DensityMatrix& s, double a)
{
    return eig_function(s.eig(), [a](double x) { return std::pow(x, a); });
}

}  // namespace

DBGenerator::DBGenerator(DensityMatrix sigma, std::vector<Term> terms, int lipschitz_dim)
    : sigma_(std::move(sigma)), terms_(std::move(terms))
{
    require_full_rank(sigma_);
    const int d = sigma_.dim();
    lip_dim_ = lipschitz_dim > 0 ? lipschitz_dim : d;
    for (const Term& t : terms_) {
        if (t.L.rows() != d || t.L.cols() != d) throw InvalidInput("Lindblad operator dimension mismatch");
        if (!std::isfinite(t.c) || !std::isfinite(t.omega) || !t.L.allFinite())
            throw InvalidInput("non-finite generator term");
    }
    partner_.assign(terms_.size(), -1);
    partner_res_.assign(terms_.size(), 0.0);
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        Matrix adj = terms_[j].L.adjoint();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < terms_.size(); ++k) {
            double r = max_abs(terms_[k].L - adj);
            if (r < best) {
                best = r;
                partner_[j] = static_cast<int>(k);
            }
        }
        partner_res_[j] = best;
    }
    sq_ = power_of(sigma_, 0.5);
    isq_ = power_of(sigma_, -0.5);
}

bool ValidationReport::ok() const
{
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

double ValidationReport::worst_residual() const
{
    double r = 0.0;
    for (const auto& c : checks) r = std::max(r, c.residual);
    return r;
}

Matrix apply(const DBGenerator& gen, const Matrix& f)
{
    const int d = gen.dim();
    if (f.rows() != d || f.cols() != d) throw InvalidInput("observable dimension mismatch");
    Matrix out = Matrix::Zero(d, d);
    for (const Term& t : gen.terms()) {
        Matrix la = t.L.adjoint();
        Matrix lal = la * t.L;
        out += t.c * std::exp(-t.omega / 2) * (2.0 * la * f * t.L - lal * f - f * lal);
    }
    return out;
}

Matrix apply_adjoint(const DBGenerator& gen, const Matrix& rho)
{
    const int d = gen.dim();
    if (rho.rows() != d || rho.cols() != d) throw InvalidInput("state dimension mismatch");
    Matrix x = gen.sigma_isqrt() * rho * gen.sigma_isqrt();
    return gen.sigma_sqrt() * qtc::apply(gen, x) * gen.sigma_sqrt();
}

Superoperator superoperator(const DBGenerator& gen, Picture picture)
{
    const int d = gen.dim();
    const int n = d * d;
    Matrix id = Matrix::Identity(d, d);
    Matrix h = Matrix::Zero(n, n);
    for (const Term& t : gen.terms()) {
        Matrix la = t.L.adjoint();
        Matrix lal = la * t.L;
        cplx w = t.c * std::exp(-t.omega / 2);
        h += w * (2.0 * kron(t.L.transpose(), la) - kron(id, lal) - kron(lal.transpose(), id));
    }
    if (picture == Picture::schrodinger) h.adjointInPlace();
    return Superoperator(d, std::move(h));
}

ValidationReport validate(const DBGenerator& gen, double tol)
{
    ValidationReport rep;
    const int d = gen.dim();
    const auto& terms = gen.terms();
    const Matrix& s = gen.sigma().matrix();
    Matrix sinv = power_of(gen.sigma(), -1.0);

    double closure = 0.0, eigv = 0.0, norm = 0.0, trace = 0.0, sym = 0.0, cpos = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const Term& t = terms[j];
        closure = std::max(closure, gen.partner_residual(j));
        double scale = std::max(1.0, max_abs(t.L));
        eigv = std::max(eigv, max_abs(s * t.L * sinv - std::exp(-t.omega) * t.L) / scale);
        trace = std::max(trace, std::abs(t.L.trace()));
        for (std::size_t k = 0; k < terms.size(); ++k) {
            cplx ip = (t.L.adjoint() * terms[k].L).trace() / static_cast<double>(d);
            norm = std::max(norm, std::abs(ip - (j == k ? 1.0 : 0.0)));
        }
        int p = gen.partner(j);
        if (p >= 0) sym = std::max(sym, std::abs(t.c - terms[p].c) / std::max(1.0, std::abs(t.c)));
        if (!(t.c > 0)) cpos = std::max(cpos, std::abs(t.c) + 1.0);
    }
    rep.checks.push_back({"adjoint_closure", closure < tol, closure});
    rep.checks.push_back({"modular_eigenvector", eigv < tol, eigv});
    rep.checks.push_back({"normalization", norm < tol, norm});
    rep.checks.push_back({"traceless", trace < tol, trace});
    rep.checks.push_back({"coefficient_symmetry", sym < tol, sym});
    rep.checks.push_back({"positive_coefficients", cpos == 0.0, cpos});

    Matrix h = superoperator(gen, Picture::heisenberg).matrix();
    for (double sv : {1.0, 0.5}) {
        Matrix a = power_of(gen.sigma(), sv);
        Matrix b = power_of(gen.sigma(), 1.0 - sv);
        // ⟨f, g⟩_{s,σ} = ⟨f, σ^{1-s} g σ^s⟩_HS
        Matrix g = kron(a.transpose(), b);
        Matrix gh = g * h;
        double r = max_abs(gh - h.adjoint() * g) / std::max(1e-300, max_abs(gh));
        if (terms.empty()) r = 0.0;
        rep.checks.push_back({sv == 1.0 ? "self_adjoint_gns" : "self_adjoint_kms", r < tol, r});
    }
    return rep;
}

Propagator::Propagator(const DBGenerator& gen) : d_(gen.dim())
{
    h_ = superoperator(gen, Picture::heisenberg).matrix();
    const RVector& p = gen.sigma().eigenvalues();
    double cond = std::sqrt(p(p.size() - 1) / p(0));
    Matrix q = power_of(gen.sigma(), 0.25);
    Matrix qi = power_of(gen.sigma(), -0.25);
    Matrix g = kron(q.transpose(), q);
    Matrix gi = kron(qi.transpose(), qi);
    Matrix k = g * h_ * gi;
    double asym = max_abs(k - k.adjoint()) / std::max(1e-300, max_abs(k));
    symmetric_ = cond <= 1e8 && asym < 1e-8;
    if (!symmetric_) return;
    Eig e = eigh(hermitian_part(k));
    lambda_ = e.w;
    left_ = gi * e.V;
    right_ = e.V.adjoint() * g;
}

Matrix Propagator::exp_heisenberg(double t) const
{
    if (symmetric_) {
        RVector ex = (t * lambda_).array().exp();
        return left_ * ex.asDiagonal() * right_;
    }
    Matrix th = t * h_;
    return th.exp();
}

Matrix Propagator::heisenberg(const Matrix& f, double t) const
{
    if (t < 0) throw InvalidInput("negative time");
    return unvectorize(exp_heisenberg(t) * vectorize(f), d_);
}

Matrix Propagator::schrodinger(const Matrix& rho, double t) const
{
    if (t < 0) throw InvalidInput("negative time");
    return unvectorize(exp_heisenberg(t).adjoint() * vectorize(rho), d_);
}

DensityMatrix evolve(const DBGenerator& gen, const DensityMatrix& rho, double t)
{
    if (t < 0) throw InvalidInput("negative time");
    if (rho.dim() != gen.dim()) throw InvalidInput("state dimension mismatch");
    Matrix out = hermitian_part(Propagator(gen).schrodinger(rho.matrix(), t));
    out /= out.trace().real();
    return DensityMatrix(out, 1e-9);
}

Matrix evolve_observable(const DBGenerator& gen, const Matrix& f, double t)
{
    return Propagator(gen).heisenberg(f, t);
}

GeneratorSpectrum spectral_gap(const DBGenerator& gen)
{
    GeneratorSpectrum out;
    Matrix h = superoperator(gen, Picture::heisenberg).matrix();
    Matrix q = power_of(gen.sigma(), 0.25);
    Matrix qi = power_of(gen.sigma(), -0.25);
    Matrix k = kron(q.transpose(), q) * h * kron(qi.transpose(), qi);
    out.imag_residual = max_abs(k - k.adjoint());
    RVector ev = eigh(hermitian_part(k)).w;
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());

    Eigen::BDCSVD<Matrix> svd(h);
    const RVector& sv = svd.singularValues();
    double thr = 1e-9 * (sv.size() ? sv(0) : 0.0);
    out.kernel_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++out.kernel_dim;
    if (sv.size() && sv(0) == 0.0) out.kernel_dim = static_cast<int>(sv.size());
    if (out.kernel_dim != 1) throw NonPrimitive("generator kernel has dimension " + std::to_string(out.kernel_dim));
    out.spectral_gap = -out.eigenvalues.at(1);
    return out;
}

DBGenerator depolarizing_generator(const DensityMatrix& sigma)
{
    return depolarizing_generator(sigma, sigma.eig().V);
}

DBGenerator depolarizing_generator(const DensityMatrix& sigma, const Matrix& basis)
{
    require_full_rank(sigma);
    const int d = sigma.dim();
    if (basis.rows() != d || basis.cols() != d) throw InvalidInput("basis dimension mismatch");
    if (max_abs(basis.adjoint() * basis - Matrix::Identity(d, d)) > 1e-10) throw InvalidInput("basis is not orthonormal");
    Matrix sd = basis.adjoint() * sigma.matrix() * basis;
    if (max_abs(sd - Matrix(sd.diagonal().asDiagonal())) > 1e-9) throw InvalidInput("basis does not diagonalize sigma");
    RVector s = sd.diagonal().real();

    std::vector<Term> terms;
    const double rd = std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            Term t;
            t.c = std::sqrt(s(i) * s(j)) / (2.0 * d);
            t.omega = std::log(s(j)) - std::log(s(i));
            t.L = rd * basis.col(i) * basis.col(j).adjoint();
            terms.push_back(std::move(t));
        }

    if (d > 1) {
        // Helmert basis of traceless diagonals with (1/d)Σ e_a e_b = δ_ab.
        RMatrix e = RMatrix::Zero(d, d - 1);
        for (int a = 1; a < d; ++a) {
            double nrm = std::sqrt(static_cast<double>(d) / (a * (a + 1.0)));
            for (int k = 0; k < a; ++k) e(k, a - 1) = nrm;
            e(a, a - 1) = -a * nrm;
        }
        // D_i = √d (P_i − I/d) = Σ_a A_ia E_a, weight c_i = σ_i/(2d).
        RMatrix m = RMatrix::Zero(d - 1, d - 1);
        for (int i = 0; i < d; ++i) {
            RVector di = RVector::Constant(d, -rd / d);
            di(i) += rd;
            RVector a = e.transpose() * di / static_cast<double>(d);
            m += (s(i) / (2.0 * d)) * a * a.transpose();
        }
        Eigen::SelfAdjointEigenSolver<RMatrix> es(m);
        for (int k = 0; k < d - 1; ++k) {
            RVector fk = e * es.eigenvectors().col(k);
            Term t;
            t.c = es.eigenvalues()(k);
            t.omega = 0.0;
            t.L = basis * fk.cast<cplx>().asDiagonal() * basis.adjoint();
            terms.push_back(std::move(t));
        }
    }
    return DBGenerator(sigma, std::move(terms));
}

namespace {

// log1p(u) − u without cancellation for small u
double log1p_minus(double u)
{
    if (std::abs(u) < 1e-2) {
        double s = 0.0, p = u * u;
        for (int k = 2; k < 12; ++k, p *= u) s += (k % 2 ? p : -p) / k;
        return s;
    }
    return std::log1p(u) - u;
}

}  // namespace

double binary_relative_entropy(double x, double y)
{
    if (x <= 0.0 || x >= 1.0 || y <= 0.0 || y >= 1.0) {
        auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
        return term(x, y) + term(1.0 - x, 1.0 - y);
    }
    // with δ = x − y the first-order terms cancel exactly:
    // D = δ²/(y(1−y)) + x·h(δ/y) + (1−x)·h(−δ/(1−y)), h(u) = log1p(u) − u
    double dl = x - y;
    return dl * dl / (y * (1.0 - y)) + x * log1p_minus(dl / y) + (1.0 - x) * log1p_minus(-dl / (1.0 - y));
}

double alpha_objective(double x, double y)
{
    if (x == y) return 1.0;
    return 0.5 * (1.0 + binary_relative_entropy(y, x) / binary_relative_entropy(x, y));
}

double mlsi_constant_depolarizing(const DensityMatrix& sigma)
{
    require_full_rank(sigma);
    const double y = sigma.min_eigenvalue();
    const int n = 20000;
    double best = std::numeric_limits<double>::infinity();
    int arg = 1;
    for (int i = 1; i < n; ++i) {
        double v = alpha_objective(static_cast<double>(i) / n, y);
        if (v < best) {
            best = v;
            arg = i;
        }
    }
    // golden-section refinement inside the neighbouring grid cells
    double a = std::max(1e-12, (arg - 1.0) / n), b = std::min(1.0 - 1e-12, (arg + 1.0) / n);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), dd = a + g * (b - a);
    double fc = alpha_objective(c, y), fd = alpha_objective(dd, y);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        if (fc < fd) {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = alpha_objective(c, y);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = alpha_objective(dd, y);
        }
    }
    return std::min({best, fc, fd});
}

DBGenerator tensorize(const DBGenerator& gen, int n, int max_dim)
{
    if (n < 1) throw InvalidInput("tensor power must be positive");
    const int d = gen.dim();
    long total = 1;
    for (int k = 0; k < n; ++k) {
        total *= d;
        if (total > max_dim) throw ResourceLimit("tensorized dimension exceeds cap " + std::to_string(max_dim));
    }
    if (n == 1) return gen;
    Matrix s = gen.sigma().matrix();
    Matrix sn = s;
    for (int k = 1; k < n; ++k) sn = kron(sn, s);
    std::vector<Term> terms;
    for (int k = 0; k < n; ++k) {
        long left = 1, right = 1;
        for (int i = 0; i < k; ++i) left *= d;
        for (int i = k + 1; i < n; ++i) right *= d;
        Matrix il = Matrix::Identity(left, left), ir = Matrix::Identity(right, right);
        for (const Term& t : gen.terms()) terms.push_back({t.c, t.omega, kron(kron(il, t.L), ir)});
    }
    sn /= sn.trace().real();
    return DBGenerator(DensityMatrix(hermitian_part(sn), 1e-10), std::move(terms), gen.lipschitz_dim());
}

DBGenerator scaled(const DBGenerator& gen, double k)
{
    std::vector<Term> terms = gen.terms();
    for (Term& t : terms) t.c *= k;
    return DBGenerator(gen.sigma(), std::move(terms), gen.lipschitz_dim());
}

Matrix derivation(const DBGenerator& gen, std::size_t j, const Matrix& f)
{
    if (j >= gen.size()) throw InvalidInput("term index out of range");
    return commutator(gen.terms()[j].L, f);
}

std::vector<Matrix> gradient(const DBGenerator& gen, const Matrix& f)
{
    std::vector<Matrix> out;
    out.reserve(gen.size());
    for (const Term& t : gen.terms()) out.push_back(commutator(t.L, f));
    return out;
}

Matrix divergence(const DBGenerator& gen, const std::vector<Matrix>& a)
{
    if (a.size() != gen.size()) throw InvalidInput("vector field has wrong number of components");
    Matrix out = Matrix::Zero(gen.dim(), gen.dim());
    for (std::size_t j = 0; j < a.size(); ++j) out += gen.terms()[j].c * commutator(a[j], gen.terms()[j].L.adjoint());
    return out;
}

namespace {

DBGenerator random_attempt(Rng& rng, const DensityMatrix& sigma)
{
    const int d = sigma.dim();
    const Matrix& v = sigma.eig().V;
    const RVector& s = sigma.eigenvalues();
    const double rd = std::sqrt(static_cast<double>(d));
    auto log_uniform_c = [&rng]() { return 0.1 * std::pow(100.0, uniform01(rng)); };

    // Matrix units |k⟩⟨l| grouped by ω = log s_l − log s_k.
    std::vector<std::pair<double, std::vector<std::pair<int, int>>>> groups;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            double w = std::log(s(l)) - std::log(s(k));
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [w](const auto& g) { return std::abs(g.first - w) < 1e-9; });
            if (it == groups.end())
                groups.push_back({w, {{k, l}}});
            else
                it->second.push_back({k, l});
        }

    std::vector<Term> terms;
    for (const auto& [w, units] : groups) {
        const int g = static_cast<int>(units.size());
        if (std::abs(w) < 1e-9) {
            // Self-adjoint traceless operators inside the commutant block.
            int m = std::max(1, std::min(g - 1, 1 + static_cast<int>(rng() % static_cast<unsigned>(g))));
            if (g - 1 < 1) continue;
            std::vector<Matrix> basis;
            int guard = 0;
            while (static_cast<int>(basis.size()) < m && guard++ < 100) {
                Matrix x = Matrix::Zero(d, d);
                for (auto [k, l] : units) x(k, l) = cplx(normal(rng), normal(rng));
                x = hermitian_part(x);
                x -= (x.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
                for (const Matrix& b : basis) x -= ((b * x).trace().real() / d) * b;
                double nrm = std::sqrt((x * x).trace().real() / d);
                if (nrm < 1e-6) continue;
                basis.push_back(x / nrm);
            }
            for (const Matrix& b : basis) terms.push_back({log_uniform_c(), 0.0, v * b * v.adjoint()});
        } else if (w > 0) {
            int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(g));
            Matrix u = haar_unitary(rng, g);
            for (int a = 0; a < m; ++a) {
                Matrix l = Matrix::Zero(d, d);
                for (int i = 0; i < g; ++i) l(units[i].first, units[i].second) = rd * u(i, a);
                Matrix lo = v * l * v.adjoint();
                double c = log_uniform_c();
                terms.push_back({c, w, lo});
                terms.push_back({c, -w, lo.adjoint()});
            }
        }
    }
    return DBGenerator(sigma, std::move(terms));
}

}  // namespace

DBGenerator random_db_generator(Rng& rng, const DensityMatrix& sigma)
{
    for (int attempt = 0; attempt < 100; ++attempt) {
        DBGenerator g = random_attempt(rng, sigma);
        try {
            spectral_gap(g);
            return g;
        } catch (const NonPrimitive&) {
        }
    }
    throw NonPrimitive("could not draw a primitive generator");
}

DBGenerator random_db_generator(Rng& rng, int d)
{
    RVector p(d);
    for (int k = 0; k < d; ++k) p(k) = -std::log(std::max(uniform01(rng), 1e-300));
    if (d > 2 && uniform01(rng) < 0.3) p(1) = p(0);
    p /= p.sum();
    p = 0.8 * p + RVector::Constant(d, 0.2 / d);
    Matrix u = haar_unitary(rng, d);
    Matrix s = u * p.cast<cplx>().asDiagonal() * u.adjoint();
    return random_db_generator(rng, DensityMatrix(hermitian_part(s)));
}

}  // namespace qtc

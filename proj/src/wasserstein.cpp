#include "qtc/wasserstein.hpp"

#include "qtc/optim.hpp"
#include "qtc/random.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace qtc {

LipVariant parse_variant(const std::string& s)
{
    if (s == "lip") return LipVariant::Lip;
    if (s == "lip2") return LipVariant::Lip2;
    if (s == "lipg") return LipVariant::LipG;
    if (s == "liph") return LipVariant::LipH;
    if (s == "clh") return LipVariant::ClH;
    throw InvalidInput("unknown Lipschitz variant '" + s + "'");
}

const char* variant_name(LipVariant v)
{
    switch (v) {
    case LipVariant::Lip: return "lip";
    case LipVariant::Lip2: return "lip2";
    case LipVariant::LipG: return "lipg";
    case LipVariant::LipH: return "liph";
    case LipVariant::ClH: return "clh";
    }
    return "?";
}

namespace {

double gradient_constant(const DBGenerator& gen)
{
    double k = 0.0;
    for (const Term& t : gen.terms()) k += t.c * std::exp(-t.omega / 2);
    return 2.0 * k / gen.lipschitz_dim();
}

double spectral_width(const Matrix& f)
{
    RVector w = eigh(hermitian_part(f)).w;
    return w(w.size() - 1) - w(0);
}

}  // namespace

double lipschitz_constant(const DBGenerator& gen, const Matrix& f, LipVariant v)
{
    if (f.rows() != gen.dim() || f.cols() != gen.dim()) throw InvalidInput("observable dimension mismatch");
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    if (v == LipVariant::ClH) return spectral_width(f);
    const double p = 1.0 / gen.lipschitz_dim();
    double acc = 0.0;
    for (const Term& t : gen.terms()) {
        Matrix df = commutator(t.L, f);
        switch (v) {
        case LipVariant::Lip: {
            double n = op_norm(df);
            acc += p * t.c * (std::exp(-t.omega / 2) + std::exp(t.omega / 2)) * n * n;
            break;
        }
        case LipVariant::Lip2:
            acc += p * t.c * (std::exp(-t.omega / 2) + std::exp(t.omega / 2)) * df.squaredNorm();
            break;
        case LipVariant::LipG:
            if (t.c != 0.0) acc = std::max(acc, df.squaredNorm());
            break;
        case LipVariant::LipH:
            acc = std::max(acc, df.squaredNorm());
            break;
        default: break;
        }
    }
    if (v == LipVariant::LipG || v == LipVariant::LipH) acc *= gradient_constant(gen);
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------------------------
// W1

namespace {

struct LipModel {
    int d = 0;
    int n = 0;
    std::vector<Matrix> basis;
    std::vector<Matrix> B;  // d²×n, vec(∂_j E_a)
    std::vector<double> wlip;
    std::vector<bool> active;
    double kg = 0.0;
    RMatrix q2;

    explicit LipModel(const DBGenerator& gen) : d(gen.dim())
    {
        basis = hermitian_basis(d);
        n = static_cast<int>(basis.size());
        const double p = 1.0 / gen.lipschitz_dim();
        q2 = RMatrix::Zero(n, n);
        for (const Term& t : gen.terms()) {
            Matrix b(d * d, n);
            for (int a = 0; a < n; ++a) b.col(a) = vectorize(commutator(t.L, basis[a]));
            double w = p * t.c * (std::exp(-t.omega / 2) + std::exp(t.omega / 2));
            q2 += w * (b.adjoint() * b).real();
            B.push_back(std::move(b));
            wlip.push_back(w);
            active.push_back(t.c != 0.0);
        }
        kg = gradient_constant(gen);
    }

    Matrix deriv(std::size_t j, const RVector& x) const
    {
        Eigen::VectorXcd v = B[j] * x.cast<cplx>();
        return unvectorize(v, d);
    }

    RVector pullback(std::size_t j, const Matrix& g) const { return (B[j].adjoint() * vectorize(g)).real(); }

    // Exact seminorm and a subgradient.
    double norm(LipVariant v, const RVector& x, RVector* sub) const
    {
        if (sub) sub->setZero(n);
        if (v == LipVariant::Lip) {
            double acc = 0.0;
            std::vector<std::pair<double, Matrix>> tops;
            for (std::size_t j = 0; j < B.size(); ++j) {
                Matrix x_j = deriv(j, x);
                Eigen::JacobiSVD<Matrix> svd(x_j, Eigen::ComputeThinU | Eigen::ComputeThinV);
                double s = svd.singularValues()(0);
                acc += wlip[j] * s * s;
                if (sub) *sub += wlip[j] * s * pullback(j, svd.matrixU().col(0) * svd.matrixV().col(0).adjoint());
            }
            double nv = std::sqrt(acc);
            if (sub && nv > 0) *sub /= nv;
            return nv;
        }
        if (v == LipVariant::Lip2) {
            double nv = std::sqrt(std::max(0.0, x.dot(q2 * x)));
            if (sub && nv > 0) *sub = q2 * x / nv;
            return nv;
        }
        // LipG / LipH
        double best = -1.0;
        std::size_t arg = 0;
        Matrix xa;
        for (std::size_t j = 0; j < B.size(); ++j) {
            if (v == LipVariant::LipG && !active[j]) continue;
            Matrix x_j = deriv(j, x);
            double s = x_j.norm();
            if (s > best) {
                best = s;
                arg = j;
                xa = x_j;
            }
        }
        if (best < 0) return 0.0;
        double nv = std::sqrt(kg) * best;
        if (sub && best > 0) *sub = std::sqrt(kg) * pullback(arg, xa) / best;
        return nv;
    }

    // Smooth surrogate of norm², with gradient; the surrogate dominates norm².
    double smooth_sq(LipVariant v, double q, const RVector& x, RVector* grad) const
    {
        if (grad) grad->setZero(n);
        if (v == LipVariant::Lip) {
            double acc = 0.0;
            for (std::size_t j = 0; j < B.size(); ++j) {
                Matrix x_j = deriv(j, x);
                Eigen::JacobiSVD<Matrix> svd(x_j, Eigen::ComputeThinU | Eigen::ComputeThinV);
                const RVector& s = svd.singularValues();
                double m = s(0);
                if (m <= 0) continue;
                RVector t = s / m;
                double sum = t.array().pow(q).sum();
                double nq = m * std::pow(sum, 1.0 / q);
                acc += wlip[j] * nq * nq;
                if (grad) {
                    // ∂‖X‖_q = U diag((σ/‖X‖_q)^{q-1}) V^*
                    RVector coef = (s / nq).array().pow(q - 1);
                    Matrix g = svd.matrixU() * coef.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
                    *grad += 2.0 * wlip[j] * nq * pullback(j, g);
                }
            }
            return acc;
        }
        // (Σ ‖X_j‖₂^r)^{2/r}
        std::vector<Matrix> xs;
        std::vector<double> ns;
        std::vector<std::size_t> idx;
        double m = 0.0;
        for (std::size_t j = 0; j < B.size(); ++j) {
            if (v == LipVariant::LipG && !active[j]) continue;
            xs.push_back(deriv(j, x));
            ns.push_back(xs.back().norm());
            idx.push_back(j);
            m = std::max(m, ns.back());
        }
        if (m <= 0) return 0.0;
        double sum = 0.0;
        for (double s : ns) sum += std::pow(s / m, q);
        double val = kg * m * m * std::pow(sum, 2.0 / q);
        if (grad) {
            double pre = 2.0 * kg * std::pow(sum, 2.0 / q - 1.0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (ns[i] <= 0) continue;
                *grad += pre * std::pow(ns[i] / m, q - 2.0) * pullback(idx[i], xs[i]);
            }
        }
        return val;
    }
};

WassersteinResult w1_closed_clh(const Matrix& delta)
{
    WassersteinResult r;
    Eig e = eigh(hermitian_part(delta));
    Matrix p = Matrix::Zero(delta.rows(), delta.cols());
    double pos = 0.0;
    for (Eigen::Index k = 0; k < e.w.size(); ++k)
        if (e.w(k) > 0) {
            pos += e.w(k);
            p += e.V.col(k) * e.V.col(k).adjoint();
        }
    r.value = pos;
    r.certificate = p;
    r.lower = r.upper = pos;
    return r;
}

}  // namespace

WassersteinResult w1(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2, LipVariant v,
                     const W1Options& opt)
{
    require_full_rank(rho);
    require_full_rank(sigma2);
    if (rho.dim() != gen.dim() || sigma2.dim() != gen.dim()) throw InvalidInput("state dimension mismatch");
    Matrix delta = rho.matrix() - sigma2.matrix();
    // Every f with spectral width ≤ 1 can be shifted into [0, 1]; the optimum is the positive part.
    if (v == LipVariant::ClH) return w1_closed_clh(delta);

    LipModel model(gen);
    const int n = model.n;
    RVector a = to_coordinates(model.basis, delta);
    WassersteinResult res;
    if (a.norm() < 1e-14) {
        res.certificate = Matrix::Zero(gen.dim(), gen.dim());
        return res;
    }

    // Lip2 is a quadratic form: exact solution.
    Eigen::SelfAdjointEigenSolver<RMatrix> es(model.q2);
    double cut = 1e-12 * std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
    RVector xq = RVector::Zero(n);
    for (int i = 0; i < n; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam > cut) xq += es.eigenvectors().col(i) * (es.eigenvectors().col(i).dot(a) / lam);
    }
    double v2 = std::sqrt(std::max(0.0, a.dot(xq)));
    if (v2 <= 0 || !std::isfinite(v2)) throw NonPrimitive("Lipschitz seminorm degenerate on the traceless space");
    RVector x2 = xq / v2;
    if (v == LipVariant::Lip2) {
        res.value = res.lower = res.upper = a.dot(x2);
        res.certificate = from_coordinates(model.basis, x2);
        return res;
    }

    // Constraint a·x = 1 via x = x0 + P z.
    RVector x0 = a / a.squaredNorm();
    Eigen::HouseholderQR<RMatrix> qr(a);
    RMatrix qfull = qr.householderQ();
    RMatrix P = qfull.rightCols(n - 1);

    double best = -1.0;
    RVector best_x = x2;
    int total_iter = 0;
    bool all_converged = true;
    const int starts = std::max(1, opt.starts);
    for (int s = 0; s < starts; ++s) {
        RVector x;
        if (s == 0) {
            x = x2;
        } else {
            Rng rng = stream_rng(opt.seed, static_cast<std::uint64_t>(s));
            x.resize(n);
            for (int i = 0; i < n; ++i) x(i) = normal(rng);
            x = x2 + 0.5 * x * (x2.norm() / std::max(1e-300, x.norm()));
        }
        double ax = a.dot(x);
        if (ax <= 1e-12) x += (1e-3 - ax) * x0 / x0.dot(a) + x0;
        x /= a.dot(x);
        RVector z = P.transpose() * (x - x0);

        // Smoothing continuation.
        for (double q : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
            optim::Objective fn = [&](const RVector& zz, RVector* g) {
                RVector xx = x0 + P * zz;
                RVector gx;
                double f = model.smooth_sq(v, q, xx, g ? &gx : nullptr);
                if (g) *g = P.transpose() * gx;
                return f;
            };
            optim::Options o;
            o.max_iter = 300;
            o.rel_tol = 1e-12;
            auto r = optim::lbfgs(fn, z, o);
            z = r.x;
            total_iter += r.iterations;
        }
        x = x0 + P * z;

        // Projected subgradient ascent on the exact ratio, x kept on the unit Lipschitz sphere.
        RVector sub(n);
        double nx = model.norm(v, x, &sub);
        x /= nx;
        double cur_best = a.dot(x);
        RVector cur_x = x;
        double eta0 = 0.05;
        double window_start = cur_best;
        bool conv = false;
        for (int it = 0; it < opt.max_iter; ++it) {
            double nn = model.norm(v, x, &sub);
            double r = a.dot(x) / nn;
            if (r > cur_best) {
                cur_best = r;
                cur_x = x / nn;
            }
            RVector g = a / nn - (a.dot(x) / (nn * nn)) * sub;
            double gn = g.norm();
            if (gn < 1e-15) {
                conv = true;
                break;
            }
            x = x + (eta0 / std::sqrt(1.0 + it)) * x.norm() * g / gn;
            x /= model.norm(v, x, nullptr);
            ++total_iter;
            if ((it + 1) % 200 == 0) {
                if (cur_best - window_start <= 1e-7 * std::abs(cur_best)) {
                    conv = true;
                    break;
                }
                window_start = cur_best;
            }
        }
        all_converged = all_converged && conv;
        if (cur_best > best) {
            best = cur_best;
            best_x = cur_x;
        }
    }
    res.certificate = from_coordinates(model.basis, best_x);
    res.value = res.lower = std::max(0.0, best);
    res.upper = res.value;
    res.iterations = total_iter;
    res.converged = all_converged;
    return res;
}

// ---------------------------------------------------------------------------------------------
// Transport metric

namespace {

// (e^u − 1)/u and its derivative
double logmean_g(double u)
{
    if (std::abs(u) < 1e-6) return 1.0 + u / 2.0 + u * u / 6.0;
    return std::expm1(u) / u;
}

double logmean_dg(double u)
{
    if (std::abs(u) < 1e-2) return 0.5 + u * (1.0 / 3 + u * (1.0 / 8 + u * (1.0 / 30 + u * (1.0 / 144 + u / 840))));
    return (std::exp(u) * (u - 1.0) + 1.0) / (u * u);
}

// Tables for the gradient of ⟨Y, [ρ]_ω Y⟩ in ρ's eigenbasis:
//   G_ba = Σ_m t1(a,b,m) Y_bm conj(Y_am) + t2(a,b,m) conj(Y_mb) Y_ma
struct GradientTables {
    int d = 0;
    std::vector<double> t1, t2;

    GradientTables(const RVector& p, double omega) : d(static_cast<int>(p.size()))
    {
        // T(x, y) = ∫₀¹ e^{ω(s−½)} x^s y^{1−s} ds on the eigenvalue grid, with ∂_x T and ∂_y T
        const double half = std::exp(-omega / 2);
        RMatrix val(d, d), dx(d, d), dy(d, d), lp(d, 1);
        for (int a = 0; a < d; ++a) lp(a, 0) = std::log(p(a));
        for (int a = 0; a < d; ++a)
            for (int c = 0; c < d; ++c) {
                double u = omega + lp(a, 0) - lp(c, 0);
                double g = logmean_g(u), dg = logmean_dg(u);
                val(a, c) = half * p(c) * g;
                dx(a, c) = half * p(c) * dg / p(a);
                dy(a, c) = half * (g - dg);
            }
        t1.resize(d * d * d);
        t2.resize(d * d * d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                // close eigenvalues: average of the endpoint derivatives, exact to second order
                bool close = std::abs(lp(a, 0) - lp(b, 0)) < 1e-5;
                double inv = close ? 0.0 : 1.0 / (p(a) - p(b));
                for (int m = 0; m < d; ++m) {
                    t1[idx(a, b, m)] = close ? 0.5 * (dx(a, m) + dx(b, m)) : (val(a, m) - val(b, m)) * inv;
                    t2[idx(a, b, m)] = close ? 0.5 * (dy(m, a) + dy(m, b)) : (val(m, a) - val(m, b)) * inv;
                }
            }
    }
    int idx(int a, int b, int m) const { return (a * d + b) * d + m; }

    Matrix apply(const Matrix& y) const
    {
        Matrix g(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                cplx acc = 0.0;
                for (int m = 0; m < d; ++m)
                    acc += t1[idx(a, b, m)] * y(b, m) * std::conj(y(a, m)) +
                           t2[idx(a, b, m)] * std::conj(y(m, b)) * y(m, a);
                g(b, a) = acc;
            }
        return g;
    }
};

struct StateSystem {
    int d = 0;
    Eig e;
    std::vector<Matrix> lh;
    Matrix m;
    Eigen::LLT<Matrix> llt;
    bool use_llt = false;
    RVector mval;
    Matrix mvec;
    double cut = 0.0;
    std::vector<GradientTables> tables;

    // M = Σ_j c_j C_j^* diag(w_j) C_j with C_j vec(X) = vec([L̂_j, X]), assembled entrywise:
    //   M(ab, cd) = Σ_j c_j (δ_bd Σ_k w_kb L̄_ka L_kc − w_cb L̄_ca L_db − w_ad L̄_bd L_ac + δ_ac Σ_l w_al L̄_bl L_dl)
    bool build(const DBGenerator& gen, const Matrix& rho, bool with_tables)
    {
        d = gen.dim();
        e = eigh(hermitian_part(rho));
        if (!(e.w(0) > 0)) return false;
        const int n = d * d;
        m = Matrix::Zero(n, n);
        lh.clear();
        tables.clear();
        auto at = [this](int a, int b) { return a + b * d; };
        for (const Term& t : gen.terms()) {
            Matrix l = e.V.adjoint() * t.L * e.V;
            RMatrix w = tilted_weights(e.w, t.omega);
            Matrix lc = l.conjugate();
            // P(a, c; b) = Σ_k w_kb L̄_ka L_kc and Q(b, d; a) = Σ_l w_al L̄_bl L_dl
            for (int b = 0; b < d; ++b) {
                Matrix p = lc.transpose() * w.col(b).cast<cplx>().asDiagonal() * l;
                for (int a = 0; a < d; ++a)
                    for (int c = 0; c < d; ++c) m(at(a, b), at(c, b)) += t.c * p(a, c);
            }
            for (int a = 0; a < d; ++a) {
                Matrix q = lc * w.row(a).transpose().cast<cplx>().asDiagonal() * l.transpose();
                for (int b = 0; b < d; ++b)
                    for (int dd = 0; dd < d; ++dd) m(at(a, b), at(a, dd)) += t.c * q(b, dd);
            }
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int c = 0; c < d; ++c)
                        for (int dd = 0; dd < d; ++dd)
                            m(at(a, b), at(c, dd)) -=
                                t.c * (w(c, b) * lc(c, a) * l(dd, b) + w(a, dd) * lc(b, dd) * l(a, c));
            lh.push_back(std::move(l));
            if (with_tables) tables.emplace_back(e.w, t.omega);
        }
        m = hermitian_part(m);
        // M vec(I) = 0; adding the projector onto vec(I) leaves solutions for traceless τ unchanged.
        double scale = std::max(1e-300, m.diagonal().real().mean());
        Matrix shifted = m;
        for (int a = 0; a < d; ++a)
            for (int c = 0; c < d; ++c) shifted(at(a, a), at(c, c)) += scale / d;
        llt.compute(shifted);
        use_llt = llt.info() == Eigen::Success;
        if (use_llt) {
            RVector diag = llt.matrixLLT().diagonal().real();
            use_llt = diag.minCoeff() > 1e-6 * diag.maxCoeff();
        }
        if (!use_llt) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(m);
            mval = es.eigenvalues();
            mvec = es.eigenvectors();
            cut = 1e-10 * std::max(1e-300, mval.cwiseAbs().maxCoeff());
        }
        return true;
    }

    // Solves M Û = τ̂ in the eigenbasis; returns ⟨U, τ⟩ and Û.
    double solve(const Matrix& tau, Matrix& uhat) const
    {
        Matrix th = e.V.adjoint() * tau * e.V;
        Eigen::VectorXcd tv = vectorize(th);
        Eigen::VectorXcd u;
        if (use_llt) {
            u = llt.solve(tv);
        } else {
            Eigen::VectorXcd coef = mvec.adjoint() * tv;
            for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = mval(i) > cut ? coef(i) / mval(i) : cplx(0.0);
            u = mvec * coef;
        }
        uhat = hermitian_part(unvectorize(u, d));
        return std::real(tv.dot(u));
    }

    // Σ_j c_j ∂_ρ⟨∂_j U, [ρ]_{ω_j} ∂_j U⟩ in the eigenbasis.
    Matrix metric_gradient(const DBGenerator& gen, const Matrix& uhat) const
    {
        Matrix g = Matrix::Zero(d, d);
        for (std::size_t j = 0; j < lh.size(); ++j) g += gen.terms()[j].c * tables[j].apply(commutator(lh[j], uhat));
        return g;
    }
};

}  // namespace

Matrix tilted_quadratic_gradient(const DensityMatrix& rho, double omega, const Matrix& y)
{
    require_full_rank(rho);
    if (y.rows() != rho.dim() || y.cols() != rho.dim()) throw InvalidInput("dimension mismatch");
    const Eig& e = rho.eig();
    GradientTables t(e.w, omega);
    return e.V * t.apply(e.V.adjoint() * y * e.V) * e.V.adjoint();
}

Matrix metric_operator(const DBGenerator& gen, const DensityMatrix& rho, const Matrix& u)
{
    std::vector<Matrix> grad = gradient(gen, u);
    for (std::size_t j = 0; j < grad.size(); ++j)
        grad[j] = tilted_multiplier(rho, gen.terms()[j].omega, grad[j], Direction::forward);
    return -divergence(gen, grad);
}

MetricSolve metric_norm_squared(const DBGenerator& gen, const DensityMatrix& rho, const Matrix& tau)
{
    require_full_rank(rho);
    if (tau.rows() != gen.dim() || tau.cols() != gen.dim()) throw InvalidInput("tangent dimension mismatch");
    if (std::abs(tau.trace()) > 1e-9 * std::max(1.0, tau.norm())) throw InvalidInput("tangent must be traceless");
    StateSystem sys;
    sys.build(gen, rho.matrix(), false);
    MetricSolve out;
    Matrix uh;
    out.value = sys.solve(hermitian_part(tau), uh);
    out.potential = sys.e.V * uh * sys.e.V.adjoint();
    out.residual = (metric_operator(gen, rho, out.potential) - tau).norm();
    if (out.residual > 1e-6 * std::max(1.0, tau.norm()))
        throw NonPrimitive("continuity equation has no solution: tangent outside the range of the metric operator");
    return out;
}

// ---------------------------------------------------------------------------------------------
// W2 path optimization

namespace {

// exp divided differences (e^a − e^b)/(a − b)
RMatrix exp_divided(const RVector& h)
{
    const Eigen::Index d = h.size();
    RMatrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            double x = h(i) - h(j);
            out(i, j) = std::abs(x) < 1e-12 ? std::exp(h(j)) : std::exp(h(j)) * std::expm1(x) / x;
        }
    return out;
}

struct PathProblem {
    const DBGenerator& gen;
    Matrix rho0, rho1;
    int K;
    int d;
    std::vector<Matrix> basis;
    std::vector<Matrix> sq;   // ℓ_k^{1/2}, interior k
    std::vector<Matrix> isq;  // ℓ_k^{-1/2}
    StateSystem end0, end1;

    PathProblem(const DBGenerator& g, const Matrix& a, const Matrix& b, int k)
        : gen(g), rho0(a), rho1(b), K(k), d(g.dim()), basis(hermitian_basis(g.dim()))
    {
        sq.resize(K + 1);
        isq.resize(K + 1);
        for (int i = 1; i < K; ++i) {
            double s = static_cast<double>(i) / K;
            Eig e = eigh(hermitian_part((1 - s) * rho0 + s * rho1));
            sq[i] = eig_function(e, [](double x) { return std::sqrt(x); });
            isq[i] = eig_function(e, [](double x) { return 1.0 / std::sqrt(x); });
        }
        end0.build(gen, rho0, true);
        end1.build(gen, rho1, true);
    }

    int nvar() const { return (K - 1) * static_cast<int>(basis.size()); }

    struct Interior {
        Eig h;
        Matrix rho;
        double tr = 1.0;
    };

    Interior interior(int i, const RVector& x) const
    {
        const int n = static_cast<int>(basis.size());
        Interior out;
        Matrix hm = from_coordinates(basis, x.segment((i - 1) * n, n));
        out.h = eigh(hm);
        Matrix eh = eig_function(out.h, [](double v) { return std::exp(v); });
        Matrix nmat = sq[i] * eh * sq[i];
        out.tr = nmat.trace().real();
        out.rho = hermitian_part(nmat / out.tr);
        return out;
    }

    std::vector<Matrix> states(const RVector& x) const
    {
        std::vector<Matrix> out(K + 1);
        out[0] = rho0;
        out[K] = rho1;
        for (int i = 1; i < K; ++i) out[i] = interior(i, x).rho;
        return out;
    }

    RVector coordinates(const std::vector<Matrix>& st) const
    {
        const int n = static_cast<int>(basis.size());
        RVector x = RVector::Zero(nvar());
        for (int i = 1; i < K; ++i) {
            Matrix m = hermitian_part(isq[i] * st[i] * isq[i]);
            Matrix lg = eig_function(eigh(m), [](double v) { return std::log(v); });
            x.segment((i - 1) * n, n) = to_coordinates(basis, lg);
        }
        return x;
    }

    double objective(const RVector& x, RVector* grad) const
    {
        std::vector<Interior> in(K + 1);
        std::vector<Matrix> st(K + 1);
        st[0] = rho0;
        st[K] = rho1;
        for (int i = 1; i < K; ++i) {
            in[i] = interior(i, x);
            st[i] = in[i].rho;
        }
        std::vector<StateSystem> sys(K + 1);
        for (int i = 1; i < K; ++i)
            if (!sys[i].build(gen, st[i], grad != nullptr)) return std::numeric_limits<double>::infinity();
        auto system = [&](int i) -> const StateSystem& { return i == 0 ? end0 : (i == K ? end1 : sys[i]); };

        std::vector<Matrix> g(K + 1, Matrix::Zero(d, d));
        double action = 0.0;
        const double half_k = 0.5 * K;
        for (int k = 0; k < K; ++k) {
            Matrix tau = st[k + 1] - st[k];
            for (int side = 0; side < 2; ++side) {
                int i = k + side;
                const StateSystem& s = system(i);
                Matrix uh;
                double qv = s.solve(tau, uh);
                action += half_k * qv;
                if (grad) {
                    Matrix u = s.e.V * uh * s.e.V.adjoint();
                    Matrix gm = s.e.V * s.metric_gradient(gen, uh) * s.e.V.adjoint();
                    g[i] -= half_k * gm;
                    g[k + 1] += half_k * 2.0 * u;
                    g[k] -= half_k * 2.0 * u;
                }
            }
        }
        if (grad) {
            const int n = static_cast<int>(basis.size());
            grad->setZero(nvar());
            for (int i = 1; i < K; ++i) {
                Matrix gi = hermitian_part(g[i]);
                double trg = (gi * st[i]).trace().real();
                Matrix gp = (gi - trg * Matrix::Identity(d, d)) / in[i].tr;
                Matrix xm = sq[i] * gp * sq[i];
                Matrix xh = in[i].h.V.adjoint() * xm * in[i].h.V;
                Matrix zh = xh.cwiseProduct(exp_divided(in[i].h.w).cast<cplx>());
                Matrix z = in[i].h.V * zh * in[i].h.V.adjoint();
                grad->segment((i - 1) * n, n) = to_coordinates(basis, hermitian_part(z));
            }
        }
        return action;
    }
};

double segment_action(const DBGenerator& gen, const Matrix& a, const Matrix& b, const Matrix& at, int K)
{
    StateSystem s;
    if (!s.build(gen, at, false)) throw SingularState("path state left the full-rank set");
    Matrix uh;
    return K * s.solve(b - a, uh);
}

}  // namespace

double path_action(const DBGenerator& gen, const std::vector<Matrix>& states, bool midpoint)
{
    const int K = static_cast<int>(states.size()) - 1;
    if (K < 1) return 0.0;
    double a = 0.0;
    for (int k = 0; k < K; ++k) {
        if (midpoint) {
            a += segment_action(gen, states[k], states[k + 1], 0.5 * (states[k] + states[k + 1]), K);
        } else {
            a += 0.5 * segment_action(gen, states[k], states[k + 1], states[k], K);
            a += 0.5 * segment_action(gen, states[k], states[k + 1], states[k + 1], K);
        }
    }
    return a;
}

WassersteinResult w2_upper(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2,
                           const W2Options& opt)
{
    require_full_rank(rho);
    require_full_rank(sigma2);
    if (rho.dim() != gen.dim() || sigma2.dim() != gen.dim()) throw InvalidInput("state dimension mismatch");
    if (opt.segments < 4) throw InvalidInput("at least 4 segments are required");
    const int d = gen.dim();

    int K = opt.segments;
    std::vector<Matrix> st;
    WassersteinResult res;
    res.converged = true;
    double prev = std::numeric_limits<double>::infinity();
    while (true) {
        PathProblem prob(gen, rho.matrix(), sigma2.matrix(), K);
        RVector x0 = st.empty() ? RVector::Zero(prob.nvar()) : prob.coordinates(st);
        optim::Options o;
        o.max_iter = opt.max_iter;
        o.rel_tol = 1e-9;
        optim::Objective fn = [&prob](const RVector& x, RVector* g) { return prob.objective(x, g); };
        auto r = optim::lbfgs(fn, x0, o);
        res.iterations += r.iterations;
        res.converged = res.converged && r.converged;
        st = prob.states(r.x);
        double up = std::sqrt(std::max(0.0, r.f));
        // never report worse than the coarser certified path
        if (up > prev) up = prev;
        res.refinement.push_back({K, up});
        res.segments = K;
        bool done = !opt.adaptive || 2 * K > opt.max_segments || prev - up < opt.refine_tol || up <= opt.target;
        prev = up;
        if (done) {
            if (opt.adaptive && 2 * K > opt.max_segments && res.refinement.size() > 1) {
                double last = res.refinement[res.refinement.size() - 2].second - up;
                if (last >= opt.refine_tol) res.converged = false;
            }
            break;
        }
        // insert midpoints; the trapezoid action cannot increase by convexity
        std::vector<Matrix> fine(2 * K + 1);
        for (int k = 0; k <= K; ++k) fine[2 * k] = st[k];
        for (int k = 0; k < K; ++k) fine[2 * k + 1] = 0.5 * (st[k] + st[k + 1]);
        st = std::move(fine);
        K *= 2;
    }

    res.states = st;
    res.action = path_action(gen, st, false);
    res.midpoint_action = path_action(gen, st, true);
    res.upper = res.value = std::sqrt(std::max(0.0, res.action));
    res.lower = 0.0;

    // constant-speed diagnostics and potentials at segment midpoints
    std::vector<double> speeds;
    double maxres = 0.0;
    for (int k = 0; k < K; ++k) {
        Matrix mid = hermitian_part(0.5 * (st[k] + st[k + 1]));
        Matrix tau = (st[k + 1] - st[k]) * static_cast<double>(K);
        DensityMatrix dm(mid / mid.trace().real(), 1e-9);
        StateSystem s;
        s.build(gen, dm.matrix(), false);
        Matrix uh;
        double q = s.solve(tau, uh);
        Matrix u = s.e.V * uh * s.e.V.adjoint();
        maxres = std::max(maxres, (metric_operator(gen, dm, u) - tau).norm());
        res.potentials.push_back(u);
        speeds.push_back(std::sqrt(std::max(0.0, q)));
    }
    double mean = 0.0, var = 0.0;
    for (double s : speeds) mean += s / K;
    for (double s : speeds) var += (s - mean) * (s - mean) / K;
    res.speed_variance = mean > 0 ? var / (mean * mean) : 0.0;
    res.max_residual = maxres;
    (void)d;
    return res;
}

bool is_depolarizing(const DBGenerator& gen, double tol)
{
    const int d = gen.dim();
    const Matrix& s = gen.sigma().matrix();
    for (int col = 0; col < d * d; ++col) {
        Matrix f = Matrix::Zero(d, d);
        f(col % d, col / d) = 1.0;
        Matrix expect = (s * f).trace() * Matrix::Identity(d, d) - f;
        if ((qtc::apply(gen, f) - expect).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

WassersteinResult w2_bracket(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2,
                             const BracketOptions& opt)
{
    WassersteinResult up = w2_upper(gen, rho, sigma2, opt.w2);
    WassersteinResult w = w1(gen, rho, sigma2, LipVariant::Lip, opt.w1);
    double lower = w.value / std::sqrt(static_cast<double>(gen.lipschitz_dim()));
    if (is_depolarizing(gen)) {
        Matrix delta = rho.matrix() - sigma2.matrix();
        double wcl = w1(gen, rho, sigma2, LipVariant::ClH).value;
        lower = std::max({lower, wcl / std::sqrt(2.0), trace_norm(delta) / std::sqrt(2.0)});
    }
    up.lower = lower;
    if (lower > up.upper + 1e-6)
        throw InternalConsistency("inverted W2 bracket: lower " + std::to_string(lower) + " > upper " +
                                  std::to_string(up.upper));
    return up;
}

}  // namespace qtc

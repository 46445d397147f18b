#include "qtc/entropy.hpp"

#include <cmath>

namespace qtc {

Matrix log_state(const DensityMatrix& rho)
{
    require_full_rank(rho);
    return eig_function(rho.eig(), [](double x) { return std::log(x); });
}

DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    if (rho.dim() != sigma.dim()) throw InvalidInput("dimension mismatch");
    const Eig& er = rho.eig();
    const Eig& es = sigma.eig();
    // Support check: weight of ρ on the numerical kernel of σ.
    double neg_entropy = 0.0;
    for (Eigen::Index k = 0; k < er.w.size(); ++k)
        if (er.w(k) > 0) neg_entropy += er.w(k) * std::log(er.w(k));
    double cross = 0.0;
    Matrix rs = es.V.adjoint() * rho.matrix() * es.V;
    for (Eigen::Index k = 0; k < es.w.size(); ++k) {
        double wk = rs(k, k).real();
        if (es.w(k) < kRankFloor) {
            if (wk > kRankFloor) throw SupportError("supp rho is not contained in supp sigma");
            continue;
        }
        cross += wk * std::log(es.w(k));
    }
    return {std::max(0.0, neg_entropy - cross), DivergenceKind::umegaki};
}

DivergenceValue maximal_divergence(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    require_full_rank(rho);
    require_full_rank(sigma);
    Matrix x = hermitian_part(gamma_map(sigma, rho.matrix(), Direction::inverse));
    Matrix xlx = eig_function(eigh(x), [](double v) { return v > 0 ? v * std::log(v) : 0.0; });
    double v = (sigma.matrix() * xlx).trace().real();
    return {std::max(0.0, v), DivergenceKind::maximal};
}

double ent_1(const DensityMatrix& sigma, const Matrix& f)
{
    Matrix g = hermitian_part(gamma_map(sigma, f, Direction::forward));
    Eig e = eigh(g);
    if (e.w(0) <= 0) throw DomainError("Gamma_sigma(f) is not positive");
    double tr = e.w.sum();
    Matrix lg = eig_function(e, [](double v) { return std::log(v); });
    double v = (g * (lg - log_state(sigma))).trace().real();
    return v - tr * std::log(tr);
}

namespace {

Matrix spow(const DensityMatrix& s, double a)
{
    if (a == 0.0) return Matrix::Identity(s.dim(), s.dim());
    if (a == 1.0) return s.matrix();
    return eig_function(s.eig(), [a](double x) { return std::pow(x, a); });
}

}  // namespace

cplx weighted_inner(const DensityMatrix& sigma, const Matrix& f, const Matrix& g, double s)
{
    return (spow(sigma, s) * f.adjoint() * spow(sigma, 1.0 - s) * g).trace();
}

cplx dirichlet_form(const DBGenerator& gen, const Matrix& f, const Matrix& g, double s)
{
    Matrix a = spow(gen.sigma(), s);
    Matrix b = spow(gen.sigma(), 1.0 - s);
    cplx out = 0.0;
    for (const Term& t : gen.terms()) {
        Matrix df = commutator(t.L, f);
        Matrix dg = commutator(t.L, g);
        out += t.c * std::exp((0.5 - s) * t.omega) * (a * df.adjoint() * b * dg).trace();
    }
    return out;
}

cplx dirichlet_form_direct(const DBGenerator& gen, const Matrix& f, const Matrix& g, double s)
{
    return -weighted_inner(gen.sigma(), f, qtc::apply(gen, g), s);
}

double dirichlet_form_1(const DBGenerator& gen, const Matrix& f)
{
    Matrix gf = hermitian_part(gamma_map(gen.sigma(), f, Direction::forward));
    Eig e = eigh(gf);
    if (e.w(0) <= 0) throw DomainError("Gamma_sigma(f) is not positive");
    Matrix lg = eig_function(e, [](double v) { return std::log(v); });
    Matrix glf = gamma_map(gen.sigma(), qtc::apply(gen, f), Direction::forward);
    return -0.5 * (glf * (lg - log_state(gen.sigma()))).trace().real();
}

double fisher_information(const DBGenerator& gen, const DensityMatrix& rho)
{
    require_full_rank(rho);
    Matrix ls = apply_adjoint(gen, rho.matrix());
    return -(ls * (log_state(rho) - log_state(gen.sigma()))).trace().real();
}

double de_bruijn_residual(const DBGenerator& gen, const Propagator& prop, const DensityMatrix& rho, double t,
                          double h)
{
    if (t < 0) throw InvalidInput("negative time");
    if (h <= 0) h = 1e-4 * std::max(1.0, t);
    auto state_at = [&](double s) {
        Matrix m = hermitian_part(prop.schrodinger(rho.matrix(), s));
        m /= m.trace().real();
        return DensityMatrix(m, 1e-9);
    };
    auto dval = [&](double s) { return relative_entropy(state_at(s), gen.sigma()).value; };
    double deriv;
    if (t >= h)
        deriv = (dval(t + h) - dval(t - h)) / (2 * h);
    else
        deriv = (-3.0 * dval(t) + 4.0 * dval(t + h) - dval(t + 2 * h)) / (2 * h);
    return std::abs(deriv + fisher_information(gen, state_at(t)));
}

double de_bruijn_residual(const DBGenerator& gen, const DensityMatrix& rho, double t, double h)
{
    return de_bruijn_residual(gen, Propagator(gen), rho, t, h);
}

}  // namespace qtc

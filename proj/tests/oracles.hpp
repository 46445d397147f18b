// Independent reference computations shared by the tests. Nothing here calls the
// library routine it is used to check.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// x log(x/y) + (1−x) log((1−x)/(1−y))
inline double binary_kl(double x, double y)
{
    auto term = [](double a, double b) { return a > 0 ? a * std::log(a / b) : 0.0; };
    return term(x, y) + term(1 - x, 1 - y);
}

// ½(1 + D₂(y‖x)/D₂(x‖y)) on a uniform grid in (0, 1), skipping the removable
// singularity at x = y where both divergences vanish.
inline double alpha_grid_min(double y, long points)
{
    double best = 1.0;  // limit at x → y
    for (long i = 1; i < points; ++i) {
        double x = static_cast<double>(i) / points;
        if (std::abs(x - y) < 1e-4) continue;
        double v = 0.5 * (1.0 + binary_kl(y, x) / binary_kl(x, y));
        best = std::min(best, v);
    }
    return best;
}

// Dense simplex for max cᵀx, Ax ≤ b, x ≥ 0, b ≥ 0 (Bland's rule).
inline double simplex_max(const RMat& a, const RVec& b, const RVec& c)
{
    const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
    RMat t = RMat::Zero(m + 1, n + m + 1);
    t.topLeftCorner(m, n) = a;
    t.block(0, n, m, m) = RMat::Identity(m, m);
    t.col(n + m).head(m) = b;
    t.row(m).head(n) = -c.transpose();
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;
    for (int iter = 0; iter < 10000; ++iter) {
        int enter = -1;
        for (int j = 0; j < n + m; ++j)
            if (t(m, j) < -1e-12) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best = INFINITY;
        for (int i = 0; i < m; ++i)
            if (t(i, enter) > 1e-12) {
                double r = t(i, n + m) / t(i, enter);
                if (r < best - 1e-15 || (std::abs(r - best) <= 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
                    best = r;
                    leave = i;
                }
            }
        if (leave < 0) return INFINITY;
        t.row(leave) /= t(leave, enter);
        for (int i = 0; i <= m; ++i)
            if (i != leave) t.row(i) -= t(i, enter) * t.row(leave);
        basis[leave] = enter;
    }
    return t(m, n + m);
}

// Total variation sup_{0 ≤ f ≤ 1} Σ f_x (p_x − q_x) as a linear program.
inline double total_variation_lp(const RVec& p, const RVec& q)
{
    const int n = static_cast<int>(p.size());
    RMat a = RMat::Identity(n, n);
    RVec b = RVec::Ones(n);
    return simplex_max(a, b, p - q);
}

// Hermitian eigenvalues via a real symmetric embedding [[Re, −Im], [Im, Re]] (each eigenvalue twice).
inline RVec hermitian_eigenvalues(const CMat& h)
{
    const int d = static_cast<int>(h.rows());
    RMat e(2 * d, 2 * d);
    e << h.real(), -h.imag(), h.imag(), h.real();
    Eigen::SelfAdjointEigenSolver<RMat> es(e);
    RVec w(d);
    for (int i = 0; i < d; ++i) w(i) = es.eigenvalues()(2 * i);
    return w;
}

inline double trace_norm_hermitian(const CMat& h) { return hermitian_eigenvalues(0.5 * (h + h.adjoint())).cwiseAbs().sum(); }

// Tr ρ(log ρ − log σ) through eigendecompositions done here.
inline double relative_entropy(const CMat& rho, const CMat& sigma)
{
    Eigen::SelfAdjointEigenSolver<CMat> er(rho), es(sigma);
    CMat lr = er.eigenvectors() * er.eigenvalues().array().log().matrix().cast<cplx>().asDiagonal() *
              er.eigenvectors().adjoint();
    CMat ls = es.eigenvectors() * es.eigenvalues().array().log().matrix().cast<cplx>().asDiagonal() *
              es.eigenvectors().adjoint();
    return (rho * (lr - ls)).trace().real();
}

// Tr(σ 1_{[r,∞)}(f − Tr(σf))) with an explicit eigenvalue loop.
inline double spectral_tail(const CMat& sigma, const CMat& f, double r)
{
    const int d = static_cast<int>(f.rows());
    double mean = (sigma * f).trace().real();
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (f + f.adjoint()) - mean * CMat::Identity(d, d));
    double t = 0.0;
    for (int i = 0; i < d; ++i)
        if (es.eigenvalues()(i) >= r) {
            Eigen::VectorXcd v = es.eigenvectors().col(i);
            t += (v.adjoint() * sigma * v)(0, 0).real();
        }
    return t;
}

// Tensor product of single-site operators.
inline CMat kron(const CMat& a, const CMat& b)
{
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// P(|Bin(n, p)/n − θ| > ε) summed over k with explicit binomial coefficients.
inline double binomial_error(int n, double p, double theta, double eps)
{
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        double coeff = 1.0;
        for (int i = 1; i <= k; ++i) coeff *= static_cast<double>(n - k + i) / i;
        if (std::abs(static_cast<double>(k) / n - theta) > eps) total += coeff * std::pow(p, k) * std::pow(1 - p, n - k);
    }
    return total;
}

}  // namespace oracle

#include "qtc/linalg.hpp"

#include "qtc/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qtc {

Eig eigh(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw InternalConsistency("eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix eig_function(const Eig& e, const std::function<double(double)>& phi)
{
    RVector fw(e.w.size());
    for (Eigen::Index k = 0; k < e.w.size(); ++k) fw(k) = phi(e.w(k));
    return e.V * fw.asDiagonal() * e.V.adjoint();
}

Matrix to_eigenbasis(const Eig& e, const Matrix& a) { return e.V.adjoint() * a * e.V; }
Matrix from_eigenbasis(const Eig& e, const Matrix& a) { return e.V * a * e.V.adjoint(); }

double op_norm(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double trace_norm(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

bool is_hermitian(const Matrix& m, double tol)
{
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

HermitianOperator::HermitianOperator(const Matrix& m, double tol)
{
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidInput("operator must be square and non-empty");
    if (!m.allFinite()) throw InvalidInput("operator has non-finite entries");
    if (!is_hermitian(m, tol)) throw InvalidInput("operator is not Hermitian");
    m_ = hermitian_part(m);
    eig_ = eigh(m_);
}

double HermitianOperator::norm() const
{
    return std::max(std::abs(eig_.w(0)), std::abs(eig_.w(eig_.w.size() - 1)));
}

DensityMatrix::DensityMatrix(const Matrix& m, double tol) : HermitianOperator(m, tol)
{
    if (eigenvalues()(0) < -tol) throw InvalidInput("density matrix has a negative eigenvalue");
    if (std::abs(matrix().trace().real() - 1.0) > tol) throw InvalidInput("density matrix trace differs from 1");
}

const DensityMatrix& require_full_rank(const DensityMatrix& rho, double floor)
{
    if (!rho.full_rank(floor)) throw SingularState("state is below the full-rank floor");
    return rho;
}

DensityMatrix project_full_rank(const DensityMatrix& rho, double eps)
{
    const int d = rho.dim();
    Matrix m = (1.0 - eps) * rho.matrix() + (eps / d) * Matrix::Identity(d, d);
    return DensityMatrix(m);
}

DensityMatrix maximally_mixed(int d)
{
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

SpectralDecomposition spectral_decompose(const HermitianOperator& f, double merge_rel)
{
    const Eig& e = f.eig();
    const double gap = merge_rel * std::max(f.norm(), 1e-300);
    SpectralDecomposition out;
    const Eigen::Index d = e.w.size();
    Eigen::Index k = 0;
    while (k < d) {
        Eigen::Index end = k + 1;
        while (end < d && e.w(end) - e.w(end - 1) < gap) ++end;
        Matrix v = e.V.middleCols(k, end - k);
        out.eigenvalues.push_back(e.w.segment(k, end - k).mean());
        out.projectors.push_back(v * v.adjoint());
        k = end;
    }
    return out;
}

HermitianOperator matrix_function(const HermitianOperator& f, const std::function<double(double)>& phi)
{
    SpectralDecomposition sd = spectral_decompose(f);
    Matrix out = Matrix::Zero(f.dim(), f.dim());
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
        double v = phi(sd.eigenvalues[i]);
        if (!std::isfinite(v)) throw DomainError("function undefined at eigenvalue " + std::to_string(sd.eigenvalues[i]));
        out += v * sd.projectors[i];
    }
    return HermitianOperator(out, 1e-9);
}

bool Interval::contains(double x) const
{
    bool above = lo_closed ? x >= lo : x > lo;
    bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
}

HermitianOperator spectral_indicator(const HermitianOperator& f, const Interval& e)
{
    SpectralDecomposition sd = spectral_decompose(f);
    Matrix out = Matrix::Zero(f.dim(), f.dim());
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i)
        if (e.contains(sd.eigenvalues[i])) out += sd.projectors[i];
    return HermitianOperator(out, 1e-9);
}

Eigen::VectorXcd vectorize(const Matrix& a)
{
    return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Matrix unvectorize(const Eigen::VectorXcd& v, int d)
{
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Superoperator::Superoperator(int dim, Matrix mat) : dim_(dim), mat_(std::move(mat))
{
    if (mat_.rows() != dim * dim || mat_.cols() != dim * dim) throw InvalidInput("superoperator shape mismatch");
}

Superoperator Superoperator::from_map(int dim, const std::function<Matrix(const Matrix&)>& phi)
{
    const int n = dim * dim;
    Matrix mat(n, n);
    for (int col = 0; col < n; ++col) {
        Matrix unit = Matrix::Zero(dim, dim);
        unit(col % dim, col / dim) = 1.0;
        mat.col(col) = vectorize(phi(unit));
    }
    return Superoperator(dim, std::move(mat));
}

Matrix Superoperator::apply(const Matrix& a) const
{
    if (a.rows() != dim_ || a.cols() != dim_) throw InvalidInput("operand dimension mismatch");
    return unvectorize(mat_ * vectorize(a), dim_);
}

Superoperator Superoperator::adjoint() const { return Superoperator(dim_, mat_.adjoint()); }

namespace {

Matrix state_power(const DensityMatrix& rho, double s)
{
    return eig_function(rho.eig(), [s](double x) { return std::pow(x, s); });
}

}  // namespace

Matrix relative_modular_apply(const DensityMatrix& rho, const DensityMatrix& sigma, const Matrix& f, double s)
{
    require_full_rank(rho);
    require_full_rank(sigma);
    if (f.rows() != rho.dim() || f.cols() != rho.dim() || sigma.dim() != rho.dim())
        throw InvalidInput("dimension mismatch");
    return state_power(rho, s) * f * state_power(sigma, -s);
}

Superoperator relative_modular_superoperator(const DensityMatrix& rho, const DensityMatrix& sigma, double s)
{
    require_full_rank(rho);
    require_full_rank(sigma);
    Matrix a = state_power(rho, s);
    Matrix b = state_power(sigma, -s);
    return Superoperator(rho.dim(), kron(b.transpose(), a));
}

Matrix gamma_map(const DensityMatrix& sigma, const Matrix& f, Direction dir)
{
    require_full_rank(sigma);
    if (f.rows() != sigma.dim() || f.cols() != sigma.dim()) throw InvalidInput("dimension mismatch");
    Matrix r = state_power(sigma, dir == Direction::forward ? 0.5 : -0.5);
    return r * f * r;
}

double f_omega(double t, double omega)
{
    double u = std::log(t) + omega;
    double base = std::exp(-omega / 2);
    if (std::abs(u) < 1e-6) return base * (1.0 + u / 2.0 + u * u / 6.0);
    return base * std::expm1(u) / u;
}

double tilted_weight(double pk, double pl, double omega)
{
    // f_ω(t) p_l = e^{-ω/2} p_l (e^u - 1)/u with u = log(p_k/p_l) + ω.
    double u = std::log(pk) - std::log(pl) + omega;
    double b = std::exp(-omega / 2) * pl;
    if (std::abs(u) < 1e-6) return b * (1.0 + u / 2.0 + u * u / 6.0);
    return b * std::expm1(u) / u;
}

RMatrix tilted_weights(const RVector& p, double omega)
{
    const Eigen::Index d = p.size();
    RMatrix w(d, d);
    for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index k = 0; k < d; ++k) w(k, l) = tilted_weight(p(k), p(l), omega);
    return w;
}

Matrix tilted_multiplier(const DensityMatrix& rho, double omega, const Matrix& a, Direction dir)
{
    require_full_rank(rho);
    if (a.rows() != rho.dim() || a.cols() != rho.dim()) throw InvalidInput("dimension mismatch");
    Matrix b = to_eigenbasis(rho.eig(), a);
    RMatrix w = tilted_weights(rho.eigenvalues(), omega);
    if (dir == Direction::forward)
        schur_scale(b, w);
    else
        schur_divide(b, w);
    return from_eigenbasis(rho.eig(), b);
}

RMatrix xi_weights(const RVector& s)
{
    const Eigen::Index d = s.size();
    RMatrix w(d, d);
    for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index k = 0; k < d; ++k) {
            double a = s(k), b = s(l);
            double x = std::log(a) - std::log(b);
            // √(ab)·x/(a−b) = x / (2 sinh(x/2))
            w(k, l) = std::abs(x) < 1e-8 ? 1.0 - x * x / 24.0 : x / (2.0 * std::sinh(x / 2.0));
        }
    return w;
}

Matrix xi_sigma(const DensityMatrix& sigma, const Matrix& a)
{
    require_full_rank(sigma);
    if (a.rows() != sigma.dim() || a.cols() != sigma.dim()) throw InvalidInput("dimension mismatch");
    Matrix b = to_eigenbasis(sigma.eig(), a);
    schur_scale(b, xi_weights(sigma.eigenvalues()));
    return from_eigenbasis(sigma.eig(), b);
}

void schur_scale(Matrix& a, const RMatrix& w)
{
    kernels::hadamard_scale(a.data(), w.data(), static_cast<std::size_t>(a.size()));
}

void schur_divide(Matrix& a, const RMatrix& w)
{
    kernels::hadamard_divide(a.data(), w.data(), static_cast<std::size_t>(a.size()));
}

double schur_quadratic(const Matrix& a, const RMatrix& w)
{
    return kernels::weighted_sqnorm(a.data(), w.data(), static_cast<std::size_t>(a.size()));
}

std::vector<Matrix> hermitian_basis(int d, bool with_identity)
{
    std::vector<Matrix> out;
    if (with_identity) out.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
    const double r2 = std::sqrt(0.5);
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) {
            Matrix x = Matrix::Zero(d, d);
            x(k, l) = r2;
            x(l, k) = r2;
            out.push_back(x);
            Matrix y = Matrix::Zero(d, d);
            y(k, l) = cplx(0, -r2);
            y(l, k) = cplx(0, r2);
            out.push_back(y);
        }
    for (int a = 1; a < d; ++a) {
        Matrix z = Matrix::Zero(d, d);
        double nrm = 1.0 / std::sqrt(a * (a + 1.0));
        for (int k = 0; k < a; ++k) z(k, k) = nrm;
        z(a, a) = -a * nrm;
        out.push_back(z);
    }
    return out;
}

Matrix from_coordinates(const std::vector<Matrix>& basis, const RVector& x)
{
    Matrix out = Matrix::Zero(basis.at(0).rows(), basis.at(0).cols());
    for (std::size_t a = 0; a < basis.size(); ++a) out += x(a) * basis[a];
    return out;
}

RVector to_coordinates(const std::vector<Matrix>& basis, const Matrix& a)
{
    RVector x(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) x(i) = (basis[i] * a).trace().real();
    return x;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace qtc

// Hermitian spectral calculus and the modular superoperators built on it.
// Vectorization is column-stacking: vec(A X B) = (B^T kron A) vec(X).
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kMergeTol = 1e-10;
inline constexpr double kRankFloor = 1e-9;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SingularState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct SupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPrimitive : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateObservable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalConsistency : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Direction { forward, inverse };

// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct Eig {
    RVector w;
    Matrix V;
};
Eig eigh(const Matrix& m);

// Σ φ(w_k) v_k v_k^*
Matrix eig_function(const Eig& e, const std::function<double(double)>& phi);
// V^* A V and its inverse.
Matrix to_eigenbasis(const Eig& e, const Matrix& a);
Matrix from_eigenbasis(const Eig& e, const Matrix& a);

double op_norm(const Matrix& m);      // largest singular value
double trace_norm(const Matrix& m);   // sum of singular values
Matrix hermitian_part(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(const Matrix& m, double tol = kHermitianTol);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    const Eig& eig() const { return eig_; }
    const RVector& eigenvalues() const { return eig_.w; }
    double norm() const;

private:
    Matrix m_;
    Eig eig_;
};

class DensityMatrix : public HermitianOperator {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(const Matrix& m, double tol = 1e-12);

    double min_eigenvalue() const { return eigenvalues()(0); }
    bool full_rank(double floor = kRankFloor) const { return min_eigenvalue() >= floor; }
};

// Throws SingularState if the state sits below the floor.
const DensityMatrix& require_full_rank(const DensityMatrix& rho, double floor = kRankFloor);
// (1-ε)ρ + ε I/d
DensityMatrix project_full_rank(const DensityMatrix& rho, double eps);
DensityMatrix maximally_mixed(int d);

struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<Matrix> projectors;
};
SpectralDecomposition spectral_decompose(const HermitianOperator& f, double merge_rel = kMergeTol);

// φ applied through the spectral decomposition; DomainError where φ is not finite.
HermitianOperator matrix_function(const HermitianOperator& f, const std::function<double(double)>& phi);

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = true;
    bool hi_closed = true;
    bool contains(double x) const;
};
HermitianOperator spectral_indicator(const HermitianOperator& f, const Interval& e);

class Superoperator {
public:
    Superoperator() = default;
    Superoperator(int dim, Matrix mat);
    static Superoperator from_map(int dim, const std::function<Matrix(const Matrix&)>& phi);

    int dim() const { return dim_; }
    const Matrix& matrix() const { return mat_; }
    Matrix apply(const Matrix& a) const;
    Superoperator adjoint() const;

private:
    int dim_ = 0;
    Matrix mat_;
};

Eigen::VectorXcd vectorize(const Matrix& a);
Matrix unvectorize(const Eigen::VectorXcd& v, int d);

// ρ^s f σ^{-s}
Matrix relative_modular_apply(const DensityMatrix& rho, const DensityMatrix& sigma, const Matrix& f, double s);
Superoperator relative_modular_superoperator(const DensityMatrix& rho, const DensityMatrix& sigma, double s);

// σ^{1/2} f σ^{1/2} or σ^{-1/2} f σ^{-1/2}
Matrix gamma_map(const DensityMatrix& sigma, const Matrix& f, Direction dir);

// f_ω(t) = e^{ω/2}(t - e^{-ω})/(log t + ω)
double f_omega(double t, double omega);
// f_ω(p_k/p_l) p_l, the weight [ρ]_ω puts on entry (k,l) in ρ's eigenbasis.
double tilted_weight(double pk, double pl, double omega);
RMatrix tilted_weights(const RVector& p, double omega);
Matrix tilted_multiplier(const DensityMatrix& rho, double omega, const Matrix& a, Direction dir);

// Ξ_σ: entry (k,l) times √(σ_kσ_l)(log σ_k − log σ_l)/(σ_k − σ_l) in σ's eigenbasis.
RMatrix xi_weights(const RVector& s);
Matrix xi_sigma(const DensityMatrix& sigma, const Matrix& a);

// In-place Schur product of a complex matrix with a real weight matrix of equal shape.
void schur_scale(Matrix& a, const RMatrix& w);
void schur_divide(Matrix& a, const RMatrix& w);
double schur_quadratic(const Matrix& a, const RMatrix& w);

// Generalized Gell-Mann matrices, orthonormal for Tr(A B); traceless unless with_identity.
std::vector<Matrix> hermitian_basis(int d, bool with_identity = false);
Matrix from_coordinates(const std::vector<Matrix>& basis, const RVector& x);
RVector to_coordinates(const std::vector<Matrix>& basis, const Matrix& a);

Matrix commutator(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace qtc

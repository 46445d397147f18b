// Detailed-balance Lindblad generators
//   L(f) = Σ_j c_j e^{-ω_j/2} (L_j^*[f, L_j] + [L_j^*, f] L_j)
// with σ L_j σ^{-1} = e^{-ω_j} L_j.
#pragma once

#include "qtc/linalg.hpp"
#include "qtc/random.hpp"

#include <string>
#include <vector>

namespace qtc {

struct Term {
    double c = 0.0;
    double omega = 0.0;
    Matrix L;
};

class DBGenerator {
public:
    DBGenerator() = default;
    // lipschitz_dim is the d in the 1/d prefactor of the Lipschitz seminorms;
    // 0 means the Hilbert space dimension. Tensorized generators keep the site dimension.
    DBGenerator(DensityMatrix sigma, std::vector<Term> terms, int lipschitz_dim = 0);

    int dim() const { return sigma_.dim(); }
    int lipschitz_dim() const { return lip_dim_; }
    const DensityMatrix& sigma() const { return sigma_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    // Index j' with L_{j'} = L_j^*, or -1 if none within tolerance.
    int partner(std::size_t j) const { return partner_[j]; }
    double partner_residual(std::size_t j) const { return partner_res_[j]; }

    const Matrix& sigma_sqrt() const { return sq_; }
    const Matrix& sigma_isqrt() const { return isq_; }

private:
    DensityMatrix sigma_;
    std::vector<Term> terms_;
    int lip_dim_ = 0;
    std::vector<int> partner_;
    std::vector<double> partner_res_;
    Matrix sq_, isq_;
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double residual = 0.0;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool ok() const;
    double worst_residual() const;
};

ValidationReport validate(const DBGenerator& gen, double tol = 1e-8);

Matrix apply(const DBGenerator& gen, const Matrix& f);
// L_* = Γ_σ ∘ L ∘ Γ_σ^{-1}
Matrix apply_adjoint(const DBGenerator& gen, const Matrix& rho);

enum class Picture { heisenberg, schrodinger };
Superoperator superoperator(const DBGenerator& gen, Picture picture);

// exp(tL) through the similarity K = Γ^{1/2} L Γ^{-1/2}, which is Hermitian under detailed balance.
class Propagator {
public:
    explicit Propagator(const DBGenerator& gen);
    Matrix heisenberg(const Matrix& f, double t) const;
    Matrix schrodinger(const Matrix& rho, double t) const;
    bool symmetrized() const { return symmetric_; }

private:
    Matrix exp_heisenberg(double t) const;
    int d_ = 0;
    bool symmetric_ = true;
    RVector lambda_;
    Matrix left_, right_;
    Matrix h_;
};

DensityMatrix evolve(const DBGenerator& gen, const DensityMatrix& rho, double t);
Matrix evolve_observable(const DBGenerator& gen, const Matrix& f, double t);

struct GeneratorSpectrum {
    std::vector<double> eigenvalues;  // descending
    double spectral_gap = 0.0;
    double imag_residual = 0.0;
    int kernel_dim = 0;
};
GeneratorSpectrum spectral_gap(const DBGenerator& gen);

// Generalized depolarizing generator L(f) = Tr(σf) I − f. Off-diagonal terms are
// √d|i⟩⟨j| with c = √(σ_iσ_j)/(2d); the diagonal part is rewritten in an orthonormal
// traceless diagonal basis so that every term is traceless.
DBGenerator depolarizing_generator(const DensityMatrix& sigma);
// Same, in a caller-supplied orthonormal eigenbasis of σ (columns of basis).
DBGenerator depolarizing_generator(const DensityMatrix& sigma, const Matrix& basis);

double binary_relative_entropy(double x, double y);
// ½(1 + q(x, y)), q(x,y) = D2(y‖x)/D2(x‖y), q(y,y) = 1
double alpha_objective(double x, double y);
double mlsi_constant_depolarizing(const DensityMatrix& sigma);

DBGenerator tensorize(const DBGenerator& gen, int n, int max_dim = 64);
DBGenerator scaled(const DBGenerator& gen, double k);

Matrix derivation(const DBGenerator& gen, std::size_t j, const Matrix& f);
std::vector<Matrix> gradient(const DBGenerator& gen, const Matrix& f);
// div(A) = Σ c_j [A_j, L_j^*]
Matrix divergence(const DBGenerator& gen, const std::vector<Matrix>& a);

// Random detailed-balance generator: eigen-operators of Δ_σ drawn pairwise (ω, −ω),
// c log-uniform in [0.1, 10]. Retries until primitive.
DBGenerator random_db_generator(Rng& rng, int d);
DBGenerator random_db_generator(Rng& rng, const DensityMatrix& sigma);

}  // namespace qtc

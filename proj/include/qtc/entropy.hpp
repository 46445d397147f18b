// Divergences, Dirichlet forms, entropy production and the de Bruijn identity.
#pragma once

#include "qtc/generator.hpp"

namespace qtc {

enum class DivergenceKind { umegaki, maximal, ent1 };

struct DivergenceValue {
    double value = 0.0;
    DivergenceKind kind = DivergenceKind::umegaki;
};

// Tr ρ(log ρ − log σ); zero eigenvalues of ρ contribute 0.
DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
// Tr σ X log X with X = σ^{-1/2} ρ σ^{-1/2}
DivergenceValue maximal_divergence(const DensityMatrix& rho, const DensityMatrix& sigma);
// Tr Γ(f)(log Γ(f) − log σ) − Tr Γ(f) log Tr Γ(f)
double ent_1(const DensityMatrix& sigma, const Matrix& f);

// ⟨f, g⟩_{s,σ} = Tr(σ^s f^* σ^{1-s} g)
cplx weighted_inner(const DensityMatrix& sigma, const Matrix& f, const Matrix& g, double s);

// Σ_j c_j e^{(1/2-s)ω_j} ⟨∂_j f, ∂_j g⟩_{s,σ}
cplx dirichlet_form(const DBGenerator& gen, const Matrix& f, const Matrix& g, double s);
// −⟨f, L(g)⟩_{s,σ}
cplx dirichlet_form_direct(const DBGenerator& gen, const Matrix& f, const Matrix& g, double s);
// −½ Tr(Γ(L f)(log Γ(f) − log σ))
double dirichlet_form_1(const DBGenerator& gen, const Matrix& f);

// I_σ(ρ) = −Tr(L_*(ρ)(log ρ − log σ))
double fisher_information(const DBGenerator& gen, const DensityMatrix& rho);

// |d/dt D(ρ_t‖σ) + I_σ(ρ_t)| by central differences; h ≤ 0 picks 1e-4·max(1, t).
// Below t = h a second-order one-sided stencil is used.
double de_bruijn_residual(const DBGenerator& gen, const DensityMatrix& rho, double t, double h = 0.0);
double de_bruijn_residual(const DBGenerator& gen, const Propagator& prop, const DensityMatrix& rho, double t, double h);

Matrix log_state(const DensityMatrix& rho);

}  // namespace qtc

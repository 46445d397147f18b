// The MLSI ⇒ TC₂ ⇒ {TC₁, PI} chain, quantum Pinsker, and the concentration bounds.
#pragma once

#include "qtc/parallel.hpp"
#include "qtc/wasserstein.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qtc {

enum class Inequality { MLSI, TC2, TC1, PI, Pinsker, ExpConc, GaussConc };
const char* inequality_name(Inequality k);

struct InequalityReport {
    Inequality kind = Inequality::MLSI;
    std::string constant;  // e.g. "c2=1/alpha1"
    double constant_value = 0.0;
    int samples = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // lhs − rhs, ≥ 0 means satisfied
    std::optional<Matrix> witness;   // state or observable at the worst margin
    std::optional<double> witness_r;  // radius, for concentration
};

// I_σ(ρ) − 2αD(ρ‖σ)
double mlsi_margin(const DBGenerator& gen, const DensityMatrix& rho, double alpha);

struct MlsiEstimate {
    double value = std::numeric_limits<double>::infinity();  // inf over samples of I/(2D)
    int used = 0;                                             // samples with D > 0
    std::optional<Matrix> witness;
};
MlsiEstimate mlsi_estimate(const DBGenerator& gen, const std::vector<DensityMatrix>& samples);

struct TransportMargin {
    double margin = 0.0;  // √(2cD) − W
    double distance = 0.0;
    double bound = 0.0;
    double divergence = 0.0;
    int segments = 0;
};
// Uses the certified W₂ upper bound; path refinement stops early once the bound is certified.
TransportMargin tc2_check(const DBGenerator& gen, const DensityMatrix& rho, double c2, W2Options opt = {});
// Uses the W₁ ascent value, i.e. Tr(fΔ) at a certificate f with ‖f‖_Lip = 1 exactly.
TransportMargin tc1_check(const DBGenerator& gen, const DensityMatrix& rho, double c1, const W1Options& opt = {});

// Per term, the Schur multiplier f_ω(σ_k/σ_l)/f_{−ω}(σ_k/σ_l) in σ's eigenbasis.
RMatrix kappa_multiplier(const DensityMatrix& sigma, double omega);
// ∞→∞ norm of A ↦ m∘A: lower by ascent over unitaries, upper by a row–column factorization.
struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
};
Bracket schur_multiplier_norm(const RMatrix& m, std::uint64_t seed = 1, int starts = 24);
Bracket kappa(const DBGenerator& gen, std::uint64_t seed = 1);

// E_{1/2}(f, f) − λ‖f‖²_{1/2,σ} for centered f
double poincare_margin(const DBGenerator& gen, const Matrix& f, double lambda);

// Tr(σ 1_{[r,∞)}(f − Tr(σf)))
double tail_probability(const DensityMatrix& sigma, const Matrix& f, double r);

struct ExpConcentration {
    double lambda = 0.0;  // spectral gap
    double lip = 0.0;     // ‖f‖_Lip
    double sup = 0.0;     // ‖f − Tr(σf)‖_∞
    double c = 0.0;       // C_{f,λ}
    double bound(double r) const;
};
ExpConcentration exp_concentration(const DBGenerator& gen, const Matrix& f);
ExpConcentration exp_concentration(const DBGenerator& gen, const Matrix& f, double lambda);
double exp_concentration_bound(const DBGenerator& gen, const Matrix& f, double r);

// (Δ_σ^{-1/2} f)_R and (Δ_σ^{-1/2} f)_I with Δ_σ^{-1/2}(f) = σ^{-1/2} f σ^{1/2}
std::pair<Matrix, Matrix> modular_parts(const DensityMatrix& sigma, const Matrix& f);

struct GaussConcentration {
    double lip_sq = 0.0;  // max(‖g_R‖²_Lip, ‖g_I‖²_Lip)
    double c1 = 0.0;
    double bound(double r) const;
};
GaussConcentration gauss_concentration(const DBGenerator& gen, const Matrix& f, double c1);
double gauss_concentration_bound(const DBGenerator& gen, const Matrix& f, double r, double c1);

struct DepolarizingGauss {
    double alpha1 = 0.0;
    double width_sq = 0.0;  // max of the squared Hamming-Lipschitz constants
    double bound(double r) const;
};
DepolarizingGauss depolarizing_gauss(const DensityMatrix& sigma, const Matrix& f);
double depolarizing_gauss_bound(const DensityMatrix& sigma, const Matrix& f, double r);

struct ProductConcentration {
    double lambda = 0.0;
    double log_term = 0.0;  // 11 + log(d⁴‖σ⁻¹‖_∞)
    double lip_sq = 0.0;
    int d = 0;
    double exponent(int n, double r) const;
    double bound(int n, double r) const { return std::exp(-exponent(n, r)); }
};
ProductConcentration product_concentration(const DBGenerator& site, const Matrix& f);
double product_concentration_bound(const DBGenerator& site, const Matrix& f, int n, double r);

// (1/n) Σ_k I⊗…⊗f⊗…⊗I
Matrix site_average(const Matrix& f, int n, int max_dim = 64);

// √(2D(ρ‖σ)) − ‖ρ − σ‖₁
double pinsker_check(const DensityMatrix& rho, const DensityMatrix& sigma);
// e^{−αt}√(2D(ρ‖σ)) − ‖ρ_t − σ‖₁ for each t
std::vector<double> mixing_check(const DBGenerator& gen, const DensityMatrix& rho, const std::vector<double>& ts,
                                 double alpha);

struct ChainOptions {
    int samples = 100;
    std::uint64_t seed = 1;
    std::vector<double> r_grid;  // empty: 0:3:0.1
    W2Options w2;
    W1Options w1;
};
struct ChainResult {
    double alpha1 = 0.0;
    bool alpha_exact = false;  // closed form (depolarizing) vs sampled upper estimate
    double gap = 0.0;
    Bracket kappa;
    std::vector<InequalityReport> reports;
};
ChainResult chain_check(const DBGenerator& gen, const ChainOptions& opt, ThreadPool& pool);

}  // namespace qtc

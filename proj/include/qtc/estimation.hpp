// Single-parameter estimation from n copies: SLD, the locally unbiased projective
// estimator, the two finite-n error bounds, exact enumeration and Monte Carlo.
#pragma once

#include "qtc/generator.hpp"
#include "qtc/parallel.hpp"

#include <functional>
#include <string>

namespace qtc {

struct UninformativeFamily : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParametricFamily {
    std::string name;
    int dim = 0;
    double lo = 0.0, hi = 0.0;  // admissible θ range (open)
    std::function<Matrix(double)> state;
    std::function<Matrix(double)> derivative;  // empty: central differences with Richardson
    double step = 1e-5;

    DensityMatrix at(double theta) const;
    Matrix tangent(double theta) const;
};

// diag(θ, 1−θ)
ParametricFamily diag_family();
// e^{−iθZ/2} ρ₀ e^{iθZ/2} with ρ₀ = (I + 0.6X + 0.3Z)/2
ParametricFamily rotation_family();
// e^{−(Z + θX)}/Tr e^{−(Z + θX)}; no analytic derivative
ParametricFamily gibbs_family();
ParametricFamily family_by_name(const std::string& name);
ParametricFamily constant_family(const DensityMatrix& rho);
ParametricFamily conjugated_family(const ParametricFamily& base, const Matrix& unitary);

HermitianOperator sld(const ParametricFamily& fam, double theta);
double sld_fisher(const ParametricFamily& fam, double theta);
// f = L_θ/J_θ + θI
HermitianOperator estimator_observable(const ParametricFamily& fam, double theta);

// 2·exp(−nε²λ/(8d(11 + log(d⁴‖ρ⁻¹‖_∞)) max(‖g_R‖²_Lip, ‖g_I‖²_Lip))), g = Δ^{-1/2}f
double error_bound_dissipative(const DBGenerator& gen, const Matrix& f, int n, double eps);
// 2·exp(−nε²/(16(11 + log(d⁴‖ρ⁻¹‖_∞)) max(‖φ_R‖²_{lip,H}, ‖φ_I‖²_{lip,H})))
double error_bound_depolarizing(const DensityMatrix& rho, const Matrix& f, int n, double eps);

struct ErrorEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    long trials = 0;
};
// Each copy measured in the eigenbasis of f, outcomes averaged; counts |θ̂ − θ| > ε.
ErrorEstimate monte_carlo_error_probability(const ParametricFamily& fam, double theta, int n, double eps, long trials,
                                            std::uint64_t seed, ThreadPool& pool);
// Same probability by summing the multinomial law over outcome counts.
double exact_error_probability(const ParametricFamily& fam, double theta, int n, double eps);

}  // namespace qtc

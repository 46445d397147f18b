// Lipschitz seminorms, dual W1, the transport metric and certified W2 upper bounds.
#pragma once

#include "qtc/generator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qtc {

enum class LipVariant { Lip, Lip2, LipG, LipH, ClH };
LipVariant parse_variant(const std::string& s);
const char* variant_name(LipVariant v);

double lipschitz_constant(const DBGenerator& gen, const Matrix& f, LipVariant v);

struct WassersteinResult {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int iterations = 0;
    bool converged = true;
    // order 1
    Matrix certificate;
    // order 2
    int segments = 0;
    std::vector<Matrix> states;
    std::vector<Matrix> potentials;
    double action = 0.0;           // trapezoid action of the piecewise-linear path
    double midpoint_action = 0.0;  // midpoint-rule action, for comparison
    double speed_variance = 0.0;   // relative variance of segment speeds
    double max_residual = 0.0;     // continuity-equation residual of the potentials
    std::vector<std::pair<int, double>> refinement;  // (K, upper bound)
};

struct W1Options {
    int starts = 16;
    std::uint64_t seed = 1;
    int max_iter = 3000;
};

WassersteinResult w1(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2, LipVariant v,
                     const W1Options& opt = {});

// M_ρ(U) = −div([ρ]_ω ∇U)
Matrix metric_operator(const DBGenerator& gen, const DensityMatrix& rho, const Matrix& u);

struct MetricSolve {
    double value = 0.0;  // ⟨U, τ⟩ = ‖τ‖²_g
    Matrix potential;
    double residual = 0.0;
};
MetricSolve metric_norm_squared(const DBGenerator& gen, const DensityMatrix& rho, const Matrix& tau);

// Gradient of ρ ↦ ⟨Y, [ρ]_ω Y⟩_HS as a Hermitian G with d⟨Y,[ρ]Y⟩ = Tr(G δρ).
Matrix tilted_quadratic_gradient(const DensityMatrix& rho, double omega, const Matrix& y);

struct W2Options {
    int segments = 4;     // initial K
    int max_segments = 64;
    double refine_tol = 1e-4;
    int max_iter = 500;
    bool adaptive = true;
    double target = -1.0;  // stop refining once the upper bound is at or below this
};

// Certified upper bound: the trapezoid rule over-estimates the action of each linear
// segment because ρ ↦ ‖τ‖²_{g,ρ} is convex.
WassersteinResult w2_upper(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2,
                           const W2Options& opt = {});

// Trapezoid and midpoint actions of the piecewise-linear path through states.
double path_action(const DBGenerator& gen, const std::vector<Matrix>& states, bool midpoint = false);

bool is_depolarizing(const DBGenerator& gen, double tol = 1e-9);

struct BracketOptions {
    W1Options w1;
    W2Options w2;
};
WassersteinResult w2_bracket(const DBGenerator& gen, const DensityMatrix& rho, const DensityMatrix& sigma2,
                             const BracketOptions& opt = {});

}  // namespace qtc

// Limited-memory BFGS with Armijo backtracking.
#pragma once

#include "qtc/linalg.hpp"

#include <functional>

namespace qtc::optim {

// Returns f(x); writes ∇f into grad when grad is non-null. Non-finite values reject a step.
using Objective = std::function<double(const RVector& x, RVector* grad)>;

struct Options {
    int max_iter = 500;
    int memory = 10;
    double grad_tol = 1e-12;
    double rel_tol = 1e-13;
    int stall_iters = 3;
};

struct Result {
    RVector x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

Result lbfgs(const Objective& fn, RVector x0, const Options& opt = {});

}  // namespace qtc::optim

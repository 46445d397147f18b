#include "qtc/optim.hpp"

#include <cmath>
#include <deque>

namespace qtc::optim {

Result lbfgs(const Objective& fn, RVector x0, const Options& opt)
{
    Result res;
    res.x = std::move(x0);
    const Eigen::Index n = res.x.size();
    RVector g(n);
    res.f = fn(res.x, &g);
    if (!std::isfinite(res.f)) return res;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    std::deque<RVector> ss, ys;
    std::deque<double> rhos;
    int stall = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it + 1;
        double gn = g.norm();
        if (gn <= opt.grad_tol) {
            res.converged = true;
            break;
        }
        // two-loop recursion
        RVector q = g;
        std::vector<double> alpha(ss.size());
        for (int i = static_cast<int>(ss.size()) - 1; i >= 0; --i) {
            alpha[i] = rhos[i] * ss[i].dot(q);
            q -= alpha[i] * ys[i];
        }
        double gamma = ss.empty() ? 1.0 / std::max(gn, 1e-300) : ss.back().dot(ys.back()) / ys.back().squaredNorm();
        RVector dir = gamma * q;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            double beta = rhos[i] * ys[i].dot(dir);
            dir += (alpha[i] - beta) * ss[i];
        }
        dir = -dir;
        double slope = g.dot(dir);
        if (slope >= 0) {
            ss.clear();
            ys.clear();
            rhos.clear();
            dir = -g / std::max(gn, 1e-300);
            slope = g.dot(dir);
        }

        double step = 1.0;
        RVector xn(n), gnew(n);
        double fn_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = res.x + step * dir;
            fn_new = fn(xn, &gnew);
            if (std::isfinite(fn_new) && fn_new <= res.f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (ss.empty()) {
                res.converged = true;  // no descent available at machine precision
                break;
            }
            ss.clear();
            ys.clear();
            rhos.clear();
            continue;
        }
        RVector s = xn - res.x;
        RVector y = gnew - g;
        double sy = s.dot(y);
        if (sy > 1e-300) {
            ss.push_back(s);
            ys.push_back(y);
            rhos.push_back(1.0 / sy);
            if (static_cast<int>(ss.size()) > opt.memory) {
                ss.pop_front();
                ys.pop_front();
                rhos.pop_front();
            }
        }
        double drop = res.f - fn_new;
        res.x = xn;
        res.f = fn_new;
        g = gnew;
        if (drop <= opt.rel_tol * std::max(1e-300, std::abs(res.f))) {
            if (++stall >= opt.stall_iters) {
                res.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    return res;
}

}  // namespace qtc::optim

#include "dsaeem/optim.hpp"

#include <cmath>

namespace dsaeem {

Vector scg_minimize(const Objective& f, Vector x, const ScgOptions& opts, OptimTrace* trace)
{
    const auto n = x.size();
    if (opts.max_iterations <= 0 || n == 0)
        return x;

    auto eval = [&](const Vector& at, Vector* g) {
        if (trace)
            ++trace->evaluations;
        return f(at, g);
    };

    Vector grad(n);
    double fx = eval(x, &grad);
    if (!std::isfinite(fx))
        throw NumericalError("objective is not finite at the starting point");
    if (trace)
        trace->values.push_back(fx);

    Vector r = -grad;
    Vector p = r;
    double lambda = opts.lambda_init;
    double lambda_bar = 0.0;
    bool success = true;
    double delta = 0.0;
    Vector s(n), g_probe(n), g_new(n);

    for (int k = 1; k <= opts.max_iterations; ++k) {
        const double p_sq = p.squaredNorm();
        if (p_sq == 0.0)
            break;
        if (success) {
            // Curvature along p from a one-sided gradient difference.
            const double sigma_k = opts.sigma / std::sqrt(p_sq);
            eval(x + sigma_k * p, &g_probe);
            s = (g_probe - grad) / sigma_k;
            delta = p.dot(s);
        }
        delta += (lambda - lambda_bar) * p_sq;
        if (delta <= 0.0) {
            // Make the local Hessian estimate positive definite.
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }
        const double mu = p.dot(r);
        const double alpha = mu / delta;
        const Vector x_new = x + alpha * p;
        const double f_new = eval(x_new, &g_new);
        const double comparison =
            std::isfinite(f_new) ? 2.0 * delta * (fx - f_new) / (mu * mu) : -1.0;

        if (comparison >= 0.0 && f_new <= fx) {
            x = x_new;
            fx = f_new;
            grad = g_new;
            const Vector r_new = -grad;
            lambda_bar = 0.0;
            success = true;
            if (k % n == 0) {
                p = r_new;
            } else {
                const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
                p = r_new + beta * p;
            }
            r = r_new;
            if (comparison >= 0.75)
                lambda = std::max(lambda / 4.0, 1e-15);
            if (trace)
                trace->values.push_back(fx);
        } else {
            lambda_bar = lambda;
            success = false;
            if (trace)
                ++trace->rejected;
        }
        if (comparison < 0.25)
            lambda = std::min(lambda + delta * (1.0 - comparison) / p_sq, 1e100);
        if (r.norm() < opts.gradient_tol)
            break;
    }
    return x;
}

Vector gd_minimize(const Objective& f, Vector x, const GdOptions& opts, OptimTrace* trace)
{
    Vector grad(x.size()), g_new(x.size());
    double fx = f(x, &grad);
    if (trace) {
        ++trace->evaluations;
        trace->values.push_back(fx);
    }
    if (!std::isfinite(fx))
        throw NumericalError("objective is not finite at the starting point");
    double rate = opts.learn_rate;
    for (int it = 0; it < opts.max_iterations && rate > 1e-14; ++it) {
        const Vector x_new = x - rate * grad;
        const double f_new = f(x_new, &g_new);
        if (trace)
            ++trace->evaluations;
        if (std::isfinite(f_new) && f_new <= fx) {
            x = x_new;
            fx = f_new;
            grad = g_new;
            if (trace)
                trace->values.push_back(fx);
        } else {
            rate *= 0.5;
            if (trace)
                ++trace->rejected;
        }
    }
    return x;
}

} // namespace dsaeem

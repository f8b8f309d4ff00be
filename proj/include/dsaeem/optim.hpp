#pragma once

#include "dsaeem/common.hpp"

#include <functional>

namespace dsaeem {

/// Returns f(x) and, when `grad` is non-null, writes the gradient into it.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct OptimTrace {
    std::vector<double> values; // value at start, then after each accepted step
    int evaluations = 0;
    int rejected = 0;
};

struct ScgOptions {
    int max_iterations = 100;
    double sigma = 1e-5;       // finite-difference scale for the curvature probe
    double lambda_init = 1e-7; // initial trust-region regularizer
    double gradient_tol = 1e-10;
};

/// Scaled conjugate gradient (Moller, 1993). Only steps that do not raise the
/// objective are accepted, so the recorded values are non-increasing.
Vector scg_minimize(const Objective& f, Vector x, const ScgOptions& opts,
                    OptimTrace* trace = nullptr);

struct GdOptions {
    int max_iterations = 100;
    double learn_rate = 0.1;
};

/// Plain gradient descent; a rising step is rejected and the rate halved.
Vector gd_minimize(const Objective& f, Vector x, const GdOptions& opts,
                   OptimTrace* trace = nullptr);

} // namespace dsaeem

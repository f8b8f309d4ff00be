#pragma once

#include "dsaeem/common.hpp"

namespace dsaeem {

// ---------------------------------------------------------------------------
// Stage 1: L1-regularized selection by proximal gradient (ISTA).
// ---------------------------------------------------------------------------

/// sign(z) * max(|z| - t, 0), componentwise.
Vector soft_threshold(const Vector& z, double t);

struct IstaOptions {
    int max_iterations = 5000;
    double tol = 1e-10; // stop once the objective drops by less than this
    bool standardize = true;
};

struct L1SelectorState {
    Vector theta;  // coefficients on the original column scale
    double alpha = 0.0;
    double step_constant = 0.0; // A: Lipschitz bound of the smooth part
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    IndexList selected; // { m : theta_m != 0 }
};

/// sum_i (y_i - theta . x_i)^2, the smooth part.
double lasso_smooth(const Matrix& x, const Vector& y, const Vector& theta);
/// Smooth part plus alpha * |theta|_1.
double lasso_objective(const Matrix& x, const Vector& y, const Vector& theta, double alpha);

/// Largest eigenvalue of 2 X^T X by power iteration.
double lipschitz_estimate(const Matrix& x, int iterations = 200);

/// Minimizes lasso_objective by iterative soft-thresholding with step 1/A,
/// A = 1.01 * lipschitz_estimate(X). With `standardize`, columns are centered
/// and scaled to unit variance first, and theta is mapped back afterwards
/// (the objective trace is then on the standardized problem).
L1SelectorState ista_fit(const Matrix& x, const Vector& y, double alpha,
                         const IstaOptions& opts = {});

/// Maps class labels to +1 for `positive` and -1 otherwise.
Vector signed_targets(const Labels& labels, int positive = 1);

/// Nonzero-theta indices; if fewer than `min_keep`, the `min_keep` largest
/// |theta| (ties to lower index), returned ascending.
IndexList l1_select(const L1SelectorState& state, Index min_keep);

// ---------------------------------------------------------------------------
// Stage 2: weighted locality-preserving discriminant projection.
// ---------------------------------------------------------------------------

struct Scatter {
    Matrix between; // S_B
    Matrix within;  // S_W
};

/// Unweighted between-class scatter (sum over classes of the outer product of
/// class mean minus global mean) and summed within-class scatter. `x` is
/// sample-major. Throws MissingClassError if a class in 0..C-1 has no rows.
Scatter scatter_matrices(const Matrix& x, const Labels& labels, int class_count);

struct Graph {
    Matrix affinity;  // W
    Vector degree;    // diag(D)
    Matrix laplacian; // D - W
};

inline constexpr double kSigmaFloor = 1e-6;

/// Symmetrized k-nearest-neighbour heat-kernel graph.
Graph build_graph(const Matrix& x, Index k_nn, double sigma);

/// Median of the pairwise Euclidean distances between rows.
double median_pairwise_distance(const Matrix& x);

struct WlpdpConfig {
    double gamma = 0.1;
    Index output_dim = 0; // 0 = min(4C, m-1), at least 1
    Index k_nn = 7;
    double sigma = 0.0;   // <= 0 means median pairwise distance
    double eigen_reg = 1e-6; // relative; S_W gets eigen_reg * tr(S_W)/m on its diagonal
    Index local_neighbors = 0; // > 0 restricts the scatter to this many samples nearest the mean

    void validate() const;
};

struct WlpdpModel {
    Matrix projection; // m x l, columns are the generalized eigenvectors
    Vector eta;        // S_W q = eta (S_B - gamma X^T L X) q; inf where the pencil vanishes
    Vector mu;         // 1 / eta, the values the columns are ranked by (descending)
    Index requested_dim = 0;

    Index input_dim() const { return projection.rows(); }
    Index output_dim() const { return projection.cols(); }
    Matrix project(const Matrix& x) const { return x * projection; }
};

struct WlpdpProblem {
    Matrix lhs; // regularized S_W
    Matrix rhs; // S_B - gamma X^T L X
};

/// Builds the two sides of the generalized eigenproblem.
WlpdpProblem wlpdp_problem(const Scatter& s, const Matrix& x, const Matrix& laplacian,
                           const WlpdpConfig& cfg);

/// Solves lhs q = eta rhs q as rhs q = mu lhs q (lhs is positive definite),
/// keeping the l eigenvectors with largest mu, i.e. smallest positive eta.
WlpdpModel solve_wlpdp(const WlpdpProblem& problem, Index output_dim);
WlpdpModel solve_wlpdp(const Scatter& s, const Matrix& x, const Matrix& laplacian,
                       const WlpdpConfig& cfg, int class_count);

/// Scatter, graph and eigen-solve for one sample-major subset.
WlpdpModel fit_wlpdp(const Matrix& x, const Labels& labels, int class_count,
                     const WlpdpConfig& cfg);

/// Default projection dimension for m features and C classes.
Index default_output_dim(Index m, int class_count);

// ---------------------------------------------------------------------------
// Bagging subsets.
// ---------------------------------------------------------------------------

struct SubsetSpec {
    IndexList samples;  // drawn with replacement
    IndexList features; // distinct, ascending
    std::uint64_t seed = 0;
};

/// ceil(ratio * n) guarded against representation error, at least 1.
Index ratio_count(double ratio, Index n);

/// T subsets; each is redrawn (up to 100 attempts) until it holds every class.
std::vector<SubsetSpec> make_subsets(const Labels& labels, int class_count, Index m,
                                     double delta_s, double delta_f, int count,
                                     std::uint64_t seed);

} // namespace dsaeem

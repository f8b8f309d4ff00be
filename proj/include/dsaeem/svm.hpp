#pragma once

#include "dsaeem/common.hpp"

namespace dsaeem {

enum class KernelType { linear, rbf };

struct SvmConfig {
    KernelType kernel = KernelType::rbf;
    double gamma = 0.0; // rbf width; <= 0 means 1 / feature count
    double c = 1.0;     // box constraint
    double tol = 1e-3;  // KKT tolerance on the maximal violating pair
    long max_iterations = 10'000'000;

    void validate() const;
};

/// One two-class machine: f(x) = sum_i coef_i K(sv_i, x) - rho, positive side
/// meaning `positive_class`.
struct BinarySvm {
    int positive_class = 1;
    Matrix support_vectors; // n_sv x m
    Vector coef;            // y_i * alpha_i
    Vector alpha;           // dual variables of the support vectors, in [0, C]
    double rho = 0.0;
    long iterations = 0;
    double kkt_gap = 0.0; // final max violation m(alpha) - M(alpha)
};

struct SvmModel {
    KernelType kernel = KernelType::rbf;
    double gamma = 1.0;
    double c = 1.0;
    int class_count = 2;
    Index input_dim = 0;
    std::vector<BinarySvm> machines; // one for binary problems, one per class otherwise

    Vector decision_values(const Matrix& x, std::size_t machine = 0) const;
    Labels predict(const Matrix& x) const;
};

double kernel_value(KernelType kernel, double gamma, const Eigen::Ref<const Vector>& a,
                    const Eigen::Ref<const Vector>& b);
Matrix kernel_matrix(KernelType kernel, double gamma, const Matrix& a, const Matrix& b);

/// Soft-margin SVM trained by SMO on the dual. Labels must be 0..C-1 with at
/// least two classes present; binary problems treat class 1 as positive.
SvmModel train_svm(const Matrix& x, const Labels& labels, int class_count, const SvmConfig& cfg);

/// Dual solve for targets y in {-1, +1}. Exposed for tests.
BinarySvm solve_smo(const Matrix& kernel, const Vector& y, double c, double tol,
                    long max_iterations);

double accuracy(const Labels& truth, const Labels& predicted);

} // namespace dsaeem

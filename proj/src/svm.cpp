#include "dsaeem/svm.hpp"

#include <cmath>
#include <limits>

namespace dsaeem {

void SvmConfig::validate() const
{
    if (!(c > 0.0))
        throw ConfigError("svm C must be positive");
    if (!(tol > 0.0))
        throw ConfigError("svm tolerance must be positive");
    if (max_iterations < 1)
        throw ConfigError("svm max_iterations must be positive");
}

double kernel_value(KernelType kernel, double gamma, const Eigen::Ref<const Vector>& a,
                    const Eigen::Ref<const Vector>& b)
{
    if (kernel == KernelType::linear)
        return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
}

Matrix kernel_matrix(KernelType kernel, double gamma, const Matrix& a, const Matrix& b)
{
    Matrix k = a * b.transpose();
    if (kernel == KernelType::linear)
        return k;
    for (Index j = 0; j < b.rows(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
    return k;
}

BinarySvm solve_smo(const Matrix& kernel, const Vector& y, double c, double tol,
                    long max_iterations)
{
    constexpr double tau = 1e-12;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const Index n = y.size();
    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0); // of 1/2 a'Qa - e'a
    const Vector diag = kernel.diagonal();

    auto upper = [&](Index t) { return alpha(t) >= c; };
    auto lower = [&](Index t) { return alpha(t) <= 0.0; };
    auto q = [&](Index a, Index b) { return y(a) * y(b) * kernel(a, b); };

    BinarySvm out;
    long iter = 0;
    double gap = 0.0;
    for (; iter < max_iterations; ++iter) {
        // Maximal violating i, then j by second-order gain.
        double gmax = -inf, gmax2 = -inf;
        Index i = -1, j = -1;
        for (Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (!upper(t) && -grad(t) >= gmax) {
                    gmax = -grad(t);
                    i = t;
                }
            } else if (!lower(t) && grad(t) >= gmax) {
                gmax = grad(t);
                i = t;
            }
        }
        double best = inf;
        for (Index t = 0; t < n && i >= 0; ++t) {
            if (y(t) > 0) {
                if (lower(t))
                    continue;
                const double diff = gmax + grad(t);
                gmax2 = std::max(gmax2, grad(t));
                if (diff > 0) {
                    const double quad = diag(i) + diag(t) - 2.0 * y(i) * q(i, t);
                    const double obj = -diff * diff / (quad > 0 ? quad : tau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            } else {
                if (upper(t))
                    continue;
                const double diff = gmax - grad(t);
                gmax2 = std::max(gmax2, -grad(t));
                if (diff > 0) {
                    const double quad = diag(i) + diag(t) + 2.0 * y(i) * q(i, t);
                    const double obj = -diff * diff / (quad > 0 ? quad : tau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        gap = gmax + gmax2;
        if (i < 0 || j < 0 || gap < tol)
            break;

        const double ai = alpha(i), aj = alpha(j);
        const double qij = q(i, j);
        if (y(i) != y(j)) {
            double quad = diag(i) + diag(j) + 2.0 * qij;
            if (quad <= 0)
                quad = tau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = ai - aj;
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0) {
                if (alpha(j) < 0) {
                    alpha(j) = 0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0) {
                alpha(i) = 0;
                alpha(j) = -diff;
            }
            if (diff > 0) {
                if (alpha(i) > c) {
                    alpha(i) = c;
                    alpha(j) = c - diff;
                }
            } else if (alpha(j) > c) {
                alpha(j) = c;
                alpha(i) = c + diff;
            }
        } else {
            double quad = diag(i) + diag(j) - 2.0 * qij;
            if (quad <= 0)
                quad = tau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = ai + aj;
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > c) {
                if (alpha(i) > c) {
                    alpha(i) = c;
                    alpha(j) = sum - c;
                }
            } else if (alpha(j) < 0) {
                alpha(j) = 0;
                alpha(i) = sum;
            }
            if (sum > c) {
                if (alpha(j) > c) {
                    alpha(j) = c;
                    alpha(i) = sum - c;
                }
            } else if (alpha(i) < 0) {
                alpha(i) = 0;
                alpha(j) = sum;
            }
        }
        const double di = alpha(i) - ai, dj = alpha(j) - aj;
        for (Index t = 0; t < n; ++t)
            grad(t) += q(t, i) * di + q(t, j) * dj;
    }

    // Threshold from free vectors, else the midpoint of the feasible interval.
    double ub = inf, lb = -inf, sum_free = 0.0;
    Index n_free = 0;
    for (Index t = 0; t < n; ++t) {
        const double yg = y(t) * grad(t);
        if (upper(t)) {
            if (y(t) < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y(t) > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    out.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    out.alpha = alpha;
    out.iterations = iter;
    out.kkt_gap = gap;
    return out;
}

SvmModel train_svm(const Matrix& x, const Labels& labels, int class_count, const SvmConfig& cfg)
{
    cfg.validate();
    if (static_cast<Index>(labels.size()) != x.rows())
        throw DataError("train_svm: label count does not match rows");
    std::vector<int> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
    for (int y : labels) {
        if (y < 0 || y >= class_count)
            throw DataError("train_svm: label out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    int present = 0;
    for (int n : counts)
        present += n > 0 ? 1 : 0;
    if (present < 2)
        throw DataError("train_svm: need samples from at least two classes");

    SvmModel model;
    model.kernel = cfg.kernel;
    model.gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(std::max<Index>(x.cols(), 1));
    model.c = cfg.c;
    model.class_count = class_count;
    model.input_dim = x.cols();

    const Matrix k = kernel_matrix(model.kernel, model.gamma, x, x);
    std::vector<int> positives;
    if (class_count == 2)
        positives = {1};
    else
        for (int c = 0; c < class_count; ++c)
            positives.push_back(c);

    for (int pos : positives) {
        Vector y(x.rows());
        for (Index i = 0; i < x.rows(); ++i)
            y(i) = labels[static_cast<std::size_t>(i)] == pos ? 1.0 : -1.0;
        BinarySvm full = solve_smo(k, y, cfg.c, cfg.tol, cfg.max_iterations);
        BinarySvm m;
        m.positive_class = pos;
        m.rho = full.rho;
        m.iterations = full.iterations;
        m.kkt_gap = full.kkt_gap;
        IndexList sv;
        for (Index i = 0; i < x.rows(); ++i)
            if (full.alpha(i) > 0.0)
                sv.push_back(i);
        m.support_vectors = take_rows(x, sv);
        m.alpha.resize(static_cast<Index>(sv.size()));
        m.coef.resize(static_cast<Index>(sv.size()));
        for (std::size_t s = 0; s < sv.size(); ++s) {
            m.alpha(static_cast<Index>(s)) = full.alpha(sv[s]);
            m.coef(static_cast<Index>(s)) = y(sv[s]) * full.alpha(sv[s]);
        }
        model.machines.push_back(std::move(m));
    }
    return model;
}

Vector SvmModel::decision_values(const Matrix& x, std::size_t machine) const
{
    if (x.cols() != input_dim)
        throw DataError("svm expects " + std::to_string(input_dim) + " features, got " +
                        std::to_string(x.cols()));
    const auto& m = machines.at(machine);
    if (m.support_vectors.rows() == 0)
        return Vector::Constant(x.rows(), -m.rho);
    const Matrix k = kernel_matrix(kernel, gamma, x, m.support_vectors);
    return (k * m.coef).array() - m.rho;
}

Labels SvmModel::predict(const Matrix& x) const
{
    Labels out(static_cast<std::size_t>(x.rows()));
    if (machines.size() == 1) {
        const Vector f = decision_values(x, 0);
        for (Index i = 0; i < x.rows(); ++i)
            out[static_cast<std::size_t>(i)] = f(i) > 0.0 ? machines[0].positive_class : 0;
        return out;
    }
    Matrix scores(x.rows(), static_cast<Index>(machines.size()));
    for (std::size_t c = 0; c < machines.size(); ++c)
        scores.col(static_cast<Index>(c)) = decision_values(x, c);
    for (Index i = 0; i < x.rows(); ++i) {
        Index best = 0;
        scores.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = machines[static_cast<std::size_t>(best)].positive_class;
    }
    return out;
}

double accuracy(const Labels& truth, const Labels& predicted)
{
    if (truth.size() != predicted.size() || truth.empty())
        throw DataError("accuracy: label vectors must be non-empty and of equal length");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        hits += truth[i] == predicted[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace dsaeem

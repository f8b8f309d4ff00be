#include "dsaeem/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dsaeem {

Vector soft_threshold(const Vector& z, double t)
{
    if (t < 0.0)
        throw ConfigError("soft threshold must be non-negative");
    Vector out(z.size());
    for (Index i = 0; i < z.size(); ++i) {
        const double mag = std::abs(z(i)) - t;
        out(i) = mag > 0.0 ? std::copysign(mag, z(i)) : 0.0;
    }
    return out;
}

double lasso_smooth(const Matrix& x, const Vector& y, const Vector& theta)
{
    return (y - x * theta).squaredNorm();
}

double lasso_objective(const Matrix& x, const Vector& y, const Vector& theta, double alpha)
{
    return lasso_smooth(x, y, theta) + alpha * theta.lpNorm<1>();
}

double lipschitz_estimate(const Matrix& x, int iterations)
{
    const Index m = x.cols();
    if (m == 0 || x.rows() == 0)
        return 0.0;
    const Matrix gram = 2.0 * x.transpose() * x;
    Vector v(m);
    for (Index j = 0; j < m; ++j)
        v(j) = 1.0 + 1e-3 * static_cast<double>(j);
    v.normalize();
    double value = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = gram * v;
        const double norm = w.norm();
        if (norm == 0.0)
            return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (std::abs(next - value) <= 1e-12 * std::abs(next)) {
            value = next;
            break;
        }
        value = next;
    }
    return value;
}

L1SelectorState ista_fit(const Matrix& x_in, const Vector& y, double alpha, const IstaOptions& opts)
{
    if (!(alpha >= 0.0))
        throw ConfigError("alpha must be non-negative");
    if (x_in.rows() != y.size())
        throw DataError("ista_fit: " + std::to_string(x_in.rows()) + " rows vs " +
                        std::to_string(y.size()) + " targets");
    if (!x_in.allFinite() || !y.allFinite())
        throw DataError("ista_fit: non-finite input");
    if (opts.max_iterations < 1)
        throw ConfigError("ista max_iterations must be positive");

    const Index m = x_in.cols();
    Matrix x = x_in;
    Vector scale = Vector::Ones(m);
    if (opts.standardize) {
        for (Index j = 0; j < m; ++j) {
            const double mean = x.col(j).mean();
            x.col(j).array() -= mean;
            const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows()));
            if (sd > 1e-12) {
                x.col(j) /= sd;
                scale(j) = sd;
            } else {
                x.col(j).setZero();
                scale(j) = 0.0;
            }
        }
    }

    L1SelectorState st;
    st.alpha = alpha;
    Vector theta = Vector::Zero(m);
    double a = 1.01 * lipschitz_estimate(x);
    double obj = lasso_objective(x, y, theta, alpha);
    st.objective_trace.push_back(obj);
    if (a > 0.0) {
        for (int it = 0; it < opts.max_iterations; ++it) {
            const Vector grad = -2.0 * x.transpose() * (y - x * theta);
            Vector next = soft_threshold(theta - grad / a, alpha / a);
            double next_obj = lasso_objective(x, y, next, alpha);
            // An underestimated Lipschitz bound shows up as a rising objective.
            while (next_obj > obj && a < 1e300) {
                a *= 2.0;
                next = soft_threshold(theta - grad / a, alpha / a);
                next_obj = lasso_objective(x, y, next, alpha);
            }
            const double drop = obj - next_obj;
            theta = std::move(next);
            obj = next_obj;
            st.objective_trace.push_back(obj);
            st.iterations = it + 1;
            if (drop < opts.tol) {
                st.converged = true;
                break;
            }
        }
    } else {
        st.converged = true;
    }
    st.step_constant = a > 0.0 ? a : 1.0;

    st.theta = Vector::Zero(m);
    for (Index j = 0; j < m; ++j)
        if (scale(j) > 0.0 && theta(j) != 0.0)
            st.theta(j) = theta(j) / scale(j);
    for (Index j = 0; j < m; ++j)
        if (st.theta(j) != 0.0)
            st.selected.push_back(j);
    return st;
}

Vector signed_targets(const Labels& labels, int positive)
{
    Vector y(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        y(static_cast<Index>(i)) = labels[i] == positive ? 1.0 : -1.0;
    return y;
}

IndexList l1_select(const L1SelectorState& state, Index min_keep)
{
    const Index m = state.theta.size();
    IndexList nonzero;
    for (Index j = 0; j < m; ++j)
        if (state.theta(j) != 0.0)
            nonzero.push_back(j);
    if (static_cast<Index>(nonzero.size()) >= min_keep) {
        if (nonzero.empty())
            throw DataError("L1 selection is empty; at least one feature is required");
        return nonzero;
    }
    IndexList order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(state.theta(a)) > std::abs(state.theta(b));
    });
    IndexList out(order.begin(), order.begin() + std::min(min_keep, m));
    std::sort(out.begin(), out.end());
    return out;
}

Scatter scatter_matrices(const Matrix& x, const Labels& labels, int class_count)
{
    if (static_cast<Index>(labels.size()) != x.rows())
        throw DataError("scatter_matrices: label count does not match rows");
    const Index m = x.cols();
    std::vector<Index> counts(static_cast<std::size_t>(class_count), 0);
    Matrix sums = Matrix::Zero(class_count, m);
    for (Index i = 0; i < x.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        if (c < 0 || c >= class_count)
            throw DataError("scatter_matrices: label out of range");
        sums.row(c) += x.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < class_count; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw MissingClassError("class " + std::to_string(c) + " absent from the subset");

    const Vector global = x.colwise().mean().transpose();
    Scatter s;
    s.between = Matrix::Zero(m, m);
    s.within = Matrix::Zero(m, m);
    Matrix means(class_count, m);
    for (int c = 0; c < class_count; ++c) {
        means.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        const Vector delta = means.row(c).transpose() - global;
        s.between += delta * delta.transpose();
    }
    for (Index i = 0; i < x.rows(); ++i) {
        const Vector delta = (x.row(i) - means.row(labels[static_cast<std::size_t>(i)])).transpose();
        s.within += delta * delta.transpose();
    }
    return s;
}

namespace {

Matrix squared_distances(const Matrix& x)
{
    const Index n = x.rows();
    Matrix d2 = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i)
            d2(i, j) = d2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    return d2;
}

} // namespace

Graph build_graph(const Matrix& x, Index k_nn, double sigma)
{
    const Index n = x.rows();
    if (k_nn < 1 || k_nn >= n)
        throw ConfigError("k_nn must lie in 1.." + std::to_string(n - 1) + ", got " +
                          std::to_string(k_nn));
    sigma = std::max(sigma, kSigmaFloor);
    const Matrix d2 = squared_distances(x);

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    for (Index i = 0; i < n; ++i) {
        IndexList order;
        order.reserve(static_cast<std::size_t>(n - 1));
        for (Index j = 0; j < n; ++j)
            if (j != i)
                order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k_nn, order.end(),
                          [&](Index a, Index b) {
                              return d2(i, a) < d2(i, b) || (d2(i, a) == d2(i, b) && a < b);
                          });
        for (Index t = 0; t < k_nn; ++t) {
            adj(i, order[static_cast<std::size_t>(t)]) = true;
            adj(order[static_cast<std::size_t>(t)], i) = true;
        }
    }

    Graph g;
    g.affinity = Matrix::Zero(n, n);
    const double denom = 2.0 * sigma * sigma;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (i != j && adj(i, j))
                g.affinity(i, j) = std::exp(-d2(i, j) / denom);
    g.degree = g.affinity.rowwise().sum();
    g.laplacian = -g.affinity;
    g.laplacian.diagonal() += g.degree;
    return g;
}

double median_pairwise_distance(const Matrix& x)
{
    const Index n = x.rows();
    if (n < 2)
        return 0.0;
    const Matrix d2 = squared_distances(x);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i)
            dist.push_back(std::sqrt(d2(i, j)));
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    if (dist.size() % 2 == 1)
        return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(dist.begin(), mid);
    return 0.5 * (lower + upper);
}

void WlpdpConfig::validate() const
{
    if (!(gamma >= 0.0))
        throw ConfigError("gamma must be non-negative");
    if (output_dim < 0)
        throw ConfigError("output_dim must be non-negative");
    if (k_nn < 1)
        throw ConfigError("k_nn must be at least 1");
    if (!(eigen_reg > 0.0))
        throw ConfigError("eigen_reg must be positive");
    if (local_neighbors < 0)
        throw ConfigError("local_neighbors must be non-negative");
}

Index default_output_dim(Index m, int class_count)
{
    return std::max<Index>(1, std::min<Index>(4 * class_count, m - 1));
}

WlpdpProblem wlpdp_problem(const Scatter& s, const Matrix& x, const Matrix& laplacian,
                           const WlpdpConfig& cfg)
{
    const Index m = s.within.rows();
    if (s.between.rows() != m || x.cols() != m || laplacian.rows() != x.rows() ||
        laplacian.cols() != x.rows())
        throw DataError("wlpdp: matrix dimensions disagree");
    WlpdpProblem p;
    const double trace = s.within.trace();
    const double eps = trace > 0.0 ? cfg.eigen_reg * trace / static_cast<double>(m)
                                   : cfg.eigen_reg;
    p.lhs = s.within;
    p.lhs.diagonal().array() += eps;
    p.rhs = s.between;
    if (cfg.gamma > 0.0)
        p.rhs -= cfg.gamma * (x.transpose() * laplacian * x);
    p.lhs = 0.5 * (p.lhs + p.lhs.transpose()).eval();
    p.rhs = 0.5 * (p.rhs + p.rhs.transpose()).eval();
    return p;
}

WlpdpModel solve_wlpdp(const WlpdpProblem& problem, Index output_dim)
{
    const Index m = problem.lhs.rows();
    if (m < 1)
        throw DataError("wlpdp: empty problem");
    Eigen::LLT<Matrix> chol(problem.lhs);
    if (chol.info() != Eigen::Success)
        throw NumericalError("wlpdp: regularized within-class scatter is not positive definite");

    // rhs q = mu lhs q  <=>  (L^-1 rhs L^-T) y = mu y with q = L^-T y.
    Matrix reduced = chol.matrixL().solve(problem.rhs);
    reduced = chol.matrixL().solve(reduced.transpose()).transpose();
    reduced = 0.5 * (reduced + reduced.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
    if (eig.info() != Eigen::Success)
        throw NumericalError("wlpdp: symmetric eigensolver failed");

    WlpdpModel model;
    model.requested_dim = output_dim;
    const Index l = std::clamp<Index>(output_dim, 1, m);
    model.projection.resize(m, l);
    model.mu.resize(l);
    model.eta.resize(l);
    for (Index c = 0; c < l; ++c) {
        const Index src = m - 1 - c; // eigenvalues come ascending
        Vector q = chol.matrixU().solve(eig.eigenvectors().col(src));
        Index arg = 0;
        q.cwiseAbs().maxCoeff(&arg);
        if (q(arg) < 0.0)
            q = -q;
        model.projection.col(c) = q;
        model.mu(c) = eig.eigenvalues()(src);
        model.eta(c) = model.mu(c) != 0.0 ? 1.0 / model.mu(c)
                                          : std::numeric_limits<double>::infinity();
    }
    return model;
}

WlpdpModel solve_wlpdp(const Scatter& s, const Matrix& x, const Matrix& laplacian,
                       const WlpdpConfig& cfg, int class_count)
{
    cfg.validate();
    const Index m = s.within.rows();
    const Index l = cfg.output_dim > 0 ? cfg.output_dim : default_output_dim(m, class_count);
    return solve_wlpdp(wlpdp_problem(s, x, laplacian, cfg), l);
}

WlpdpModel fit_wlpdp(const Matrix& x_in, const Labels& labels_in, int class_count,
                     const WlpdpConfig& cfg)
{
    cfg.validate();
    Matrix x = x_in;
    Labels labels = labels_in;
    if (cfg.local_neighbors > 0 && cfg.local_neighbors < x.rows()) {
        const Vector center = x.colwise().mean().transpose();
        const Vector dist = (x.rowwise() - center.transpose()).rowwise().squaredNorm();
        IndexList order(static_cast<std::size_t>(x.rows()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return dist(a) < dist(b); });
        order.resize(static_cast<std::size_t>(cfg.local_neighbors));
        std::sort(order.begin(), order.end());
        x = take_rows(x_in, order);
        labels = take(labels_in, order);
    }
    const Scatter s = scatter_matrices(x, labels, class_count);
    Matrix laplacian = Matrix::Zero(x.rows(), x.rows());
    if (cfg.gamma > 0.0 && x.rows() > 1) {
        const double sigma = cfg.sigma > 0.0 ? cfg.sigma : median_pairwise_distance(x);
        const Index k = std::min<Index>(cfg.k_nn, x.rows() - 1);
        laplacian = build_graph(x, k, sigma).laplacian;
    }
    return solve_wlpdp(s, x, laplacian, cfg, class_count);
}

Index ratio_count(double ratio, Index n)
{
    const auto c = static_cast<Index>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    return std::clamp<Index>(c, 1, std::max<Index>(n, 1));
}

std::vector<SubsetSpec> make_subsets(const Labels& labels, int class_count, Index m,
                                     double delta_s, double delta_f, int count,
                                     std::uint64_t seed)
{
    if (count < 1)
        throw ConfigError("subset count must be at least 1");
    if (!(delta_s > 0.0 && delta_s <= 1.0) || !(delta_f > 0.0 && delta_f <= 1.0))
        throw ConfigError("sampling ratios must lie in (0, 1]");
    const auto n = static_cast<Index>(labels.size());
    if (n < 1 || m < 1)
        throw DataError("make_subsets: empty data");
    const Index n_s = ratio_count(delta_s, n);
    const Index n_f = std::min(ratio_count(delta_f, m), m);

    std::vector<SubsetSpec> specs;
    for (int t = 0; t < count; ++t) {
        SubsetSpec spec;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        Rng rng(spec.seed);
        bool covered = false;
        for (int attempt = 0; attempt < 100 && !covered; ++attempt) {
            spec.samples.assign(static_cast<std::size_t>(n_s), 0);
            std::vector<bool> seen(static_cast<std::size_t>(class_count), false);
            for (auto& s : spec.samples) {
                s = static_cast<Index>(rng.below(static_cast<std::size_t>(n)));
                seen[static_cast<std::size_t>(labels[static_cast<std::size_t>(s)])] = true;
            }
            covered = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
        }
        if (!covered)
            throw DataError("could not draw a subset containing every class in 100 attempts");
        IndexList pool(static_cast<std::size_t>(m));
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index i = 0; i < n_f; ++i) {
            const auto j = static_cast<Index>(
                static_cast<std::size_t>(i) + rng.below(static_cast<std::size_t>(m - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        spec.features.assign(pool.begin(), pool.begin() + n_f);
        std::sort(spec.features.begin(), spec.features.end());
        specs.push_back(std::move(spec));
    }
    return specs;
}

} // namespace dsaeem

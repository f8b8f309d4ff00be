#pragma once

// Shared fixtures and independent reference implementations. Nothing here
// calls the library routine it is used to check.

#include "dsaeem/common.hpp"
#include "dsaeem/data_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include <unistd.h>

#ifndef DSAEEM_DATA_DIR
#define DSAEEM_DATA_DIR "data"
#endif

namespace support {

using dsaeem::Index;
using dsaeem::Labels;
using dsaeem::Matrix;
using dsaeem::Vector;

inline std::string data_path(const std::string& name)
{
    return std::string(DSAEEM_DATA_DIR) + "/" + name;
}

inline dsaeem::Dataset load(const std::string& name)
{
    const std::string file = name == "pid" ? "pima" : name;
    return dsaeem::load_dataset(data_path(file + ".csv"),
                                dsaeem::Schema::from_file(data_path(file + ".schema.json")));
}

/// Temporary directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("dsaeem_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    void write(const std::string& name, const std::string& content) const
    {
        std::ofstream(path / name) << content;
    }
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Matrix with iid uniform(lo, hi) entries from std::mt19937 (not the library Rng).
inline Matrix uniform(Index r, Index c, std::mt19937& g, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i)
            m(i, j) = u(g);
    return m;
}

/// Two Gaussian blobs in `dims` dimensions, centres at -sep/2 and +sep/2 on
/// every axis; labels alternate 0, 1.
inline dsaeem::Dataset blobs(Index n, Index dims, double sep, unsigned seed, double sd = 1.0)
{
    std::mt19937 g(seed);
    std::normal_distribution<double> z(0.0, sd);
    dsaeem::Dataset ds;
    ds.features.resize(n, dims);
    ds.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        ds.labels[static_cast<std::size_t>(i)] = y;
        for (Index k = 0; k < dims; ++k)
            ds.features(i, k) = (y == 1 ? sep / 2 : -sep / 2) + z(g);
    }
    ds.class_count = 2;
    ds.name = "blobs";
    return ds;
}

/// Central finite differences of f at x.
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, Vector x,
                               double h = 1e-6)
{
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double keep = x(i);
        x(i) = keep + h;
        const double up = f(x);
        x(i) = keep - h;
        const double down = f(x);
        x(i) = keep;
        g(i) = (up - down) / (2 * h);
    }
    return g;
}

/// Cyclic coordinate descent for sum (y - X theta)^2 + alpha |theta|_1.
inline Vector coordinate_descent_lasso(const Matrix& x, const Vector& y, double alpha,
                                       int sweeps = 200000, double tol = 1e-15)
{
    Vector theta = Vector::Zero(x.cols());
    Vector r = y;
    for (int s = 0; s < sweeps; ++s) {
        double change = 0.0;
        for (Index j = 0; j < x.cols(); ++j) {
            const double sq = x.col(j).squaredNorm();
            if (sq == 0.0)
                continue;
            const double rho = x.col(j).dot(r) + sq * theta(j);
            const double z = 2.0 * rho;
            double next = 0.0;
            if (z > alpha)
                next = (z - alpha) / (2.0 * sq);
            else if (z < -alpha)
                next = (z + alpha) / (2.0 * sq);
            const double d = next - theta(j);
            if (d != 0.0) {
                r -= d * x.col(j);
                theta(j) = next;
                change = std::max(change, std::abs(d));
            }
        }
        if (change < tol)
            break;
    }
    return theta;
}

inline double lasso_value(const Matrix& x, const Vector& y, const Vector& theta, double alpha)
{
    return (y - x * theta).squaredNorm() + alpha * theta.cwiseAbs().sum();
}

/// Best tr(G^T E E^T G) over every d-row selection of the row-centred E,
/// enumerated explicitly.
inline double best_selection_trace(const Matrix& e, Index d)
{
    Matrix c = e.colwise() - e.rowwise().mean();
    const Index r = c.rows();
    std::vector<bool> pick(static_cast<std::size_t>(r), false);
    std::fill(pick.begin(), pick.begin() + d, true);
    double best = -1.0;
    do {
        Matrix g = Matrix::Zero(r, d);
        Index col = 0;
        for (Index i = 0; i < r; ++i)
            if (pick[static_cast<std::size_t>(i)])
                g(i, col++) = 1.0;
        best = std::max(best, (g.transpose() * c * c.transpose() * g).trace());
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

/// Spectral norm of a symmetric matrix.
inline double sym_norm(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Real eigenvalues of lhs^{-1} rhs from a general (non-symmetric) solver.
inline Vector general_eigenvalues(const Matrix& lhs, const Matrix& rhs)
{
    const Matrix a = lhs.fullPivLu().solve(rhs);
    Eigen::EigenSolver<Matrix> es(a, false);
    Vector v = es.eigenvalues().real();
    std::sort(v.data(), v.data() + v.size(), std::greater<>());
    return v;
}

/// Hand recomputation of the five scores; NaN marks undefined.
struct HandScores {
    double acc, prec, sens, spec, f1;
};

inline HandScores hand_scores(long tp, long fp, long fn, long tn)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    HandScores h;
    h.acc = double(tp + tn) / double(tp + fp + fn + tn);
    h.prec = tp + fp > 0 ? double(tp) / double(tp + fp) : nan;
    h.sens = tp + fn > 0 ? double(tp) / double(tp + fn) : nan;
    h.spec = tn + fp > 0 ? double(tn) / double(tn + fp) : nan;
    h.f1 = (std::isnan(h.prec) || std::isnan(h.sens) || h.prec + h.sens == 0.0)
               ? nan
               : 2 * h.prec * h.sens / (h.prec + h.sens);
    return h;
}

} // namespace support

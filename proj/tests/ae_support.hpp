#pragma once

#include "support.hpp"

#include "dsaeem/sparse_ae.hpp"

namespace support {

inline Vector pack(const dsaeem::AEWeights& w)
{
    Vector v(w.W1.size() + w.b1.size() + w.W2.size() + w.b2.size());
    Index at = 0;
    v.segment(at, w.W1.size()) = Eigen::Map<const Vector>(w.W1.data(), w.W1.size());
    at += w.W1.size();
    v.segment(at, w.b1.size()) = w.b1;
    at += w.b1.size();
    v.segment(at, w.W2.size()) = Eigen::Map<const Vector>(w.W2.data(), w.W2.size());
    at += w.W2.size();
    v.segment(at, w.b2.size()) = w.b2;
    return v;
}

inline dsaeem::AEWeights unpack(const Vector& v, Index in, Index hidden)
{
    dsaeem::AEWeights w;
    Index at = 0;
    w.W1 = Eigen::Map<const Matrix>(v.data() + at, hidden, in);
    at += hidden * in;
    w.b1 = v.segment(at, hidden);
    at += hidden;
    w.W2 = Eigen::Map<const Matrix>(v.data() + at, in, hidden);
    at += in * hidden;
    w.b2 = v.segment(at, in);
    return w;
}

/// Random unit with weights and biases uniform in [-1, 1].
inline dsaeem::AEWeights random_unit(Index in, Index hidden, std::mt19937& g)
{
    dsaeem::AEWeights w;
    w.W1 = uniform(hidden, in, g);
    w.b1 = uniform(hidden, 1, g);
    w.W2 = uniform(in, hidden, g);
    w.b2 = uniform(in, 1, g);
    return w;
}

/// Loss of one unit evaluated term by term with explicit loops.
struct HandLoss {
    double reconstruction, weight_decay, kl, group;
};

inline HandLoss hand_loss(const dsaeem::AEWeights& w, const Matrix& x, double lambda,
                          double beta, double rho, const dsaeem::GroupPartition* groups)
{
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const Index n = x.cols(), in = x.rows(), hid = w.W1.rows();
    Matrix h(hid, n), out(in, n);
    for (Index s = 0; s < n; ++s) {
        for (Index j = 0; j < hid; ++j) {
            double z = w.b1(j);
            for (Index i = 0; i < in; ++i)
                z += w.W1(j, i) * x(i, s);
            h(j, s) = sig(z);
        }
        for (Index i = 0; i < in; ++i) {
            double z = w.b2(i);
            for (Index j = 0; j < hid; ++j)
                z += w.W2(i, j) * h(j, s);
            out(i, s) = sig(z);
        }
    }
    HandLoss r{0, 0, 0, 0};
    for (Index s = 0; s < n; ++s)
        for (Index i = 0; i < in; ++i)
            r.reconstruction += (x(i, s) - out(i, s)) * (x(i, s) - out(i, s));
    r.reconstruction /= double(n);
    double sq = 0;
    for (Index k = 0; k < w.W1.size(); ++k)
        sq += w.W1.data()[k] * w.W1.data()[k];
    for (Index k = 0; k < w.W2.size(); ++k)
        sq += w.W2.data()[k] * w.W2.data()[k];
    r.weight_decay = lambda * sq;
    for (Index j = 0; j < hid; ++j) {
        double mean = 0;
        for (Index s = 0; s < n; ++s)
            mean += h(j, s);
        mean /= double(n);
        r.kl += rho * std::log(rho / mean) + (1 - rho) * std::log((1 - rho) / (1 - mean));
    }
    r.kl *= beta;
    if (groups) {
        double l1 = 0;
        for (Index s = 0; s < n; ++s)
            for (Index j = 0; j < hid; ++j)
                l1 += std::abs(h(j, s));
        r.group = beta * l1 / double(n);
    }
    return r;
}

} // namespace support

#pragma once

#include "dsaeem/common.hpp"

namespace dsaeem {

/// Disjoint split of the hidden units into the two sparsity groups.
struct GroupPartition {
    IndexList first;
    IndexList second;

    /// Everything in `first`, nothing in `second`.
    static GroupPartition single(Index hidden);
    /// Units [0, split) in `first`, the rest in `second`.
    static GroupPartition contiguous(Index hidden, Index split);

    /// Throws ConfigError unless the two sets partition 0..hidden-1.
    void validate(Index hidden) const;
};

struct AEConfig {
    Index input_dim = 0;
    Index hidden_dim = 0;
    double lambda = 1e-5; // weight decay
    double beta = 1.0;    // sparsity weight
    double rho = 0.05;    // target mean activation
    GroupPartition groups;
    bool group_sparsity = false; // off for the first unit of a stack
    int max_iterations = 400;
    double learn_rate = 1.0;
    double momentum = 0.9;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Encoder W1 (hidden x input), b1; decoder W2 (input x hidden), b2.
struct AEWeights {
    Matrix W1;
    Vector b1;
    Matrix W2;
    Vector b2;

    Index input_dim() const { return W1.cols(); }
    Index hidden_dim() const { return W1.rows(); }
    bool operator==(const AEWeights& o) const
    {
        return W1 == o.W1 && b1 == o.b1 && W2 == o.W2 && b2 == o.b2;
    }
};

using AEGradient = AEWeights;

Matrix sigmoid(const Matrix& z);

/// X is features x samples. Returns the hidden activations, hidden x samples.
Matrix encode(const AEWeights& w, const Matrix& x);
Matrix decode(const AEWeights& w, const Matrix& h);

/// Lower clamp for mean activations before taking logs.
inline constexpr double kRhoHatEpsilon = 1e-8;

/// Sum over units of KL(rho || rho_hat_j). Values of rho_hat outside
/// [eps, 1-eps] are clamped and reported through `clamped`.
double kl_sparsity(double rho, const Vector& rho_hat, bool* clamped = nullptr);

/// Entrywise L1 of the two row groups of H, summed.
double group_sparsity(const Matrix& h, const GroupPartition& groups);

struct LossTerms {
    double reconstruction = 0; // mean over samples of squared error
    double weight_decay = 0;   // lambda * (|W1|_F^2 + |W2|_F^2)
    double kl = 0;             // beta * sum KL
    double group = 0;          // beta * group_sparsity / N

    double total() const { return reconstruction + weight_decay + kl + group; }
};

LossTerms ae_loss_terms(const AEWeights& w, const Matrix& x, const AEConfig& cfg);
double ae_loss(const AEWeights& w, const Matrix& x, const AEConfig& cfg);
AEGradient ae_gradient(const AEWeights& w, const Matrix& x, const AEConfig& cfg);

/// Loss and gradient from one forward/backward pass.
std::pair<double, AEGradient> ae_loss_and_gradient(const AEWeights& w, const Matrix& x,
                                                  const AEConfig& cfg);

/// Glorot-uniform weights, zero biases.
AEWeights init_weights(Index input_dim, Index hidden_dim, std::uint64_t seed);

struct TrainTrace {
    std::vector<double> losses; // initial loss, then one entry per accepted step
    int rejected_steps = 0;
};

/// Full-batch gradient descent with momentum. A step that raises the loss is
/// rejected, the velocity reset and the rate halved.
AEWeights train_autoencoder(const Matrix& x, const AEConfig& cfg, TrainTrace* trace = nullptr);

} // namespace dsaeem

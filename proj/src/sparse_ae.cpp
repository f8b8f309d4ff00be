#include "dsaeem/sparse_ae.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dsaeem {

GroupPartition GroupPartition::single(Index hidden) { return contiguous(hidden, hidden); }

GroupPartition GroupPartition::contiguous(Index hidden, Index split)
{
    GroupPartition g;
    for (Index j = 0; j < hidden; ++j)
        (j < split ? g.first : g.second).push_back(j);
    return g;
}

void GroupPartition::validate(Index hidden) const
{
    std::vector<int> hits(static_cast<std::size_t>(hidden), 0);
    for (const auto* group : {&first, &second})
        for (Index j : *group) {
            if (j < 0 || j >= hidden)
                throw ConfigError("group index " + std::to_string(j) + " outside 0.." +
                                  std::to_string(hidden - 1));
            ++hits[static_cast<std::size_t>(j)];
        }
    for (Index j = 0; j < hidden; ++j) {
        if (hits[static_cast<std::size_t>(j)] == 0)
            throw ConfigError("hidden unit " + std::to_string(j) + " is in neither group");
        if (hits[static_cast<std::size_t>(j)] > 1)
            throw ConfigError("hidden unit " + std::to_string(j) + " is in both groups");
    }
}

void AEConfig::validate() const
{
    if (input_dim < 1 || hidden_dim < 1)
        throw ConfigError("autoencoder dimensions must be positive");
    if (!(lambda >= 0.0))
        throw ConfigError("lambda must be non-negative");
    if (!(beta >= 0.0))
        throw ConfigError("beta must be non-negative");
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("rho must lie in (0, 1), got " + std::to_string(rho));
    if (max_iterations < 0)
        throw ConfigError("max_iterations must be non-negative");
    if (!(learn_rate > 0.0))
        throw ConfigError("learn_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw ConfigError("momentum must lie in [0, 1)");
    groups.validate(hidden_dim);
}

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

namespace {

void check_input(const AEWeights& w, const Matrix& x)
{
    if (x.rows() != w.input_dim()) {
        std::ostringstream os;
        os << "autoencoder expects " << w.input_dim() << " input rows, got " << x.rows();
        throw DataError(os.str());
    }
    if (w.W2.rows() != w.input_dim() || w.W2.cols() != w.hidden_dim() ||
        w.b1.size() != w.hidden_dim() || w.b2.size() != w.input_dim())
        throw DataError("autoencoder weight shapes are inconsistent");
}

struct Forward {
    Matrix h;
    Matrix xr;
    Vector rho_hat;
};

Forward forward(const AEWeights& w, const Matrix& x)
{
    Forward f;
    f.h = sigmoid((w.W1 * x).colwise() + w.b1);
    f.xr = sigmoid((w.W2 * f.h).colwise() + w.b2);
    f.rho_hat = f.h.rowwise().mean();
    return f;
}

LossTerms terms_from(const Forward& f, const AEWeights& w, const Matrix& x, const AEConfig& cfg)
{
    const auto n = static_cast<double>(x.cols());
    LossTerms t;
    t.reconstruction = (f.xr - x).squaredNorm() / n;
    t.weight_decay = cfg.lambda * (w.W1.squaredNorm() + w.W2.squaredNorm());
    t.kl = cfg.beta * kl_sparsity(cfg.rho, f.rho_hat);
    if (cfg.group_sparsity)
        t.group = cfg.beta * group_sparsity(f.h, cfg.groups) / n;
    return t;
}

} // namespace

Matrix encode(const AEWeights& w, const Matrix& x)
{
    check_input(w, x);
    return sigmoid((w.W1 * x).colwise() + w.b1);
}

Matrix decode(const AEWeights& w, const Matrix& h)
{
    if (h.rows() != w.hidden_dim())
        throw DataError("decoder expects " + std::to_string(w.hidden_dim()) +
                        " hidden rows, got " + std::to_string(h.rows()));
    return sigmoid((w.W2 * h).colwise() + w.b2);
}

double kl_sparsity(double rho, const Vector& rho_hat, bool* clamped)
{
    bool any = false;
    double sum = 0.0;
    for (Index j = 0; j < rho_hat.size(); ++j) {
        double r = rho_hat(j);
        if (!(r >= kRhoHatEpsilon && r <= 1.0 - kRhoHatEpsilon)) {
            r = std::clamp(std::isfinite(r) ? r : 0.5, kRhoHatEpsilon, 1.0 - kRhoHatEpsilon);
            any = true;
        }
        sum += rho * std::log(rho / r) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - r));
    }
    if (clamped)
        *clamped = any;
    return sum;
}

double group_sparsity(const Matrix& h, const GroupPartition& groups)
{
    groups.validate(h.rows());
    double total = 0.0;
    for (const auto* g : {&groups.first, &groups.second}) {
        double part = 0.0;
        for (Index r : *g)
            part += h.row(r).cwiseAbs().sum();
        total += part;
    }
    return total;
}

LossTerms ae_loss_terms(const AEWeights& w, const Matrix& x, const AEConfig& cfg)
{
    check_input(w, x);
    return terms_from(forward(w, x), w, x, cfg);
}

double ae_loss(const AEWeights& w, const Matrix& x, const AEConfig& cfg)
{
    return ae_loss_terms(w, x, cfg).total();
}

std::pair<double, AEGradient> ae_loss_and_gradient(const AEWeights& w, const Matrix& x,
                                                  const AEConfig& cfg)
{
    check_input(w, x);
    const auto f = forward(w, x);
    const double loss = terms_from(f, w, x, cfg).total();
    const auto n = static_cast<double>(x.cols());

    // Output layer: d/dX' of the mean squared error, through the sigmoid.
    const Matrix delta2 =
        ((2.0 / n) * (f.xr - x).array() * f.xr.array() * (1.0 - f.xr.array())).matrix();

    AEGradient g;
    g.W2 = delta2 * f.h.transpose() + 2.0 * cfg.lambda * w.W2;
    g.b2 = delta2.rowwise().sum();

    Matrix dh = w.W2.transpose() * delta2;
    // KL term: each activation enters rho_hat_j with weight 1/N.
    Vector dkl(f.rho_hat.size());
    for (Index j = 0; j < dkl.size(); ++j) {
        const double r = std::clamp(f.rho_hat(j), kRhoHatEpsilon, 1.0 - kRhoHatEpsilon);
        dkl(j) = cfg.beta * (-cfg.rho / r + (1.0 - cfg.rho) / (1.0 - r)) / n;
    }
    dh.colwise() += dkl;
    if (cfg.group_sparsity) {
        // Subgradient of |h| with sign(0) = 0.
        dh += (cfg.beta / n) * f.h.unaryExpr([](double v) {
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        });
    }
    const Matrix delta1 = (dh.array() * f.h.array() * (1.0 - f.h.array())).matrix();
    g.W1 = delta1 * x.transpose() + 2.0 * cfg.lambda * w.W1;
    g.b1 = delta1.rowwise().sum();
    return {loss, std::move(g)};
}

AEGradient ae_gradient(const AEWeights& w, const Matrix& x, const AEConfig& cfg)
{
    return ae_loss_and_gradient(w, x, cfg).second;
}

AEWeights init_weights(Index input_dim, Index hidden_dim, std::uint64_t seed)
{
    Rng rng(seed);
    const double r = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
    auto draw = [&] { return (2.0 * rng.uniform() - 1.0) * r; };
    AEWeights w;
    w.W1.resize(hidden_dim, input_dim);
    w.W2.resize(input_dim, hidden_dim);
    for (Index j = 0; j < input_dim; ++j)
        for (Index i = 0; i < hidden_dim; ++i)
            w.W1(i, j) = draw();
    for (Index j = 0; j < hidden_dim; ++j)
        for (Index i = 0; i < input_dim; ++i)
            w.W2(i, j) = draw();
    w.b1 = Vector::Zero(hidden_dim);
    w.b2 = Vector::Zero(input_dim);
    return w;
}

namespace {

void axpy(AEWeights& y, double a, const AEWeights& x)
{
    y.W1 += a * x.W1;
    y.b1 += a * x.b1;
    y.W2 += a * x.W2;
    y.b2 += a * x.b2;
}

void scale(AEWeights& y, double a)
{
    y.W1 *= a;
    y.b1 *= a;
    y.W2 *= a;
    y.b2 *= a;
}

} // namespace

AEWeights train_autoencoder(const Matrix& x, const AEConfig& cfg, TrainTrace* trace)
{
    cfg.validate();
    if (x.rows() != cfg.input_dim)
        throw DataError("training data has " + std::to_string(x.rows()) +
                        " rows, config says input_dim=" + std::to_string(cfg.input_dim));
    if (x.cols() < 1)
        throw DataError("training data has no samples");

    AEWeights w = init_weights(cfg.input_dim, cfg.hidden_dim, cfg.seed);
    auto [loss, grad] = ae_loss_and_gradient(w, x, cfg);
    if (!std::isfinite(loss))
        throw NumericalError("autoencoder loss is not finite at initialization");
    if (trace)
        trace->losses.push_back(loss);

    AEWeights velocity = w;
    scale(velocity, 0.0);
    double rate = cfg.learn_rate;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        scale(velocity, cfg.momentum);
        axpy(velocity, -rate, grad);
        AEWeights candidate = w;
        axpy(candidate, 1.0, velocity);
        auto [cand_loss, cand_grad] = ae_loss_and_gradient(candidate, x, cfg);
        if (std::isfinite(cand_loss) && cand_loss <= loss && cand_grad.W1.allFinite()) {
            w = std::move(candidate);
            loss = cand_loss;
            grad = std::move(cand_grad);
            if (trace)
                trace->losses.push_back(loss);
        } else {
            scale(velocity, 0.0);
            rate *= 0.5;
            if (trace)
                ++trace->rejected_steps;
            if (rate < 1e-12)
                break;
        }
    }
    return w;
}

} // namespace dsaeem

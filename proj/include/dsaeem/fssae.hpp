#pragma once

#include "dsaeem/data_io.hpp"
#include "dsaeem/optim.hpp"
#include "dsaeem/sparse_ae.hpp"

namespace dsaeem {

// Feature-embedded stacked sparse autoencoder.
//
// Layer 1 encodes the original features. Every later layer k sees the
// original features stacked on top of layer k-1's activations, filtered down
// to d rows by a selection transform, and trains with the group-sparsity term
// splitting its hidden units in the same original/hidden ratio as its input.

enum class FeatureOrigin { original, hidden };

struct CombinedFeatures {
    Matrix e; // (M + d_prev) x N
    std::vector<FeatureOrigin> origins;
};

/// Stacks X_o^T (M x N) above H_prev (d_prev x N). `xo` is sample-major N x M.
CombinedFeatures combine_features(const Matrix& xo, const Matrix& h_prev);

/// A binary column-selection transform G stored as the selected row indices.
struct EmbedUnit {
    Index source_rows = 0;
    IndexList rows; // ascending; G(rows[c], c) = 1
    std::vector<FeatureOrigin> origins;

    Index d() const { return static_cast<Index>(rows.size()); }
    Index original_count() const;
    /// Dense G, source_rows x d.
    Matrix selection_matrix() const;
    /// G^T E.
    Matrix apply(const Matrix& e) const;
};

/// Row energies diag(E E^T), after mean-centering each row when `center`.
Vector row_energies(const Matrix& e, bool center);

/// Selects the d rows of highest energy (ties to the lower index), which
/// maximizes tr(G^T E E^T G) over binary selections. `origins` may be empty.
EmbedUnit fit_transform_G(const Matrix& e, Index d,
                          const std::vector<FeatureOrigin>& origins = {}, bool center = true);

/// Like fit_transform_G with d = `d`, but grows d until the selection holds at
/// least `min_original` original-origin rows (or every row is taken).
EmbedUnit fit_embed_with_floor(const Matrix& e, const std::vector<FeatureOrigin>& origins,
                               Index d, Index min_original, bool center = true);

enum class FineTuneOptimizer { scg, gd };

struct FssaeConfig {
    std::vector<Index> hidden_units{120, 40, 16};
    std::vector<Index> embed_dims; // per layer k >= 2; empty or 0 means automatic
    double lambda = 1e-5;
    double beta = 3.0;
    double rho = 0.05;
    int ae_iterations = 400;
    double ae_learn_rate = 1.0;
    double ae_momentum = 0.9;
    bool center_energies = true;
    bool fine_tune = true;
    int fine_tune_iterations = 100;
    FineTuneOptimizer optimizer = FineTuneOptimizer::scg;
    double fine_tune_l2 = 1e-4;
    double gd_learn_rate = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SoftmaxHead {
    Matrix W; // C x d_K
    Vector b; // C
};

struct FssaeModel {
    Index input_dim = 0;
    int class_count = 0;
    std::vector<AEWeights> units;
    std::vector<EmbedUnit> embeds;       // embeds[k-1] feeds unit k (k >= 1)
    std::vector<GroupPartition> groups;  // per unit
    SoftmaxHead softmax;
    bool fine_tuned = false;

    Index deep_dim() const { return units.empty() ? 0 : units.back().hidden_dim(); }
    bool operator==(const FssaeModel& o) const;
};

/// Activations of every layer for sample-major input `xo`; entry k is
/// hidden_k x N.
std::vector<Matrix> forward_stack(const FssaeModel& model, const Matrix& xo);

/// Last-layer activations, d_K x N.
Matrix deep_features(const FssaeModel& model, const Matrix& xo);

struct ExpandedData {
    Matrix features; // N x (M + d_K)
    std::vector<FeatureOrigin> origins;
};

ExpandedData expand_features(const FssaeModel& model, const Matrix& xo);

struct PretrainTrace {
    std::vector<TrainTrace> units;
};

FssaeModel pretrain_fssae(const Dataset& ds, const FssaeConfig& cfg,
                          PretrainTrace* trace = nullptr);

/// Mean cross-entropy of the softmax head over `ds` plus the fine-tuning L2
/// term (encoder weights and softmax weights).
double fine_tune_objective(const FssaeModel& model, const Dataset& ds, double l2);

/// Analytic gradient of fine_tune_objective, flattened in parameter order.
Vector fine_tune_gradient(const FssaeModel& model, const Dataset& ds, double l2);

/// Flat parameter vector: each unit's W1, b1, then softmax W, b.
Vector flatten_parameters(const FssaeModel& model);
void unflatten_parameters(FssaeModel& model, const Vector& theta);

FssaeModel fine_tune(FssaeModel model, const Dataset& ds, const FssaeConfig& cfg,
                     OptimTrace* trace = nullptr);

/// Pretrain, then fine-tune when cfg.fine_tune is set.
FssaeModel train_fssae(const Dataset& ds, const FssaeConfig& cfg);

/// Class predicted by the softmax head.
Labels softmax_predict(const FssaeModel& model, const Matrix& xo);

} // namespace dsaeem

#pragma once

#include "dsaeem/reduction.hpp"
#include "dsaeem/svm.hpp"

#include <string>

namespace dsaeem {

struct EnsembleConfig {
    int members = 10;      // T
    double delta_s = 0.7;  // sample ratio per member, drawn with replacement
    double delta_f = 0.5;  // feature ratio per member, drawn without replacement
    WlpdpConfig wlpdp;
    SvmConfig svm;
    bool standardize_projection = true; // z-score projected columns before the SVM
    double weight_split = 0.2;          // held out of the training rows for the weight search
    int weight_candidates = 200;        // Dirichlet(1) draws on top of the two seeds
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

struct EnsembleMember {
    SubsetSpec subset;
    WlpdpModel projection; // input dim == subset.features.size()
    Vector proj_mean;      // column shift applied after projection
    Vector proj_scale;     // column scale applied after projection
    SvmModel svm;
    double weight = 1.0;
    double train_accuracy = 0.0; // on the member's own (bootstrapped) training rows

    /// Feature slice, projection and scaling: the SVM input for `x`.
    Matrix transform(const Matrix& x) const;
    Labels predict(const Matrix& x) const;
};

struct EnsembleModel {
    int class_count = 2;
    Index input_dim = 0;
    std::vector<EnsembleMember> members;
    std::vector<std::string> log; // resampled members and similar events

    Vector weights() const;
};

/// Trains one member on the rows and columns named by `spec`.
EnsembleMember fit_member(const Matrix& x, const Labels& labels, int class_count,
                          const SubsetSpec& spec, const EnsembleConfig& cfg);

/// Draws T subsets, trains a member on each (redrawing members that fail) and
/// searches the vote weights. With T > 1 the members only see the inner
/// training part and the weights are chosen on the held-out part; a single
/// member uses every training row. T = 1 with both ratios at 1 degenerates to
/// one member on the whole matrix, rows in order.
EnsembleModel fit_ensemble(const Matrix& x, const Labels& labels, int class_count,
                           const EnsembleConfig& cfg);

/// argmax_c sum_i w_i [votes_i == c], ties to the lowest class.
Labels weighted_vote(const std::vector<Labels>& votes, const Vector& weights, int class_count);

/// Picks the weights with the best weighted-vote accuracy on (votes, truth)
/// among uniform, accuracy-proportional and `candidates` Dirichlet(1) draws.
/// The first best candidate wins, so ties go to uniform. Result sums to 1.
Vector optimize_subspace_weights(const std::vector<Labels>& votes, const Labels& truth,
                                 int class_count, int candidates, std::uint64_t seed);

Labels predict_ensemble(const EnsembleModel& model, const Matrix& x);

} // namespace dsaeem

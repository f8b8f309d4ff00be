#pragma once

#include "dsaeem/data_io.hpp"
#include "dsaeem/ensemble.hpp"
#include "dsaeem/fssae.hpp"
#include "dsaeem/metrics.hpp"
#include "dsaeem/reduction.hpp"

#include <optional>
#include <string>

namespace dsaeem {

/// Which stages run. The full model uses all three; baselines switch some off.
struct Stages {
    bool fssae = true;  // expand with deep features
    bool l1 = true;     // stage-1 selection
    bool stage2 = true; // projection ensemble; off means one SVM on the selected columns
};

enum class PipelineKind { full, svm_raw, l1_only, wlpdp_only, fssae_only };

const char* pipeline_name(PipelineKind kind);
PipelineKind pipeline_from_name(const std::string& name);
Stages stages_for(PipelineKind kind);

struct PipelineConfig {
    NormMethod normalization = NormMethod::min_max;
    FssaeConfig fssae;
    std::vector<double> alpha_grid{0.001, 0.01, 0.1, 1.0};
    double alpha_split = 0.2; // inner validation share for choosing alpha
    IstaOptions ista;
    Index min_keep = 0; // 0 = max(3, ceil(0.1 * expanded dim))
    EnsembleConfig ensemble;
    SvmConfig svm; // used by every SVM, including ensemble members
    std::uint64_t seed = 1;

    void validate() const;
};

Index default_min_keep(Index expanded_dim);

struct AlphaScore {
    double alpha = 0.0;
    Index selected = 0;
    double accuracy = 0.0;
};

struct FittedPipeline {
    Stages stages;
    int class_count = 2;
    Index input_dim = 0;
    NormalizationSpec norm;
    std::optional<FssaeModel> fssae;
    Index expanded_dim = 0;
    std::optional<L1SelectorState> l1;
    std::vector<AlphaScore> alpha_scores;
    IndexList selected; // columns of the expanded matrix fed to the classifier
    std::optional<EnsembleModel> ensemble;
    std::optional<SvmModel> svm;

    /// Normalized, expanded and column-selected copy of raw features.
    Matrix reduce(const Matrix& raw) const;
    Labels predict(const Matrix& raw) const;
};

/// Fits every enabled stage on `train` (raw, unnormalized) only.
FittedPipeline fit_pipeline(const Dataset& train, const Stages& stages,
                            const PipelineConfig& cfg);

struct CvResult {
    MetricsReport report;
    std::vector<FittedPipeline> models; // one per evaluated fold
    std::vector<double> seconds;        // wall time per evaluated fold
};

/// Per-fold seed used by cross_validate.
std::uint64_t fold_seed(std::uint64_t seed, int fold);

/// Fits on the training rows of every evaluated fold and scores the held-out
/// rows. Folds run concurrently when `threads` > 1; results do not depend on it.
CvResult cross_validate(const Dataset& ds, const FoldPlan& plan, const Stages& stages,
                        const PipelineConfig& cfg, int positive_class, int threads = 1);

} // namespace dsaeem

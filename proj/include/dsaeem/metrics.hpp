#pragma once

#include "dsaeem/common.hpp"

#include <optional>
#include <string>

namespace dsaeem {

struct ConfusionMatrix {
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts; // rows truth, cols predicted
    int positive_class = 1;
    long tp = 0, fp = 0, fn = 0, tn = 0;

    long total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const Labels& truth, const Labels& predicted, int positive_class,
                          int class_count = 2);
/// Binary confusion matrix straight from the four counts.
ConfusionMatrix confusion_from_counts(long tp, long fp, long fn, long tn);

/// nullopt marks an undefined score (zero denominator), distinct from 0.
struct Scores {
    std::optional<double> acc, prec, sens, spec, f1;
};

inline constexpr int kMetricCount = 5;
extern const char* const kMetricNames[kMetricCount];

std::optional<double> score_at(const Scores& s, int i);

Scores compute_metrics(const ConfusionMatrix& cm);

struct FoldResult {
    int fold = 0;
    ConfusionMatrix cm;
    Scores scores;
};

struct Aggregate {
    std::optional<double> mean;
    std::optional<double> std; // sample standard deviation over defined folds
    int undefined = 0;         // folds left out of mean and std
};

struct MetricsReport {
    std::vector<FoldResult> folds;
    Aggregate aggregate[kMetricCount];
    int best_fold = -1; // highest accuracy, first on ties

    static MetricsReport from_folds(std::vector<FoldResult> folds);
};

/// Percent with two decimals, or "undef".
std::string format_percent(const std::optional<double>& v);

} // namespace dsaeem

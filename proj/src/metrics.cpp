#include "dsaeem/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace dsaeem {

const char* const kMetricNames[kMetricCount] = {"Acc", "Prec", "Sens", "Spec", "F1_score"};

namespace {

std::optional<double> ratio(long num, long den)
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

ConfusionMatrix confusion(const Labels& truth, const Labels& predicted, int positive_class,
                          int class_count)
{
    if (truth.size() != predicted.size())
        throw DataError("confusion: truth has " + std::to_string(truth.size()) +
                        " labels, prediction has " + std::to_string(predicted.size()));
    if (positive_class < 0 || positive_class >= class_count)
        throw ConfigError("confusion: positive class out of range");
    ConfusionMatrix cm;
    cm.positive_class = positive_class;
    cm.counts.setZero(class_count, class_count);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || t >= class_count || p < 0 || p >= class_count)
            throw DataError("confusion: label out of range at position " + std::to_string(i));
        ++cm.counts(t, p);
        const bool tpos = t == positive_class, ppos = p == positive_class;
        if (tpos && ppos)
            ++cm.tp;
        else if (!tpos && ppos)
            ++cm.fp;
        else if (tpos)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

ConfusionMatrix confusion_from_counts(long tp, long fp, long fn, long tn)
{
    if (tp < 0 || fp < 0 || fn < 0 || tn < 0)
        throw DataError("confusion counts must be non-negative");
    ConfusionMatrix cm;
    cm.counts.resize(2, 2);
    cm.counts << tn, fp, fn, tp;
    cm.tp = tp;
    cm.fp = fp;
    cm.fn = fn;
    cm.tn = tn;
    return cm;
}

std::optional<double> score_at(const Scores& s, int i)
{
    switch (i) {
    case 0: return s.acc;
    case 1: return s.prec;
    case 2: return s.sens;
    case 3: return s.spec;
    case 4: return s.f1;
    default: throw std::out_of_range("metric index");
    }
}

Scores compute_metrics(const ConfusionMatrix& cm)
{
    if (cm.total() <= 0)
        throw DataError("compute_metrics: empty confusion matrix");
    Scores s;
    s.acc = ratio(cm.tp + cm.tn, cm.total());
    s.prec = ratio(cm.tp, cm.tp + cm.fp);
    s.sens = ratio(cm.tp, cm.tp + cm.fn);
    s.spec = ratio(cm.tn, cm.tn + cm.fp);
    if (s.prec && s.sens && *s.prec + *s.sens > 0.0)
        s.f1 = 2.0 * (*s.prec * *s.sens) / (*s.prec + *s.sens);
    return s;
}

MetricsReport MetricsReport::from_folds(std::vector<FoldResult> folds)
{
    MetricsReport r;
    r.folds = std::move(folds);
    for (int k = 0; k < kMetricCount; ++k) {
        std::vector<double> vals;
        for (const auto& f : r.folds)
            if (auto v = score_at(f.scores, k))
                vals.push_back(*v);
        Aggregate& a = r.aggregate[k];
        a.undefined = static_cast<int>(r.folds.size() - vals.size());
        if (vals.empty())
            continue;
        double sum = 0.0;
        for (double v : vals)
            sum += v;
        const double mean = sum / static_cast<double>(vals.size());
        a.mean = mean;
        if (vals.size() > 1) {
            double ss = 0.0;
            for (double v : vals)
                ss += (v - mean) * (v - mean);
            a.std = std::sqrt(ss / static_cast<double>(vals.size() - 1));
        }
    }
    double best = -1.0;
    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const double acc = r.folds[i].scores.acc.value_or(-1.0);
        if (acc > best) {
            best = acc;
            r.best_fold = r.folds[i].fold;
        }
    }
    return r;
}

std::string format_percent(const std::optional<double>& v)
{
    if (!v)
        return "undef";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * *v;
    return os.str();
}

} // namespace dsaeem

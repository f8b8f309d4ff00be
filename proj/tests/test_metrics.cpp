#include "doctest.h"
#include "support.hpp"

#include "dsaeem/data_io.hpp"
#include "dsaeem/metrics.hpp"

using namespace dsaeem;

namespace {

/// Exact equality, with an undefined score matching NaN.
bool same(const std::optional<double>& got, double want)
{
    return std::isnan(want) ? !got.has_value() : (got.has_value() && *got == want);
}

bool round4(const std::optional<double>& v, double want)
{
    return v && std::abs(std::round(*v * 1e4) / 1e4 - want) < 1e-12;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion examples")
{
    auto cm = confusion({1, 1, 0, 0}, {1, 1, 0, 0}, 1);
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 2);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);
    cm = confusion({1, 1, 0, 0}, {0, 0, 1, 1}, 1);
    CHECK(cm.tp == 0);
    CHECK(cm.tn == 0);
    cm = confusion({1, 0, 1, 0}, {1, 1, 0, 0}, 1);
    CHECK(cm.tp == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.total() == 4);
    CHECK(cm.counts.sum() == 4);
    CHECK_THROWS(confusion({1, 0}, {1}, 1));
}

TEST_CASE("the five scores of a worked example")
{
    const auto s = compute_metrics(confusion_from_counts(50, 10, 10, 30));
    CHECK(round4(s.acc, 0.8));
    CHECK(round4(s.prec, 0.8333));
    CHECK(round4(s.sens, 0.8333));
    CHECK(round4(s.spec, 0.75));
    CHECK(round4(s.f1, 0.8333));
}

TEST_CASE("zero denominators give the undefined sentinel, not zero")
{
    const auto s = compute_metrics(confusion_from_counts(0, 0, 5, 5));
    CHECK_FALSE(s.prec.has_value());
    CHECK_FALSE(s.f1.has_value());
    CHECK(s.sens == 0.0);
    CHECK(format_percent(s.prec) == "undef");
    const auto p = compute_metrics(confusion({1, 0, 1}, {1, 0, 1}, 1));
    for (int i = 0; i < kMetricCount; ++i)
        CHECK(score_at(p, i) == 1.0);
}

TEST_CASE("scores match the hand formulas exactly on random confusion matrices")
{
    std::mt19937 g(1);
    std::uniform_int_distribution<long> cnt(0, 60);
    for (int rep = 0; rep < 100; ++rep) {
        long tp = cnt(g), fp = cnt(g), fn = cnt(g), tn = cnt(g);
        if (rep % 10 == 0)
            tp = fp = 0;
        if (rep % 10 == 1)
            tp = fn = 0;
        if (rep % 10 == 2)
            tn = fp = 0;
        if (tp + fp + fn + tn == 0)
            tn = 1;
        const auto s = compute_metrics(confusion_from_counts(tp, fp, fn, tn));
        const auto h = support::hand_scores(tp, fp, fn, tn);
        CHECK(same(s.acc, h.acc));
        CHECK(same(s.prec, h.prec));
        CHECK(same(s.sens, h.sens));
        CHECK(same(s.spec, h.spec));
        CHECK(same(s.f1, h.f1));
    }
}

TEST_CASE("flipping the positive class swaps sensitivity and specificity")
{
    std::mt19937 g(2);
    for (int rep = 0; rep < 50; ++rep) {
        Labels t(40), p(40);
        for (std::size_t i = 0; i < 40; ++i) {
            t[i] = static_cast<int>(g() % 2);
            p[i] = static_cast<int>(g() % 2);
        }
        const auto a = confusion(t, p, 1);
        const auto b = confusion(t, p, 0);
        const auto sa = compute_metrics(a), sb = compute_metrics(b);
        CHECK(sa.acc == sb.acc);
        CHECK(sa.sens == sb.spec);
        CHECK(sa.spec == sb.sens);
        if (a.tn + a.fn > 0)
            CHECK(*sb.prec == double(a.tn) / double(a.tn + a.fn));
        if (sa.f1)
            CHECK(*sa.f1 == doctest::Approx(2.0 / (1.0 / *sa.prec + 1.0 / *sa.sens)).epsilon(1e-14));
        for (int i = 0; i < kMetricCount; ++i)
            if (auto v = score_at(sa, i))
                CHECK((*v >= 0.0 && *v <= 1.0));
    }
}

TEST_CASE("aggregation: mean, sample std, undefined count, best fold")
{
    std::vector<FoldResult> folds;
    const long counts[3][4] = {{5, 1, 1, 3}, {0, 0, 4, 6}, {6, 0, 0, 4}};
    for (int f = 0; f < 3; ++f) {
        FoldResult r;
        r.fold = f;
        r.cm = confusion_from_counts(counts[f][0], counts[f][1], counts[f][2], counts[f][3]);
        r.scores = compute_metrics(r.cm);
        folds.push_back(r);
    }
    const auto rep = MetricsReport::from_folds(folds);
    CHECK(*rep.aggregate[0].mean == doctest::Approx((0.8 + 0.6 + 1.0) / 3));
    CHECK(*rep.aggregate[0].std == doctest::Approx(0.2));
    CHECK(rep.aggregate[1].undefined == 1);
    CHECK(*rep.aggregate[1].mean == doctest::Approx((5.0 / 6 + 1.0) / 2));
    CHECK(rep.best_fold == 2);
    CHECK(format_percent(0.96666) == "96.67");
}

TEST_CASE("a constant predictor scores the majority-class prevalence")
{
    const auto heart = support::load("heart");
    const auto plan = stratified_kfold(heart, 5, 1);
    long zeros = std::count(heart.labels.begin(), heart.labels.end(), 0);
    const int majority = zeros * 2 >= heart.samples() ? 0 : 1;
    const double prevalence =
        double(std::count(heart.labels.begin(), heart.labels.end(), majority)) / double(heart.samples());
    std::vector<FoldResult> folds;
    for (int f : plan.evaluated_folds()) {
        const auto truth = take(heart.labels, plan.test_rows(f));
        FoldResult r;
        r.fold = f;
        r.cm = confusion(truth, Labels(truth.size(), majority), 1);
        r.scores = compute_metrics(r.cm);
        folds.push_back(r);
    }
    const auto rep = MetricsReport::from_folds(folds);
    CHECK(*rep.aggregate[0].mean == doctest::Approx(prevalence).epsilon(1e-12));
}

} // TEST_SUITE

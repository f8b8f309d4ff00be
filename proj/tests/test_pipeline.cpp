#include "doctest.h"
#include "pipeline_support.hpp"

#include "dsaeem/pipeline.hpp"

using namespace dsaeem;

TEST_SUITE("pipeline") {

TEST_CASE("pipeline names round-trip and map to their stages")
{
    for (auto kind : {PipelineKind::full, PipelineKind::svm_raw, PipelineKind::l1_only,
                      PipelineKind::wlpdp_only, PipelineKind::fssae_only})
        CHECK(pipeline_from_name(pipeline_name(kind)) == kind);
    CHECK_THROWS_AS(pipeline_from_name("nope"), ConfigError);
    const auto l1 = stages_for(PipelineKind::l1_only);
    CHECK((!l1.fssae && l1.l1 && !l1.stage2));
    const auto raw = stages_for(PipelineKind::svm_raw);
    CHECK((!raw.fssae && !raw.l1 && !raw.stage2));
    const auto full = stages_for(PipelineKind::full);
    CHECK((full.fssae && full.l1 && full.stage2));
}

TEST_CASE("default min_keep is max(3, ceil(0.1 M)) capped by M")
{
    CHECK(default_min_keep(37) == 4);
    CHECK(default_min_keep(24) == 3);
    CHECK(default_min_keep(2) == 2);
    CHECK(default_min_keep(100) == 10);
}

TEST_CASE("separable blobs give perfect 5-fold accuracy")
{
    const auto blobs = support::blobs(100, 4, 8.0, 1, 0.6);
    // Independent check: the bisector of the class means separates every sample.
    Vector c0 = Vector::Zero(4), c1 = Vector::Zero(4);
    for (Index i = 0; i < 100; ++i)
        (blobs.labels[static_cast<std::size_t>(i)] ? c1 : c0) += blobs.features.row(i).transpose() / 50.0;
    for (Index i = 0; i < 100; ++i) {
        const double side = (blobs.features.row(i).transpose() - (c0 + c1) / 2).dot(c1 - c0);
        REQUIRE((side > 0) == (blobs.labels[static_cast<std::size_t>(i)] == 1));
    }
    const auto plan = stratified_kfold(blobs, 5, 1);
    const auto cv = cross_validate(blobs, plan, stages_for(PipelineKind::full),
                                   support::small_pipeline(), 1);
    CHECK(*cv.report.aggregate[0].mean == 1.0);
    CHECK(cv.report.folds.size() == 5);
    CHECK(cv.models.size() == 5);
}

TEST_CASE("l1_only skips the expansion and the ensemble")
{
    const auto heart = support::load("heart");
    const auto fitted = fit_pipeline(heart, stages_for(PipelineKind::l1_only), support::small_pipeline());
    CHECK_FALSE(fitted.fssae.has_value());
    CHECK(fitted.expanded_dim == 13);
    CHECK(fitted.l1.has_value());
    CHECK_FALSE(fitted.ensemble.has_value());
    CHECK(fitted.svm.has_value());
    CHECK(fitted.alpha_scores.size() == 4);
    CHECK(fitted.reduce(heart.features).cols() == static_cast<Index>(fitted.selected.size()));
}

TEST_CASE("the full pipeline expands to M + d_K before selection")
{
    const auto heart = support::load("heart");
    const auto cfg = support::small_pipeline();
    const auto fitted = fit_pipeline(heart, stages_for(PipelineKind::full), cfg);
    REQUIRE(fitted.fssae.has_value());
    CHECK(fitted.expanded_dim == 13 + 8);
    CHECK(static_cast<Index>(fitted.selected.size()) >= default_min_keep(21));
    REQUIRE(fitted.ensemble.has_value());
    CHECK(fitted.ensemble->members.size() == 3);
    CHECK(fitted.predict(heart.features).size() == 270);
}

TEST_CASE("svm_raw fits one SVM on every normalized column")
{
    const auto heart = support::load("heart");
    const auto fitted = fit_pipeline(heart, stages_for(PipelineKind::svm_raw), support::small_pipeline());
    CHECK(fitted.selected.size() == 13);
    CHECK(fitted.reduce(heart.features) ==
          apply_normalization(heart.features, fit_normalization(heart.features, NormMethod::min_max)));
}

TEST_CASE("mutating held-out rows leaves the fitted model unchanged")
{
    const auto heart = support::load("heart");
    const auto plan = stratified_kfold(heart, 5, 2);
    const auto cfg = support::small_pipeline();
    auto mutated = heart;
    for (Index r : plan.test_rows(0))
        mutated.features.row(r) = mutated.features.row(r).reverse() * 3.0 + Eigen::RowVectorXd::Constant(13, 7.0);
    const auto a = fit_pipeline(heart.subset(plan.train_rows(0)), stages_for(PipelineKind::full), cfg);
    const auto b = fit_pipeline(mutated.subset(plan.train_rows(0)), stages_for(PipelineKind::full), cfg);
    CHECK(support::model_text(a) == support::model_text(b));
}

TEST_CASE("cross-validation results do not depend on the thread count")
{
    const auto heart = support::load("heart");
    const auto plan = stratified_kfold(heart, 5, 3);
    const auto cfg = support::small_pipeline();
    const auto one = cross_validate(heart, plan, stages_for(PipelineKind::full), cfg, 1, 1);
    const auto many = cross_validate(heart, plan, stages_for(PipelineKind::full), cfg, 1, 5);
    for (std::size_t f = 0; f < one.models.size(); ++f)
        CHECK(support::model_text(one.models[f]) == support::model_text(many.models[f]));
    CHECK(one.report.aggregate[0].mean == many.report.aggregate[0].mean);
}

TEST_CASE("fold seeds are distinct and reproducible")
{
    CHECK(fold_seed(1, 0) == fold_seed(1, 0));
    CHECK(fold_seed(1, 0) != fold_seed(1, 1));
    CHECK(fold_seed(1, 0) != fold_seed(2, 0));
}

TEST_CASE("holdout plans evaluate only the test part")
{
    const auto pid = support::load("pid");
    const auto plan = stratified_holdout(pid, 0.2, 1);
    const auto cv = cross_validate(pid, plan, stages_for(PipelineKind::svm_raw), support::small_pipeline(), 1);
    CHECK(cv.report.folds.size() == 1);
    CHECK(cv.report.folds[0].cm.total() == static_cast<long>(plan.test_rows(1).size()));
}

TEST_CASE("config validation")
{
    auto cfg = support::small_pipeline();
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha_grid = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha_grid = {-1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

} // TEST_SUITE

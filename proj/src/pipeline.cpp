#include "dsaeem/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

namespace dsaeem {

namespace {

constexpr std::uint64_t kFoldStream = 0xf0;
constexpr std::uint64_t kFssaeStream = 0xf1;
constexpr std::uint64_t kAlphaStream = 0xf2;
constexpr std::uint64_t kEnsembleStream = 0xf3;

IndexList all_columns(Index m)
{
    IndexList cols(static_cast<std::size_t>(m));
    std::iota(cols.begin(), cols.end(), Index{0});
    return cols;
}

} // namespace

const char* pipeline_name(PipelineKind kind)
{
    switch (kind) {
    case PipelineKind::full: return "dsaeem";
    case PipelineKind::svm_raw: return "svm_raw";
    case PipelineKind::l1_only: return "l1_only";
    case PipelineKind::wlpdp_only: return "wlpdp_only";
    case PipelineKind::fssae_only: return "fssae_only";
    }
    return "?";
}

PipelineKind pipeline_from_name(const std::string& name)
{
    for (auto k : {PipelineKind::full, PipelineKind::svm_raw, PipelineKind::l1_only,
                   PipelineKind::wlpdp_only, PipelineKind::fssae_only})
        if (name == pipeline_name(k))
            return k;
    throw ConfigError("unknown pipeline '" + name +
                      "' (expected svm_raw, l1_only, wlpdp_only or fssae_only)");
}

Stages stages_for(PipelineKind kind)
{
    switch (kind) {
    case PipelineKind::full: return {true, true, true};
    case PipelineKind::svm_raw: return {false, false, false};
    case PipelineKind::l1_only: return {false, true, false};
    case PipelineKind::wlpdp_only: return {false, false, true};
    case PipelineKind::fssae_only: return {true, false, false};
    }
    return {};
}

void PipelineConfig::validate() const
{
    fssae.validate();
    if (alpha_grid.empty())
        throw ConfigError("alpha_grid must not be empty");
    for (double a : alpha_grid)
        if (!(a >= 0.0))
            throw ConfigError("alpha_grid entries must be non-negative");
    if (!(alpha_split > 0.0 && alpha_split < 1.0))
        throw ConfigError("alpha_split must lie in (0, 1)");
    if (ista.max_iterations < 1)
        throw ConfigError("ista max_iterations must be at least 1");
    if (!(ista.tol >= 0.0))
        throw ConfigError("ista tol must be non-negative");
    if (min_keep < 0)
        throw ConfigError("min_keep must be non-negative");
    ensemble.validate();
    svm.validate();
}

Index default_min_keep(Index expanded_dim)
{
    const auto tenth = static_cast<Index>(std::ceil(0.1 * static_cast<double>(expanded_dim) - 1e-9));
    return std::min(expanded_dim, std::max<Index>(3, tenth));
}

Matrix FittedPipeline::reduce(const Matrix& raw) const
{
    if (raw.cols() != input_dim)
        throw DataError("model expects " + std::to_string(input_dim) + " features, got " +
                        std::to_string(raw.cols()));
    Matrix x = apply_normalization(raw, norm);
    if (fssae)
        x = expand_features(*fssae, x).features;
    return take_cols(x, selected);
}

Labels FittedPipeline::predict(const Matrix& raw) const
{
    const Matrix x = reduce(raw);
    if (ensemble)
        return predict_ensemble(*ensemble, x);
    return svm->predict(x);
}

FittedPipeline fit_pipeline(const Dataset& train, const Stages& stages, const PipelineConfig& cfg)
{
    cfg.validate();
    train.validate();
    FittedPipeline fp;
    fp.stages = stages;
    fp.class_count = train.class_count;
    fp.input_dim = train.dims();

    Dataset norm_ds;
    std::tie(norm_ds, fp.norm) = normalize(train, cfg.normalization);
    Matrix x = norm_ds.features;
    const Labels& y = train.labels;

    if (stages.fssae) {
        FssaeConfig fc = cfg.fssae;
        fc.seed = derive_seed(cfg.seed, kFssaeStream);
        fp.fssae = train_fssae(norm_ds, fc);
        x = expand_features(*fp.fssae, x).features;
    }
    fp.expanded_dim = x.cols();

    SvmConfig svm_cfg = cfg.svm;
    if (stages.l1) {
        const Index keep = cfg.min_keep > 0 ? std::min(cfg.min_keep, x.cols())
                                            : default_min_keep(x.cols());
        double alpha = cfg.alpha_grid.front();
        if (cfg.alpha_grid.size() > 1) {
            // Alpha is chosen by the accuracy of a plain SVM on an inner split.
            const auto [in_rows, val_rows] =
                stratified_split(y, cfg.alpha_split, derive_seed(cfg.seed, kAlphaStream));
            const Matrix xi = take_rows(x, in_rows), xv = take_rows(x, val_rows);
            const Labels yi = take(y, in_rows), yv = take(y, val_rows);
            const Vector ti = signed_targets(yi);
            double best = -1.0;
            for (double a : cfg.alpha_grid) {
                const IndexList sel = l1_select(ista_fit(xi, ti, a, cfg.ista), keep);
                const SvmModel m = train_svm(take_cols(xi, sel), yi, train.class_count, svm_cfg);
                const double acc = accuracy(yv, m.predict(take_cols(xv, sel)));
                fp.alpha_scores.push_back({a, static_cast<Index>(sel.size()), acc});
                if (acc > best) {
                    best = acc;
                    alpha = a;
                }
            }
        }
        fp.l1 = ista_fit(x, signed_targets(y), alpha, cfg.ista);
        fp.selected = l1_select(*fp.l1, keep);
    } else {
        fp.selected = all_columns(x.cols());
    }
    x = take_cols(x, fp.selected);

    if (stages.stage2) {
        EnsembleConfig ec = cfg.ensemble;
        ec.svm = svm_cfg;
        ec.seed = derive_seed(cfg.seed, kEnsembleStream);
        fp.ensemble = fit_ensemble(x, y, train.class_count, ec);
    } else {
        fp.svm = train_svm(x, y, train.class_count, svm_cfg);
    }
    return fp;
}

std::uint64_t fold_seed(std::uint64_t seed, int fold)
{
    return derive_seed(derive_seed(seed, kFoldStream), static_cast<std::uint64_t>(fold));
}

CvResult cross_validate(const Dataset& ds, const FoldPlan& plan, const Stages& stages,
                        const PipelineConfig& cfg, int positive_class, int threads)
{
    if (plan.assignments.size() != ds.labels.size())
        throw DataError("fold plan covers " + std::to_string(plan.assignments.size()) +
                        " samples, dataset has " + std::to_string(ds.labels.size()));
    cfg.validate();
    const std::vector<int> folds = plan.evaluated_folds();

    struct Out {
        FittedPipeline model;
        FoldResult result;
        double seconds = 0.0;
    };
    auto run_fold = [&](int fold) {
        const auto start = std::chrono::steady_clock::now();
        PipelineConfig fc = cfg;
        fc.seed = fold_seed(cfg.seed, fold);
        const Dataset train = ds.subset(plan.train_rows(fold));
        const Dataset test = ds.subset(plan.test_rows(fold));
        Out o;
        try {
            o.model = fit_pipeline(train, stages, fc);
        } catch (const ConfigError& e) {
            throw ConfigError("fold " + std::to_string(fold) + ": " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError("fold " + std::to_string(fold) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("fold " + std::to_string(fold) + ": " + e.what());
        }
        o.result.fold = fold;
        o.result.cm = confusion(test.labels, o.model.predict(test.features), positive_class,
                                ds.class_count);
        o.result.scores = compute_metrics(o.result.cm);
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return o;
    };

    std::vector<Out> outs;
    if (threads > 1 && folds.size() > 1) {
        std::vector<std::future<Out>> jobs;
        for (int f : folds)
            jobs.push_back(std::async(std::launch::async, run_fold, f));
        for (auto& j : jobs)
            outs.push_back(j.get());
    } else {
        for (int f : folds)
            outs.push_back(run_fold(f));
    }

    CvResult r;
    std::vector<FoldResult> results;
    for (auto& o : outs) {
        results.push_back(o.result);
        r.models.push_back(std::move(o.model));
        r.seconds.push_back(o.seconds);
    }
    r.report = MetricsReport::from_folds(std::move(results));
    return r;
}

} // namespace dsaeem

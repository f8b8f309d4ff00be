#include "dsaeem.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>

namespace {

void print_line(const char* line, void* quiet)
{
    if (!*static_cast<bool*>(quiet))
        std::fprintf(stderr, "%s\n", line);
}

int fail(dsaeem_status st)
{
    std::fprintf(stderr, "error: %s\n", dsaeem_last_error());
    return static_cast<int>(st);
}

struct Loaded {
    dsaeem_config* cfg = nullptr;
    ~Loaded() { dsaeem_config_free(cfg); }
};

dsaeem_status load(const std::string& path, const std::string& out_dir, int threads, Loaded& l)
{
    dsaeem_status st = dsaeem_config_load(path.c_str(), &l.cfg);
    if (st == DSAEEM_OK && !out_dir.empty())
        st = dsaeem_config_set_output_dir(l.cfg, out_dir.c_str());
    if (st == DSAEEM_OK && threads > 0)
        st = dsaeem_config_set_threads(l.cfg, threads);
    return st;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diamond stacked sparse autoencoder ensemble: experiments and scoring"};
    app.set_version_flag("--version", dsaeem_version());
    app.require_subcommand(1);

    std::string config, out_dir, which = "all", axes, model_path, input, output;
    int threads = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Cross-validate the full pipeline and write reports");
    auto* baseline = app.add_subcommand("baseline", "Compare the full pipeline with baselines");
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep written as CSV series");
    auto* predict = app.add_subcommand("predict", "Score a CSV with a saved model bundle");
    auto* validate = app.add_subcommand("validate-config", "Check a config file");

    for (auto* sub : {run, baseline, sweep}) {
        sub->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "Override the output directory");
        sub->add_option("-j,--threads", threads, "Concurrent folds")->check(CLI::PositiveNumber);
        sub->add_flag("-q,--quiet", quiet, "No progress output");
    }
    baseline->add_option("-b,--baselines", which,
                         "Comma list of svm_raw, l1_only, wlpdp_only, fssae_only, or all");
    sweep->add_option("-a,--axes", axes, "e.g. rho=0.02,0.04 or lambda=1e-5,1e-4;beta=1,2")->required();
    predict->add_option("model", model_path, "Model bundle (models/fold_<k>.json)")->required()->check(CLI::ExistingFile);
    predict->add_option("input", input, "CSV to score")->required()->check(CLI::ExistingFile);
    predict->add_option("-o,--out", output, "Output CSV")->required();
    validate->add_option("config", config, "Experiment config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        const dsaeem_status st = dsaeem_validate_config(config.c_str());
        if (st != DSAEEM_OK)
            return fail(st);
        std::printf("%s: ok\n", config.c_str());
        return 0;
    }

    if (*predict) {
        dsaeem_model* model = nullptr;
        dsaeem_status st = dsaeem_model_load(model_path.c_str(), &model);
        double acc = -1.0;
        if (st == DSAEEM_OK)
            st = dsaeem_predict_csv(model, input.c_str(), output.c_str(), &acc);
        dsaeem_model_free(model);
        if (st != DSAEEM_OK)
            return fail(st);
        if (acc >= 0.0)
            std::printf("accuracy %.2f%%\n", 100.0 * acc);
        std::printf("wrote %s\n", output.c_str());
        return 0;
    }

    Loaded l;
    dsaeem_status st = load(config, out_dir, threads, l);
    if (st != DSAEEM_OK)
        return fail(st);
    if (*run) {
        double acc = -1.0;
        st = dsaeem_run(l.cfg, print_line, &quiet, &acc);
        if (st == DSAEEM_OK)
            std::printf("mean accuracy %.2f%%\n", 100.0 * acc);
    } else if (*baseline) {
        st = dsaeem_baseline(l.cfg, which.c_str(), print_line, &quiet);
    } else if (*sweep) {
        st = dsaeem_sweep(l.cfg, axes.c_str(), print_line, &quiet);
    }
    return st == DSAEEM_OK ? 0 : fail(st);
}

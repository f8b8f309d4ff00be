#include "dsaeem.h"

#include "dsaeem/experiment.hpp"
#include "dsaeem/serialize.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

struct dsaeem_config {
    dsaeem::ExperimentConfig cfg;
};

struct dsaeem_model {
    dsaeem::ModelBundle bundle;
};

namespace {

thread_local std::string last_error;

template <typename F>
dsaeem_status guard(F&& f)
{
    last_error.clear();
    try {
        f();
        return DSAEEM_OK;
    } catch (const dsaeem::Error& e) {
        last_error = e.what();
        return static_cast<dsaeem_status>(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return DSAEEM_ERR_NUMERICAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DSAEEM_ERR_DATA;
    }
}

void need(const void* p, const char* what)
{
    if (!p)
        throw dsaeem::ConfigError(std::string(what) + " must not be null");
}

dsaeem::LogSink sink(dsaeem_log_fn fn, void* user)
{
    if (!fn)
        return {};
    return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

std::vector<dsaeem::PipelineKind> parse_baselines(const std::string& list)
{
    using dsaeem::PipelineKind;
    if (list.empty() || list == "all")
        return {PipelineKind::svm_raw, PipelineKind::l1_only, PipelineKind::wlpdp_only,
                PipelineKind::fssae_only};
    std::vector<PipelineKind> out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ','))
        out.push_back(dsaeem::pipeline_from_name(name));
    return out;
}

} // namespace

extern "C" {

const char* dsaeem_version(void)
{
    return "1.0.0";
}

const char* dsaeem_last_error(void)
{
    return last_error.c_str();
}

dsaeem_status dsaeem_config_load(const char* path, dsaeem_config** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto c = std::make_unique<dsaeem_config>();
        c->cfg = dsaeem::load_config(path);
        *out = c.release();
    });
}

void dsaeem_config_free(dsaeem_config* cfg)
{
    delete cfg;
}

dsaeem_status dsaeem_config_set_output_dir(dsaeem_config* cfg, const char* dir)
{
    return guard([&] {
        need(cfg, "config");
        need(dir, "dir");
        cfg->cfg.output_dir = dir;
    });
}

dsaeem_status dsaeem_config_set_threads(dsaeem_config* cfg, int threads)
{
    return guard([&] {
        need(cfg, "config");
        if (threads < 1)
            throw dsaeem::ConfigError("threads: must be at least 1");
        cfg->cfg.threads = threads;
    });
}

dsaeem_status dsaeem_config_echo(const dsaeem_config* cfg, const char* path)
{
    return guard([&] {
        need(cfg, "config");
        need(path, "path");
        std::ofstream out(path);
        if (!out)
            throw dsaeem::DataError(std::string("cannot write ") + path);
        out << dsaeem::config_echo(cfg->cfg).dump(2) << '\n';
    });
}

dsaeem_status dsaeem_validate_config(const char* path)
{
    return guard([&] {
        need(path, "path");
        (void)dsaeem::load_config(path);
    });
}

dsaeem_status dsaeem_run(const dsaeem_config* cfg, dsaeem_log_fn log, void* user,
                         double* mean_accuracy)
{
    return guard([&] {
        need(cfg, "config");
        const auto run = dsaeem::run_experiment(cfg->cfg, sink(log, user));
        if (mean_accuracy)
            *mean_accuracy = run.cv.report.aggregate[0].mean.value_or(-1.0);
    });
}

dsaeem_status dsaeem_baseline(const dsaeem_config* cfg, const char* baselines, dsaeem_log_fn log,
                              void* user)
{
    return guard([&] {
        need(cfg, "config");
        dsaeem::run_baselines(cfg->cfg, parse_baselines(baselines ? baselines : "all"),
                              sink(log, user));
    });
}

dsaeem_status dsaeem_sweep(const dsaeem_config* cfg, const char* axes, dsaeem_log_fn log,
                           void* user)
{
    return guard([&] {
        need(cfg, "config");
        need(axes, "axes");
        dsaeem::run_sweep(cfg->cfg, dsaeem::parse_sweep_spec(axes), sink(log, user));
    });
}

dsaeem_status dsaeem_model_load(const char* path, dsaeem_model** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto m = std::make_unique<dsaeem_model>();
        m->bundle = dsaeem::load_bundle(path);
        *out = m.release();
    });
}

void dsaeem_model_free(dsaeem_model* model)
{
    delete model;
}

size_t dsaeem_model_input_dim(const dsaeem_model* model)
{
    return model ? static_cast<size_t>(model->bundle.pipeline.input_dim) : 0;
}

dsaeem_status dsaeem_predict(const dsaeem_model* model, const double* rows, size_t n, size_t m,
                             int* labels)
{
    return guard([&] {
        need(model, "model");
        need(rows, "rows");
        need(labels, "labels");
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const dsaeem::Matrix x = Eigen::Map<const RowMajor>(rows, static_cast<Eigen::Index>(n),
                                                            static_cast<Eigen::Index>(m));
        if (!dsaeem::all_finite(x))
            throw dsaeem::DataError("input contains non-finite values");
        const auto pred = model->bundle.pipeline.predict(x);
        std::copy(pred.begin(), pred.end(), labels);
    });
}

dsaeem_status dsaeem_predict_csv(const dsaeem_model* model, const char* csv_in,
                                 const char* csv_out, double* accuracy)
{
    return guard([&] {
        need(model, "model");
        need(csv_in, "input path");
        need(csv_out, "output path");
        const auto& schema = model->bundle.schema;
        std::ifstream in(csv_in);
        if (!in)
            throw dsaeem::DataError(std::string("cannot open ") + csv_in);
        std::vector<std::vector<double>> rows;
        std::vector<std::optional<int>> truth;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty() || (schema.has_header && line_no == 1))
                continue;
            std::optional<int> label;
            rows.push_back(dsaeem::parse_feature_row(line, schema, label, line_no));
            truth.push_back(label);
        }
        if (rows.empty())
            throw dsaeem::DataError(std::string(csv_in) + " has no data rows");
        dsaeem::Matrix x(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t k = 0; k < rows[i].size(); ++k)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        const auto pred = model->bundle.pipeline.predict(x);

        std::map<int, std::string> names;
        for (const auto& [text, idx] : schema.label_map)
            names.emplace(idx, text);
        const bool labelled = truth.front().has_value();
        std::ofstream out(csv_out);
        if (!out)
            throw dsaeem::DataError(std::string("cannot write ") + csv_out);
        out << (labelled ? "row,predicted,actual\n" : "row,predicted\n");
        std::size_t hits = 0, scored = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            out << i + 1 << "," << names[pred[i]];
            if (labelled && truth[i]) {
                out << "," << names[*truth[i]];
                ++scored;
                hits += *truth[i] == pred[i] ? 1 : 0;
            }
            out << "\n";
        }
        if (accuracy)
            *accuracy = scored > 0 ? static_cast<double>(hits) / static_cast<double>(scored) : -1.0;
    });
}

} // extern "C"

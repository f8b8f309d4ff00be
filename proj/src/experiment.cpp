#include "dsaeem/experiment.hpp"

#include "dsaeem/serialize.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace dsaeem {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object, tracking the keys it consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail("", "expected an object");
    }

    std::string field(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        const std::string where = key.empty() ? (path_.empty() ? "config" : path_) : field(key);
        throw ConfigError(where + ": " + msg);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_number())
            fail(key, "expected a number");
        return v->get<double>();
    }

    long integer(const std::string& key, long def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_number_integer())
            fail(key, "expected an integer");
        return v->get<long>();
    }

    std::uint64_t seed(const std::string& key, std::uint64_t def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long>() >= 0))
            fail(key, "expected a non-negative integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_boolean())
            fail(key, "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_string())
            fail(key, "expected a string");
        return v->get<std::string>();
    }

    /// A number, or the string "auto" mapped to `auto_value`.
    double number_or_auto(const std::string& key, double def, double auto_value)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (v->is_string() && v->get<std::string>() == "auto")
            return auto_value;
        if (!v->is_number())
            fail(key, "expected a number or \"auto\"");
        return v->get<double>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def)
    {
        const json* v = raw(key);
        if (!v)
            return def;
        if (!v->is_array())
            fail(key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number())
                fail(key, "expected a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section child(const std::string& key)
    {
        const json* v = raw(key);
        static const json empty = json::object();
        return Section(v ? *v : empty, field(key));
    }

    void require(bool ok, const std::string& key, const std::string& msg) const
    {
        if (!ok)
            fail(key, msg);
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(it.key(), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string resolve(const std::string& p, const std::string& base)
{
    if (p.empty() || fs::path(p).is_absolute() || base.empty())
        return p;
    return (fs::path(base) / p).lexically_normal().string();
}

std::string pad(const std::string& s, std::size_t w)
{
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

json opt(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json scores_json(const Scores& s)
{
    json j;
    for (int k = 0; k < kMetricCount; ++k)
        j[kMetricNames[k]] = opt(score_at(s, k));
    return j;
}

std::string mode_name(const Experiment& ex)
{
    return ex.plan.holdout ? "holdout" : "kfold";
}

std::string mode_text(const Experiment& ex)
{
    std::ostringstream os;
    if (ex.plan.holdout)
        os << "stratified holdout, " << ex.plan.holdout_ratio * 100.0 << "% test";
    else
        os << ex.plan.k << "-fold stratified cross-validation";
    return os.str();
}

void write_file(const fs::path& p, const std::string& content)
{
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + p.string());
    out << content;
}

class RunLog {
public:
    explicit RunLog(const LogSink& sink) : sink_(sink) {}
    void operator()(const std::string& line)
    {
        text_ += line + '\n';
        if (sink_)
            sink_(line);
    }
    const std::string& text() const { return text_; }

private:
    const LogSink& sink_;
    std::string text_;
};

std::string seconds(double s)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s << " s";
    return os.str();
}

PipelineRun run_kind(const Experiment& ex, PipelineKind kind, const PipelineConfig& pc,
                     RunLog& log)
{
    log("pipeline " + std::string(pipeline_name(kind)) + ": seed " + std::to_string(pc.seed));
    PipelineRun r;
    r.kind = kind;
    const auto t0 = std::chrono::steady_clock::now();
    r.cv = cross_validate(ex.data, ex.plan, stages_for(kind), pc, ex.schema.positive_class,
                          ex.cfg.threads);
    const auto folds = ex.plan.evaluated_folds();
    for (std::size_t i = 0; i < folds.size(); ++i) {
        log("  fold " + std::to_string(folds[i] + 1) + ": seed " +
            std::to_string(fold_seed(pc.seed, folds[i])) + ", acc " +
            format_percent(r.cv.report.folds[i].scores.acc) + ", " + seconds(r.cv.seconds[i]));
        const auto& m = r.cv.models[i];
        if (m.ensemble)
            for (const auto& line : m.ensemble->log)
                log("    " + line);
    }
    log("  total " +
        seconds(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    return r;
}

void write_run_outputs(const Experiment& ex, const std::vector<PipelineRun>& runs,
                       const fs::path& dir, bool with_models)
{
    write_file(dir / "report.json", report_json(ex, runs).dump(2) + "\n");
    write_file(dir / "metrics.txt", metrics_table(ex, runs));
    write_file(dir / "config_echo.json", config_echo(ex.cfg).dump(2) + "\n");
    write_file(dir / "fold_plan.json", ex.plan.to_json().dump() + "\n");
    if (!with_models)
        return;
    const auto folds = ex.plan.evaluated_folds();
    for (const auto& run : runs) {
        const fs::path mdir = runs.size() == 1 ? dir / "models"
                                               : dir / "models" / pipeline_name(run.kind);
        for (std::size_t i = 0; i < folds.size(); ++i)
            write_file(mdir / ("fold_" + std::to_string(folds[i] + 1) + ".json"),
                       bundle_to_json({ex.schema, run.cv.models[i]}).dump() + "\n");
    }
}

} // namespace

ExperimentConfig parse_config(const json& j, const std::string& base_dir)
{
    ExperimentConfig c;
    Section root(j, "");
    c.name = root.text("name", "experiment");

    {
        Section ds = root.child("dataset");
        ds.require(ds.has("path"), "path", "required");
        ds.require(ds.has("schema"), "schema", "required");
        c.dataset_path = resolve(ds.text("path", ""), base_dir);
        c.schema_path = resolve(ds.text("schema", ""), base_dir);
        ds.finish();
    }

    auto& pc = c.pipeline;
    const std::string norm = root.text("normalization", "min_max");
    if (norm == "min_max")
        pc.normalization = NormMethod::min_max;
    else if (norm == "z_score")
        pc.normalization = NormMethod::z_score;
    else
        root.fail("normalization", "expected \"min_max\" or \"z_score\"");

    {
        Section cv = root.child("cv");
        const std::string mode = cv.text("mode", "kfold");
        if (mode == "kfold")
            c.cv_mode = CvMode::kfold;
        else if (mode == "holdout")
            c.cv_mode = CvMode::holdout;
        else
            cv.fail("mode", "expected \"kfold\" or \"holdout\"");
        c.folds = static_cast<int>(cv.integer("k", 5));
        cv.require(c.folds >= 2, "k", "must be at least 2");
        c.holdout_ratio = cv.number("holdout_ratio", 0.2);
        cv.require(c.holdout_ratio > 0.0 && c.holdout_ratio < 1.0, "holdout_ratio",
                   "must lie in (0, 1)");
        c.fold_seed = cv.seed("seed", 1);
        cv.finish();
    }

    pc.seed = root.seed("seed", 1);
    c.threads = static_cast<int>(root.integer("threads", 1));
    root.require(c.threads >= 1, "threads", "must be at least 1");
    c.output_dir = resolve(root.text("output_dir", "results/" + c.name), base_dir);

    {
        Section f = root.child("fssae");
        auto& fc = pc.fssae;
        const auto units = f.numbers("hidden_units", {120, 40, 16});
        f.require(!units.empty(), "hidden_units", "must name at least one layer");
        fc.hidden_units.clear();
        for (double u : units) {
            f.require(u >= 1 && u == std::floor(u), "hidden_units", "entries must be positive integers");
            fc.hidden_units.push_back(static_cast<Index>(u));
        }
        if (f.has("embed_dims")) {
            const json* e = f.raw("embed_dims");
            if (e->is_string() && e->get<std::string>() == "auto") {
                fc.embed_dims.clear();
            } else {
                f.require(e->is_array(), "embed_dims", "expected a list or \"auto\"");
                for (const auto& d : *e) {
                    if (d.is_string() && d.get<std::string>() == "auto")
                        fc.embed_dims.push_back(0);
                    else if (d.is_number_integer() && d.get<long>() >= 1)
                        fc.embed_dims.push_back(d.get<Index>());
                    else
                        f.fail("embed_dims", "entries must be positive integers or \"auto\"");
                }
                f.require(fc.embed_dims.size() <= fc.hidden_units.size() - 1, "embed_dims",
                          "one entry per stacked layer after the first");
            }
        }
        fc.lambda = f.number("lambda", fc.lambda);
        f.require(fc.lambda >= 0.0, "lambda", "must be non-negative");
        fc.beta = f.number("beta", fc.beta);
        f.require(fc.beta >= 0.0, "beta", "must be non-negative");
        fc.rho = f.number("rho", fc.rho);
        f.require(fc.rho > 0.0 && fc.rho < 1.0, "rho",
                  "sparsity target must lie strictly between 0 and 1");
        fc.ae_iterations = static_cast<int>(f.integer("ae_iterations", fc.ae_iterations));
        f.require(fc.ae_iterations >= 1, "ae_iterations", "must be at least 1");
        fc.ae_learn_rate = f.number("ae_learn_rate", fc.ae_learn_rate);
        f.require(fc.ae_learn_rate > 0.0, "ae_learn_rate", "must be positive");
        fc.ae_momentum = f.number("ae_momentum", fc.ae_momentum);
        f.require(fc.ae_momentum >= 0.0 && fc.ae_momentum < 1.0, "ae_momentum",
                  "must lie in [0, 1)");
        fc.center_energies = f.boolean("center_energies", fc.center_energies);
        fc.fine_tune = f.boolean("fine_tune", fc.fine_tune);
        fc.fine_tune_iterations =
            static_cast<int>(f.integer("fine_tune_iterations", fc.fine_tune_iterations));
        f.require(fc.fine_tune_iterations >= 0, "fine_tune_iterations", "must be non-negative");
        const std::string opt_name = f.text("optimizer", "scg");
        if (opt_name == "scg")
            fc.optimizer = FineTuneOptimizer::scg;
        else if (opt_name == "gd")
            fc.optimizer = FineTuneOptimizer::gd;
        else
            f.fail("optimizer", "expected \"scg\" or \"gd\"");
        fc.fine_tune_l2 = f.number("fine_tune_l2", fc.fine_tune_l2);
        f.require(fc.fine_tune_l2 >= 0.0, "fine_tune_l2", "must be non-negative");
        fc.gd_learn_rate = f.number("gd_learn_rate", fc.gd_learn_rate);
        f.require(fc.gd_learn_rate > 0.0, "gd_learn_rate", "must be positive");
        f.finish();
    }

    {
        Section l = root.child("l1");
        pc.alpha_grid = l.numbers("alpha_grid", pc.alpha_grid);
        l.require(!pc.alpha_grid.empty(), "alpha_grid", "must not be empty");
        for (double a : pc.alpha_grid)
            l.require(a >= 0.0, "alpha_grid", "entries must be non-negative");
        pc.alpha_split = l.number("alpha_split", pc.alpha_split);
        l.require(pc.alpha_split > 0.0 && pc.alpha_split < 1.0, "alpha_split", "must lie in (0, 1)");
        pc.ista.max_iterations = static_cast<int>(l.integer("max_iterations", pc.ista.max_iterations));
        l.require(pc.ista.max_iterations >= 1, "max_iterations", "must be at least 1");
        pc.ista.tol = l.number("tol", pc.ista.tol);
        l.require(pc.ista.tol >= 0.0, "tol", "must be non-negative");
        pc.ista.standardize = l.boolean("standardize", pc.ista.standardize);
        pc.min_keep = static_cast<Index>(l.number_or_auto("min_keep", 0, 0));
        l.require(pc.min_keep >= 0, "min_keep", "must be non-negative");
        l.finish();
    }

    {
        Section w = root.child("wlpdp");
        auto& wc = pc.ensemble.wlpdp;
        wc.gamma = w.number("gamma", wc.gamma);
        w.require(wc.gamma >= 0.0, "gamma", "must be non-negative");
        const double l = w.number_or_auto("output_dim", 0, 0);
        w.require(l >= 0 && l == std::floor(l), "output_dim", "must be a positive integer or \"auto\"");
        wc.output_dim = static_cast<Index>(l);
        wc.k_nn = static_cast<Index>(w.integer("k_nn", wc.k_nn));
        w.require(wc.k_nn >= 1, "k_nn", "must be at least 1");
        wc.sigma = w.number_or_auto("sigma", 0.0, 0.0);
        w.require(wc.sigma >= 0.0, "sigma", "must be positive or \"auto\"");
        wc.eigen_reg = w.number("eigen_reg", wc.eigen_reg);
        w.require(wc.eigen_reg > 0.0, "eigen_reg", "must be positive");
        wc.local_neighbors = static_cast<Index>(w.integer("local_neighbors", 0));
        w.require(wc.local_neighbors >= 0, "local_neighbors", "must be non-negative");
        w.finish();
    }

    {
        Section e = root.child("ensemble");
        auto& ec = pc.ensemble;
        ec.members = static_cast<int>(e.integer("members", ec.members));
        e.require(ec.members >= 1, "members", "must be at least 1");
        ec.delta_s = e.number("delta_s", ec.delta_s);
        e.require(ec.delta_s > 0.0 && ec.delta_s <= 1.0, "delta_s", "must lie in (0, 1]");
        ec.delta_f = e.number("delta_f", ec.delta_f);
        e.require(ec.delta_f > 0.0 && ec.delta_f <= 1.0, "delta_f", "must lie in (0, 1]");
        ec.standardize_projection = e.boolean("standardize_projection", ec.standardize_projection);
        ec.weight_split = e.number("weight_split", ec.weight_split);
        e.require(ec.weight_split > 0.0 && ec.weight_split < 1.0, "weight_split",
                  "must lie in (0, 1)");
        ec.weight_candidates = static_cast<int>(e.integer("weight_candidates", ec.weight_candidates));
        e.require(ec.weight_candidates >= 0, "weight_candidates", "must be non-negative");
        ec.threads = static_cast<int>(e.integer("threads", ec.threads));
        e.require(ec.threads >= 1, "threads", "must be at least 1");
        e.finish();
    }

    {
        Section s = root.child("svm");
        auto& sc = pc.svm;
        const std::string kernel = s.text("kernel", "rbf");
        if (kernel == "rbf")
            sc.kernel = KernelType::rbf;
        else if (kernel == "linear")
            sc.kernel = KernelType::linear;
        else
            s.fail("kernel", "expected \"rbf\" or \"linear\"");
        sc.gamma = s.number_or_auto("gamma", 0.0, 0.0);
        s.require(sc.gamma >= 0.0, "gamma", "must be positive or \"auto\"");
        sc.c = s.number("c", sc.c);
        s.require(sc.c > 0.0, "c", "must be positive");
        sc.tol = s.number("tol", sc.tol);
        s.require(sc.tol > 0.0, "tol", "must be positive");
        sc.max_iterations = s.integer("max_iterations", sc.max_iterations);
        s.require(sc.max_iterations >= 1, "max_iterations", "must be at least 1");
        s.finish();
    }

    root.finish();
    pc.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(j, fs::path(path).parent_path().string());
}

json config_echo(const ExperimentConfig& c)
{
    const auto& pc = c.pipeline;
    const auto& fc = pc.fssae;
    const auto& wc = pc.ensemble.wlpdp;
    const auto& ec = pc.ensemble;
    const auto& sc = pc.svm;
    json embed = json::array();
    for (std::size_t k = 1; k < fc.hidden_units.size(); ++k) {
        const Index d = k - 1 < fc.embed_dims.size() ? fc.embed_dims[k - 1] : 0;
        embed.push_back(d > 0 ? json(d) : json("auto"));
    }
    return {
        {"name", c.name},
        {"dataset", {{"path", c.dataset_path}, {"schema", c.schema_path}}},
        {"normalization", pc.normalization == NormMethod::min_max ? "min_max" : "z_score"},
        {"cv",
         {{"mode", c.cv_mode == CvMode::kfold ? "kfold" : "holdout"},
          {"k", c.folds},
          {"holdout_ratio", c.holdout_ratio},
          {"seed", c.fold_seed}}},
        {"seed", pc.seed},
        {"threads", c.threads},
        {"output_dir", c.output_dir},
        {"fssae",
         {{"hidden_units", fc.hidden_units},
          {"embed_dims", embed},
          {"lambda", fc.lambda},
          {"beta", fc.beta},
          {"rho", fc.rho},
          {"ae_iterations", fc.ae_iterations},
          {"ae_learn_rate", fc.ae_learn_rate},
          {"ae_momentum", fc.ae_momentum},
          {"center_energies", fc.center_energies},
          {"fine_tune", fc.fine_tune},
          {"fine_tune_iterations", fc.fine_tune_iterations},
          {"optimizer", fc.optimizer == FineTuneOptimizer::scg ? "scg" : "gd"},
          {"fine_tune_l2", fc.fine_tune_l2},
          {"gd_learn_rate", fc.gd_learn_rate}}},
        {"l1",
         {{"alpha_grid", pc.alpha_grid},
          {"alpha_split", pc.alpha_split},
          {"max_iterations", pc.ista.max_iterations},
          {"tol", pc.ista.tol},
          {"standardize", pc.ista.standardize},
          {"min_keep", pc.min_keep > 0 ? json(pc.min_keep) : json("auto")}}},
        {"wlpdp",
         {{"gamma", wc.gamma},
          {"output_dim", wc.output_dim > 0 ? json(wc.output_dim) : json("auto")},
          {"k_nn", wc.k_nn},
          {"sigma", wc.sigma > 0 ? json(wc.sigma) : json("auto")},
          {"eigen_reg", wc.eigen_reg},
          {"local_neighbors", wc.local_neighbors}}},
        {"ensemble",
         {{"members", ec.members},
          {"delta_s", ec.delta_s},
          {"delta_f", ec.delta_f},
          {"standardize_projection", ec.standardize_projection},
          {"weight_split", ec.weight_split},
          {"weight_candidates", ec.weight_candidates},
          {"threads", ec.threads}}},
        {"svm",
         {{"kernel", sc.kernel == KernelType::rbf ? "rbf" : "linear"},
          {"gamma", sc.gamma > 0 ? json(sc.gamma) : json("auto")},
          {"c", sc.c},
          {"tol", sc.tol},
          {"max_iterations", sc.max_iterations}}},
        {"auto_policies",
         {{"fssae.embed_dims", "previous hidden size, grown until ceil(M/2) original rows are kept"},
          {"l1.min_keep", "max(3, ceil(0.1 * expanded feature count))"},
          {"wlpdp.output_dim", "min(4 * classes, subset features - 1), at least 1"},
          {"wlpdp.sigma", "median pairwise distance of the member's samples"},
          {"svm.gamma", "1 / SVM input dimension"},
          {"alpha_selection", "best plain-SVM accuracy on a stratified inner split"},
          {"weight_search", "uniform, accuracy-proportional and Dirichlet(1) candidates on a "
                            "stratified inner split; ties keep uniform"},
          {"positive_class", "from the dataset schema"}}}};
}

Experiment prepare(const ExperimentConfig& cfg)
{
    Experiment ex;
    ex.cfg = cfg;
    ex.schema = Schema::from_file(cfg.schema_path);
    ex.data = load_dataset(cfg.dataset_path, ex.schema);
    ex.plan = cfg.cv_mode == CvMode::kfold ? stratified_kfold(ex.data, cfg.folds, cfg.fold_seed)
                                           : stratified_holdout(ex.data, cfg.holdout_ratio,
                                                                cfg.fold_seed);
    return ex;
}

json report_json(const Experiment& ex, const std::vector<PipelineRun>& runs)
{
    json j;
    j["experiment"] = ex.cfg.name;
    j["dataset"] = {{"name", ex.data.name},
                    {"samples", ex.data.samples()},
                    {"features", ex.data.dims()},
                    {"classes", ex.data.class_count},
                    {"positive_class", ex.schema.positive_class}};
    j["evaluation"] = {{"mode", mode_name(ex)},
                       {"k", ex.plan.k},
                       {"holdout_ratio", ex.plan.holdout_ratio},
                       {"fold_seed", ex.plan.seed}};
    j["seed"] = ex.cfg.pipeline.seed;
    json pipelines = json::array();
    for (const auto& run : runs) {
        json p;
        p["pipeline"] = pipeline_name(run.kind);
        const auto& rep = run.cv.report;
        json folds = json::array();
        for (std::size_t i = 0; i < rep.folds.size(); ++i) {
            const auto& f = rep.folds[i];
            const auto& m = run.cv.models[i];
            json fj;
            fj["fold"] = f.fold + 1;
            fj["scores"] = scores_json(f.scores);
            fj["confusion"] = {{"tp", f.cm.tp}, {"fp", f.cm.fp}, {"fn", f.cm.fn}, {"tn", f.cm.tn}};
            fj["expanded_features"] = m.expanded_dim;
            fj["selected_features"] = m.selected;
            if (m.l1)
                fj["alpha"] = m.l1->alpha;
            if (m.ensemble) {
                json w = json::array();
                for (const auto& mem : m.ensemble->members)
                    w.push_back(mem.weight);
                fj["member_weights"] = w;
                fj["resampled_members"] = m.ensemble->log.size();
            }
            folds.push_back(fj);
        }
        p["folds"] = folds;
        json mean, sd, undef;
        for (int k = 0; k < kMetricCount; ++k) {
            mean[kMetricNames[k]] = opt(rep.aggregate[k].mean);
            sd[kMetricNames[k]] = opt(rep.aggregate[k].std);
            undef[kMetricNames[k]] = rep.aggregate[k].undefined;
        }
        p["mean"] = mean;
        p["std"] = sd;
        p["undefined_folds"] = undef;
        p["best_fold"] = rep.best_fold + 1;
        pipelines.push_back(p);
    }
    j["pipelines"] = pipelines;
    auto it = ex.schema.reference.find(mode_name(ex));
    if (it != ex.schema.reference.end()) {
        const auto& f = it->second;
        j["reference"] = {{"source", "published figures for the proposed method, percent"},
                          {"Acc", f.acc},
                          {"Prec", f.prec},
                          {"Sens", f.sens},
                          {"Spec", f.spec},
                          {"F1_score", f.f1}};
    }
    return j;
}

std::string metrics_table(const Experiment& ex, const std::vector<PipelineRun>& runs)
{
    std::ostringstream os;
    os << "Dataset: " << ex.data.name << " (N=" << ex.data.samples() << ", M=" << ex.data.dims()
       << ", C=" << ex.data.class_count << "), positive class " << ex.schema.positive_class
       << "\n";
    os << "Evaluation: " << mode_text(ex) << ", fold seed " << ex.plan.seed << ", seed "
       << ex.cfg.pipeline.seed << "\n";
    os << "Scores in percent.\n\n";
    const std::size_t w0 = 14, w1 = 10, w = 10;
    os << pad("Pipeline", w0) << pad("Row", w1);
    for (const char* n : kMetricNames)
        os << pad(n, w);
    os << "\n";
    std::vector<std::string> notes;
    for (const auto& run : runs) {
        const auto& rep = run.cv.report;
        const std::string name = pipeline_name(run.kind);
        for (const auto& f : rep.folds) {
            os << pad(name, w0) << pad("fold " + std::to_string(f.fold + 1), w1);
            for (int k = 0; k < kMetricCount; ++k)
                os << pad(format_percent(score_at(f.scores, k)), w);
            os << "\n";
        }
        if (rep.folds.size() > 1) {
            os << pad(name, w0) << pad("mean", w1);
            for (int k = 0; k < kMetricCount; ++k)
                os << pad(format_percent(rep.aggregate[k].mean), w);
            os << "\n" << pad(name, w0) << pad("std", w1);
            for (int k = 0; k < kMetricCount; ++k)
                os << pad(format_percent(rep.aggregate[k].std), w);
            os << "\n" << pad(name, w0) << pad("best", w1);
            for (const auto& f : rep.folds)
                if (f.fold == rep.best_fold)
                    for (int k = 0; k < kMetricCount; ++k)
                        os << pad(format_percent(score_at(f.scores, k)), w);
            os << "\n";
        }
        for (int k = 0; k < kMetricCount; ++k)
            if (rep.aggregate[k].undefined > 0)
                notes.push_back(name + ": " + kMetricNames[k] + " undefined in " +
                                std::to_string(rep.aggregate[k].undefined) +
                                " fold(s), left out of mean and std");
        if (rep.folds.size() > 1)
            notes.push_back(name + ": best row is fold " + std::to_string(rep.best_fold + 1) +
                            " (highest accuracy)");
    }
    auto it = ex.schema.reference.find(mode_name(ex));
    if (it != ex.schema.reference.end()) {
        const auto& f = it->second;
        std::ostringstream r;
        r << std::fixed << std::setprecision(2);
        os << pad("published", w0) << pad(mode_name(ex), w1);
        for (double v : {f.acc, f.prec, f.sens, f.spec, f.f1}) {
            r.str("");
            r << v;
            os << pad(r.str(), w);
        }
        os << "\n";
        notes.push_back("published: reference figures for comparison only");
    }
    if (!notes.empty()) {
        os << "\n";
        for (const auto& n : notes)
            os << "* " << n << "\n";
    }
    return os.str();
}

PipelineRun run_experiment(const ExperimentConfig& cfg, const LogSink& sink)
{
    RunLog log(sink);
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment ex = prepare(cfg);
    log("experiment " + cfg.name + ": " + ex.data.name + ", " + mode_text(ex) + ", fold seed " +
        std::to_string(ex.plan.seed));
    std::vector<PipelineRun> runs{run_kind(ex, PipelineKind::full, cfg.pipeline, log)};
    const fs::path dir(cfg.output_dir);
    write_run_outputs(ex, runs, dir, true);
    log("wrote " + dir.string() + " in " +
        seconds(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    write_file(dir / "run.log", log.text());
    return runs.front();
}

std::vector<PipelineRun> run_baselines(const ExperimentConfig& cfg,
                                       const std::vector<PipelineKind>& baselines,
                                       const LogSink& sink)
{
    RunLog log(sink);
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment ex = prepare(cfg);
    log("comparison " + cfg.name + ": " + ex.data.name + ", " + mode_text(ex) + ", fold seed " +
        std::to_string(ex.plan.seed));
    std::vector<PipelineRun> runs{run_kind(ex, PipelineKind::full, cfg.pipeline, log)};
    for (auto kind : baselines)
        if (kind != PipelineKind::full)
            runs.push_back(run_kind(ex, kind, cfg.pipeline, log));

    const fs::path dir(cfg.output_dir);
    write_file(dir / "comparison.json", report_json(ex, runs).dump(2) + "\n");
    write_file(dir / "comparison.txt", metrics_table(ex, runs));
    write_file(dir / "config_echo.json", config_echo(cfg).dump(2) + "\n");
    write_file(dir / "fold_plan.json", ex.plan.to_json().dump() + "\n");
    log("wrote " + dir.string() + " in " +
        seconds(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    write_file(dir / "comparison.log", log.text());
    return runs;
}

std::vector<SweepAxis> parse_sweep_spec(const std::string& spec)
{
    std::vector<SweepAxis> axes;
    std::stringstream parts(spec);
    std::string part;
    while (std::getline(parts, part, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("sweep: expected name=v1,v2,... in '" + part + "'");
        SweepAxis a;
        a.name = part.substr(0, eq);
        std::stringstream vals(part.substr(eq + 1));
        std::string v;
        while (std::getline(vals, v, ',')) {
            try {
                std::size_t used = 0;
                a.values.push_back(std::stod(v, &used));
                if (used != v.size())
                    throw std::invalid_argument(v);
            } catch (const std::exception&) {
                throw ConfigError("sweep." + a.name + ": '" + v + "' is not a number");
            }
        }
        if (a.values.empty())
            throw ConfigError("sweep." + a.name + ": empty value list");
        PipelineConfig probe;
        set_sweep_parameter(probe, a.name, a.values.front());
        axes.push_back(std::move(a));
    }
    if (axes.empty())
        throw ConfigError("sweep: empty grid");
    return axes;
}

void set_sweep_parameter(PipelineConfig& cfg, const std::string& name, double value)
{
    if (name == "rho") {
        if (!(value > 0.0 && value < 1.0))
            throw ConfigError("sweep.rho: sparsity target must lie strictly between 0 and 1");
        cfg.fssae.rho = value;
    } else if (name == "lambda") {
        if (!(value >= 0.0))
            throw ConfigError("sweep.lambda: must be non-negative");
        cfg.fssae.lambda = value;
    } else if (name == "beta") {
        if (!(value >= 0.0))
            throw ConfigError("sweep.beta: must be non-negative");
        cfg.fssae.beta = value;
    } else if (name == "gamma") {
        if (!(value >= 0.0))
            throw ConfigError("sweep.gamma: must be non-negative");
        cfg.ensemble.wlpdp.gamma = value;
    } else if (name == "c") {
        if (!(value > 0.0))
            throw ConfigError("sweep.c: must be positive");
        cfg.svm.c = value;
    } else {
        throw ConfigError("sweep: unknown parameter '" + name +
                          "' (expected rho, lambda, beta, gamma or c)");
    }
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, const std::vector<SweepAxis>& axes,
                                  const LogSink& sink)
{
    if (axes.empty())
        throw ConfigError("sweep: empty grid");
    RunLog log(sink);
    const Experiment ex = prepare(cfg);
    std::string tag;
    for (const auto& a : axes)
        tag += (tag.empty() ? "" : "_") + a.name;
    log("sweep " + tag + " on " + ex.data.name + ", " + mode_text(ex));

    std::size_t total = 1;
    for (const auto& a : axes)
        total *= a.values.size();
    std::vector<SweepPoint> points;
    for (std::size_t p = 0; p < total; ++p) {
        // Row-major over the axes: the last axis varies fastest.
        std::vector<std::size_t> idx(axes.size());
        std::size_t rest = p;
        for (std::size_t a = axes.size(); a-- > 0;) {
            idx[a] = rest % axes[a].values.size();
            rest /= axes[a].values.size();
        }
        PipelineConfig pc = cfg.pipeline;
        SweepPoint pt;
        std::string label;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double v = axes[a].values[idx[a]];
            set_sweep_parameter(pc, axes[a].name, v);
            pt.values.push_back(v);
            std::ostringstream os;
            os << axes[a].name << "=" << v;
            label += (label.empty() ? "" : " ") + os.str();
        }
        const auto t0 = std::chrono::steady_clock::now();
        pt.report = cross_validate(ex.data, ex.plan, stages_for(PipelineKind::full), pc,
                                   ex.schema.positive_class, cfg.threads)
                        .report;
        log("  " + label + ": acc " + format_percent(pt.report.aggregate[0].mean) + ", " +
            seconds(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
        points.push_back(std::move(pt));
    }

    const fs::path dir(cfg.output_dir);
    write_file(dir / ("sweep_" + tag + ".csv"), sweep_csv(axes, points));
    write_file(dir / ("sweep_" + tag + ".log"), log.text());
    return points;
}

std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepPoint>& points)
{
    std::ostringstream os;
    for (const auto& a : axes)
        os << a.name << ",";
    os << "acc_mean,acc_std,prec_mean,sens_mean,spec_mean,f1_mean\n";
    auto cell = [](const std::optional<double>& v) {
        if (!v)
            return std::string();
        std::ostringstream s;
        s << std::fixed << std::setprecision(6) << *v;
        return s.str();
    };
    for (const auto& p : points) {
        for (double v : p.values) {
            std::ostringstream s;
            s << std::setprecision(10) << v;
            os << s.str() << ",";
        }
        const auto& ag = p.report.aggregate;
        os << cell(ag[0].mean) << "," << cell(ag[0].std) << "," << cell(ag[1].mean) << ","
           << cell(ag[2].mean) << "," << cell(ag[3].mean) << "," << cell(ag[4].mean) << "\n";
    }
    return os.str();
}

} // namespace dsaeem

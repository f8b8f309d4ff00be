// Acceptance run: one PASS/FAIL line per criterion, exit status = failures.

#include "ae_support.hpp"
#include "support.hpp"

#include "dsaeem/experiment.hpp"
#include "dsaeem/fssae.hpp"
#include "dsaeem/metrics.hpp"
#include "dsaeem/reduction.hpp"
#include "dsaeem/serialize.hpp"
#include "dsaeem/sparse_ae.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace dsaeem;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail)
{
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string config_path(const std::string& name)
{
    return std::string(DSAEEM_SOURCE_DIR) + "/configs/" + name + ".json";
}

Labels random_labels(std::mt19937& g, Index n)
{
    Labels y(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    std::shuffle(y.begin(), y.end(), g);
    return y;
}

// 1. Autoencoder gradients against central differences.
void gradient_check()
{
    const auto t0 = Clock::now();
    std::mt19937 g(101);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto w = support::random_unit(5, 3, g);
        const Matrix x = support::uniform(5, 11, g, 0, 1);
        AEConfig cfg;
        cfg.input_dim = 5;
        cfg.hidden_dim = 3;
        cfg.lambda = 0.01 * u(g);
        cfg.beta = 5 * u(g);
        cfg.rho = 0.02 + 0.2 * u(g);
        cfg.group_sparsity = rep % 2 == 0;
        cfg.groups = cfg.group_sparsity ? GroupPartition::contiguous(3, 2) : GroupPartition::single(3);
        const Vector a = support::pack(ae_gradient(w, x, cfg));
        const Vector n = support::numeric_gradient(
            [&](const Vector& v) { return ae_loss(support::unpack(v, 5, 3), x, cfg); },
            support::pack(w), 1e-6);
        for (Index i = 0; i < a.size(); ++i) {
            const double scale = std::max(std::abs(a(i)), std::abs(n(i)));
            if (scale > 0)
                worst = std::max(worst, std::abs(a(i) - n(i)) / scale);
        }
    }
    const double secs = since(t0);
    report(1, worst <= 1e-4 && secs < 10.0,
           "max relative error " + fmt("%.3g", worst) + " (limit 1e-4), " + fmt("%.2f", secs) +
               " s (limit 10 s)");
}

// 2. ISTA against coordinate descent, plus the one-feature closed form.
void ista_check()
{
    std::mt19937 g(202);
    std::normal_distribution<double> z(0, 1);
    double worst = 0;
    int support_mismatch = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const Index n = std::uniform_int_distribution<Index>(10, 50)(g);
        const Index m = std::uniform_int_distribution<Index>(2, 10)(g);
        Matrix x(n, m);
        for (Index j = 0; j < m; ++j)
            for (Index i = 0; i < n; ++i)
                x(i, j) = z(g);
        Vector truth = Vector::Zero(m);
        for (Index j = 0; j < m; ++j)
            if (g() % 3 == 0)
                truth(j) = 2 * z(g);
        Vector y = x * truth;
        for (Index i = 0; i < n; ++i)
            y(i) += 0.5 * z(g);
        const double alpha = std::uniform_real_distribution<double>(0.1, 0.8)(g) *
                             2.0 * (x.transpose() * y).cwiseAbs().maxCoeff();
        IstaOptions opts;
        opts.standardize = false;
        opts.tol = 1e-15;
        opts.max_iterations = 500000;
        const auto state = ista_fit(x, y, alpha, opts);
        const Vector oracle = support::coordinate_descent_lasso(x, y, alpha);
        worst = std::max(worst, std::abs(lasso_objective(x, y, state.theta, alpha) -
                                         support::lasso_value(x, y, oracle, alpha)));
        for (Index j = 0; j < m; ++j)
            if ((state.theta(j) != 0.0) != (oracle(j) != 0.0)) {
                ++support_mismatch;
                break;
            }
    }
    IstaOptions opts;
    opts.standardize = false;
    opts.tol = 1e-15;
    const double one = ista_fit(Matrix::Ones(2, 1), Vector::Ones(2), 1.0, opts).theta(0);
    const bool ok = worst <= 1e-6 && support_mismatch == 0 && std::abs(one - 0.75) <= 1e-9;
    report(2, ok,
           "max objective gap " + fmt("%.3g", worst) + " (limit 1e-6), support mismatches " +
               std::to_string(support_mismatch) + "/25, 1-D theta " + fmt("%.12f", one));
}

// 3. Greedy G selection against exhaustive search.
void selection_check()
{
    std::mt19937 g(303);
    int mismatches = 0;
    double worst = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const Index r = std::uniform_int_distribution<Index>(2, 12)(g);
        const Index d = std::uniform_int_distribution<Index>(1, r)(g);
        const Matrix e = support::uniform(r, 10, g, 0, 1);
        const Matrix sel = fit_transform_G(e, d).selection_matrix();
        const Matrix c = e.colwise() - e.rowwise().mean();
        const double got = (sel.transpose() * c * c.transpose() * sel).trace();
        const double best = support::best_selection_trace(e, d);
        const double gap = std::abs(got - best) / std::max(1.0, best);
        worst = std::max(worst, gap);
        if (gap > 1e-12)
            ++mismatches;
    }
    report(3, mismatches == 0,
           "50 instances, " + std::to_string(mismatches) + " below the exhaustive optimum (max gap " +
               fmt("%.3g", worst) + ")");
}

// 4. Generalized eigen residuals and the Fisher direction.
void wlpdp_check()
{
    std::mt19937 g(404);
    double worst = 0;
    int pairs = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const Index m = std::uniform_int_distribution<Index>(1, 8)(g);
        const Index n = std::uniform_int_distribution<Index>(12, 40)(g);
        const Matrix x = support::uniform(n, m, g);
        const auto y = random_labels(g, n);
        WlpdpConfig cfg;
        cfg.gamma = std::uniform_real_distribution<double>(0, 1)(g);
        cfg.k_nn = 5;
        const auto s = scatter_matrices(x, y, 2);
        const auto graph = build_graph(x, cfg.k_nn, median_pairwise_distance(x));
        const auto problem = wlpdp_problem(s, x, graph.laplacian, cfg);
        const auto model = solve_wlpdp(problem, m);
        const double lhs_norm = support::sym_norm(problem.lhs);
        const double rhs_norm = support::sym_norm(problem.rhs);
        for (Index c = 0; c < model.output_dim(); ++c) {
            const Vector q = model.projection.col(c).normalized();
            const double eta = model.eta(c);
            double rel;
            if (std::isfinite(eta))
                rel = (problem.lhs * q - eta * problem.rhs * q).norm() /
                      (lhs_norm + std::abs(eta) * rhs_norm);
            else // rhs q = 0: the pair sits at eta = infinity
                rel = (problem.rhs * q).norm() / rhs_norm;
            worst = std::max(worst, rel);
            ++pairs;
        }
    }

    Matrix x(4, 2);
    x << 0, 0, 2, 0, 0, 2, 0, 4;
    const Labels y{0, 0, 1, 1};
    const auto s = scatter_matrices(x, y, 2);
    WlpdpConfig cfg;
    cfg.gamma = 0.0;
    cfg.output_dim = 1;
    cfg.k_nn = 1;
    const auto graph = build_graph(x, 1, median_pairwise_distance(x));
    const auto model = solve_wlpdp(s, x, graph.laplacian, cfg, 2);
    const Vector fisher = s.within.inverse() * Vector((Vector(2) << 1.0, -3.0).finished());
    const Vector q = model.projection.col(0);
    const double angle =
        std::acos(std::min(1.0, std::abs(q.dot(fisher)) / (q.norm() * fisher.norm())));
    report(4, worst <= 1e-8 && angle <= 1e-6,
           std::to_string(pairs) + " pairs, max relative residual " + fmt("%.3g", worst) +
               " (limit 1e-8); Fisher angle " + fmt("%.3g", angle) + " rad (limit 1e-6)");
}

// 5. Metric formulas, sentinel cases included.
void metrics_check()
{
    std::mt19937 g(505);
    std::uniform_int_distribution<long> cnt(0, 80);
    int wrong = 0, sentinels = 0;
    for (int rep = 0; rep < 100; ++rep) {
        long tp = cnt(g), fp = cnt(g), fn = cnt(g), tn = cnt(g);
        switch (rep % 10) {
        case 0: tp = fp = 0; break;
        case 1: tp = fn = 0; break;
        case 2: tn = fp = 0; break;
        case 3: tp = 0; break;
        default: break;
        }
        if (tp + fp + fn + tn == 0)
            fn = 1;
        const auto s = compute_metrics(confusion_from_counts(tp, fp, fn, tn));
        const auto h = support::hand_scores(tp, fp, fn, tn);
        const double want[5] = {h.acc, h.prec, h.sens, h.spec, h.f1};
        for (int i = 0; i < kMetricCount; ++i) {
            const auto got = score_at(s, i);
            if (std::isnan(want[i])) {
                ++sentinels;
                wrong += got.has_value() ? 1 : 0;
            } else {
                wrong += (got && *got == want[i]) ? 0 : 1;
            }
        }
    }
    report(5, wrong == 0,
           "100 matrices, " + std::to_string(wrong) + " mismatched scores, " +
               std::to_string(sentinels) + " undefined sentinels checked");
}

// 6. Laplacian quadratic form identity.
void laplacian_check()
{
    std::mt19937 g(606);
    double worst = 0;
    for (int rep = 0; rep < 30; ++rep) {
        const Index n = std::uniform_int_distribution<Index>(5, 30)(g);
        const Index m = std::uniform_int_distribution<Index>(1, 6)(g);
        const Index l = std::uniform_int_distribution<Index>(1, m)(g);
        const Matrix x = support::uniform(n, m, g);
        const auto graph = build_graph(x, std::min<Index>(7, n - 1), median_pairwise_distance(x));
        const Matrix q = support::uniform(m, l, g);
        const double lhs = (q.transpose() * x.transpose() * graph.laplacian * x * q).trace();
        double rhs = 0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                rhs += graph.affinity(i, j) *
                       (q.transpose() * (x.row(i) - x.row(j)).transpose()).squaredNorm();
        worst = std::max(worst, std::abs(lhs - 0.5 * rhs));
    }
    report(6, worst <= 1e-10, "30 instances, max |difference| " + fmt("%.3g", worst) + " (limit 1e-10)");
}

struct EndToEnd {
    Experiment ex;
    CvResult full, raw;
    double full_seconds = 0;
};

EndToEnd end_to_end(const std::string& config)
{
    EndToEnd r;
    r.ex = prepare(load_config(config_path(config)));
    const auto& c = r.ex.cfg;
    const auto t0 = Clock::now();
    r.full = cross_validate(r.ex.data, r.ex.plan, stages_for(PipelineKind::full), c.pipeline,
                            r.ex.schema.positive_class, c.threads);
    r.full_seconds = since(t0);
    r.raw = cross_validate(r.ex.data, r.ex.plan, stages_for(PipelineKind::svm_raw), c.pipeline,
                           r.ex.schema.positive_class, c.threads);
    return r;
}

// 7. End-to-end sanity on Heart and PID.
void end_to_end_check(const EndToEnd& heart, const EndToEnd& pid)
{
    auto acc = [](const CvResult& cv) { return *cv.report.aggregate[0].mean; };
    const double h_full = acc(heart.full), h_raw = acc(heart.raw);
    const double p_full = acc(pid.full), p_raw = acc(pid.raw);
    const bool heart_ok = h_full >= h_raw && h_full >= 0.85 && heart.full_seconds < 600;
    const bool pid_ok = p_full >= p_raw && p_full >= 0.70 && pid.full_seconds < 1800;
    std::ostringstream os;
    os << "Heart full " << format_percent(h_full) << "% vs svm_raw " << format_percent(h_raw)
       << "% (needs >= svm_raw and >= 85%), " << fmt("%.1f", heart.full_seconds) << " s; PID full "
       << format_percent(p_full) << "% vs svm_raw " << format_percent(p_raw)
       << "% (needs >= svm_raw and >= 70%), " << fmt("%.1f", pid.full_seconds)
       << " s; published 96.67% / 84.54%";
    report(7, heart_ok && pid_ok, os.str());
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    bool ok = true;
};

CsvTable read_csv(const std::string& path)
{
    CsvTable t;
    std::istringstream in(support::slurp(path));
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        return cells;
    };
    if (!std::getline(in, line))
        return {{}, {}, false};
    t.header = split(line);
    while (std::getline(in, line)) {
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            t.ok = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                t.ok = t.ok && used == c.size();
            } catch (const std::exception&) {
                t.ok = false;
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        t.rows.push_back(row);
    }
    return t;
}

// 8. The rho sweep and the lambda x beta grid.
void sweep_check(const fs::path& scratch)
{
    const std::vector<std::string> metric_cols{"acc_mean", "acc_std", "prec_mean",
                                               "sens_mean", "spec_mean", "f1_mean"};
    auto pid = load_config(config_path("pid_5fold"));
    pid.output_dir = (scratch / "sweep_rho").string();
    const auto t0 = Clock::now();
    run_sweep(pid, parse_sweep_spec("rho=0.02,0.04,0.06,0.08,0.1"));
    const auto rho = read_csv(pid.output_dir + "/sweep_rho.csv");
    std::vector<std::string> want{"rho"};
    want.insert(want.end(), metric_cols.begin(), metric_cols.end());
    bool rho_ok = rho.ok && rho.header == want && rho.rows.size() == 5;
    for (const auto& r : rho.rows)
        rho_ok = rho_ok && r[1] >= 0 && r[1] <= 1;

    auto heart = load_config(config_path("heart_5fold"));
    heart.output_dir = (scratch / "sweep_grid").string();
    run_sweep(heart, parse_sweep_spec("lambda=1e-5,1e-4,1e-3;beta=1,2,3,4,5,6"));
    const auto grid = read_csv(heart.output_dir + "/sweep_lambda_beta.csv");
    want = {"lambda", "beta"};
    want.insert(want.end(), metric_cols.begin(), metric_cols.end());
    bool grid_ok = grid.ok && grid.header == want && grid.rows.size() == 18;
    double widest = 0;
    if (grid_ok) {
        for (double beta = 1; beta <= 6; ++beta) {
            double lo = 1, hi = 0;
            for (const auto& r : grid.rows)
                if (r[1] == beta) {
                    lo = std::min(lo, r[2]);
                    hi = std::max(hi, r[2]);
                }
            widest = std::max(widest, hi - lo);
        }
    }
    std::ostringstream os;
    os << "rho series (PID) " << rho.rows.size() << " rows " << (rho_ok ? "well-formed" : "MALFORMED")
       << "; lambda x beta grid (Heart) " << grid.rows.size() << " rows "
       << (grid_ok ? "well-formed" : "MALFORMED") << ", widest accuracy spread over lambda at fixed beta "
       << fmt("%.2f", 100 * widest) << " pp (limit 20); " << fmt("%.0f", since(t0)) << " s";
    report(8, rho_ok && grid_ok && widest < 0.20, os.str());
}

// 9. Two identical runs give byte-identical reports.
void determinism_check(const fs::path& scratch)
{
    auto cfg = load_config(config_path("heart_5fold"));
    cfg.output_dir = (scratch / "det_a").string();
    run_experiment(cfg);
    cfg.output_dir = (scratch / "det_b").string();
    cfg.threads = 1;
    run_experiment(cfg);
    std::vector<std::string> files{"report.json", "metrics.txt", "fold_plan.json"};
    for (int f = 1; f <= cfg.folds; ++f)
        files.push_back("models/fold_" + std::to_string(f) + ".json");
    int differ = 0;
    for (const auto& f : files) {
        const auto a = support::slurp((scratch / "det_a" / f).string());
        const auto b = support::slurp((scratch / "det_b" / f).string());
        differ += (a.empty() || a != b) ? 1 : 0;
    }
    report(9, differ == 0,
           std::to_string(files.size() - static_cast<std::size_t>(differ)) + "/" +
               std::to_string(files.size()) +
               " report and model files byte-identical (Heart 5-fold, 5 threads vs 1)");
}

// 10. Held-out rows never reach the fitted parameters.
void leakage_check(const EndToEnd& heart)
{
    const auto& ex = heart.ex;
    int changed = 0, checked = 0;
    for (int f : ex.plan.evaluated_folds()) {
        Dataset mutated = ex.data;
        for (Index r : ex.plan.test_rows(f)) {
            mutated.features.row(r) = mutated.features.row(r).reverse() * 3.0;
            mutated.features.row(r).array() += 11.0;
        }
        const auto cv = cross_validate(mutated, ex.plan, stages_for(PipelineKind::full),
                                       ex.cfg.pipeline, ex.schema.positive_class, ex.cfg.threads);
        const std::size_t slot = static_cast<std::size_t>(checked);
        nlohmann::json a = heart.full.models[slot], b = cv.models[slot];
        changed += a.dump() == b.dump() ? 0 : 1;
        ++checked;
    }
    report(10, changed == 0,
           "Heart 5-fold: held-out rows of each fold rewritten, " + std::to_string(checked - changed) +
               "/" + std::to_string(checked) + " fold models bit-identical");
}

} // namespace

int main()
{
    const fs::path scratch = fs::temp_directory_path() / ("dsaeem_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    try {
        gradient_check();
        ista_check();
        selection_check();
        wlpdp_check();
        metrics_check();
        laplacian_check();
        const auto heart = end_to_end("heart_5fold");
        const auto pid = end_to_end("pid_5fold");
        end_to_end_check(heart, pid);
        sweep_check(scratch);
        determinism_check(scratch);
        leakage_check(heart);
    } catch (const std::exception& e) {
        std::printf("aborted: %s\n", e.what());
        ++failures;
    }
    fs::remove_all(scratch);
    std::printf("%d criteria failed\n", failures);
    return failures;
}

#include "dsaeem/ensemble.hpp"

#include "dsaeem/data_io.hpp"

#include <cmath>
#include <future>
#include <numeric>

namespace dsaeem {

namespace {

constexpr std::uint64_t kSplitStream = 0x51;
constexpr std::uint64_t kSubsetStream = 0x52;
constexpr std::uint64_t kWeightStream = 0x53;
constexpr std::uint64_t kRedrawStream = 0x54;
constexpr int kMaxRedraws = 100;

double vote_accuracy(const std::vector<Labels>& votes, const Vector& w, const Labels& truth,
                     int class_count)
{
    return accuracy(truth, weighted_vote(votes, w, class_count));
}

} // namespace

void EnsembleConfig::validate() const
{
    if (members < 1)
        throw ConfigError("ensemble members must be at least 1");
    if (!(delta_s > 0.0 && delta_s <= 1.0))
        throw ConfigError("delta_s must lie in (0, 1]");
    if (!(delta_f > 0.0 && delta_f <= 1.0))
        throw ConfigError("delta_f must lie in (0, 1]");
    if (!(weight_split > 0.0 && weight_split < 1.0))
        throw ConfigError("weight_split must lie in (0, 1)");
    if (weight_candidates < 0)
        throw ConfigError("weight_candidates must be non-negative");
    if (threads < 1)
        throw ConfigError("threads must be at least 1");
    wlpdp.validate();
    svm.validate();
}

Matrix EnsembleMember::transform(const Matrix& x) const
{
    Matrix z = projection.project(take_cols(x, subset.features));
    z.rowwise() -= proj_mean.transpose();
    z.array().rowwise() /= proj_scale.transpose().array();
    return z;
}

Labels EnsembleMember::predict(const Matrix& x) const
{
    return svm.predict(transform(x));
}

Vector EnsembleModel::weights() const
{
    Vector w(static_cast<Index>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i)
        w(static_cast<Index>(i)) = members[i].weight;
    return w;
}

EnsembleMember fit_member(const Matrix& x, const Labels& labels, int class_count,
                          const SubsetSpec& spec, const EnsembleConfig& cfg)
{
    EnsembleMember m;
    m.subset = spec;
    const Matrix xs = take_cols(take_rows(x, spec.samples), spec.features);
    const Labels ys = take(labels, spec.samples);
    m.projection = fit_wlpdp(xs, ys, class_count, cfg.wlpdp);
    const Matrix z = m.projection.project(xs);
    const Index l = z.cols();
    m.proj_mean = Vector::Zero(l);
    m.proj_scale = Vector::Ones(l);
    if (cfg.standardize_projection && z.rows() > 1) {
        m.proj_mean = z.colwise().mean().transpose();
        for (Index j = 0; j < l; ++j) {
            const double var = (z.col(j).array() - m.proj_mean(j)).square().sum() /
                               static_cast<double>(z.rows() - 1);
            const double sd = std::sqrt(var);
            m.proj_scale(j) = sd > 1e-12 ? sd : 1.0;
        }
    }
    Matrix zs = z;
    zs.rowwise() -= m.proj_mean.transpose();
    zs.array().rowwise() /= m.proj_scale.transpose().array();
    if (!all_finite(zs))
        throw NumericalError("member projection produced non-finite values");
    m.svm = train_svm(zs, ys, class_count, cfg.svm);
    m.train_accuracy = accuracy(ys, m.svm.predict(zs));
    return m;
}

Labels weighted_vote(const std::vector<Labels>& votes, const Vector& weights, int class_count)
{
    if (votes.empty())
        throw DataError("weighted_vote: no members");
    if (static_cast<Index>(votes.size()) != weights.size())
        throw DataError("weighted_vote: weight count does not match members");
    const std::size_t n = votes.front().size();
    Labels out(n);
    std::vector<double> tally(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(tally.begin(), tally.end(), 0.0);
        for (std::size_t t = 0; t < votes.size(); ++t)
            tally[static_cast<std::size_t>(votes[t][i])] += weights(static_cast<Index>(t));
        int best = 0;
        for (int c = 1; c < class_count; ++c)
            if (tally[static_cast<std::size_t>(c)] > tally[static_cast<std::size_t>(best)])
                best = c;
        out[i] = best;
    }
    return out;
}

Vector optimize_subspace_weights(const std::vector<Labels>& votes, const Labels& truth,
                                 int class_count, int candidates, std::uint64_t seed)
{
    if (truth.empty())
        throw DataError("weight search needs a non-empty validation set");
    if (votes.empty())
        throw DataError("weight search needs at least one member");
    const auto t = static_cast<Index>(votes.size());
    for (const auto& v : votes)
        if (v.size() != truth.size())
            throw DataError("weight search: vote length does not match validation set");

    Vector best = Vector::Constant(t, 1.0 / static_cast<double>(t));
    if (t == 1)
        return best;
    double best_acc = vote_accuracy(votes, best, truth, class_count);

    auto consider = [&](const Vector& w) {
        const double acc = vote_accuracy(votes, w, truth, class_count);
        if (acc > best_acc) {
            best_acc = acc;
            best = w;
        }
    };

    Vector prop(t);
    for (Index i = 0; i < t; ++i)
        prop(i) = accuracy(truth, votes[static_cast<std::size_t>(i)]);
    if (prop.sum() > 0.0)
        consider(prop / prop.sum());

    Rng rng(seed);
    Vector w(t);
    for (int k = 0; k < candidates; ++k) {
        for (Index i = 0; i < t; ++i)
            w(i) = rng.exponential();
        consider(w / w.sum());
    }
    return best;
}

EnsembleModel fit_ensemble(const Matrix& x, const Labels& labels, int class_count,
                           const EnsembleConfig& cfg)
{
    cfg.validate();
    if (static_cast<Index>(labels.size()) != x.rows())
        throw DataError("fit_ensemble: label count does not match rows");
    EnsembleModel model;
    model.class_count = class_count;
    model.input_dim = x.cols();
    const Index n = x.rows();
    const Index m = x.cols();

    // Rows available to the members, and the rows kept back for the weights.
    IndexList fit_rows(static_cast<std::size_t>(n)), val_rows;
    std::iota(fit_rows.begin(), fit_rows.end(), Index{0});
    if (cfg.members > 1)
        std::tie(fit_rows, val_rows) =
            stratified_split(labels, cfg.weight_split, derive_seed(cfg.seed, kSplitStream));
    const Labels fit_labels = take(labels, fit_rows);

    auto to_rows = [&](SubsetSpec spec) {
        for (auto& s : spec.samples)
            s = fit_rows[static_cast<std::size_t>(s)];
        return spec;
    };

    std::vector<SubsetSpec> specs;
    if (cfg.members == 1 && cfg.delta_s >= 1.0 && cfg.delta_f >= 1.0) {
        SubsetSpec all;
        all.samples = fit_rows;
        all.features.resize(static_cast<std::size_t>(m));
        std::iota(all.features.begin(), all.features.end(), Index{0});
        all.seed = derive_seed(cfg.seed, kSubsetStream);
        specs.push_back(std::move(all));
    } else {
        for (auto& s : make_subsets(fit_labels, class_count, m, cfg.delta_s, cfg.delta_f,
                                    cfg.members, derive_seed(cfg.seed, kSubsetStream)))
            specs.push_back(to_rows(std::move(s)));
    }

    // Each member is retrained on a fresh draw when its fit throws.
    auto train = [&](std::size_t t, std::vector<std::string>& log) {
        SubsetSpec spec = specs[t];
        for (int attempt = 0;; ++attempt) {
            try {
                return fit_member(x, labels, class_count, spec, cfg);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                if (attempt + 1 >= kMaxRedraws)
                    throw;
                log.push_back("member " + std::to_string(t) + " attempt " +
                              std::to_string(attempt) + " failed: " + e.what() + "; redrawn");
                const std::uint64_t s = derive_seed(
                    derive_seed(cfg.seed, kRedrawStream),
                    static_cast<std::uint64_t>(t) * kMaxRedraws + static_cast<std::uint64_t>(attempt));
                spec = to_rows(make_subsets(fit_labels, class_count, m, cfg.delta_s, cfg.delta_f,
                                            1, s)
                                   .front());
            }
        }
    };

    const std::size_t t_count = specs.size();
    model.members.resize(t_count);
    std::vector<std::vector<std::string>> logs(t_count);
    if (cfg.threads > 1 && t_count > 1) {
        const auto batch = static_cast<std::size_t>(cfg.threads);
        for (std::size_t start = 0; start < t_count; start += batch) {
            std::vector<std::future<EnsembleMember>> jobs;
            const std::size_t stop = std::min(t_count, start + batch);
            for (std::size_t t = start; t < stop; ++t)
                jobs.push_back(std::async(std::launch::async, train, t, std::ref(logs[t])));
            for (std::size_t t = start; t < stop; ++t)
                model.members[t] = jobs[t - start].get();
        }
    } else {
        for (std::size_t t = 0; t < t_count; ++t)
            model.members[t] = train(t, logs[t]);
    }
    for (const auto& l : logs)
        model.log.insert(model.log.end(), l.begin(), l.end());

    Vector w = Vector::Ones(1);
    if (t_count > 1) {
        const Matrix xv = take_rows(x, val_rows);
        std::vector<Labels> votes;
        for (const auto& mem : model.members)
            votes.push_back(mem.predict(xv));
        w = optimize_subspace_weights(votes, take(labels, val_rows), class_count,
                                      cfg.weight_candidates, derive_seed(cfg.seed, kWeightStream));
    }
    for (std::size_t t = 0; t < t_count; ++t)
        model.members[t].weight = w(static_cast<Index>(t));
    return model;
}

Labels predict_ensemble(const EnsembleModel& model, const Matrix& x)
{
    if (x.cols() != model.input_dim)
        throw DataError("ensemble expects " + std::to_string(model.input_dim) +
                        " features, got " + std::to_string(x.cols()));
    std::vector<Labels> votes;
    for (const auto& m : model.members)
        votes.push_back(m.predict(x));
    return weighted_vote(votes, model.weights(), model.class_count);
}

} // namespace dsaeem

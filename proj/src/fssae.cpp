#include "dsaeem/fssae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsaeem {

CombinedFeatures combine_features(const Matrix& xo, const Matrix& h_prev)
{
    if (h_prev.size() > 0 && h_prev.cols() != xo.rows())
        throw DataError("combine_features: " + std::to_string(xo.rows()) +
                        " original samples vs " + std::to_string(h_prev.cols()) +
                        " hidden samples");
    const Index m = xo.cols();
    const Index d_prev = h_prev.size() > 0 ? h_prev.rows() : 0;
    CombinedFeatures out;
    out.e.resize(m + d_prev, xo.rows());
    out.e.topRows(m) = xo.transpose();
    if (d_prev > 0)
        out.e.bottomRows(d_prev) = h_prev;
    out.origins.assign(static_cast<std::size_t>(m), FeatureOrigin::original);
    out.origins.resize(static_cast<std::size_t>(m + d_prev), FeatureOrigin::hidden);
    return out;
}

Index EmbedUnit::original_count() const
{
    return static_cast<Index>(
        std::count(origins.begin(), origins.end(), FeatureOrigin::original));
}

Matrix EmbedUnit::selection_matrix() const
{
    Matrix g = Matrix::Zero(source_rows, d());
    for (Index c = 0; c < d(); ++c)
        g(rows[static_cast<std::size_t>(c)], c) = 1.0;
    return g;
}

Matrix EmbedUnit::apply(const Matrix& e) const
{
    if (e.rows() != source_rows)
        throw DataError("embed unit expects " + std::to_string(source_rows) + " rows, got " +
                        std::to_string(e.rows()));
    Matrix out(d(), e.cols());
    for (Index c = 0; c < d(); ++c)
        out.row(c) = e.row(rows[static_cast<std::size_t>(c)]);
    return out;
}

Vector row_energies(const Matrix& e, bool center)
{
    if (!center)
        return e.rowwise().squaredNorm();
    const Vector mean = e.rowwise().mean();
    return (e.colwise() - mean).rowwise().squaredNorm();
}

namespace {

IndexList rank_by_energy(const Vector& energy)
{
    IndexList order(static_cast<std::size_t>(energy.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return energy(a) > energy(b); });
    return order;
}

EmbedUnit make_unit(const Matrix& e, const std::vector<FeatureOrigin>& origins, IndexList rows)
{
    std::sort(rows.begin(), rows.end());
    EmbedUnit unit;
    unit.source_rows = e.rows();
    unit.rows = std::move(rows);
    for (Index r : unit.rows)
        unit.origins.push_back(origins.empty() ? FeatureOrigin::original
                                               : origins[static_cast<std::size_t>(r)]);
    return unit;
}

} // namespace

EmbedUnit fit_transform_G(const Matrix& e, Index d, const std::vector<FeatureOrigin>& origins,
                          bool center)
{
    if (d < 1 || d > e.rows())
        throw ConfigError("embed dimension " + std::to_string(d) + " outside 1.." +
                          std::to_string(e.rows()));
    if (!origins.empty() && static_cast<Index>(origins.size()) != e.rows())
        throw DataError("origin tags do not match the combined feature rows");
    const auto order = rank_by_energy(row_energies(e, center));
    return make_unit(e, origins, IndexList(order.begin(), order.begin() + d));
}

EmbedUnit fit_embed_with_floor(const Matrix& e, const std::vector<FeatureOrigin>& origins,
                               Index d, Index min_original, bool center)
{
    if (d < 1)
        throw ConfigError("embed dimension must be positive");
    d = std::min(d, e.rows());
    const auto order = rank_by_energy(row_energies(e, center));
    Index originals = 0;
    for (Index i = 0; i < d; ++i)
        if (origins[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] ==
            FeatureOrigin::original)
            ++originals;
    while (originals < min_original && d < e.rows()) {
        if (origins[static_cast<std::size_t>(order[static_cast<std::size_t>(d)])] ==
            FeatureOrigin::original)
            ++originals;
        ++d;
    }
    return make_unit(e, origins, IndexList(order.begin(), order.begin() + d));
}

void FssaeConfig::validate() const
{
    if (hidden_units.empty())
        throw ConfigError("hidden_units must name at least one layer");
    for (Index h : hidden_units)
        if (h < 1)
            throw ConfigError("hidden_units entries must be positive");
    if (embed_dims.size() > hidden_units.size() - 1)
        throw ConfigError("embed_dims has more entries than there are stacked layers");
    for (Index d : embed_dims)
        if (d < 0)
            throw ConfigError("embed_dims entries must be non-negative");
    if (!(lambda >= 0.0))
        throw ConfigError("lambda must be non-negative");
    if (!(beta >= 0.0))
        throw ConfigError("beta must be non-negative");
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("rho must lie in (0, 1)");
    if (ae_iterations < 1)
        throw ConfigError("ae_iterations must be at least 1");
    if (!(ae_learn_rate > 0.0))
        throw ConfigError("ae_learn_rate must be positive");
    if (!(ae_momentum >= 0.0 && ae_momentum < 1.0))
        throw ConfigError("ae_momentum must lie in [0, 1)");
    if (fine_tune_iterations < 0)
        throw ConfigError("fine_tune_iterations must be non-negative");
    if (!(fine_tune_l2 >= 0.0))
        throw ConfigError("fine_tune_l2 must be non-negative");
    if (!(gd_learn_rate > 0.0))
        throw ConfigError("gd_learn_rate must be positive");
}

bool FssaeModel::operator==(const FssaeModel& o) const
{
    if (input_dim != o.input_dim || class_count != o.class_count || fine_tuned != o.fine_tuned ||
        units.size() != o.units.size() || embeds.size() != o.embeds.size())
        return false;
    for (std::size_t k = 0; k < units.size(); ++k)
        if (!(units[k] == o.units[k]))
            return false;
    for (std::size_t k = 0; k < embeds.size(); ++k)
        if (embeds[k].rows != o.embeds[k].rows || embeds[k].source_rows != o.embeds[k].source_rows)
            return false;
    return softmax.W == o.softmax.W && softmax.b == o.softmax.b;
}

namespace {

struct StackPass {
    std::vector<Matrix> inputs;      // x_k fed to unit k
    std::vector<Matrix> activations; // h_k
};

StackPass run_stack(const FssaeModel& model, const Matrix& xo)
{
    if (xo.cols() != model.input_dim)
        throw DataError("model expects " + std::to_string(model.input_dim) + " features, got " +
                        std::to_string(xo.cols()));
    StackPass pass;
    for (std::size_t k = 0; k < model.units.size(); ++k) {
        Matrix x = k == 0 ? Matrix(xo.transpose())
                          : model.embeds[k - 1].apply(
                                combine_features(xo, pass.activations.back()).e);
        pass.activations.push_back(encode(model.units[k], x));
        pass.inputs.push_back(std::move(x));
    }
    return pass;
}

Matrix softmax_columns(const Matrix& z)
{
    Matrix p = z;
    for (Index i = 0; i < p.cols(); ++i) {
        const double top = p.col(i).maxCoeff();
        p.col(i) = (p.col(i).array() - top).exp();
        p.col(i) /= p.col(i).sum();
    }
    return p;
}

Index parameter_count(const FssaeModel& model)
{
    Index n = 0;
    for (const auto& u : model.units)
        n += u.W1.size() + u.b1.size();
    return n + model.softmax.W.size() + model.softmax.b.size();
}

void check_labels(const FssaeModel& model, const Dataset& ds)
{
    if (static_cast<Index>(ds.labels.size()) != ds.samples())
        throw DataError("labels do not match samples");
    for (int y : ds.labels)
        if (y < 0 || y >= model.class_count)
            throw DataError("label outside the softmax class range");
}

} // namespace

std::vector<Matrix> forward_stack(const FssaeModel& model, const Matrix& xo)
{
    return run_stack(model, xo).activations;
}

Matrix deep_features(const FssaeModel& model, const Matrix& xo)
{
    if (model.units.empty())
        throw DataError("model has no units");
    return run_stack(model, xo).activations.back();
}

ExpandedData expand_features(const FssaeModel& model, const Matrix& xo)
{
    const Matrix deep = deep_features(model, xo);
    ExpandedData out;
    out.features.resize(xo.rows(), xo.cols() + deep.rows());
    out.features.leftCols(xo.cols()) = xo;
    out.features.rightCols(deep.rows()) = deep.transpose();
    out.origins.assign(static_cast<std::size_t>(xo.cols()), FeatureOrigin::original);
    out.origins.resize(static_cast<std::size_t>(out.features.cols()), FeatureOrigin::hidden);
    return out;
}

FssaeModel pretrain_fssae(const Dataset& ds, const FssaeConfig& cfg, PretrainTrace* trace)
{
    cfg.validate();
    const Matrix& xo = ds.features;
    const Index m = xo.cols();

    FssaeModel model;
    model.input_dim = m;
    model.class_count = ds.class_count;

    Matrix h_prev;
    for (std::size_t k = 0; k < cfg.hidden_units.size(); ++k) {
        AEConfig ae;
        ae.hidden_dim = cfg.hidden_units[k];
        ae.lambda = cfg.lambda;
        ae.beta = cfg.beta;
        ae.rho = cfg.rho;
        ae.max_iterations = cfg.ae_iterations;
        ae.learn_rate = cfg.ae_learn_rate;
        ae.momentum = cfg.ae_momentum;
        ae.seed = derive_seed(cfg.seed, k);

        Matrix x;
        if (k == 0) {
            x = xo.transpose();
            ae.groups = GroupPartition::single(ae.hidden_dim);
            ae.group_sparsity = false;
        } else {
            const auto combined = combine_features(xo, h_prev);
            const Index explicit_d =
                k - 1 < cfg.embed_dims.size() ? cfg.embed_dims[k - 1] : Index{0};
            EmbedUnit unit =
                explicit_d > 0
                    ? fit_transform_G(combined.e, explicit_d, combined.origins, cfg.center_energies)
                    : fit_embed_with_floor(combined.e, combined.origins, cfg.hidden_units[k - 1],
                                           std::min<Index>(m, (m + 1) / 2), cfg.center_energies);
            x = unit.apply(combined.e);
            // Hidden units split in the input's original:hidden ratio.
            const double ratio =
                static_cast<double>(unit.original_count()) / static_cast<double>(unit.d());
            const auto split = static_cast<Index>(std::floor(static_cast<double>(ae.hidden_dim) * ratio));
            ae.groups = GroupPartition::contiguous(ae.hidden_dim, split);
            ae.group_sparsity = true;
            model.embeds.push_back(std::move(unit));
        }
        ae.input_dim = x.rows();

        TrainTrace unit_trace;
        AEWeights w = train_autoencoder(x, ae, trace ? &unit_trace : nullptr);
        if (trace)
            trace->units.push_back(std::move(unit_trace));
        h_prev = encode(w, x);
        model.units.push_back(std::move(w));
        model.groups.push_back(ae.groups);
    }
    model.softmax.W = Matrix::Zero(ds.class_count, model.deep_dim());
    model.softmax.b = Vector::Zero(ds.class_count);
    return model;
}

Vector flatten_parameters(const FssaeModel& model)
{
    Vector theta(parameter_count(model));
    Index pos = 0;
    auto put = [&](const auto& block) {
        theta.segment(pos, block.size()) = Eigen::Map<const Vector>(block.data(), block.size());
        pos += block.size();
    };
    for (const auto& u : model.units) {
        put(u.W1);
        put(u.b1);
    }
    put(model.softmax.W);
    put(model.softmax.b);
    return theta;
}

void unflatten_parameters(FssaeModel& model, const Vector& theta)
{
    if (theta.size() != parameter_count(model))
        throw DataError("parameter vector length does not match the model");
    Index pos = 0;
    auto get = [&](auto& block) {
        Eigen::Map<Vector>(block.data(), block.size()) = theta.segment(pos, block.size());
        pos += block.size();
    };
    for (auto& u : model.units) {
        get(u.W1);
        get(u.b1);
    }
    get(model.softmax.W);
    get(model.softmax.b);
}

namespace {

double objective_and_gradient(const FssaeModel& model, const Dataset& ds, double l2, Vector* grad)
{
    check_labels(model, ds);
    const auto pass = run_stack(model, ds.features);
    const Matrix& top = pass.activations.back();
    const Matrix probs =
        softmax_columns((model.softmax.W * top).colwise() + model.softmax.b);
    const auto n = static_cast<double>(ds.samples());

    double ce = 0.0;
    for (Index i = 0; i < probs.cols(); ++i)
        ce -= std::log(std::max(probs(ds.labels[static_cast<std::size_t>(i)], i), 1e-300));
    ce /= n;
    double decay = model.softmax.W.squaredNorm();
    for (const auto& u : model.units)
        decay += u.W1.squaredNorm();
    const double value = ce + l2 * decay;
    if (!grad)
        return value;

    const Index m = model.input_dim;
    Matrix dz = probs;
    for (Index i = 0; i < dz.cols(); ++i)
        dz(ds.labels[static_cast<std::size_t>(i)], i) -= 1.0;
    dz /= n;

    FssaeModel g = model; // same shapes, reused as gradient storage
    g.softmax.W = dz * top.transpose() + 2.0 * l2 * model.softmax.W;
    g.softmax.b = dz.rowwise().sum();
    Matrix dh = model.softmax.W.transpose() * dz;
    for (std::size_t k = model.units.size(); k-- > 0;) {
        const Matrix& h = pass.activations[k];
        const Matrix delta = (dh.array() * h.array() * (1.0 - h.array())).matrix();
        g.units[k].W1 = delta * pass.inputs[k].transpose() + 2.0 * l2 * model.units[k].W1;
        g.units[k].b1 = delta.rowwise().sum();
        if (k == 0)
            break;
        const Matrix dx = model.units[k].W1.transpose() * delta;
        const auto& embed = model.embeds[k - 1];
        Matrix dprev = Matrix::Zero(pass.activations[k - 1].rows(), dx.cols());
        for (Index c = 0; c < embed.d(); ++c) {
            const Index src = embed.rows[static_cast<std::size_t>(c)];
            if (src >= m)
                dprev.row(src - m) += dx.row(c);
        }
        dh = std::move(dprev);
    }
    *grad = flatten_parameters(g);
    return value;
}

} // namespace

double fine_tune_objective(const FssaeModel& model, const Dataset& ds, double l2)
{
    return objective_and_gradient(model, ds, l2, nullptr);
}

Vector fine_tune_gradient(const FssaeModel& model, const Dataset& ds, double l2)
{
    Vector g;
    objective_and_gradient(model, ds, l2, &g);
    return g;
}

FssaeModel fine_tune(FssaeModel model, const Dataset& ds, const FssaeConfig& cfg,
                     OptimTrace* trace)
{
    if (cfg.fine_tune_iterations == 0)
        return model;
    if (model.units.empty())
        throw DataError("cannot fine-tune an empty model");
    FssaeModel work = model;
    const Objective f = [&](const Vector& theta, Vector* grad) {
        unflatten_parameters(work, theta);
        return objective_and_gradient(work, ds, cfg.fine_tune_l2, grad);
    };
    Vector theta = flatten_parameters(model);
    if (cfg.optimizer == FineTuneOptimizer::scg) {
        ScgOptions opts;
        opts.max_iterations = cfg.fine_tune_iterations;
        theta = scg_minimize(f, theta, opts, trace);
    } else {
        GdOptions opts;
        opts.max_iterations = cfg.fine_tune_iterations;
        opts.learn_rate = cfg.gd_learn_rate;
        theta = gd_minimize(f, theta, opts, trace);
    }
    if (!theta.allFinite())
        throw NumericalError("fine-tuning produced non-finite parameters");
    unflatten_parameters(model, theta);
    model.fine_tuned = true;
    return model;
}

FssaeModel train_fssae(const Dataset& ds, const FssaeConfig& cfg)
{
    FssaeModel model = pretrain_fssae(ds, cfg);
    if (cfg.fine_tune)
        model = fine_tune(std::move(model), ds, cfg);
    return model;
}

Labels softmax_predict(const FssaeModel& model, const Matrix& xo)
{
    const Matrix top = deep_features(model, xo);
    const Matrix z = (model.softmax.W * top).colwise() + model.softmax.b;
    Labels out(static_cast<std::size_t>(z.cols()));
    for (Index i = 0; i < z.cols(); ++i) {
        Index best = 0;
        z.col(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

} // namespace dsaeem

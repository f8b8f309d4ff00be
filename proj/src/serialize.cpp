#include "dsaeem/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace dsaeem {

using nlohmann::json;

namespace {

json number(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j)
{
    if (j.is_number())
        return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    throw DataError("model file: unexpected number '" + s + "'");
}

const char* kernel_name(KernelType k)
{
    return k == KernelType::linear ? "linear" : "rbf";
}

KernelType kernel_from(const std::string& s)
{
    if (s == "linear")
        return KernelType::linear;
    if (s == "rbf")
        return KernelType::rbf;
    throw DataError("model file: unknown kernel '" + s + "'");
}

json origins_to_json(const std::vector<FeatureOrigin>& o)
{
    std::string s;
    for (auto f : o)
        s += f == FeatureOrigin::original ? 'o' : 'h';
    return s;
}

std::vector<FeatureOrigin> origins_from(const json& j)
{
    std::vector<FeatureOrigin> o;
    for (char c : j.get<std::string>())
        o.push_back(c == 'o' ? FeatureOrigin::original : FeatureOrigin::hidden);
    return o;
}

} // namespace

json matrix_to_json(const Matrix& m)
{
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index k = 0; k < m.cols(); ++k)
            data.push_back(number(m(i, k)));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j)
{
    const auto r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != r * c)
        throw DataError("model file: matrix data has the wrong length");
    Matrix m(r, c);
    std::size_t p = 0;
    for (Index i = 0; i < r; ++i)
        for (Index k = 0; k < c; ++k)
            m(i, k) = number_from(data[p++]);
    return m;
}

json vector_to_json(const Vector& v)
{
    json data = json::array();
    for (Index i = 0; i < v.size(); ++i)
        data.push_back(number(v(i)));
    return data;
}

Vector vector_from_json(const json& j)
{
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = number_from(j[i]);
    return v;
}

void to_json(json& j, const AEWeights& w)
{
    j = {{"W1", matrix_to_json(w.W1)},
         {"b1", vector_to_json(w.b1)},
         {"W2", matrix_to_json(w.W2)},
         {"b2", vector_to_json(w.b2)}};
}

void from_json(const json& j, AEWeights& w)
{
    w.W1 = matrix_from_json(j.at("W1"));
    w.b1 = vector_from_json(j.at("b1"));
    w.W2 = matrix_from_json(j.at("W2"));
    w.b2 = vector_from_json(j.at("b2"));
}

void to_json(json& j, const GroupPartition& g)
{
    j = {{"first", g.first}, {"second", g.second}};
}

void from_json(const json& j, GroupPartition& g)
{
    g.first = j.at("first").get<IndexList>();
    g.second = j.at("second").get<IndexList>();
}

void to_json(json& j, const EmbedUnit& e)
{
    j = {{"source_rows", e.source_rows}, {"rows", e.rows}, {"origins", origins_to_json(e.origins)}};
}

void from_json(const json& j, EmbedUnit& e)
{
    e.source_rows = j.at("source_rows").get<Index>();
    e.rows = j.at("rows").get<IndexList>();
    e.origins = origins_from(j.at("origins"));
}

void to_json(json& j, const FssaeModel& m)
{
    j = {{"input_dim", m.input_dim},
         {"class_count", m.class_count},
         {"units", m.units},
         {"embeds", m.embeds},
         {"groups", m.groups},
         {"softmax", {{"W", matrix_to_json(m.softmax.W)}, {"b", vector_to_json(m.softmax.b)}}},
         {"fine_tuned", m.fine_tuned}};
}

void from_json(const json& j, FssaeModel& m)
{
    m.input_dim = j.at("input_dim").get<Index>();
    m.class_count = j.at("class_count").get<int>();
    m.units = j.at("units").get<std::vector<AEWeights>>();
    m.embeds = j.at("embeds").get<std::vector<EmbedUnit>>();
    m.groups = j.at("groups").get<std::vector<GroupPartition>>();
    m.softmax.W = matrix_from_json(j.at("softmax").at("W"));
    m.softmax.b = vector_from_json(j.at("softmax").at("b"));
    m.fine_tuned = j.at("fine_tuned").get<bool>();
}

void to_json(json& j, const L1SelectorState& s)
{
    json trace = json::array();
    for (double v : s.objective_trace)
        trace.push_back(number(v));
    j = {{"theta", vector_to_json(s.theta)},
         {"alpha", s.alpha},
         {"step_constant", s.step_constant},
         {"iterations", s.iterations},
         {"converged", s.converged},
         {"selected", s.selected},
         {"objective_trace", std::move(trace)}};
}

void from_json(const json& j, L1SelectorState& s)
{
    s.theta = vector_from_json(j.at("theta"));
    s.alpha = j.at("alpha").get<double>();
    s.step_constant = j.at("step_constant").get<double>();
    s.iterations = j.at("iterations").get<int>();
    s.converged = j.at("converged").get<bool>();
    s.selected = j.at("selected").get<IndexList>();
    s.objective_trace.clear();
    for (const auto& v : j.at("objective_trace"))
        s.objective_trace.push_back(number_from(v));
}

void to_json(json& j, const WlpdpModel& m)
{
    j = {{"projection", matrix_to_json(m.projection)},
         {"eta", vector_to_json(m.eta)},
         {"mu", vector_to_json(m.mu)},
         {"requested_dim", m.requested_dim}};
}

void from_json(const json& j, WlpdpModel& m)
{
    m.projection = matrix_from_json(j.at("projection"));
    m.eta = vector_from_json(j.at("eta"));
    m.mu = vector_from_json(j.at("mu"));
    m.requested_dim = j.at("requested_dim").get<Index>();
}

void to_json(json& j, const SubsetSpec& s)
{
    j = {{"samples", s.samples}, {"features", s.features}, {"seed", s.seed}};
}

void from_json(const json& j, SubsetSpec& s)
{
    s.samples = j.at("samples").get<IndexList>();
    s.features = j.at("features").get<IndexList>();
    s.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const BinarySvm& m)
{
    j = {{"positive_class", m.positive_class},
         {"support_vectors", matrix_to_json(m.support_vectors)},
         {"coef", vector_to_json(m.coef)},
         {"alpha", vector_to_json(m.alpha)},
         {"rho", m.rho},
         {"iterations", m.iterations},
         {"kkt_gap", number(m.kkt_gap)}};
}

void from_json(const json& j, BinarySvm& m)
{
    m.positive_class = j.at("positive_class").get<int>();
    m.support_vectors = matrix_from_json(j.at("support_vectors"));
    m.coef = vector_from_json(j.at("coef"));
    m.alpha = vector_from_json(j.at("alpha"));
    m.rho = j.at("rho").get<double>();
    m.iterations = j.at("iterations").get<long>();
    m.kkt_gap = number_from(j.at("kkt_gap"));
}

void to_json(json& j, const SvmModel& m)
{
    j = {{"kernel", kernel_name(m.kernel)},
         {"gamma", m.gamma},
         {"c", m.c},
         {"class_count", m.class_count},
         {"input_dim", m.input_dim},
         {"machines", m.machines}};
}

void from_json(const json& j, SvmModel& m)
{
    m.kernel = kernel_from(j.at("kernel").get<std::string>());
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    m.class_count = j.at("class_count").get<int>();
    m.input_dim = j.at("input_dim").get<Index>();
    m.machines = j.at("machines").get<std::vector<BinarySvm>>();
}

void to_json(json& j, const EnsembleMember& m)
{
    j = {{"subset", m.subset},
         {"projection", m.projection},
         {"proj_mean", vector_to_json(m.proj_mean)},
         {"proj_scale", vector_to_json(m.proj_scale)},
         {"svm", m.svm},
         {"weight", m.weight},
         {"train_accuracy", m.train_accuracy}};
}

void from_json(const json& j, EnsembleMember& m)
{
    m.subset = j.at("subset").get<SubsetSpec>();
    m.projection = j.at("projection").get<WlpdpModel>();
    m.proj_mean = vector_from_json(j.at("proj_mean"));
    m.proj_scale = vector_from_json(j.at("proj_scale"));
    m.svm = j.at("svm").get<SvmModel>();
    m.weight = j.at("weight").get<double>();
    m.train_accuracy = j.at("train_accuracy").get<double>();
}

void to_json(json& j, const EnsembleModel& m)
{
    j = {{"class_count", m.class_count},
         {"input_dim", m.input_dim},
         {"members", m.members},
         {"log", m.log}};
}

void from_json(const json& j, EnsembleModel& m)
{
    m.class_count = j.at("class_count").get<int>();
    m.input_dim = j.at("input_dim").get<Index>();
    m.members = j.at("members").get<std::vector<EnsembleMember>>();
    m.log = j.at("log").get<std::vector<std::string>>();
    double sum = 0.0;
    for (const auto& mem : m.members) {
        if (!(mem.weight >= 0.0))
            throw DataError("model file: negative member weight");
        if (mem.projection.input_dim() != static_cast<Index>(mem.subset.features.size()))
            throw DataError("model file: member projection does not match its feature subset");
        sum += mem.weight;
    }
    if (!m.members.empty() && std::abs(sum - 1.0) > 1e-9)
        throw DataError("model file: member weights do not sum to 1");
}

void to_json(json& j, const NormalizationSpec& n)
{
    j = {{"method", n.method == NormMethod::min_max ? "min_max" : "z_score"},
         {"first", vector_to_json(n.first)},
         {"second", vector_to_json(n.second)}};
}

void from_json(const json& j, NormalizationSpec& n)
{
    const auto method = j.at("method").get<std::string>();
    if (method == "min_max")
        n.method = NormMethod::min_max;
    else if (method == "z_score")
        n.method = NormMethod::z_score;
    else
        throw DataError("model file: unknown normalization '" + method + "'");
    n.first = vector_from_json(j.at("first"));
    n.second = vector_from_json(j.at("second"));
}

void to_json(json& j, const FittedPipeline& p)
{
    json alpha = json::array();
    for (const auto& a : p.alpha_scores)
        alpha.push_back({{"alpha", a.alpha}, {"selected", a.selected}, {"accuracy", a.accuracy}});
    j = {{"stages", {{"fssae", p.stages.fssae}, {"l1", p.stages.l1}, {"stage2", p.stages.stage2}}},
         {"class_count", p.class_count},
         {"input_dim", p.input_dim},
         {"normalization", p.norm},
         {"fssae", p.fssae ? json(*p.fssae) : json(nullptr)},
         {"expanded_dim", p.expanded_dim},
         {"l1", p.l1 ? json(*p.l1) : json(nullptr)},
         {"alpha_scores", std::move(alpha)},
         {"selected", p.selected},
         {"ensemble", p.ensemble ? json(*p.ensemble) : json(nullptr)},
         {"svm", p.svm ? json(*p.svm) : json(nullptr)}};
}

void from_json(const json& j, FittedPipeline& p)
{
    const auto& st = j.at("stages");
    p.stages = {st.at("fssae").get<bool>(), st.at("l1").get<bool>(), st.at("stage2").get<bool>()};
    p.class_count = j.at("class_count").get<int>();
    p.input_dim = j.at("input_dim").get<Index>();
    p.norm = j.at("normalization").get<NormalizationSpec>();
    p.fssae.reset();
    if (!j.at("fssae").is_null())
        p.fssae = j.at("fssae").get<FssaeModel>();
    p.expanded_dim = j.at("expanded_dim").get<Index>();
    p.l1.reset();
    if (!j.at("l1").is_null())
        p.l1 = j.at("l1").get<L1SelectorState>();
    p.alpha_scores.clear();
    for (const auto& a : j.at("alpha_scores"))
        p.alpha_scores.push_back(
            {a.at("alpha").get<double>(), a.at("selected").get<Index>(), a.at("accuracy").get<double>()});
    p.selected = j.at("selected").get<IndexList>();
    p.ensemble.reset();
    if (!j.at("ensemble").is_null())
        p.ensemble = j.at("ensemble").get<EnsembleModel>();
    p.svm.reset();
    if (!j.at("svm").is_null())
        p.svm = j.at("svm").get<SvmModel>();
    if (!p.ensemble && !p.svm)
        throw DataError("model file: no classifier stored");
}

json bundle_to_json(const ModelBundle& b)
{
    return {{"format", "dsaeem-model"},
            {"version", kModelFormatVersion},
            {"schema", b.schema.to_json()},
            {"pipeline", b.pipeline}};
}

ModelBundle bundle_from_json(const json& j)
{
    try {
        if (j.at("format").get<std::string>() != "dsaeem-model")
            throw DataError("not a model bundle");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw DataError("unsupported model format version " + std::to_string(version));
        ModelBundle b;
        b.schema = Schema::from_json(j.at("schema"));
        b.pipeline = j.at("pipeline").get<FittedPipeline>();
        return b;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_bundle(const std::string& path, const ModelBundle& b)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path);
    out << bundle_to_json(b).dump() << '\n';
}

ModelBundle load_bundle(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open model file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + ": " + e.what());
    }
    return bundle_from_json(j);
}

} // namespace dsaeem

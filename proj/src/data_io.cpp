#include "dsaeem/data_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dsaeem {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_cells(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

bool is_missing_token(const std::string& s)
{
    return s.empty() || s == "?" || s == "NA" || s == "na" || s == "NaN" || s == "nan" ||
           s == "null";
}

std::optional<double> parse_number(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        return std::nullopt;
    return v;
}

int map_label(const std::string& raw, const Schema& schema, std::size_t line_no)
{
    auto it = schema.label_map.find(raw);
    if (it == schema.label_map.end()) {
        // Numeric labels may be written as "1.0" where the schema says "1".
        if (auto v = parse_number(raw)) {
            std::ostringstream canon;
            canon << *v;
            it = schema.label_map.find(canon.str());
        }
    }
    if (it == schema.label_map.end())
        throw DataError("row " + std::to_string(line_no) + ": unknown label value '" + raw + "'");
    return it->second;
}

} // namespace

void Dataset::validate() const
{
    if (static_cast<Index>(labels.size()) != features.rows())
        throw DataError("dataset '" + name + "': " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(features.rows()) + " rows");
    if (class_count < 1)
        throw DataError("dataset '" + name + "': class count must be positive");
    std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) {
        if (y < 0 || y >= class_count)
            throw DataError("dataset '" + name + "': label " + std::to_string(y) +
                            " outside 0.." + std::to_string(class_count - 1));
        ++seen[static_cast<std::size_t>(y)];
    }
    for (int c = 0; c < class_count; ++c)
        if (seen[static_cast<std::size_t>(c)] == 0)
            throw DataError("dataset '" + name + "': class " + std::to_string(c) +
                            " has no samples");
    if (!features.allFinite())
        throw DataError("dataset '" + name + "': non-finite feature values");
}

Dataset Dataset::subset(const IndexList& rows) const
{
    Dataset out;
    out.features = take_rows(features, rows);
    out.labels = take(labels, rows);
    out.class_count = class_count;
    out.name = name;
    return out;
}

Schema Schema::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("schema file not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("schema " + path + ": " + e.what());
    }
    return from_json(j);
}

Schema Schema::from_json(const nlohmann::json& j)
{
    Schema s;
    try {
        s.name = j.at("name").get<std::string>();
        s.columns = j.at("columns").get<int>();
        s.label_column = j.value("label_column", s.columns - 1);
        s.has_header = j.value("has_header", false);
        for (auto& [k, v] : j.at("label_map").items())
            s.label_map[k] = v.get<int>();
        s.positive_class = j.value("positive_class", 1);
        if (j.contains("feature_names"))
            s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto policy = j.value("missing_policy", std::string("reject"));
        if (policy == "reject")
            s.missing = MissingPolicy::reject;
        else if (policy == "impute_mean")
            s.missing = MissingPolicy::impute_mean;
        else
            throw DataError("schema: unknown missing_policy '" + policy + "'");
        if (j.contains("reference")) {
            for (auto& [mode, r] : j.at("reference").items()) {
                PublishedFigures f;
                f.acc = r.value("acc", 0.0);
                f.prec = r.value("prec", 0.0);
                f.sens = r.value("sens", 0.0);
                f.spec = r.value("spec", 0.0);
                f.f1 = r.value("f1", 0.0);
                s.reference[mode] = f;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema: ") + e.what());
    }
    if (s.columns < 2 || s.label_column < 0 || s.label_column >= s.columns)
        throw DataError("schema '" + s.name + "': label column outside the column range");
    if (s.label_map.empty())
        throw DataError("schema '" + s.name + "': empty label_map");
    return s;
}

nlohmann::json Schema::to_json() const
{
    nlohmann::json j;
    j["name"] = name;
    j["columns"] = columns;
    j["label_column"] = label_column;
    j["has_header"] = has_header;
    j["label_map"] = label_map;
    j["positive_class"] = positive_class;
    j["feature_names"] = feature_names;
    j["missing_policy"] = missing == MissingPolicy::reject ? "reject" : "impute_mean";
    nlohmann::json ref = nlohmann::json::object();
    for (const auto& [mode, f] : reference)
        ref[mode] = {{"acc", f.acc}, {"prec", f.prec}, {"sens", f.sens}, {"spec", f.spec},
                     {"f1", f.f1}};
    j["reference"] = ref;
    return j;
}

std::vector<double> parse_feature_row(const std::string& line, const Schema& schema,
                                      std::optional<int>& label, std::size_t line_no)
{
    const auto cells = split_cells(line);
    const auto n = static_cast<int>(cells.size());
    const bool with_label = n == schema.columns;
    if (!with_label && n != schema.columns - 1)
        throw DataError("row " + std::to_string(line_no) + ": expected " +
                        std::to_string(schema.columns) + " columns, found " + std::to_string(n));
    label.reset();
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(schema.columns - 1));
    for (int c = 0; c < n; ++c) {
        if (with_label && c == schema.label_column) {
            label = map_label(cells[static_cast<std::size_t>(c)], schema, line_no);
            continue;
        }
        const auto& cell = cells[static_cast<std::size_t>(c)];
        auto v = parse_number(cell);
        if (!v)
            throw DataError("row " + std::to_string(line_no) + ", column " + std::to_string(c) +
                            ": " + (is_missing_token(cell) ? "missing value" : "non-numeric cell") +
                            " '" + cell + "'");
        row.push_back(*v);
    }
    return row;
}

Dataset load_dataset(const std::string& path, const Schema& schema)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("data file not found: " + path);

    const auto m = static_cast<std::size_t>(schema.columns - 1);
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> missing;
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = schema.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split_cells(line);
        if (cells.size() != static_cast<std::size_t>(schema.columns))
            throw DataError(path + ": row " + std::to_string(line_no) + ": expected " +
                            std::to_string(schema.columns) + " columns, found " +
                            std::to_string(cells.size()));
        std::vector<double> row;
        std::vector<bool> miss;
        row.reserve(m);
        int label = -1;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == schema.label_column) {
                label = map_label(cells[c], schema, line_no);
                continue;
            }
            auto v = parse_number(cells[c]);
            if (!v) {
                if (is_missing_token(cells[c]) && schema.missing == MissingPolicy::impute_mean) {
                    row.push_back(0.0);
                    miss.push_back(true);
                    continue;
                }
                throw DataError(path + ": row " + std::to_string(line_no) + ", column " +
                                std::to_string(c) + ": " +
                                (is_missing_token(cells[c]) ? "missing value" : "non-numeric cell") +
                                " '" + cells[c] + "'");
            }
            row.push_back(*v);
            miss.push_back(false);
        }
        rows.push_back(std::move(row));
        missing.push_back(std::move(miss));
        labels.push_back(label);
    }
    if (rows.empty())
        throw DataError(path + ": no data rows");

    Dataset ds;
    ds.name = schema.name;
    ds.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(m));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m; ++j)
            ds.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];

    if (schema.missing == MissingPolicy::impute_mean) {
        for (std::size_t j = 0; j < m; ++j) {
            double sum = 0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (!missing[i][j]) {
                    sum += rows[i][j];
                    ++count;
                }
            if (count == 0)
                throw DataError(path + ": column " + std::to_string(j) + " has no values");
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (missing[i][j])
                    ds.features(static_cast<Index>(i), static_cast<Index>(j)) =
                        sum / static_cast<double>(count);
        }
    }

    ds.labels = std::move(labels);
    int max_class = 0;
    for (const auto& [_, v] : schema.label_map)
        max_class = std::max(max_class, v);
    ds.class_count = max_class + 1;
    ds.validate();
    return ds;
}

NormalizationSpec fit_normalization(const Matrix& x, NormMethod method)
{
    NormalizationSpec spec;
    spec.method = method;
    const Index m = x.cols();
    spec.first.resize(m);
    spec.second.resize(m);
    if (x.rows() == 0)
        throw DataError("cannot fit normalization on zero rows");
    for (Index j = 0; j < m; ++j) {
        const auto col = x.col(j);
        if (method == NormMethod::min_max) {
            spec.first(j) = col.minCoeff();
            spec.second(j) = col.maxCoeff();
        } else {
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() / static_cast<double>(x.rows());
            if (!(var > 0.0))
                throw DataError("feature " + std::to_string(j) +
                                " has zero variance; z_score undefined");
            spec.first(j) = mean;
            spec.second(j) = std::sqrt(var);
        }
    }
    return spec;
}

Matrix apply_normalization(const Matrix& x, const NormalizationSpec& spec)
{
    if (spec.first.size() != x.cols() || spec.second.size() != x.cols())
        throw DataError("normalization spec has " + std::to_string(spec.first.size()) +
                        " features, data has " + std::to_string(x.cols()));
    Matrix out(x.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        if (spec.method == NormMethod::min_max) {
            const double range = spec.second(j) - spec.first(j);
            if (range > 0.0)
                out.col(j) = (x.col(j).array() - spec.first(j)) / range;
            else
                out.col(j).setZero();
        } else {
            out.col(j) = (x.col(j).array() - spec.first(j)) / spec.second(j);
        }
    }
    return out;
}

std::pair<Dataset, NormalizationSpec> normalize(const Dataset& ds, NormMethod method)
{
    auto spec = fit_normalization(ds.features, method);
    return {apply_normalization(ds, spec), std::move(spec)};
}

Dataset apply_normalization(const Dataset& ds, const NormalizationSpec& spec)
{
    Dataset out = ds;
    out.features = apply_normalization(ds.features, spec);
    return out;
}

std::vector<int> FoldPlan::evaluated_folds() const
{
    if (holdout)
        return {1};
    std::vector<int> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f)
        folds[static_cast<std::size_t>(f)] = f;
    return folds;
}

IndexList FoldPlan::train_rows(int fold) const
{
    IndexList rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold)
            rows.push_back(static_cast<Index>(i));
    return rows;
}

IndexList FoldPlan::test_rows(int fold) const
{
    IndexList rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold)
            rows.push_back(static_cast<Index>(i));
    return rows;
}

nlohmann::json FoldPlan::to_json() const
{
    return {{"k", k},
            {"seed", seed},
            {"holdout", holdout},
            {"holdout_ratio", holdout_ratio},
            {"assignments", assignments}};
}

FoldPlan FoldPlan::from_json(const nlohmann::json& j)
{
    FoldPlan p;
    p.k = j.at("k").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.holdout = j.value("holdout", false);
    p.holdout_ratio = j.value("holdout_ratio", 0.0);
    p.assignments = j.at("assignments").get<std::vector<int>>();
    return p;
}

namespace {

std::vector<IndexList> shuffled_class_members(const Labels& labels, int class_count, Rng& rng)
{
    std::vector<IndexList> members(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i)
        members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
    for (auto& m : members)
        rng.shuffle(m.begin(), m.end());
    return members;
}

} // namespace

FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed)
{
    if (k < 2)
        throw ConfigError("fold count must be at least 2, got " + std::to_string(k));
    Rng rng(seed);
    const auto members = shuffled_class_members(ds.labels, ds.class_count, rng);
    for (std::size_t c = 0; c < members.size(); ++c)
        if (static_cast<int>(members[c].size()) < k)
            throw DataError("class " + std::to_string(c) + " has " +
                            std::to_string(members[c].size()) + " samples, fewer than k=" +
                            std::to_string(k));

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(ds.labels.size(), -1);
    // Dealing the concatenated class lists round-robin balances both the
    // per-class and the total fold sizes.
    std::size_t pos = 0;
    for (const auto& m : members)
        for (Index i : m)
            plan.assignments[static_cast<std::size_t>(i)] = static_cast<int>(pos++ % k);
    return plan;
}

std::pair<IndexList, IndexList> stratified_split(const Labels& labels, double ratio,
                                                 std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("split ratio must lie in (0, 1)");
    Rng rng(seed);
    const auto members = shuffled_class_members(labels, count_classes(labels), rng);
    IndexList train, val;
    for (const auto& m : members) {
        const auto n = m.size();
        auto n_val = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
        if (n >= 2)
            n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
        else
            n_val = 0;
        for (std::size_t i = 0; i < n; ++i)
            (i < n_val ? val : train).push_back(m[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {train, val};
}

FoldPlan stratified_holdout(const Dataset& ds, double test_ratio, std::uint64_t seed)
{
    auto [train, test] = stratified_split(ds.labels, test_ratio, seed);
    (void)train;
    FoldPlan plan;
    plan.k = 2;
    plan.seed = seed;
    plan.holdout = true;
    plan.holdout_ratio = test_ratio;
    plan.assignments.assign(ds.labels.size(), 0);
    for (Index i : test)
        plan.assignments[static_cast<std::size_t>(i)] = 1;
    return plan;
}

} // namespace dsaeem

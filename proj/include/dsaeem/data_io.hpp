#pragma once

#include "dsaeem/common.hpp"

#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace dsaeem {

/// Sample-major feature matrix with class indices in 0..C-1.
struct Dataset {
    Matrix features; // N x M
    Labels labels;   // length N
    int class_count = 0;
    std::string name;

    Index samples() const { return features.rows(); }
    Index dims() const { return features.cols(); }

    /// Throws DataError if any invariant is broken.
    void validate() const;
    Dataset subset(const IndexList& rows) const;
};

enum class MissingPolicy { reject, impute_mean };

struct PublishedFigures {
    double acc = 0, prec = 0, sens = 0, spec = 0, f1 = 0;
};

/// Describes a comma-separated file layout and its class encoding.
struct Schema {
    std::string name;
    int columns = 0;
    int label_column = -1;
    bool has_header = false;
    std::map<std::string, int> label_map;
    int positive_class = 1;
    std::vector<std::string> feature_names;
    MissingPolicy missing = MissingPolicy::reject;
    std::map<std::string, PublishedFigures> reference;

    static Schema from_file(const std::string& path);
    static Schema from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

Dataset load_dataset(const std::string& path, const Schema& schema);

/// Parses one feature row laid out per `schema`. When the row has one fewer
/// cell than the schema (label omitted) `label` is left empty.
std::vector<double> parse_feature_row(const std::string& line, const Schema& schema,
                                      std::optional<int>& label, std::size_t line_no);

enum class NormMethod { min_max, z_score };

struct NormalizationSpec {
    NormMethod method = NormMethod::min_max;
    Vector first;  // min (min_max) or mean (z_score)
    Vector second; // max (min_max) or stddev (z_score)
};

NormalizationSpec fit_normalization(const Matrix& x, NormMethod method);
Matrix apply_normalization(const Matrix& x, const NormalizationSpec& spec);

/// Fits on `ds` and returns the normalized copy together with the fitted spec.
std::pair<Dataset, NormalizationSpec> normalize(const Dataset& ds, NormMethod method);
Dataset apply_normalization(const Dataset& ds, const NormalizationSpec& spec);

/// Fold assignment for every sample. A holdout plan is a two-fold plan where
/// only fold 1 is evaluated.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;
    std::uint64_t seed = 0;
    bool holdout = false;
    double holdout_ratio = 0.0;

    std::vector<int> evaluated_folds() const;
    IndexList train_rows(int fold) const;
    IndexList test_rows(int fold) const;

    nlohmann::json to_json() const;
    static FoldPlan from_json(const nlohmann::json& j);
};

FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);
FoldPlan stratified_holdout(const Dataset& ds, double test_ratio, std::uint64_t seed);

/// Stratified split of `labels` into (train, validation) positions; the
/// validation part takes round(ratio * n_c) samples of each class, at least one
/// whenever the class has two or more samples.
std::pair<IndexList, IndexList> stratified_split(const Labels& labels, double ratio,
                                                 std::uint64_t seed);

} // namespace dsaeem

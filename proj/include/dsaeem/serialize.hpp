#pragma once

#include "dsaeem/pipeline.hpp"

#include "json.hpp"

namespace dsaeem {

inline constexpr int kModelFormatVersion = 1;

// JSON converters, found by nlohmann through argument-dependent lookup.
// Doubles are written in shortest round-trip form, so save/load is bit-exact;
// non-finite values are written as the strings "inf", "-inf" and "nan".
void to_json(nlohmann::json& j, const AEWeights& w);
void from_json(const nlohmann::json& j, AEWeights& w);
void to_json(nlohmann::json& j, const GroupPartition& g);
void from_json(const nlohmann::json& j, GroupPartition& g);
void to_json(nlohmann::json& j, const EmbedUnit& e);
void from_json(const nlohmann::json& j, EmbedUnit& e);
void to_json(nlohmann::json& j, const FssaeModel& m);
void from_json(const nlohmann::json& j, FssaeModel& m);
void to_json(nlohmann::json& j, const L1SelectorState& s);
void from_json(const nlohmann::json& j, L1SelectorState& s);
void to_json(nlohmann::json& j, const WlpdpModel& m);
void from_json(const nlohmann::json& j, WlpdpModel& m);
void to_json(nlohmann::json& j, const SubsetSpec& s);
void from_json(const nlohmann::json& j, SubsetSpec& s);
void to_json(nlohmann::json& j, const BinarySvm& m);
void from_json(const nlohmann::json& j, BinarySvm& m);
void to_json(nlohmann::json& j, const SvmModel& m);
void from_json(const nlohmann::json& j, SvmModel& m);
void to_json(nlohmann::json& j, const EnsembleMember& m);
void from_json(const nlohmann::json& j, EnsembleMember& m);
void to_json(nlohmann::json& j, const EnsembleModel& m);
void from_json(const nlohmann::json& j, EnsembleModel& m);
void to_json(nlohmann::json& j, const NormalizationSpec& n);
void from_json(const nlohmann::json& j, NormalizationSpec& n);
void to_json(nlohmann::json& j, const FittedPipeline& p);
void from_json(const nlohmann::json& j, FittedPipeline& p);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// Everything needed to score a raw CSV: the file layout and the fitted chain.
struct ModelBundle {
    Schema schema;
    FittedPipeline pipeline;
};

nlohmann::json bundle_to_json(const ModelBundle& b);
ModelBundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const std::string& path, const ModelBundle& b);
ModelBundle load_bundle(const std::string& path);

} // namespace dsaeem

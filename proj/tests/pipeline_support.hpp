#pragma once

#include "support.hpp"

#include "dsaeem/pipeline.hpp"
#include "dsaeem/serialize.hpp"

namespace support {

/// Full pipeline with a small stack and few iterations, for fast tests.
inline dsaeem::PipelineConfig small_pipeline()
{
    dsaeem::PipelineConfig cfg;
    cfg.fssae.hidden_units = {12, 8};
    cfg.fssae.ae_iterations = 40;
    cfg.fssae.fine_tune_iterations = 10;
    cfg.ensemble.members = 3;
    cfg.ensemble.weight_candidates = 50;
    cfg.seed = 3;
    return cfg;
}

inline std::string model_text(const dsaeem::FittedPipeline& p)
{
    nlohmann::json j = p;
    return j.dump();
}

} // namespace support

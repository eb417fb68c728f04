#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"

#include "ccoa/embedding.hpp"
#include "ccoa/error.hpp"
#include "ccoa/pipeline.hpp"

namespace ccoa {

/// Tool configuration; every field has a working default so a config file is
/// optional. Validation failures carry a distinct error code per invariant.
struct Config {
    struct Embedding {
        std::string provider = "hash"; // "hash" | "remote"
        std::size_t dim = 256;
        std::string endpoint;
        std::string model = "text-embedding-ada-002";
        std::uint64_t seed = 0;
    } embedding;

    struct Hopfield {
        double beta = 8.0;
        std::size_t segments = 1;
    } hopfield;

    struct Retrieval {
        std::size_t top_k = 3;
        std::size_t chunk_size = 256;
        std::size_t chunk_overlap = 32;
        bool quantized = false;
    } retrieval;

    struct Verification {
        double alpha = 0.5;
        double beta_w = 0.4;
        double gamma = 0.1;
        double threshold = 0.6;
        double awl_cap = 10.0;
        std::size_t summary_sentences = 3;
    } verification;

    struct Llm {
        std::string endpoint;
        std::string model = "gpt-3.5-turbo";
        double temperature = 0.0;
    } llm;

    struct Search {
        std::string endpoint;
        std::size_t top_m = 5;         // pages requested per query
        double sim_threshold = 0.8;    // snippet filter
        std::size_t top_k_pages = 3;   // pages kept after re-scoring
        double dedup_similarity = 0.95;
    } search;

    struct Paths {
        std::string index;
        std::string transcripts = ".";
    } paths;
};

/// Reads a JSON object into a Config without validating. Unknown keys are
/// ignored; type mismatches throw ConfigParseError.
Config parse_config(const nlohmann::json& doc);

/// Throws the invariant-specific code: ConfigWeightsInvalid,
/// ConfigChunkingInvalid, ConfigSimilarityInvalid, ConfigBetaInvalid,
/// ConfigTopKInvalid, InvalidSegmentation, InvalidDimension, InvalidValue.
void validate_config(const Config& config);

/// CCOA_LLM_ENDPOINT, CCOA_SEARCH_ENDPOINT and CCOA_EMBEDDING_ENDPOINT
/// override the corresponding config fields when set.
void apply_env_overrides(Config& config);

/// File load + env overrides + validation in one step.
Config load_config(const std::string& path);

/// The embedding provider the config describes.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const Config& config);

/// Pipeline knobs derived from the config sections.
PipelineConfig pipeline_config_from(const Config& config);

} // namespace ccoa

#include "ccoa/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace ccoa {

namespace {

template <typename Section>
void read_section(const nlohmann::json& doc, const char* name, Section&& fill) {
    if (!doc.contains(name)) return;
    const nlohmann::json& section = doc[name];
    if (!section.is_object()) {
        throw Error(ErrorCode::ConfigParseError,
                    std::string("config section '") + name + "' must be an object");
    }
    fill(section);
}

} // namespace

Config parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw Error(ErrorCode::ConfigParseError, "config root must be a JSON object");
    }
    Config c;
    try {
        read_section(doc, "embedding", [&](const nlohmann::json& s) {
            c.embedding.provider = s.value("provider", c.embedding.provider);
            c.embedding.dim = s.value("dim", c.embedding.dim);
            c.embedding.endpoint = s.value("endpoint", c.embedding.endpoint);
            c.embedding.model = s.value("model", c.embedding.model);
            c.embedding.seed = s.value("seed", c.embedding.seed);
        });
        read_section(doc, "hopfield", [&](const nlohmann::json& s) {
            c.hopfield.beta = s.value("beta", c.hopfield.beta);
            c.hopfield.segments = s.value("segments", c.hopfield.segments);
        });
        read_section(doc, "retrieval", [&](const nlohmann::json& s) {
            c.retrieval.top_k = s.value("top_k", c.retrieval.top_k);
            c.retrieval.chunk_size = s.value("chunk_size", c.retrieval.chunk_size);
            c.retrieval.chunk_overlap = s.value("chunk_overlap", c.retrieval.chunk_overlap);
            c.retrieval.quantized = s.value("quantized", c.retrieval.quantized);
        });
        read_section(doc, "verification", [&](const nlohmann::json& s) {
            c.verification.alpha = s.value("alpha", c.verification.alpha);
            c.verification.beta_w = s.value("beta_w", c.verification.beta_w);
            c.verification.gamma = s.value("gamma", c.verification.gamma);
            c.verification.threshold = s.value("threshold", c.verification.threshold);
            c.verification.awl_cap = s.value("awl_cap", c.verification.awl_cap);
            c.verification.summary_sentences =
                s.value("summary_sentences", c.verification.summary_sentences);
        });
        read_section(doc, "llm", [&](const nlohmann::json& s) {
            c.llm.endpoint = s.value("endpoint", c.llm.endpoint);
            c.llm.model = s.value("model", c.llm.model);
            c.llm.temperature = s.value("temperature", c.llm.temperature);
        });
        read_section(doc, "search", [&](const nlohmann::json& s) {
            c.search.endpoint = s.value("endpoint", c.search.endpoint);
            c.search.top_m = s.value("top_m", c.search.top_m);
            c.search.sim_threshold = s.value("sim_threshold", c.search.sim_threshold);
            c.search.top_k_pages = s.value("top_k_pages", c.search.top_k_pages);
            c.search.dedup_similarity =
                s.value("dedup_similarity", c.search.dedup_similarity);
        });
        read_section(doc, "paths", [&](const nlohmann::json& s) {
            c.paths.index = s.value("index", c.paths.index);
            c.paths.transcripts = s.value("transcripts", c.paths.transcripts);
        });
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigParseError,
                    std::string("config field has the wrong type: ") + e.what());
    }
    return c;
}

void validate_config(const Config& config) {
    validate_weights({config.verification.alpha, config.verification.beta_w,
                      config.verification.gamma});
    if (config.retrieval.chunk_size == 0 ||
        config.retrieval.chunk_overlap >= config.retrieval.chunk_size) {
        throw Error(ErrorCode::ConfigChunkingInvalid,
                    "chunking requires 0 <= overlap < size");
    }
    if (!(config.search.sim_threshold >= 0.0 && config.search.sim_threshold <= 1.0) ||
        !(config.search.dedup_similarity >= 0.0 && config.search.dedup_similarity <= 1.0)) {
        throw Error(ErrorCode::ConfigSimilarityInvalid,
                    "similarity thresholds must lie in [0,1]");
    }
    if (!(config.hopfield.beta > 0.0) || !std::isfinite(config.hopfield.beta)) {
        throw Error(ErrorCode::ConfigBetaInvalid, "beta must be positive and finite");
    }
    if (config.retrieval.top_k == 0 || config.search.top_k_pages == 0 ||
        config.search.top_m == 0) {
        throw Error(ErrorCode::ConfigTopKInvalid, "top-k values must be >= 1");
    }
    if (config.hopfield.segments == 0) {
        throw Error(ErrorCode::InvalidSegmentation, "segments must be >= 1");
    }
    if (config.embedding.dim < 8) {
        throw Error(ErrorCode::InvalidDimension, "embedding dim must be >= 8");
    }
    if (config.embedding.provider != "hash" && config.embedding.provider != "remote") {
        throw Error(ErrorCode::InvalidValue,
                    "embedding provider must be 'hash' or 'remote'");
    }
    if (config.embedding.provider == "remote" && config.embedding.endpoint.empty()) {
        throw Error(ErrorCode::InvalidValue,
                    "remote embedding provider needs an endpoint");
    }
    if (!(config.verification.threshold >= 0.0) || !(config.verification.awl_cap > 0.0)) {
        throw Error(ErrorCode::InvalidValue,
                    "verification threshold must be >= 0 and awl_cap > 0");
    }
}

void apply_env_overrides(Config& config) {
    if (const char* v = std::getenv("CCOA_LLM_ENDPOINT")) config.llm.endpoint = v;
    if (const char* v = std::getenv("CCOA_SEARCH_ENDPOINT")) config.search.endpoint = v;
    if (const char* v = std::getenv("CCOA_EMBEDDING_ENDPOINT")) {
        config.embedding.endpoint = v;
    }
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open config file: " + path);
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::ConfigParseError, "config file is not valid JSON: " + path);
    }
    Config config = parse_config(doc);
    apply_env_overrides(config);
    validate_config(config);
    return config;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const Config& config) {
    if (config.embedding.provider == "remote") {
        return std::make_unique<RemoteEmbedder>(config.embedding.endpoint,
                                                config.embedding.model,
                                                config.embedding.dim);
    }
    return std::make_unique<HashEmbedder>(config.embedding.dim, config.embedding.seed);
}

PipelineConfig pipeline_config_from(const Config& config) {
    PipelineConfig p;
    p.top_k = config.retrieval.top_k;
    p.search_count = config.search.top_m;
    p.web_similarity = config.search.sim_threshold;
    p.dedup_similarity = config.search.dedup_similarity;
    p.summary_sentences = config.verification.summary_sentences;
    p.segments = config.hopfield.segments;
    p.weights = {config.verification.alpha, config.verification.beta_w,
                 config.verification.gamma};
    p.faith_threshold = config.verification.threshold;
    p.awl_cap = config.verification.awl_cap;
    return p;
}

} // namespace ccoa

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccoa/chain.hpp"
#include "ccoa/cks.hpp"
#include "ccoa/embedding.hpp"
#include "ccoa/error.hpp"
#include "ccoa/hopfield.hpp"
#include "ccoa/knowledge_store.hpp"
#include "ccoa/llm.hpp"
#include "ccoa/verification.hpp"
#include "ccoa/websearch.hpp"

namespace ccoa {

/// Knobs of the per-turn pipeline. Defaults follow the framework constants:
/// 0.8 web similarity filter, 3-sentence extractive summaries, 0.95 duplicate
/// sub-question filter, faith threshold 0.6.
struct PipelineConfig {
    std::size_t top_k = 3;          // texts kept per executed action
    std::size_t search_count = 5;   // pages requested from the search provider
    double web_similarity = 0.8;    // title|snippet cosine filter
    double dedup_similarity = 0.95; // drop subs already answered in the CKS
    std::size_t summary_sentences = 3;
    std::size_t segments = 1; // segmented-retrieval splits for index search
    FaithWeights weights;
    double faith_threshold = 0.6;
    double awl_cap = 10.0;
};

/// Web-querying action. missing_flag skips the snippet filter and fetches the
/// provider's top-k pages directly; otherwise pages are kept when
/// cosine(embed("title | snippet"), embed("sub | guess")) clears
/// config.web_similarity, fetched, re-scored on full content, and the top-k
/// contents are concatenated. Throws EmptyRetrieval when nothing survives and
/// ActionFailed when the search or embedding provider fails.
std::string execute_web_query(const ChainNode& node, SearchProvider& search,
                              const EmbeddingProvider& provider,
                              const PipelineConfig& config);

/// Knowledge-retrieval action: top-k chunk texts for node.sub, concatenated.
/// Throws EmptyMemory when the index holds no chunks.
std::string execute_knowledge_retrieval(const ChainNode& node, const Index& index,
                                        const EmbeddingProvider& provider,
                                        const HopfieldProjections& projections,
                                        const PipelineConfig& config);

/// Conv-MRFS check of the node's guess against the CKS reference segments
/// plus the node's retrieved text. The guess is kept when it scores at or
/// above the threshold; otherwise (and always when missing_flag is set) the
/// corrected answer becomes the first summary_sentences sentences of the
/// retrieved text. Throws UnresolvedNode when both guess and retrieved text
/// are blank. When `report` is non-null and scoring ran, the full per-segment
/// report is written there.
ChainNode verify_and_correct(ChainNode node, const ContextualKnowledgeSet& cks,
                             const PipelineConfig& config,
                             FaithScoreReport* report = nullptr);

/// One transcript event; ts is a logical event counter so transcripts are
/// byte-identical across runs under mock providers.
struct TranscriptEvent {
    std::uint64_t ts = 0;
    std::string kind;
    nlohmann::json payload;
};

/// Serializes events as newline-delimited JSON {ts, kind, payload}.
std::string transcript_to_ndjson(const std::vector<TranscriptEvent>& transcript);

/// Everything run_turn needs. search and index may be null; chain nodes that
/// need the missing dependency are marked failed and the turn continues.
struct TurnDeps {
    LLMClient& llm;
    const EmbeddingProvider& provider;
    SearchProvider* search = nullptr;
    const Index* index = nullptr;
    HopfieldProjections projections;
    PipelineConfig config;
};

struct TurnResult {
    std::string answer;
    ContextualKnowledgeSet cks; // input CKS plus the new round
    ActionChain chain;          // executed and corrected chain
    std::vector<TranscriptEvent> transcript;
};

/// One conversation turn: stage-appropriate prompt, LLM decomposition (one
/// re-prompt retry on ChainParseError, then TurnFailed), near-duplicate
/// sub-question filtering, node execution, verification/correction, final
/// answer generation, and CKS round append. The input CKS is never mutated;
/// failures leave it untouched.
TurnResult run_turn(const std::string& question, const ContextualKnowledgeSet& cks,
                    TurnDeps& deps);

} // namespace ccoa

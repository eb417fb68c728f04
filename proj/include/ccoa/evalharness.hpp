#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ccoa/embedding.hpp"
#include "ccoa/error.hpp"
#include "ccoa/hopfield.hpp"
#include "ccoa/knowledge_store.hpp"
#include "ccoa/llm.hpp"

namespace ccoa {

/// One evaluation example. gold_chunk_ids may be empty for QA-only examples;
/// such queries are excluded from the retrieval metrics.
struct QAExample {
    std::string conversation_id;
    int turn = 0;
    std::string question;
    std::string gold_answer;
    std::vector<std::string> gold_chunk_ids;
};

/// Loads newline-delimited JSON examples and validates that turns are
/// contiguous from 1 within each conversation.
std::vector<QAExample> load_dataset(const std::string& path);

/// Externally generated answers for GPT-EM judging, newline-delimited JSON
/// {conversation_id, turn, answer}.
struct GeneratedAnswer {
    std::string conversation_id;
    int turn = 0;
    std::string answer;
};

std::vector<GeneratedAnswer> load_answers(const std::string& path);

/// Mean over queries of 1/rank of the first gold id (0 when none retrieved).
/// rank_lists[i] is the ranked id list for query i, gold[i] its gold ids.
/// Throws NoQueries on an empty query set, InvalidDimension on length
/// mismatch.
double mrr(const std::vector<std::vector<std::string>>& rank_lists,
           const std::vector<std::vector<std::string>>& gold);

/// Mean over queries of the fraction of gold ids appearing in the top k.
/// Queries with no gold ids are excluded; if none remain, throws NoQueries.
double recall_at_k(const std::vector<std::vector<std::string>>& rank_lists,
                   const std::vector<std::vector<std::string>>& gold,
                   std::size_t k = 10);

/// The judging prompt with {QUESTION}, {GROUND_TRUTH} and {GENERATED_ANSWER}
/// filled in.
std::string build_judge_prompt(const std::string& question, const std::string& gold,
                               const std::string& generated);

/// Sends the judging prompt and reads the verdict as the last standalone
/// 0/1 token of the reply. Throws JudgeParseError when no such token exists,
/// InvalidValue on empty inputs.
bool gpt_em(LLMClient& judge, const std::string& question, const std::string& gold,
            const std::string& generated);

struct TimingStats {
    double mean_ms = 0.0;
    double p95_ms = 0.0;
};

struct MetricReport {
    double mrr = 0.0;
    double recall_at_k = 0.0;
    double gpt_em = 0.0;
    std::size_t n_queries = 0;
    std::size_t n_retrieval_queries = 0; // queries with gold chunk ids
    std::size_t n_judged = 0;            // queries judged for GPT-EM
    TimingStats timing;
};

/// Runs every dataset question against the index, computes MRR and Recall@k
/// over the gold-bearing queries, and (when a judge and answers are supplied)
/// GPT-EM over the matching answers. A JudgeParseError counts that query as
/// incorrect and the run continues.
MetricReport evaluate(const Index& index, const std::vector<QAExample>& dataset,
                      const EmbeddingProvider& provider,
                      const HopfieldProjections& projections, std::size_t k = 10,
                      LLMClient* judge = nullptr,
                      const std::vector<GeneratedAnswer>* answers = nullptr);

/// One latency measurement row; results holds the ranked id list per query
/// so callers can assert identity across segment counts.
struct BenchRow {
    std::size_t segments = 0;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    std::vector<std::vector<std::string>> results;
};

/// Times index search per segment count, after 10 warm-up queries per
/// configuration. Empty query list yields an empty table.
std::vector<BenchRow> bench_latency(const Index& index,
                                    const std::vector<std::string>& queries,
                                    const std::vector<std::size_t>& segment_counts,
                                    const EmbeddingProvider& provider,
                                    const HopfieldProjections& projections,
                                    std::size_t k = 10);

} // namespace ccoa

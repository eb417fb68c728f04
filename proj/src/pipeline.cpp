#include "ccoa/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "ccoa/sparsemax.hpp"
#include "ccoa/text_util.hpp"

namespace ccoa {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string join_texts(const std::vector<std::string>& texts) {
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += texts[i];
    }
    return out;
}

nlohmann::json chain_to_json(const ActionChain& chain) {
    nlohmann::json j;
    j["question"] = chain.question;
    if (chain.optimized_question) j["optimized_question"] = *chain.optimized_question;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : chain.nodes) {
        nlohmann::json nj;
        nj["action"] = action_kind_name(node.action);
        nj["Sub"] = node.sub;
        nj["guess_answer"] = node.guess_answer;
        nj["missing_flag"] = node.missing_flag;
        if (node.corrected_answer) nj["information"] = *node.corrected_answer;
        if (node.failure) nj["failure"] = *node.failure;
        nodes.push_back(std::move(nj));
    }
    j["chain"] = std::move(nodes);
    return j;
}

std::string build_final_prompt(const ActionChain& chain) {
    return "Given the [Question]: \"" + chain.question +
           "\" and the processed action reasoning chain below, generate the final "
           "answer for the [Question] by referring to the chain.\n\n[Chain]:\n" +
           chain_to_json(chain).dump(2) + "\n\n[Final answer]:";
}

} // namespace

std::string execute_web_query(const ChainNode& node, SearchProvider& search,
                              const EmbeddingProvider& provider,
                              const PipelineConfig& config) {
    if (node.action != ActionKind::WebQuerying) {
        throw Error(ErrorCode::InvalidValue, "node is not a web-querying action");
    }

    std::vector<SearchResult> results;
    try {
        results = search.search(node.sub, config.search_count);
    } catch (const Error& e) {
        throw Error(ErrorCode::ActionFailed, std::string("web search failed: ") + e.what());
    }
    if (results.empty()) {
        throw Error(ErrorCode::EmptyRetrieval, "search returned no pages");
    }

    std::vector<std::string> contents;
    try {
        if (node.missing_flag) {
            // No guess to compare against: trust the provider ranking and pull
            // full content for the top pages.
            for (const auto& result : results) {
                if (contents.size() == config.top_k) break;
                contents.push_back(search.fetch(result.url));
            }
        } else {
            const Vec query_vec = provider.embed(node.sub + " | " + node.guess_answer);
            struct ScoredPage {
                double score;
                std::string content;
            };
            std::vector<ScoredPage> scored;
            for (const auto& result : results) {
                const Vec page_vec = provider.embed(result.title + " | " + result.snippet);
                if (cosine_similarity(page_vec, query_vec) < config.web_similarity) {
                    continue;
                }
                std::string content = search.fetch(result.url);
                const double content_score =
                    cosine_similarity(provider.embed(content), query_vec);
                scored.push_back({content_score, std::move(content)});
            }
            // stable: ties keep the provider's ranking
            std::stable_sort(scored.begin(), scored.end(),
                             [](const ScoredPage& a, const ScoredPage& b) {
                                 return a.score > b.score;
                             });
            for (auto& page : scored) {
                if (contents.size() == config.top_k) break;
                contents.push_back(std::move(page.content));
            }
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::ActionFailed,
                    std::string("web page processing failed: ") + e.what());
    }

    if (contents.empty()) {
        throw Error(ErrorCode::EmptyRetrieval, "no page cleared the similarity filter");
    }
    return join_texts(contents);
}

std::string execute_knowledge_retrieval(const ChainNode& node, const Index& index,
                                        const EmbeddingProvider& provider,
                                        const HopfieldProjections& projections,
                                        const PipelineConfig& config) {
    if (node.action != ActionKind::KnowledgeEncoding) {
        throw Error(ErrorCode::InvalidValue, "node is not a knowledge-encoding action");
    }
    if (index.bank.size() == 0) {
        throw Error(ErrorCode::EmptyMemory, "index holds no chunks");
    }
    const auto results =
        search(index, node.sub, config.top_k, provider, projections, config.segments);
    if (results.empty()) {
        throw Error(ErrorCode::EmptyRetrieval, "index search returned nothing");
    }
    std::vector<std::string> texts;
    texts.reserve(results.size());
    for (const auto& r : results) texts.push_back(r.text);
    return join_texts(texts);
}

ChainNode verify_and_correct(ChainNode node, const ContextualKnowledgeSet& cks,
                             const PipelineConfig& config, FaithScoreReport* report) {
    const std::string retrieved = node.retrieved.value_or("");
    const bool retrieved_blank = is_blank(retrieved);
    const bool guess_scoreable = !normalize_items(node.guess_answer).empty();
    if (!guess_scoreable && retrieved_blank) {
        throw Error(ErrorCode::UnresolvedNode,
                    "node has neither a usable guess nor retrieved text");
    }

    // With nothing retrieved there is nothing better to adopt than the guess.
    auto adopted = [&]() -> std::string {
        return retrieved_blank ? node.guess_answer
                               : first_sentences(retrieved, config.summary_sentences);
    };

    if (node.missing_flag || !guess_scoreable) {
        node.corrected_answer = adopted();
        return node;
    }

    std::vector<std::string> references = reference_segments(cks);
    if (!retrieved_blank) references.push_back(retrieved);
    const FaithScoreReport scored = conv_mrfs(references, node.guess_answer,
                                              config.weights, config.faith_threshold,
                                              config.awl_cap);
    if (report != nullptr) *report = scored;
    // Replacement triggers strictly below the threshold; a score sitting
    // exactly on it keeps the guess.
    node.corrected_answer =
        scored.max_score < config.faith_threshold ? adopted() : node.guess_answer;
    return node;
}

std::string transcript_to_ndjson(const std::vector<TranscriptEvent>& transcript) {
    std::string out;
    for (const auto& event : transcript) {
        nlohmann::json line = {
            {"ts", event.ts}, {"kind", event.kind}, {"payload", event.payload}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

TurnResult run_turn(const std::string& question, const ContextualKnowledgeSet& cks,
                    TurnDeps& deps) {
    std::uint64_t ts = 0;
    std::vector<TranscriptEvent> transcript;
    auto log = [&](std::string kind, nlohmann::json payload) {
        transcript.push_back({ts++, std::move(kind), std::move(payload)});
    };

    const Stage stage = cks.rounds.empty() ? Stage::Initial : Stage::Normal;
    const std::string prompt = stage == Stage::Initial
                                   ? build_initial_prompt(question)
                                   : build_normal_prompt(cks, question);
    log("prompt", {{"stage", stage == Stage::Initial ? "initial" : "normal"},
                   {"text", prompt}});

    std::string completion = deps.llm.complete(prompt);
    log("completion", {{"text", completion}});
    ActionChain chain;
    try {
        chain = parse_action_chain(completion, stage);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ChainParseError) throw;
        log("parse_retry", {{"error", e.what()}});
        completion = deps.llm.complete(prompt);
        log("completion", {{"text", completion}});
        try {
            chain = parse_action_chain(completion, stage);
        } catch (const Error& retry_error) {
            if (retry_error.code() != ErrorCode::ChainParseError) throw;
            throw Error(ErrorCode::TurnFailed,
                        std::string("chain parse failed twice: ") + retry_error.what());
        }
    }
    if (chain.question.empty()) chain.question = question;

    // Drop sub-questions the CKS has already answered (near-duplicate filter).
    std::vector<Vec> known;
    for (const auto& round : cks.rounds) {
        for (const auto& [key, text] : round.information_summaries) {
            if (!is_blank(text)) known.push_back(deps.provider.embed(text));
        }
    }
    if (!known.empty()) {
        std::vector<ChainNode> kept;
        for (auto& node : chain.nodes) {
            const Vec sub_vec = deps.provider.embed(node.sub);
            double best = -1.0;
            for (const auto& vec : known) {
                best = std::max(best, cosine_similarity(sub_vec, vec));
            }
            if (best >= deps.config.dedup_similarity) {
                log("node_dropped", {{"sub", node.sub}, {"similarity", best}});
            } else {
                kept.push_back(std::move(node));
            }
        }
        chain.nodes = std::move(kept);
    }
    log("chain", {{"parsed", chain_to_json(chain)}});

    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        ChainNode& node = chain.nodes[i];
        log("action", {{"index", i},
                       {"action", action_kind_name(node.action)},
                       {"sub", node.sub},
                       {"missing_flag", node.missing_flag}});
        try {
            std::string text;
            if (node.action == ActionKind::WebQuerying) {
                if (deps.search == nullptr) {
                    throw Error(ErrorCode::ActionFailed, "no search provider configured");
                }
                text = execute_web_query(node, *deps.search, deps.provider, deps.config);
            } else {
                if (deps.index == nullptr) {
                    throw Error(ErrorCode::ActionFailed, "no index loaded");
                }
                text = execute_knowledge_retrieval(node, *deps.index, deps.provider,
                                                   deps.projections, deps.config);
            }
            node.retrieved = std::move(text);
            log("retrieved", {{"index", i}, {"text", *node.retrieved}});
        } catch (const Error& e) {
            node.retrieved = "";
            if (e.code() == ErrorCode::EmptyRetrieval) {
                log("retrieved", {{"index", i}, {"text", ""}, {"note", e.what()}});
            } else {
                node.failure = e.what();
                log("action_failed",
                    {{"index", i}, {"code", e.code_name()}, {"error", e.what()}});
            }
        }
    }

    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        ChainNode& node = chain.nodes[i];
        FaithScoreReport report;
        try {
            node = verify_and_correct(std::move(node), cks, deps.config, &report);
            log("verify", {{"index", i},
                           {"max_score", report.max_score},
                           {"kept_guess", *node.corrected_answer == node.guess_answer},
                           {"corrected_answer", *node.corrected_answer}});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnresolvedNode) throw;
            node.failure = e.what();
            node.corrected_answer = "";
            log("unresolved", {{"index", i}, {"error", e.what()}});
        }
    }

    const std::string final_prompt = build_final_prompt(chain);
    log("final_prompt", {{"text", final_prompt}});
    const std::string answer = deps.llm.complete(final_prompt);
    log("final_answer", {{"text", answer}});
    chain.final_answer = answer;

    RoundRecord record;
    record.round = cks.rounds.empty() ? 1 : cks.rounds.back().round + 1;
    record.original_question = question;
    record.optimized_question = chain.optimized_question.value_or(question);
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        const std::string k = std::to_string(i + 1);
        record.sub_questions.push_back({"sub" + k, chain.nodes[i].sub});
        record.information_summaries.push_back(
            {"infor" + k, chain.nodes[i].corrected_answer.value_or("")});
    }
    record.answer = answer;
    log("round_appended", {{"round", record.round}});

    TurnResult result;
    result.answer = answer;
    result.cks = append_round(cks, std::move(record));
    result.chain = std::move(chain);
    result.transcript = std::move(transcript);
    return result;
}

} // namespace ccoa

#include "ccoa/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "ccoa/text_util.hpp"

namespace ccoa {

namespace {

const char* kJudgeTemplate =
    "Given (question, ground truth answer, LLM-generated answer), you need to check "
    "whether the generated answer contains the ground truth by their meaning, not "
    "individual word only. If correct, the output is 1, otherwise, 0. For example:\n"
    "\n"
    "[Question]: What should I do when I drink spoiled milk? (A) drink more (B) drink "
    "coffee (C) take some medicine.\n"
    "\n"
    "[Ground truth]: (C) take some medicine\n"
    "\n"
    "[Generated answer]: when you drink spoiled milk, you can not drink more or even "
    "drink coffee. You should go to the hospital and check if you need to take some "
    "medicines or not.\n"
    "\n"
    "[Output]: 1\n"
    "\n"
    "[Question]: {QUESTION}\n"
    "\n"
    "[Ground truth]: {GROUND_TRUTH}\n"
    "\n"
    "[Generated answer]: {GENERATED_ANSWER}\n"
    "\n"
    "[Output]:";

void replace_once(std::string& text, const std::string& placeholder,
                  const std::string& value) {
    const auto pos = text.find(placeholder);
    if (pos != std::string::npos) text.replace(pos, placeholder.size(), value);
}

double percentile_95(std::vector<double> samples) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(samples.size())));
    return samples[std::min(idx == 0 ? 0 : idx - 1, samples.size() - 1)];
}

TimingStats stats_of(const std::vector<double>& samples) {
    TimingStats stats;
    if (samples.empty()) return stats;
    double sum = 0.0;
    for (double s : samples) sum += s;
    stats.mean_ms = sum / static_cast<double>(samples.size());
    stats.p95_ms = percentile_95(samples);
    return stats;
}

} // namespace

std::vector<QAExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open dataset file: " + path);
    }
    std::vector<QAExample> examples;
    std::unordered_map<std::string, int> last_turn;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("conversation_id") || !j.contains("turn") ||
            !j.contains("question")) {
            throw Error(ErrorCode::InvalidValue,
                        "dataset line " + std::to_string(lineno) + " malformed");
        }
        QAExample example;
        example.conversation_id = j["conversation_id"].get<std::string>();
        example.turn = j["turn"].get<int>();
        example.question = j["question"].get<std::string>();
        example.gold_answer = j.value("gold_answer", "");
        if (j.contains("gold_chunk_ids")) {
            for (const auto& id : j["gold_chunk_ids"]) {
                example.gold_chunk_ids.push_back(id.get<std::string>());
            }
        }
        const int expected = last_turn.count(example.conversation_id)
                                 ? last_turn[example.conversation_id] + 1
                                 : 1;
        if (example.turn != expected) {
            throw Error(ErrorCode::InvalidValue,
                        "dataset line " + std::to_string(lineno) +
                            ": turns must be contiguous per conversation (expected " +
                            std::to_string(expected) + ")");
        }
        last_turn[example.conversation_id] = example.turn;
        examples.push_back(std::move(example));
    }
    return examples;
}

std::vector<GeneratedAnswer> load_answers(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open answers file: " + path);
    }
    std::vector<GeneratedAnswer> answers;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("conversation_id") || !j.contains("turn") ||
            !j.contains("answer")) {
            throw Error(ErrorCode::InvalidValue,
                        "answers line " + std::to_string(lineno) + " malformed");
        }
        answers.push_back({j["conversation_id"].get<std::string>(),
                           j["turn"].get<int>(), j["answer"].get<std::string>()});
    }
    return answers;
}

double mrr(const std::vector<std::vector<std::string>>& rank_lists,
           const std::vector<std::vector<std::string>>& gold) {
    if (rank_lists.size() != gold.size()) {
        throw Error(ErrorCode::InvalidDimension,
                    "mrr needs one gold set per ranked list");
    }
    if (rank_lists.empty()) {
        throw Error(ErrorCode::NoQueries, "mrr over zero queries");
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < rank_lists.size(); ++q) {
        const std::unordered_set<std::string> relevant(gold[q].begin(), gold[q].end());
        for (std::size_t rank = 0; rank < rank_lists[q].size(); ++rank) {
            if (relevant.count(rank_lists[q][rank])) {
                sum += 1.0 / static_cast<double>(rank + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(rank_lists.size());
}

double recall_at_k(const std::vector<std::vector<std::string>>& rank_lists,
                   const std::vector<std::vector<std::string>>& gold, std::size_t k) {
    if (rank_lists.size() != gold.size()) {
        throw Error(ErrorCode::InvalidDimension,
                    "recall_at_k needs one gold set per ranked list");
    }
    if (k == 0) {
        throw Error(ErrorCode::ConfigTopKInvalid, "recall_at_k needs k >= 1");
    }
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t q = 0; q < rank_lists.size(); ++q) {
        if (gold[q].empty()) continue;
        const std::unordered_set<std::string> relevant(gold[q].begin(), gold[q].end());
        std::size_t found = 0;
        const std::size_t depth = std::min(k, rank_lists[q].size());
        for (std::size_t rank = 0; rank < depth; ++rank) {
            found += relevant.count(rank_lists[q][rank]);
        }
        sum += static_cast<double>(found) / static_cast<double>(relevant.size());
        ++counted;
    }
    if (counted == 0) {
        throw Error(ErrorCode::NoQueries, "no query has gold ids");
    }
    return sum / static_cast<double>(counted);
}

std::string build_judge_prompt(const std::string& question, const std::string& gold,
                               const std::string& generated) {
    std::string prompt = kJudgeTemplate;
    replace_once(prompt, "{QUESTION}", question);
    replace_once(prompt, "{GROUND_TRUTH}", gold);
    replace_once(prompt, "{GENERATED_ANSWER}", generated);
    return prompt;
}

bool gpt_em(LLMClient& judge, const std::string& question, const std::string& gold,
            const std::string& generated) {
    if (question.empty() || gold.empty() || generated.empty()) {
        throw Error(ErrorCode::InvalidValue, "gpt_em needs non-empty inputs");
    }
    const std::string reply = judge.complete(build_judge_prompt(question, gold, generated));
    const auto tokens = whitespace_tokens(reply);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        const std::string folded = fold_token(*it);
        if (folded == "1") return true;
        if (folded == "0") return false;
    }
    throw Error(ErrorCode::JudgeParseError,
                "judge reply has no standalone 0/1 verdict: " + reply);
}

MetricReport evaluate(const Index& index, const std::vector<QAExample>& dataset,
                      const EmbeddingProvider& provider,
                      const HopfieldProjections& projections, std::size_t k,
                      LLMClient* judge, const std::vector<GeneratedAnswer>* answers) {
    if (dataset.empty()) {
        throw Error(ErrorCode::NoQueries, "dataset holds no examples");
    }

    std::unordered_map<std::string, const std::string*> answer_by_key;
    if (answers != nullptr) {
        for (const auto& a : *answers) {
            answer_by_key[a.conversation_id + "#" + std::to_string(a.turn)] = &a.answer;
        }
    }

    MetricReport report;
    report.n_queries = dataset.size();

    std::vector<std::vector<std::string>> rank_lists;
    std::vector<std::vector<std::string>> gold;
    std::vector<double> latencies_ms;
    std::size_t em_hits = 0;

    for (const auto& example : dataset) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto results = search(index, example.question, k, provider, projections, 1);
        const auto t1 = std::chrono::steady_clock::now();
        latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

        if (!example.gold_chunk_ids.empty()) {
            std::vector<std::string> ids;
            ids.reserve(results.size());
            for (const auto& r : results) ids.push_back(r.chunk_id);
            rank_lists.push_back(std::move(ids));
            gold.push_back(example.gold_chunk_ids);
        }

        if (judge != nullptr && answers != nullptr) {
            const auto it = answer_by_key.find(example.conversation_id + "#" +
                                               std::to_string(example.turn));
            if (it != answer_by_key.end() && !example.gold_answer.empty() &&
                !it->second->empty()) {
                ++report.n_judged;
                try {
                    em_hits += gpt_em(*judge, example.question, example.gold_answer,
                                      *it->second)
                                   ? 1
                                   : 0;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::JudgeParseError) throw;
                    // unparsable verdict counts as incorrect; the run continues
                }
            }
        }
    }

    report.n_retrieval_queries = rank_lists.size();
    if (!rank_lists.empty()) {
        report.mrr = mrr(rank_lists, gold);
        report.recall_at_k = recall_at_k(rank_lists, gold, k);
    }
    if (report.n_judged > 0) {
        report.gpt_em =
            static_cast<double>(em_hits) / static_cast<double>(report.n_judged);
    }
    report.timing = stats_of(latencies_ms);
    return report;
}

std::vector<BenchRow> bench_latency(const Index& index,
                                    const std::vector<std::string>& queries,
                                    const std::vector<std::size_t>& segment_counts,
                                    const EmbeddingProvider& provider,
                                    const HopfieldProjections& projections,
                                    std::size_t k) {
    std::vector<BenchRow> rows;
    if (queries.empty()) return rows;

    for (const std::size_t segments : segment_counts) {
        BenchRow row;
        row.segments = segments;
        for (std::size_t warm = 0; warm < 10; ++warm) {
            search(index, queries[warm % queries.size()], k, provider, projections,
                   segments);
        }
        std::vector<double> latencies_ms;
        latencies_ms.reserve(queries.size());
        for (const auto& query : queries) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto results = search(index, query, k, provider, projections, segments);
            const auto t1 = std::chrono::steady_clock::now();
            latencies_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());
            std::vector<std::string> ids;
            ids.reserve(results.size());
            for (const auto& r : results) ids.push_back(r.chunk_id);
            row.results.push_back(std::move(ids));
        }
        const TimingStats stats = stats_of(latencies_ms);
        row.mean_ms = stats.mean_ms;
        row.p95_ms = stats.p95_ms;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace ccoa

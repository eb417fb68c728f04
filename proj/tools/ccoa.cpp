#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccoa/chain.hpp"
#include "ccoa/cks.hpp"
#include "ccoa/config.hpp"
#include "ccoa/embedding.hpp"
#include "ccoa/error.hpp"
#include "ccoa/evalharness.hpp"
#include "ccoa/hopfield.hpp"
#include "ccoa/knowledge_store.hpp"
#include "ccoa/llm.hpp"
#include "ccoa/pipeline.hpp"
#include "ccoa/training.hpp"
#include "ccoa/verification.hpp"
#include "ccoa/websearch.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ccoa::Error(ccoa::ErrorCode::IoError, "cannot open file: " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
        throw ccoa::Error(ccoa::ErrorCode::IoError, "cannot write file: " + path);
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ccoa::Error(ccoa::ErrorCode::IoError, "cannot open file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::size_t> parse_segment_list(const std::string& text) {
    std::vector<std::size_t> segments;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string part =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            segments.push_back(static_cast<std::size_t>(std::stoull(part)));
        } catch (const std::exception&) {
            throw ccoa::Error(ccoa::ErrorCode::InvalidValue,
                              "bad segment count '" + part + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (segments.empty()) {
        throw ccoa::Error(ccoa::ErrorCode::InvalidSegmentation, "no segment counts given");
    }
    return segments;
}

std::string truncated(const std::string& text, std::size_t limit = 160) {
    if (text.size() <= limit) return text;
    return text.substr(0, limit) + "...";
}

ccoa::HopfieldProjections projections_for(const ccoa::Config& cfg,
                                          const std::string& projections_path,
                                          std::size_t dim) {
    if (!projections_path.empty()) {
        return ccoa::load_projections(projections_path);
    }
    return ccoa::HopfieldProjections::identity(dim, cfg.hopfield.beta);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conv-CoA: conversational chain-of-action retrieval QA engine"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    auto get_config = [&]() -> ccoa::Config {
        if (!config_path.empty()) return ccoa::load_config(config_path);
        ccoa::Config cfg;
        ccoa::apply_env_overrides(cfg);
        ccoa::validate_config(cfg);
        return cfg;
    };

    // ingest <corpus> --out <index>
    auto* ingest = app.add_subcommand("ingest", "Chunk, embed and index a corpus");
    std::string ingest_corpus, ingest_out;
    bool ingest_quantized = false;
    std::size_t ingest_chunk_size = 0, ingest_chunk_overlap = 0;
    ingest->add_option("corpus", ingest_corpus, "corpus JSONL file")->required();
    ingest->add_option("--out", ingest_out, "output index path")->required();
    ingest->add_flag("--quantized", ingest_quantized, "store int8-quantized vectors");
    auto* opt_chunk_size =
        ingest->add_option("--chunk-size", ingest_chunk_size, "tokens per chunk");
    auto* opt_chunk_overlap =
        ingest->add_option("--chunk-overlap", ingest_chunk_overlap, "token overlap");
    ingest->callback([&]() {
        ccoa::Config cfg = get_config();
        if (opt_chunk_size->count() > 0) cfg.retrieval.chunk_size = ingest_chunk_size;
        if (opt_chunk_overlap->count() > 0) {
            cfg.retrieval.chunk_overlap = ingest_chunk_overlap;
        }
        if (ingest_quantized) cfg.retrieval.quantized = true;
        ccoa::validate_config(cfg);

        const auto docs = ccoa::load_corpus(ingest_corpus);
        const auto provider = ccoa::make_embedding_provider(cfg);
        ccoa::ChunkingConfig chunking{cfg.retrieval.chunk_size,
                                      cfg.retrieval.chunk_overlap,
                                      cfg.retrieval.quantized};
        const ccoa::Index index = ccoa::build_index(docs, *provider, chunking);
        ccoa::save_index(index, ingest_out);
        std::cout << "chunks: " << index.chunks.size() << "\n";
        std::cout << "index written to " << ingest_out << " (dim=" << index.dim
                  << ", provider=" << index.provider
                  << ", quantized=" << (index.quantized ? "yes" : "no") << ")\n";
    });

    // retrieve <index> <query> -k N
    auto* retrieve = app.add_subcommand("retrieve", "Query an index");
    std::string retrieve_index, retrieve_query, retrieve_proj;
    std::size_t retrieve_k = 3, retrieve_segments = 0;
    retrieve->add_option("index", retrieve_index, "index file")->required();
    retrieve->add_option("query", retrieve_query, "query text")->required();
    retrieve->add_option("-k", retrieve_k, "results to return");
    retrieve->add_option("--segments", retrieve_segments, "segmented retrieval splits");
    retrieve->add_option("--projections", retrieve_proj, "trained projection file");
    retrieve->callback([&]() {
        const ccoa::Config cfg = get_config();
        const ccoa::Index index = ccoa::load_index(retrieve_index);
        const auto provider = ccoa::make_embedding_provider(cfg);
        const auto proj = projections_for(cfg, retrieve_proj, index.dim);
        const std::size_t segments =
            retrieve_segments == 0 ? cfg.hopfield.segments : retrieve_segments;
        const auto results = ccoa::search(index, retrieve_query, retrieve_k, *provider,
                                          proj, segments);
        for (const auto& r : results) {
            std::printf("%zu. %s score=%.6f %s\n", r.rank, r.chunk_id.c_str(), r.score,
                        truncated(r.text).c_str());
        }
    });

    // train <index> <pairs> --epochs E --out <file>
    auto* train_cmd = app.add_subcommand("train", "Train retrieval projections");
    std::string train_index, train_pairs, train_out;
    std::size_t train_epochs = 20;
    double train_lr = 0.0;
    std::size_t train_batch = 0;
    std::uint64_t train_seed = 0;
    train_cmd->add_option("index", train_index, "index file")->required();
    train_cmd->add_option("pairs", train_pairs, "training pairs JSONL")->required();
    train_cmd->add_option("--epochs", train_epochs, "training epochs");
    train_cmd->add_option("--out", train_out, "output projection file")->required();
    auto* opt_lr = train_cmd->add_option("--lr", train_lr, "learning rate");
    auto* opt_batch = train_cmd->add_option("--batch", train_batch, "batch size");
    train_cmd->add_option("--seed", train_seed, "init/shuffle seed");
    train_cmd->callback([&]() {
        const ccoa::Config cfg = get_config();
        const ccoa::Index index = ccoa::load_index(train_index);
        const auto provider = ccoa::make_embedding_provider(cfg);
        if (provider->name() != index.provider) {
            throw ccoa::Error(ccoa::ErrorCode::IndexProviderMismatch,
                              "index built with '" + index.provider +
                                  "', training with '" + provider->name() + "'");
        }
        const auto records = ccoa::load_training_file(train_pairs);
        std::vector<ccoa::TrainingInstance> instances;
        instances.reserve(records.size());
        for (const auto& rec : records) {
            instances.push_back({provider->embed(rec.question), rec.positive_chunk_id,
                                 rec.negative_chunk_ids});
        }
        ccoa::TrainConfig tc;
        tc.seed = train_seed;
        if (opt_lr->count() > 0) tc.learning_rate = train_lr;
        if (opt_batch->count() > 0) tc.batch_size = train_batch;
        const ccoa::TrainResult result =
            ccoa::train(instances, index.bank, train_epochs, tc);
        for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
            std::printf("epoch %zu loss %.6f\n", e + 1, result.epoch_losses[e]);
        }
        ccoa::save_projections(result.projections, train_out);
        std::cout << "projections written to " << train_out << "\n";
    });

    // chat --index <index> [--mock <script>]
    auto* chat = app.add_subcommand("chat", "Conversational REPL (one question per line)");
    std::string chat_index, chat_mock, chat_fixture, chat_proj;
    std::string chat_id = "session", chat_dir;
    chat->add_option("--index", chat_index, "knowledge index file");
    chat->add_option("--mock", chat_mock, "scripted LLM completions JSON");
    chat->add_option("--search-fixture", chat_fixture, "fixture search pages JSON");
    chat->add_option("--projections", chat_proj, "trained projection file");
    chat->add_option("--conversation-id", chat_id, "conversation/file name");
    chat->add_option("--out-dir", chat_dir, "transcript/CKS output directory");
    chat->callback([&]() {
        const ccoa::Config cfg = get_config();
        const auto provider = ccoa::make_embedding_provider(cfg);

        std::unique_ptr<ccoa::LLMClient> llm;
        if (!chat_mock.empty()) {
            llm = std::make_unique<ccoa::ScriptedLlmClient>(
                ccoa::ScriptedLlmClient::from_file(chat_mock));
        } else if (!cfg.llm.endpoint.empty()) {
            llm = std::make_unique<ccoa::HttpLlmClient>(cfg.llm.endpoint, cfg.llm.model,
                                                        cfg.llm.temperature);
        } else {
            throw ccoa::Error(ccoa::ErrorCode::InvalidValue,
                              "chat needs --mock or a configured llm.endpoint");
        }

        std::unique_ptr<ccoa::SearchProvider> search;
        if (!chat_fixture.empty()) {
            search = std::make_unique<ccoa::FixtureSearchProvider>(
                ccoa::FixtureSearchProvider::from_file(chat_fixture));
        } else if (!cfg.search.endpoint.empty()) {
            search = std::make_unique<ccoa::HttpSearchProvider>(cfg.search.endpoint);
        }

        ccoa::Index index;
        bool have_index = false;
        if (!chat_index.empty()) {
            index = ccoa::load_index(chat_index);
            have_index = true;
        }

        ccoa::TurnDeps deps{*llm, *provider};
        deps.search = search.get();
        deps.index = have_index ? &index : nullptr;
        deps.projections = projections_for(
            cfg, chat_proj, have_index ? index.dim : provider->dim());
        deps.config = ccoa::pipeline_config_from(cfg);

        const std::string out_dir = chat_dir.empty() ? cfg.paths.transcripts : chat_dir;
        std::filesystem::create_directories(out_dir);
        const std::string transcript_path = out_dir + "/" + chat_id + ".transcript.ndjson";
        const std::string cks_path = out_dir + "/" + chat_id + ".cks.json";

        ccoa::ContextualKnowledgeSet cks;
        std::vector<ccoa::TranscriptEvent> all_events;
        std::uint64_t next_ts = 0;

        std::string question;
        while (std::getline(std::cin, question)) {
            if (!question.empty() && question.back() == '\r') question.pop_back();
            if (question.empty()) continue;
            ccoa::TurnResult result = ccoa::run_turn(question, cks, deps);
            cks = std::move(result.cks);
            for (auto& event : result.transcript) {
                event.ts = next_ts++;
                all_events.push_back(std::move(event));
            }
            write_file(transcript_path, ccoa::transcript_to_ndjson(all_events));
            write_file(cks_path, ccoa::serialize(cks) + "\n");
            std::cout << "answer: " << result.answer << "\n";
        }
    });

    // bench <index> --segments 1,2,4,8 --queries <file>
    auto* bench = app.add_subcommand("bench", "Retrieval latency per segment count");
    std::string bench_index, bench_segments = "1,2,4,8", bench_queries, bench_proj;
    std::size_t bench_k = 10;
    bench->add_option("index", bench_index, "index file")->required();
    bench->add_option("--segments", bench_segments, "comma-separated segment counts");
    bench->add_option("--queries", bench_queries, "query file, one per line")->required();
    bench->add_option("-k", bench_k, "results per query");
    bench->add_option("--projections", bench_proj, "trained projection file");
    bench->callback([&]() {
        const ccoa::Config cfg = get_config();
        const ccoa::Index index = ccoa::load_index(bench_index);
        const auto provider = ccoa::make_embedding_provider(cfg);
        const auto proj = projections_for(cfg, bench_proj, index.dim);
        const auto queries = read_lines(bench_queries);
        const auto rows = ccoa::bench_latency(index, queries,
                                              parse_segment_list(bench_segments),
                                              *provider, proj, bench_k);
        bool identical = true;
        for (const auto& row : rows) {
            identical = identical && row.results == rows.front().results;
        }
        std::cout << "queries: " << queries.size() << ", k: " << bench_k << "\n";
        std::cout << "results identical across segment counts: "
                  << (identical ? "yes" : "no") << "\n";
        for (const auto& row : rows) {
            std::printf("timing segments=%zu mean_ms=%.3f p95_ms=%.3f\n", row.segments,
                        row.mean_ms, row.p95_ms);
        }
    });

    // score --answer <text> --cks <file>
    auto* score = app.add_subcommand("score", "Conv-MRFS report for an answer");
    std::string score_answer, score_cks;
    score->add_option("--answer", score_answer, "answer text")->required();
    score->add_option("--cks", score_cks, "CKS JSON file")->required();
    score->callback([&]() {
        const ccoa::Config cfg = get_config();
        const auto cks = ccoa::parse_cks(read_file(score_cks));
        const ccoa::FaithWeights weights{cfg.verification.alpha, cfg.verification.beta_w,
                                         cfg.verification.gamma};
        const auto report =
            ccoa::conv_mrfs(ccoa::reference_segments(cks), score_answer, weights,
                            cfg.verification.threshold, cfg.verification.awl_cap);
        nlohmann::ordered_json out;
        out["max_score"] = report.max_score;
        out["threshold"] = report.threshold;
        out["faithful"] = report.faithful;
        out["per_segment"] = nlohmann::ordered_json::array();
        for (const auto& s : report.per_segment) {
            out["per_segment"].push_back({{"segment", s.segment},
                                          {"precision", s.precision},
                                          {"recall", s.recall},
                                          {"awl_norm", s.awl_norm},
                                          {"score", s.score}});
        }
        std::cout << out.dump(2) << "\n";
    });

    // eval <index> <dataset>
    auto* eval_cmd = app.add_subcommand("eval", "Retrieval + answer metrics on a dataset");
    std::string eval_index, eval_dataset, eval_judge_endpoint, eval_mock_judge;
    std::string eval_answers, eval_proj;
    std::size_t eval_k = 10;
    eval_cmd->add_option("index", eval_index, "index file")->required();
    eval_cmd->add_option("dataset", eval_dataset, "dataset JSONL")->required();
    eval_cmd->add_option("--judge-endpoint", eval_judge_endpoint, "HTTP judge LLM");
    eval_cmd->add_option("--mock-judge", eval_mock_judge, "scripted judge JSON");
    eval_cmd->add_option("--answers", eval_answers,
                         "generated answers JSONL for GPT-EM");
    eval_cmd->add_option("-k", eval_k, "retrieval depth");
    eval_cmd->add_option("--projections", eval_proj, "trained projection file");
    eval_cmd->callback([&]() {
        const ccoa::Config cfg = get_config();
        const ccoa::Index index = ccoa::load_index(eval_index);
        const auto provider = ccoa::make_embedding_provider(cfg);
        const auto proj = projections_for(cfg, eval_proj, index.dim);
        const auto dataset = ccoa::load_dataset(eval_dataset);

        std::unique_ptr<ccoa::LLMClient> judge;
        if (!eval_mock_judge.empty()) {
            judge = std::make_unique<ccoa::ScriptedLlmClient>(
                ccoa::ScriptedLlmClient::from_file(eval_mock_judge));
        } else if (!eval_judge_endpoint.empty()) {
            judge = std::make_unique<ccoa::HttpLlmClient>(eval_judge_endpoint,
                                                          cfg.llm.model, 0.0);
        }
        std::vector<ccoa::GeneratedAnswer> answers;
        if (!eval_answers.empty()) answers = ccoa::load_answers(eval_answers);

        const ccoa::MetricReport report = ccoa::evaluate(
            index, dataset, *provider, proj, eval_k, judge.get(),
            eval_answers.empty() ? nullptr : &answers);

        nlohmann::ordered_json out;
        out["mrr"] = report.mrr;
        out["recall_at_k"] = report.recall_at_k;
        out["gpt_em"] = report.gpt_em;
        out["k"] = eval_k;
        out["n_queries"] = report.n_queries;
        out["n_retrieval_queries"] = report.n_retrieval_queries;
        out["n_judged"] = report.n_judged;
        std::cout << out.dump(2) << "\n";
        std::printf("%-22s %s\n", "metric", "value");
        std::printf("%-22s %.6f\n", "mrr", report.mrr);
        std::printf("%-22s %.6f\n", ("recall@" + std::to_string(eval_k)).c_str(),
                    report.recall_at_k);
        std::printf("%-22s %.6f\n", "gpt_em", report.gpt_em);
        std::printf("%-22s %zu\n", "n_queries", report.n_queries);
        std::printf("timing mean_ms=%.3f p95_ms=%.3f\n", report.timing.mean_ms,
                    report.timing.p95_ms);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ccoa::Error& e) {
        std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

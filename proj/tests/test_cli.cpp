#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccoa/cks.hpp"
#include "ccoa/config.hpp"

#include "test_util.hpp"

namespace {

std::string g_tool; // path to the ccoa binary, from the last CLI argument

const std::string kFixtures = CCOA_FIXTURE_DIR;

ccoa::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ccoa::Error& e) {
        return e.code();
    }
    FAIL("expected a ccoa::Error");
    return ccoa::ErrorCode::InvalidValue;
}

testutil::CommandResult run_tool(const std::string& args, const testutil::TempDir& dir,
                                 const std::string& stdin_file = "") {
    std::string command = testutil::shell_quote(g_tool) + " " + args;
    if (!stdin_file.empty()) command += " < " + testutil::shell_quote(stdin_file);
    return testutil::run_command(command, dir);
}

// Builds a default-config index over the fixture corpus inside `dir`.
std::string ingest_fixture_corpus(const testutil::TempDir& dir) {
    const std::string index_path = dir.file("corpus.idx");
    const auto result = run_tool(
        "ingest " + testutil::shell_quote(kFixtures + "/corpus.jsonl") + " --out " +
            testutil::shell_quote(index_path),
        dir);
    REQUIRE(result.exit_code == 0);
    return index_path;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t nl = text.find('\n'); nl != std::string::npos;
         nl = text.find('\n', start)) {
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    if (start < text.size()) lines.push_back(text.substr(start));
    return lines;
}

// Extracts the pretty-printed JSON object that eval prints before its table.
nlohmann::json leading_json(const std::string& out) {
    const auto end = out.find("\n}\n");
    REQUIRE(end != std::string::npos);
    return nlohmann::json::parse(out.substr(0, end + 2));
}

std::vector<std::string> script_completions(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    nlohmann::json doc;
    in >> doc;
    return doc["completions"].get<std::vector<std::string>>();
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1 && argv[argc - 1][0] != '-') {
        g_tool = argv[argc - 1];
        --argc;
    }
    doctest::Context context(argc, argv);
    return context.run();
}

TEST_CASE("config parsing applies defaults and rejects bad types") {
    REQUIRE(!g_tool.empty());

    const ccoa::Config defaults = ccoa::parse_config(nlohmann::json::object());
    CHECK(defaults.embedding.provider == "hash");
    CHECK(defaults.embedding.dim == 256);
    CHECK(defaults.hopfield.beta == 8.0);
    CHECK(defaults.retrieval.top_k == 3);
    CHECK(defaults.retrieval.chunk_size == 256);
    CHECK(defaults.retrieval.chunk_overlap == 32);
    CHECK(defaults.verification.threshold == 0.6);
    CHECK(defaults.llm.model == "gpt-3.5-turbo");
    CHECK(defaults.search.top_m == 5);
    CHECK(defaults.paths.transcripts == ".");

    const auto partial = ccoa::parse_config(nlohmann::json::parse(
        R"({"embedding": {"dim": 64, "future_knob": true}, "other": {"x": 1}})"));
    CHECK(partial.embedding.dim == 64);
    CHECK(partial.embedding.provider == "hash"); // unknown keys are ignored

    CHECK(code_of([] { ccoa::parse_config(nlohmann::json::array()); }) ==
          ccoa::ErrorCode::ConfigParseError);
    CHECK(code_of([] {
              ccoa::parse_config(nlohmann::json::parse(R"({"embedding": 5})"));
          }) == ccoa::ErrorCode::ConfigParseError);
    CHECK(code_of([] {
              ccoa::parse_config(
                  nlohmann::json::parse(R"({"embedding": {"dim": "big"}})"));
          }) == ccoa::ErrorCode::ConfigParseError);
}

TEST_CASE("config validation reports the violated invariant") {
    ccoa::Config config;
    CHECK_NOTHROW(ccoa::validate_config(config));

    auto broken = [](const std::function<void(ccoa::Config&)>& mutate) {
        ccoa::Config c;
        mutate(c);
        return code_of([&] { ccoa::validate_config(c); });
    };
    CHECK(broken([](ccoa::Config& c) { c.verification.gamma = 0.3; }) ==
          ccoa::ErrorCode::ConfigWeightsInvalid);
    CHECK(broken([](ccoa::Config& c) { c.retrieval.chunk_overlap = 256; }) ==
          ccoa::ErrorCode::ConfigChunkingInvalid);
    CHECK(broken([](ccoa::Config& c) { c.search.sim_threshold = 1.5; }) ==
          ccoa::ErrorCode::ConfigSimilarityInvalid);
    CHECK(broken([](ccoa::Config& c) { c.search.dedup_similarity = -0.1; }) ==
          ccoa::ErrorCode::ConfigSimilarityInvalid);
    CHECK(broken([](ccoa::Config& c) { c.hopfield.beta = 0.0; }) ==
          ccoa::ErrorCode::ConfigBetaInvalid);
    CHECK(broken([](ccoa::Config& c) { c.retrieval.top_k = 0; }) ==
          ccoa::ErrorCode::ConfigTopKInvalid);
    CHECK(broken([](ccoa::Config& c) { c.hopfield.segments = 0; }) ==
          ccoa::ErrorCode::InvalidSegmentation);
    CHECK(broken([](ccoa::Config& c) { c.embedding.dim = 4; }) ==
          ccoa::ErrorCode::InvalidDimension);
    CHECK(broken([](ccoa::Config& c) { c.embedding.provider = "gpu"; }) ==
          ccoa::ErrorCode::InvalidValue);
    CHECK(broken([](ccoa::Config& c) { c.embedding.provider = "remote"; }) ==
          ccoa::ErrorCode::InvalidValue); // remote needs an endpoint
    CHECK(broken([](ccoa::Config& c) { c.verification.awl_cap = 0.0; }) ==
          ccoa::ErrorCode::InvalidValue);
}

TEST_CASE("environment variables override endpoints") {
    ::setenv("CCOA_LLM_ENDPOINT", "http://llm.test/v1", 1);
    ::setenv("CCOA_SEARCH_ENDPOINT", "http://search.test/q", 1);
    ::setenv("CCOA_EMBEDDING_ENDPOINT", "http://embed.test/e", 1);
    ccoa::Config config;
    ccoa::apply_env_overrides(config);
    ::unsetenv("CCOA_LLM_ENDPOINT");
    ::unsetenv("CCOA_SEARCH_ENDPOINT");
    ::unsetenv("CCOA_EMBEDDING_ENDPOINT");

    CHECK(config.llm.endpoint == "http://llm.test/v1");
    CHECK(config.search.endpoint == "http://search.test/q");
    CHECK(config.embedding.endpoint == "http://embed.test/e");

    // absent variables leave the config untouched
    ccoa::Config untouched;
    ccoa::apply_env_overrides(untouched);
    CHECK(untouched.llm.endpoint.empty());
}

TEST_CASE("load_config reads, overrides, and validates") {
    testutil::TempDir dir("config");
    const std::string good = dir.file("good.json");
    testutil::write_file(good, R"({"hopfield": {"beta": 12.0, "segments": 2}})");
    const ccoa::Config loaded = ccoa::load_config(good);
    CHECK(loaded.hopfield.beta == 12.0);
    CHECK(loaded.hopfield.segments == 2);

    const std::string invalid = dir.file("invalid.json");
    testutil::write_file(invalid, R"({"retrieval": {"top_k": 0}})");
    CHECK(code_of([&] { ccoa::load_config(invalid); }) ==
          ccoa::ErrorCode::ConfigTopKInvalid);

    const std::string garbage = dir.file("garbage.json");
    testutil::write_file(garbage, "not json at all {");
    CHECK(code_of([&] { ccoa::load_config(garbage); }) ==
          ccoa::ErrorCode::ConfigParseError);
    CHECK(code_of([] { ccoa::load_config("/missing/config.json"); }) ==
          ccoa::ErrorCode::IoError);
}

TEST_CASE("the config names its embedding provider and pipeline knobs") {
    ccoa::Config config;
    config.embedding.dim = 64;
    config.embedding.seed = 3;
    CHECK(ccoa::make_embedding_provider(config)->name() == "hash(dim=64,seed=3)");

    config.embedding.provider = "remote";
    config.embedding.endpoint = "http://embed.test/e";
    config.embedding.model = "m";
    config.embedding.dim = 16;
    CHECK(ccoa::make_embedding_provider(config)->name() == "remote(model=m,dim=16)");

    config.retrieval.top_k = 7;
    config.search.top_m = 9;
    config.search.sim_threshold = 0.5;
    config.search.dedup_similarity = 0.9;
    config.verification.summary_sentences = 2;
    config.hopfield.segments = 4;
    config.verification.threshold = 0.7;
    config.verification.awl_cap = 12.0;
    const ccoa::PipelineConfig pipeline = ccoa::pipeline_config_from(config);
    CHECK(pipeline.top_k == 7);
    CHECK(pipeline.search_count == 9);
    CHECK(pipeline.web_similarity == 0.5);
    CHECK(pipeline.dedup_similarity == 0.9);
    CHECK(pipeline.summary_sentences == 2);
    CHECK(pipeline.segments == 4);
    CHECK(pipeline.weights.alpha == 0.5);
    CHECK(pipeline.weights.beta_w == 0.4);
    CHECK(pipeline.weights.gamma == 0.1);
    CHECK(pipeline.faith_threshold == 0.7);
    CHECK(pipeline.awl_cap == 12.0);
}

TEST_CASE("the tool requires a subcommand and offers help") {
    testutil::TempDir dir("cli-usage");
    const auto bare = run_tool("", dir);
    CHECK(bare.exit_code != 0);

    const auto help = run_tool("--help", dir);
    CHECK(help.exit_code == 0);
    for (const char* name : {"ingest", "retrieve", "train", "chat", "bench", "score",
                             "eval"}) {
        CAPTURE(name);
        CHECK(help.out.find(name) != std::string::npos);
    }
}

TEST_CASE("ingest then retrieve round-trips through the index file") {
    testutil::TempDir dir("cli-ingest");
    const std::string index_path = dir.file("corpus.idx");
    const auto ingest = run_tool(
        "ingest " + testutil::shell_quote(kFixtures + "/corpus.jsonl") + " --out " +
            testutil::shell_quote(index_path),
        dir);
    REQUIRE(ingest.exit_code == 0);
    CHECK(ingest.out.find("chunks: 4") != std::string::npos);
    CHECK(ingest.out.find("index written to " + index_path) != std::string::npos);
    CHECK(ingest.out.find("(dim=256, provider=hash(dim=256,seed=0), quantized=no)") !=
          std::string::npos);

    const auto retrieve = run_tool("retrieve " + testutil::shell_quote(index_path) +
                                       " 'what city is the capital of France' -k 2",
                                   dir);
    REQUIRE(retrieve.exit_code == 0);
    const auto lines = lines_of(retrieve.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].substr(0, 17) == "1. paris#0 score=");
    CHECK(lines[1].substr(0, 3) == "2. ");
    // the paris chunk is longer than the 160-character display cut
    CHECK(lines[0].substr(lines[0].size() - 3) == "...");

    const auto all = run_tool(
        "retrieve " + testutil::shell_quote(index_path) + " 'anything' -k 10", dir);
    CHECK(lines_of(all.out).size() == 4);
}

TEST_CASE("quantized ingestion serves the same top answer") {
    testutil::TempDir dir("cli-quant");
    const std::string index_path = dir.file("corpus.q.idx");
    const auto ingest = run_tool(
        "ingest " + testutil::shell_quote(kFixtures + "/corpus.jsonl") +
            " --quantized --out " + testutil::shell_quote(index_path),
        dir);
    REQUIRE(ingest.exit_code == 0);
    CHECK(ingest.out.find("quantized=yes") != std::string::npos);

    const auto retrieve = run_tool("retrieve " + testutil::shell_quote(index_path) +
                                       " 'what city is the capital of France' -k 1",
                                   dir);
    REQUIRE(retrieve.exit_code == 0);
    CHECK(retrieve.out.substr(0, 10) == "1. paris#0");
}

TEST_CASE("errors surface as a stable code on stderr") {
    testutil::TempDir dir("cli-err");
    const std::string stub = dir.file("stub.idx");
    testutil::write_file(stub, "CCOA!");
    const auto corrupt = run_tool(
        "retrieve " + testutil::shell_quote(stub) + " 'q' -k 1", dir);
    CHECK(corrupt.exit_code == 1);
    CHECK(corrupt.err.find("error: CORRUPT_INDEX") != std::string::npos);

    const auto missing = run_tool("retrieve /missing/index 'q'", dir);
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("error: IO_ERROR") != std::string::npos);
}

TEST_CASE("train writes projections that retrieve accepts") {
    testutil::TempDir dir("cli-train");
    const std::string index_path = ingest_fixture_corpus(dir);

    const std::string pairs = dir.file("pairs.jsonl");
    testutil::write_file(
        pairs,
        R"({"question": "what is dogecoin", "positive_chunk_id": "dogecoin#0"})"
        "\n"
        R"({"question": "who launched bitcoin in 2009", "positive_chunk_id": "bitcoin#0"})"
        "\n"
        R"({"question": "what city is the capital of France", "positive_chunk_id": "paris#0"})"
        "\n"
        R"({"question": "when did ethereum launch", "positive_chunk_id": "ethereum#0"})"
        "\n");

    const std::string proj = dir.file("proj.bin");
    const auto train = run_tool("train " + testutil::shell_quote(index_path) + " " +
                                    testutil::shell_quote(pairs) +
                                    " --epochs 3 --out " + testutil::shell_quote(proj),
                                dir);
    REQUIRE(train.exit_code == 0);
    CHECK(train.out.find("epoch 1 loss ") != std::string::npos);
    CHECK(train.out.find("epoch 3 loss ") != std::string::npos);
    CHECK(train.out.find("projections written to " + proj) != std::string::npos);

    const auto retrieve =
        run_tool("retrieve " + testutil::shell_quote(index_path) +
                     " 'what is dogecoin' -k 1 --projections " +
                     testutil::shell_quote(proj),
                 dir);
    CHECK(retrieve.exit_code == 0);

    // a config with a different embedding space cannot train this index
    const std::string config = dir.file("dim64.json");
    testutil::write_file(config, R"({"embedding": {"dim": 64}})");
    const auto mismatch = run_tool(
        "--config " + testutil::shell_quote(config) + " train " +
            testutil::shell_quote(index_path) + " " + testutil::shell_quote(pairs) +
            " --epochs 1 --out " + testutil::shell_quote(dir.file("p2.bin")),
        dir);
    CHECK(mismatch.exit_code == 1);
    CHECK(mismatch.err.find("INDEX_PROVIDER_MISMATCH") != std::string::npos);
}

TEST_CASE("score prints the faithfulness report as JSON") {
    testutil::TempDir dir("cli-score");
    const auto result = run_tool(
        "score --answer 'Paris is the capital of France.' --cks " +
            testutil::shell_quote(kFixtures + "/paris.cks.json"),
        dir);
    REQUIRE(result.exit_code == 0);

    const auto report = nlohmann::json::parse(result.out);
    CHECK(report["max_score"].get<double>() ==
          doctest::Approx(0.9416667).epsilon(1e-5));
    CHECK(report["threshold"] == 0.6);
    CHECK(report["faithful"] == true);
    REQUIRE(report["per_segment"].size() == 2); // round summary + round answer
    CHECK(report["per_segment"][0]["segment"] == 0);
    CHECK(report["per_segment"][0].contains("precision"));
    CHECK(report["per_segment"][0].contains("recall"));
    CHECK(report["per_segment"][0].contains("awl_norm"));
    CHECK(report["per_segment"][0].contains("score"));

    const auto empty = run_tool(
        "score --answer 'of the and' --cks " +
            testutil::shell_quote(kFixtures + "/paris.cks.json"),
        dir);
    CHECK(empty.exit_code == 1);
    CHECK(empty.err.find("EMPTY_ANSWER") != std::string::npos);
}

TEST_CASE("mock chat runs three turns deterministically") {
    testutil::TempDir dir("cli-chat");
    const std::string index_path = ingest_fixture_corpus(dir);

    const std::string questions = dir.file("questions.txt");
    testutil::write_file(questions,
                         "Is it good to invest in Dogecoin now?\n"
                         "Is it good to invest in it now?\n"
                         "What about Ethereum instead?\n");

    const auto completions = script_completions(kFixtures + "/conversation3.script.json");
    auto chat_into = [&](const std::string& out_dir) {
        return run_tool("chat --index " + testutil::shell_quote(index_path) +
                            " --mock " +
                            testutil::shell_quote(kFixtures +
                                                  "/conversation3.script.json") +
                            " --search-fixture " +
                            testutil::shell_quote(kFixtures + "/pages.json") +
                            " --conversation-id convo --out-dir " +
                            testutil::shell_quote(out_dir),
                        dir, questions);
    };

    const auto first = chat_into(dir.file("run1"));
    REQUIRE(first.exit_code == 0);
    CHECK(first.out == "answer: " + completions[1] + "\nanswer: " + completions[3] +
                           "\nanswer: " + completions[5] + "\n");

    const std::string transcript =
        testutil::read_file(dir.file("run1") + "/convo.transcript.ndjson");
    const std::string cks_text = testutil::read_file(dir.file("run1") + "/convo.cks.json");
    REQUIRE(!transcript.empty());
    REQUIRE(!cks_text.empty());

    const auto cks = ccoa::parse_cks(cks_text);
    REQUIRE(cks.rounds.size() == 3);
    CHECK(cks.rounds[0].original_question == "Is it good to invest in Dogecoin now?");
    CHECK(cks.rounds[1].optimized_question == "Is it good to invest in Bitcoin now?");
    CHECK(cks.rounds[2].answer == completions[5]);
    CHECK(ccoa::serialize(cks) + "\n" == cks_text);

    // the transcript is NDJSON with one global, contiguous timestamp sequence
    const auto lines = lines_of(transcript);
    REQUIRE(lines.size() >= 30);
    std::size_t prompts_seen = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto event = nlohmann::json::parse(lines[i]);
        CHECK(event["ts"] == i);
        if (event["kind"] == "prompt") {
            ++prompts_seen;
            CHECK(event["payload"]["stage"] == (prompts_seen == 1 ? "initial" : "normal"));
        }
    }
    CHECK(prompts_seen == 3);

    const auto second = chat_into(dir.file("run2"));
    REQUIRE(second.exit_code == 0);
    CHECK(testutil::read_file(dir.file("run2") + "/convo.transcript.ndjson") ==
          transcript);
    CHECK(testutil::read_file(dir.file("run2") + "/convo.cks.json") == cks_text);
}

TEST_CASE("chat refuses to start without an LLM source") {
    testutil::TempDir dir("cli-chat-err");
    const std::string index_path = ingest_fixture_corpus(dir);
    const std::string empty = dir.file("empty.txt");
    testutil::write_file(empty, "");
    const auto result = run_tool(
        "chat --index " + testutil::shell_quote(index_path), dir, empty);
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("INVALID_VALUE") != std::string::npos);
}

TEST_CASE("bench prints a timing row per segment count") {
    testutil::TempDir dir("cli-bench");
    const std::string index_path = ingest_fixture_corpus(dir);
    const std::string queries = dir.file("queries.txt");
    testutil::write_file(queries, "what is dogecoin\ncapital of France\nethereum\n");

    const auto result = run_tool("bench " + testutil::shell_quote(index_path) +
                                     " --segments 1,2 --queries " +
                                     testutil::shell_quote(queries) + " -k 4",
                                 dir);
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("queries: 3, k: 4") != std::string::npos);
    CHECK(result.out.find("results identical across segment counts: yes") !=
          std::string::npos);
    CHECK(result.out.find("timing segments=1 mean_ms=") != std::string::npos);
    CHECK(result.out.find("timing segments=2 mean_ms=") != std::string::npos);

    const auto bad = run_tool("bench " + testutil::shell_quote(index_path) +
                                  " --segments nope --queries " +
                                  testutil::shell_quote(queries),
                              dir);
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("INVALID_VALUE") != std::string::npos);
}

TEST_CASE("eval reports metrics with the mock judge") {
    testutil::TempDir dir("cli-eval");
    const std::string index_path = ingest_fixture_corpus(dir);

    const auto result = run_tool(
        "eval " + testutil::shell_quote(index_path) + " " +
            testutil::shell_quote(kFixtures + "/dataset.jsonl") + " --mock-judge " +
            testutil::shell_quote(kFixtures + "/judge.script.json") + " --answers " +
            testutil::shell_quote(kFixtures + "/answers.jsonl"),
        dir);
    REQUIRE(result.exit_code == 0);

    const auto report = leading_json(result.out);
    CHECK(report["k"] == 10);
    CHECK(report["n_queries"] == 4);
    CHECK(report["n_retrieval_queries"] == 4);
    CHECK(report["n_judged"] == 4);
    CHECK(report["recall_at_k"].get<double>() == doctest::Approx(1.0));
    CHECK(report["gpt_em"].get<double>() == doctest::Approx(0.75));
    CHECK(report["mrr"].get<double>() >= 0.25);

    CHECK(result.out.find("recall@10") != std::string::npos);
    CHECK(result.out.find("gpt_em") != std::string::npos);
    CHECK(result.out.find("timing mean_ms=") != std::string::npos);

    // without answers nothing is judged
    const auto plain = run_tool("eval " + testutil::shell_quote(index_path) + " " +
                                    testutil::shell_quote(kFixtures + "/dataset.jsonl"),
                                dir);
    REQUIRE(plain.exit_code == 0);
    CHECK(leading_json(plain.out)["n_judged"] == 0);
}

#include "ccoa/chain.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

namespace ccoa {

namespace {

// Shared instruction body of both decomposition prompts.
const char* kChainInstructions =
    "construct an action reasoning chain for this question in JSON format. For each "
    "step of the chain, choose an action from [Web-querying Engine(search real-time "
    "news), Knowledge-encoding Engine (search existing knowledge in local knowledge "
    "base)] as the value of element \"Action\", and generate a sub-question for each "
    "action to get one of [web-search keywords, needed information description] as "
    "the value of element \"Sub\". Also, generate an initial answer for each Sub as "
    "the value of the element \"Guess_answer\" if you make sure it is correct. In "
    "addition, if you cannot answer some sub-questions, make the element "
    "\"Missing_flag\" value \"True\", otherwise, make it \"False\" You need to try "
    "to generate the final answer for the [Question] by referring to the \"Chain\", "
    "as the value of the element \"Final_answer\".";

const char* kInitialExample =
    "For example:\n"
    "\n"
    "{\"question\": \"Is it good to invest in Dogecoin now?\"\n"
    "\"chain\": [\n"
    "{\"action\":\"knowledge-encoding\",\"Sub\":\"what is Dogecoin\",\"guess_answer\":"
    "\"Dogecoin is one cryptocurrency.\",\"missing_flag\":\"false\"}\n"
    "{\"action\":\"Web-querying\",\"Sub\":\"Dogecoin news\",\"guess_answer\":\"\","
    "\"missing_flag\":\"True\"},\n"
    "\"final_answer\":\"Dogecoin is one of the cryptocurrencies that is risky to "
    "invest. And its news prompts Bitcoin. So, it is a good time to invest now.\"}";

const char* kNormalExample =
    "For example:\n"
    "\n"
    "{\"question\": \"Is it good to invest in it now?\"\n"
    "\"optimized_question\": \"Is it good to invest in Bitcoin now?\"\n"
    "\"chain\": [\n"
    "{\"action\":\"knowledge-encoding\",\"Sub\":\"what is bitcoin\",\"guess_answer\":"
    "\"Bitcoin is one cryptocurrency.\",\"missing_flag\":\"false\"}\n"
    "{\"action\":\"Web-querying\",\"Sub\":\"bitcoin news\",\"guess_answer\":\"\","
    "\"missing_flag\":\"True\"},\n"
    "\"final_answer\":\"Bitcoin is one of the cryptocurrencies that is risky to "
    "invest. And its news prompte Bitcoin. So, it is a good time to invest now.\"}";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

// Case-insensitive field lookup; returns nullptr when absent.
const nlohmann::json* find_key(const nlohmann::json& obj, const std::string& key) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (lower(it.key()) == key) return &it.value();
    }
    return nullptr;
}

std::string string_field(const nlohmann::json& obj, const std::string& key,
                         const std::string& fallback) {
    const nlohmann::json* value = find_key(obj, key);
    if (value == nullptr) return fallback;
    if (!value->is_string()) {
        throw Error(ErrorCode::ChainParseError, "field '" + key + "' must be a string");
    }
    return value->get<std::string>();
}

bool parse_missing_flag(const nlohmann::json& obj) {
    const nlohmann::json* value = find_key(obj, "missing_flag");
    if (value == nullptr) return false;
    if (value->is_boolean()) return value->get<bool>();
    if (value->is_string()) {
        const std::string folded = lower(value->get<std::string>());
        if (folded == "true") return true;
        if (folded == "false") return false;
    }
    throw Error(ErrorCode::ChainParseError,
                "missing_flag must be a boolean or \"True\"/\"False\"");
}

// First balanced {...} region that parses as JSON, scanning string-aware so
// braces inside string literals do not count.
std::optional<nlohmann::json> first_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    nlohmann::json parsed = nlohmann::json::parse(
                        text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break; // malformed candidate; try the next '{'
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace

const char* action_kind_name(ActionKind kind) {
    switch (kind) {
    case ActionKind::WebQuerying:
        return "Web-querying";
    case ActionKind::KnowledgeEncoding:
        return "knowledge-encoding";
    }
    return "?";
}

ActionKind parse_action_kind(const std::string& text) {
    const std::string folded = lower(text);
    if (folded == "web-querying") return ActionKind::WebQuerying;
    if (folded == "knowledge-encoding") return ActionKind::KnowledgeEncoding;
    throw Error(ErrorCode::UnknownAction, "unknown action '" + text + "'");
}

std::string build_initial_prompt(const std::string& question) {
    if (is_blank(question)) {
        throw Error(ErrorCode::EmptyQuestion, "initial prompt needs a question");
    }
    return "Given a [Question]: \"" + question + "\", " + kChainInstructions + "\n\n" +
           kInitialExample;
}

std::string build_normal_prompt(const ContextualKnowledgeSet& cks,
                                const std::string& question) {
    if (is_blank(question)) {
        throw Error(ErrorCode::EmptyQuestion, "normal prompt needs a question");
    }
    return "Given a [Contextual Knowledge Set]:\"" + render_for_prompt(cks) +
           "\" and [Question]: \"" + question +
           "\", help me to extract the real intent and provide an optimized question "
           "for this round. Then, " +
           kChainInstructions + "\n\n" + kNormalExample;
}

ActionChain parse_action_chain(const std::string& completion, Stage stage) {
    const auto doc = first_json_object(completion);
    if (!doc) {
        throw Error(ErrorCode::ChainParseError,
                    "completion contains no parseable JSON object");
    }

    ActionChain chain;
    chain.question = string_field(*doc, "question", "");
    if (stage == Stage::Normal) {
        const nlohmann::json* opt = find_key(*doc, "optimized_question");
        if (opt != nullptr && opt->is_string()) {
            chain.optimized_question = opt->get<std::string>();
        }
    }
    chain.final_answer = string_field(*doc, "final_answer", "");

    const nlohmann::json* nodes = find_key(*doc, "chain");
    if (nodes == nullptr || !nodes->is_array() || nodes->empty()) {
        throw Error(ErrorCode::EmptyChain, "completion has no chain steps");
    }
    for (const auto& entry : *nodes) {
        if (!entry.is_object()) {
            throw Error(ErrorCode::ChainParseError, "chain step is not an object");
        }
        const nlohmann::json* action = find_key(entry, "action");
        if (action == nullptr || !action->is_string()) {
            throw Error(ErrorCode::ChainParseError, "chain step missing 'action'");
        }
        const nlohmann::json* sub = find_key(entry, "sub");
        if (sub == nullptr || !sub->is_string()) {
            throw Error(ErrorCode::ChainParseError, "chain step missing 'Sub'");
        }
        ChainNode node;
        node.action = parse_action_kind(action->get<std::string>());
        node.sub = sub->get<std::string>();
        node.guess_answer = string_field(entry, "guess_answer", "");
        node.missing_flag = parse_missing_flag(entry);
        chain.nodes.push_back(std::move(node));
    }
    return chain;
}

} // namespace ccoa

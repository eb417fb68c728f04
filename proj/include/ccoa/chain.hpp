#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccoa/cks.hpp"
#include "ccoa/error.hpp"

namespace ccoa {

/// The two actions the framework can take for a sub-question.
enum class ActionKind {
    WebQuerying,
    KnowledgeEncoding,
};

const char* action_kind_name(ActionKind kind);

/// Case-insensitive parse of "Web-querying" / "knowledge-encoding".
/// Throws UnknownAction for anything else.
ActionKind parse_action_kind(const std::string& text);

/// One step of an action chain. `retrieved` is set by execution,
/// `corrected_answer` by verification; `failure` records an execution error
/// that the pipeline survived.
struct ChainNode {
    ActionKind action = ActionKind::KnowledgeEncoding;
    std::string sub;
    std::string guess_answer;
    bool missing_flag = false;
    std::optional<std::string> retrieved;
    std::optional<std::string> corrected_answer;
    std::optional<std::string> failure;
};

/// A parsed per-turn reasoning chain.
struct ActionChain {
    std::string question;
    std::optional<std::string> optimized_question; // normal stage only
    std::vector<ChainNode> nodes;
    std::string final_answer; // the LLM's guess; may be replaced downstream
};

enum class Stage {
    Initial, // round 1
    Normal,  // rounds >= 2
};

/// Initial-stage decomposition prompt with $QUESTION substituted.
/// Throws EmptyQuestion when the question is empty or whitespace.
std::string build_initial_prompt(const std::string& question);

/// Normal-stage prompt with $CKS and $QUESTION substituted.
std::string build_normal_prompt(const ContextualKnowledgeSet& cks,
                                const std::string& question);

/// Extracts the first balanced JSON object from a completion (prose around it
/// is ignored) and reads the chain out of it. Keys are matched
/// case-insensitively ("Sub"/"sub", "Missing_flag"/"missing_flag", ...);
/// missing_flag accepts booleans or "True"/"False" strings. Errors:
/// ChainParseError (no parseable object / malformed node), EmptyChain,
/// UnknownAction.
ActionChain parse_action_chain(const std::string& completion, Stage stage);

} // namespace ccoa

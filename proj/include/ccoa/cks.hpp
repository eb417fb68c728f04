#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ccoa/error.hpp"

namespace ccoa {

/// One conversation round as stored in the Contextual Knowledge Set. Keys of
/// sub_questions are "sub1".."subK" and information_summaries uses the
/// matching "infor1".."inforK"; entries align by index. An action that yields
/// nothing stores an empty summary string so the alignment is kept.
struct RoundRecord {
    int round = 0;
    std::string original_question;
    std::string optimized_question;
    std::vector<std::pair<std::string, std::string>> sub_questions;
    std::vector<std::pair<std::string, std::string>> information_summaries;
    std::string answer;
    // Fields we do not understand are kept verbatim (key, raw JSON text) and
    // re-emitted after the known fields so foreign documents survive a
    // round-trip.
    std::vector<std::pair<std::string, std::string>> extra_fields;
};

/// Per-conversation structured memory: an append-only list of rounds.
struct ContextualKnowledgeSet {
    std::vector<RoundRecord> rounds;
};

/// Appends a round; its number must continue the sequence (1 when empty).
/// Throws RoundSequenceError otherwise, InvalidValue if the record's
/// sub-question and summary keys are not an aligned sub1../infor1.. pair.
ContextualKnowledgeSet append_round(ContextualKnowledgeSet cks, RoundRecord record);

/// Canonical serialization: fixed key order, 2-space indent, UTF-8.
std::string serialize(const ContextualKnowledgeSet& cks);

/// Parses a CKS document in any key order. Throws CksParseError (with byte
/// position for syntax errors) when the document is malformed or a round is
/// missing a required field.
ContextualKnowledgeSet parse_cks(const std::string& text);

/// Text substituted for $CKS in prompts; identical to the canonical
/// serialization, so render(parse(render(x))) == render(x).
std::string render_for_prompt(const ContextualKnowledgeSet& cks);

/// Every information summary and answer across rounds, most recent round
/// first; within a round, summaries in key order then the answer.
std::vector<std::string> reference_segments(const ContextualKnowledgeSet& cks);

} // namespace ccoa

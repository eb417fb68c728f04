#include "ccoa/cks.hpp"

#include <algorithm>
#include <charconv>

#include "json.hpp"

namespace ccoa {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* kTopKey = "Contextual knowledge set";

/// Parses "sub3" / "infor12" style keys; returns 0 when the key does not
/// match `prefix` + positive integer.
int key_index(const std::string& key, const std::string& prefix) {
    if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) {
        return 0;
    }
    int value = 0;
    const char* first = key.data() + prefix.size();
    const char* last = key.data() + key.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value <= 0) return 0;
    return value;
}

void check_indexed_keys(const std::vector<std::pair<std::string, std::string>>& entries,
                        const std::string& prefix, ErrorCode code) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const int idx = key_index(entries[i].first, prefix);
        if (idx != static_cast<int>(i) + 1) {
            throw Error(code, "expected key '" + prefix + std::to_string(i + 1) +
                                  "', found '" + entries[i].first + "'");
        }
    }
}

void validate_record(const RoundRecord& record, ErrorCode code) {
    if (record.round < 1) {
        throw Error(code, "round number must be >= 1");
    }
    check_indexed_keys(record.sub_questions, "sub", code);
    check_indexed_keys(record.information_summaries, "infor", code);
    if (record.sub_questions.size() != record.information_summaries.size()) {
        throw Error(code, "sub_questions and information_summaries must align: " +
                              std::to_string(record.sub_questions.size()) + " vs " +
                              std::to_string(record.information_summaries.size()));
    }
}

ordered_json round_to_json(const RoundRecord& record) {
    ordered_json j;
    j["round"] = record.round;
    j["original_question"] = record.original_question;
    j["optimized_question"] = record.optimized_question;
    ordered_json subs = ordered_json::object();
    for (const auto& [key, text] : record.sub_questions) subs[key] = text;
    j["sub_questions"] = std::move(subs);
    ordered_json infos = ordered_json::object();
    for (const auto& [key, text] : record.information_summaries) infos[key] = text;
    j["information_summaries"] = std::move(infos);
    j["answer"] = record.answer;
    for (const auto& [key, raw] : record.extra_fields) {
        j[key] = ordered_json::parse(raw);
    }
    return j;
}

std::vector<std::pair<std::string, std::string>> indexed_map_from_json(
    const ordered_json& obj, const std::string& prefix, const std::string& field) {
    if (!obj.is_object()) {
        throw Error(ErrorCode::CksParseError, "field '" + field + "' must be an object");
    }
    std::vector<std::pair<int, std::pair<std::string, std::string>>> keyed;
    for (const auto& [key, value] : obj.items()) {
        const int idx = key_index(key, prefix);
        if (idx == 0) {
            throw Error(ErrorCode::CksParseError,
                        "field '" + field + "' has non-" + prefix + "N key '" + key + "'");
        }
        if (!value.is_string()) {
            throw Error(ErrorCode::CksParseError,
                        "field '" + field + "." + key + "' must be a string");
        }
        keyed.push_back({idx, {key, value.get<std::string>()}});
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (keyed[i].first != static_cast<int>(i) + 1) {
            throw Error(ErrorCode::CksParseError, "field '" + field + "' keys must be " +
                                                      prefix + "1.." + prefix + "K");
        }
        out.push_back(std::move(keyed[i].second));
    }
    return out;
}

RoundRecord round_from_json(const ordered_json& j, std::size_t position) {
    if (!j.is_object()) {
        throw Error(ErrorCode::CksParseError,
                    "round " + std::to_string(position) + " is not an object");
    }
    static const char* kKnown[] = {"round",         "original_question",
                                   "optimized_question", "sub_questions",
                                   "information_summaries", "answer"};
    for (const char* field : kKnown) {
        if (!j.contains(field)) {
            throw Error(ErrorCode::CksParseError, "round " + std::to_string(position) +
                                                      " missing field '" + field + "'");
        }
    }
    RoundRecord record;
    if (!j["round"].is_number_integer() || j["round"].get<int>() < 1) {
        throw Error(ErrorCode::CksParseError,
                    "round " + std::to_string(position) + ": 'round' must be a positive integer");
    }
    record.round = j["round"].get<int>();
    for (const char* field : {"original_question", "optimized_question", "answer"}) {
        if (!j[field].is_string()) {
            throw Error(ErrorCode::CksParseError, "round " + std::to_string(position) +
                                                      ": '" + field + "' must be a string");
        }
    }
    record.original_question = j["original_question"].get<std::string>();
    record.optimized_question = j["optimized_question"].get<std::string>();
    record.sub_questions =
        indexed_map_from_json(j["sub_questions"], "sub", "sub_questions");
    record.information_summaries =
        indexed_map_from_json(j["information_summaries"], "infor", "information_summaries");
    record.answer = j["answer"].get<std::string>();
    if (record.sub_questions.size() != record.information_summaries.size()) {
        throw Error(ErrorCode::CksParseError,
                    "round " + std::to_string(position) +
                        ": sub_questions and information_summaries must have equal size");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) {
                return key == k;
            }) == std::end(kKnown)) {
            record.extra_fields.push_back({key, value.dump()});
        }
    }
    return record;
}

} // namespace

ContextualKnowledgeSet append_round(ContextualKnowledgeSet cks, RoundRecord record) {
    validate_record(record, ErrorCode::InvalidValue);
    const int expected = cks.rounds.empty() ? 1 : cks.rounds.back().round + 1;
    if (record.round != expected) {
        throw Error(ErrorCode::RoundSequenceError,
                    "expected round " + std::to_string(expected) + ", got " +
                        std::to_string(record.round));
    }
    cks.rounds.push_back(std::move(record));
    return cks;
}

std::string serialize(const ContextualKnowledgeSet& cks) {
    ordered_json rounds = ordered_json::array();
    for (const auto& record : cks.rounds) rounds.push_back(round_to_json(record));
    ordered_json doc;
    doc[kTopKey] = std::move(rounds);
    return doc.dump(2);
}

ContextualKnowledgeSet parse_cks(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw Error(ErrorCode::CksParseError,
                    "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains(kTopKey) || !doc[kTopKey].is_array()) {
        throw Error(ErrorCode::CksParseError,
                    std::string("document must be an object with array key '") + kTopKey +
                        "'");
    }
    ContextualKnowledgeSet cks;
    std::size_t position = 0;
    for (const auto& entry : doc[kTopKey]) {
        RoundRecord record = round_from_json(entry, position++);
        const int expected = cks.rounds.empty() ? 1 : cks.rounds.back().round + 1;
        if (record.round != expected) {
            throw Error(ErrorCode::CksParseError,
                        "rounds must be contiguous from 1; round " +
                            std::to_string(position - 1) + " has number " +
                            std::to_string(record.round));
        }
        cks.rounds.push_back(std::move(record));
    }
    return cks;
}

std::string render_for_prompt(const ContextualKnowledgeSet& cks) {
    return serialize(cks);
}

std::vector<std::string> reference_segments(const ContextualKnowledgeSet& cks) {
    std::vector<std::string> segments;
    for (auto it = cks.rounds.rbegin(); it != cks.rounds.rend(); ++it) {
        for (const auto& [key, text] : it->information_summaries) {
            segments.push_back(text);
        }
        segments.push_back(it->answer);
    }
    return segments;
}

} // namespace ccoa

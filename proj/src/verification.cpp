#include "ccoa/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "ccoa/text_util.hpp"

namespace ccoa {

namespace {

// Frozen copy of data/stopwords.txt; a test asserts the two stay identical.
constexpr const char* kStopwords[] = {
    "a",        "about",   "above",    "after",   "again",      "against",
    "all",      "am",      "an",       "and",     "any",        "are",
    "as",       "at",      "be",       "because", "been",       "before",
    "being",    "below",   "between",  "both",    "but",        "by",
    "can",      "could",   "did",      "do",      "does",       "doing",
    "down",     "during",  "each",     "few",     "for",        "from",
    "further",  "had",     "has",      "have",    "having",     "he",
    "her",      "here",    "hers",     "herself", "him",        "himself",
    "his",      "how",     "i",        "if",      "in",         "into",
    "is",       "it",      "its",      "itself",  "just",       "may",
    "me",       "might",   "more",     "most",    "must",       "my",
    "myself",   "no",      "nor",      "not",     "now",        "of",
    "off",      "on",      "once",     "only",    "or",         "other",
    "our",      "ours",    "ourselves", "out",    "over",       "own",
    "same",     "shall",   "she",      "should",  "so",         "some",
    "such",     "than",    "that",     "the",     "their",      "theirs",
    "them",     "themselves", "then",  "there",   "these",      "they",
    "this",     "those",   "through",  "to",      "too",        "under",
    "until",    "up",      "very",     "was",     "we",         "were",
    "what",     "when",    "where",    "which",   "while",      "who",
    "whom",     "why",     "will",     "with",    "would",      "you",
    "your",     "yours",   "yourself", "yourselves",
};

std::size_t intersection_size(const ItemSet& a, const ItemSet& b) {
    const ItemSet& small = a.size() <= b.size() ? a : b;
    const ItemSet& large = a.size() <= b.size() ? b : a;
    std::size_t n = 0;
    for (const auto& item : small) n += large.count(item);
    return n;
}

} // namespace

void validate_weights(const FaithWeights& weights) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(weights.alpha) || !in_unit(weights.beta_w) || !in_unit(weights.gamma)) {
        throw Error(ErrorCode::ConfigWeightsInvalid, "faith weights must lie in [0,1]");
    }
    if (std::abs(weights.alpha + weights.beta_w + weights.gamma - 1.0) > 1e-9) {
        throw Error(ErrorCode::ConfigWeightsInvalid, "faith weights must sum to 1");
    }
}

const ItemSet& default_stopwords() {
    static const ItemSet set(std::begin(kStopwords), std::end(kStopwords));
    return set;
}

ItemSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open stopword file: " + path);
    }
    ItemSet set;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) set.insert(line);
    }
    return set;
}

ItemSet normalize_items(const std::string& text) {
    return normalize_items(text, default_stopwords());
}

ItemSet normalize_items(const std::string& text, const ItemSet& stopwords) {
    ItemSet items;
    for (auto& token : content_tokens(text)) {
        if (stopwords.count(token) == 0) items.insert(std::move(token));
    }
    return items;
}

double precision(const ItemSet& answer_items, const ItemSet& segment_items) {
    if (answer_items.empty()) {
        throw Error(ErrorCode::EmptyAnswer, "answer has no items");
    }
    return static_cast<double>(intersection_size(answer_items, segment_items)) /
           static_cast<double>(answer_items.size());
}

double recall(const ItemSet& answer_items, const ItemSet& segment_items) {
    if (answer_items.empty()) {
        throw Error(ErrorCode::EmptyAnswer, "answer has no items");
    }
    if (segment_items.empty()) {
        throw Error(ErrorCode::InvalidValue, "recall needs a non-empty segment item set");
    }
    return static_cast<double>(intersection_size(answer_items, segment_items)) /
           static_cast<double>(segment_items.size());
}

double awl(const std::string& answer_text) {
    const auto words = content_tokens(answer_text);
    if (words.empty()) {
        throw Error(ErrorCode::EmptyAnswer, "answer has no words");
    }
    std::size_t letters = 0;
    for (const auto& word : words) letters += word.size();
    return static_cast<double>(letters) / static_cast<double>(words.size());
}

double awl_norm(const std::string& answer_text, double cap) {
    if (!(cap > 0.0)) {
        throw Error(ErrorCode::InvalidValue, "awl cap must be positive");
    }
    return std::min(awl(answer_text) / cap, 1.0);
}

double faith_score(const std::string& segment_text, const std::string& answer_text,
                   const FaithWeights& weights, double cap) {
    validate_weights(weights);
    const ItemSet answer_items = normalize_items(answer_text);
    if (answer_items.empty()) {
        throw Error(ErrorCode::EmptyAnswer, "answer has no items");
    }
    const ItemSet segment_items = normalize_items(segment_text);
    const double p = precision(answer_items, segment_items);
    const double r = segment_items.empty() ? 0.0 : recall(answer_items, segment_items);
    return weights.alpha * p + weights.beta_w * r + weights.gamma * awl_norm(answer_text, cap);
}

FaithScoreReport conv_mrfs(const std::vector<std::string>& segments,
                           const std::string& answer, const FaithWeights& weights,
                           double threshold, double cap) {
    validate_weights(weights);
    const ItemSet answer_items = normalize_items(answer);
    if (answer_items.empty()) {
        throw Error(ErrorCode::EmptyAnswer, "answer has no items");
    }
    const double awl_component = awl_norm(answer, cap);

    FaithScoreReport report;
    report.threshold = threshold;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const ItemSet segment_items = normalize_items(segments[i]);
        if (segment_items.empty()) continue;
        const double p = precision(answer_items, segment_items);
        const double r = recall(answer_items, segment_items);
        const double s =
            weights.alpha * p + weights.beta_w * r + weights.gamma * awl_component;
        report.per_segment.push_back({i, p, r, awl_component, s});
        report.max_score = std::max(report.max_score, s);
    }
    report.faithful = report.max_score > threshold;
    return report;
}

} // namespace ccoa

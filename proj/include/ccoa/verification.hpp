#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccoa/error.hpp"

namespace ccoa {

/// Convex weights for the three faith-score components. beta_w named to
/// avoid a collision with the Hopfield inverse temperature beta.
struct FaithWeights {
    double alpha = 0.5;
    double beta_w = 0.4;
    double gamma = 0.1;
};

/// Throws ConfigWeightsInvalid unless all weights lie in [0,1] and sum to 1
/// within 1e-9.
void validate_weights(const FaithWeights& weights);

using ItemSet = std::unordered_set<std::string>;

/// The frozen stopword list shipped with the artifact (identical to
/// data/stopwords.txt; a test keeps the two in sync).
const ItemSet& default_stopwords();

/// Reads a one-token-per-line stopword file. Throws IoError.
ItemSet load_stopwords(const std::string& path);

/// Lowercased, punctuation-stripped, whitespace-split tokens with stopwords
/// removed, deduplicated. Empty result is allowed.
ItemSet normalize_items(const std::string& text);
ItemSet normalize_items(const std::string& text, const ItemSet& stopwords);

/// P = |answer ∩ segment| / |answer|. Throws EmptyAnswer on an empty answer
/// item set.
double precision(const ItemSet& answer_items, const ItemSet& segment_items);

/// Rcl = |answer ∩ segment| / |segment|. Throws EmptyAnswer on an empty
/// answer set and InvalidValue on an empty segment set (callers skip those
/// segments instead of scoring them).
double recall(const ItemSet& answer_items, const ItemSet& segment_items);

/// Average word length over ALL words of the answer, stopwords included,
/// punctuation stripped before measuring. Throws EmptyAnswer when the answer
/// contains no words.
double awl(const std::string& answer_text);

/// min(awl / cap, 1). Default cap 10 keeps the component in [0,1].
double awl_norm(const std::string& answer_text, double cap = 10.0);

/// S = alpha*P + beta_w*Rcl + gamma*AWL_norm for one segment.
double faith_score(const std::string& segment_text, const std::string& answer_text,
                   const FaithWeights& weights = {}, double cap = 10.0);

struct SegmentScore {
    std::size_t segment = 0; // index into the caller's segment list
    double precision = 0.0;
    double recall = 0.0;
    double awl_norm = 0.0;
    double score = 0.0;
};

struct FaithScoreReport {
    std::vector<SegmentScore> per_segment; // segments with empty item sets omitted
    double max_score = 0.0;
    double threshold = 0.6;
    bool faithful = false; // max_score strictly exceeds threshold
};

/// Scores the answer against every segment with a non-empty item set and
/// takes the maximum. No scoreable segments means max_score 0 and
/// faithful false. Throws EmptyAnswer when the answer has no items.
FaithScoreReport conv_mrfs(const std::vector<std::string>& segments,
                           const std::string& answer, const FaithWeights& weights = {},
                           double threshold = 0.6, double cap = 10.0);

} // namespace ccoa

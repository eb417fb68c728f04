#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccoa/linalg.hpp"

namespace ccoa {

/// Immutable bank of stored patterns. Row i of `patterns` is pattern y_i,
/// identified by ids[i]. Construction validates finiteness and id uniqueness;
/// mutation produces a new snapshot via with_appended().
struct MemoryBank {
    Matrix patterns;              // n_patterns x dim
    std::vector<std::string> ids; // one per row, unique

    MemoryBank() = default;
    MemoryBank(Matrix patterns, std::vector<std::string> ids);

    std::size_t size() const { return patterns.rows; }
    std::size_t dim() const { return patterns.cols; }

    /// New bank with extra rows appended; *this is untouched.
    MemoryBank with_appended(const Matrix& extra_rows,
                             const std::vector<std::string>& extra_ids) const;
};

/// Query/key/value projection weights plus the inverse temperature.
/// Shapes: w_q (query_dim x assoc_dim), w_k (pattern_dim x assoc_dim),
/// w_v (assoc_dim x out_dim).
struct HopfieldProjections {
    Matrix w_q;
    Matrix w_k;
    Matrix w_v;
    double beta = 8.0;

    static HopfieldProjections identity(std::size_t dim, double beta = 8.0);
};

enum class ModeKind {
    MemoryRetrieval, // all projections identity; query interacts with raw patterns
    Association,     // all three projections trainable
    Pooling,         // static learned query, trainable keys/values
    Lookup,          // keys/values are stored-pattern weights, Y acts as identity
};

/// Mode selector plus the mode-specific learned state.
struct HopfieldMode {
    ModeKind kind = ModeKind::MemoryRetrieval;
    Vec pooling_query;    // Pooling: static query in the associative space
    Matrix lookup_keys;   // Lookup: stored key patterns (n_stored x assoc_dim)
    Matrix lookup_values; // Lookup: value projection (assoc_dim x out_dim)
};

struct ModeDims {
    std::size_t query_dim = 0;
    std::size_t pattern_dim = 0;
    std::size_t assoc_dim = 0;
    std::size_t out_dim = 0;
};

/// One-step association against the full bank.
struct AssociationResult {
    Vec weights;                        // sparsemax output over rows, sums to 1
    Vec retrieved;                      // convex combination of value-projected rows
    Vec scores;                         // raw logits beta * (q W_Q) . (y_i W_K)
    std::vector<std::string> ranked_ids; // ids by score desc, ties by ascending id
};

/// (id, raw score) pair as returned by the ranking operations.
struct RankedMatch {
    std::string id;
    double score = 0.0;
};

/// Single-update retrieval: scores_i = beta*(q W_Q).(y_i W_K),
/// weights = sparsemax(scores), retrieved = sum_i weights_i * (y_i W_K W_V).
/// Throws EmptyMemory on an empty bank, InvalidDimension on shape mismatch.
AssociationResult associate(const Vec& query, const MemoryBank& bank,
                            const HopfieldProjections& proj);

/// The min(k, n_patterns) ids with the largest raw scores, descending;
/// equal scores break by ascending id. Throws EmptyMemory / InvalidDimension.
std::vector<RankedMatch> retrieve_top_k(const Vec& query, const MemoryBank& bank,
                                        const HopfieldProjections& proj, std::size_t k);

/// Splits the bank rows into `segments` contiguous near-equal parts, scores
/// each part independently (in parallel when threads are available), takes the
/// local top-k of each, then re-ranks the merged candidates by raw score.
/// Id-identical to retrieve_top_k on the full bank for every segment count.
/// Throws InvalidSegmentation unless 1 <= segments <= n_patterns.
std::vector<RankedMatch> segmented_retrieve(const Vec& query, const MemoryBank& bank,
                                            const HopfieldProjections& proj,
                                            std::size_t segments, std::size_t k);

/// Builds the projections for one of the four layer configurations.
/// MemoryRetrieval forces identities (all dims equal); Association draws
/// trainable weights uniformly from [-1/sqrt(rows), +1/sqrt(rows)] with the
/// given seed; Pooling validates the static query and draws keys/values;
/// Lookup installs the stored-pattern matrices. Throws InvalidDimension on
/// inconsistent dims or empty Lookup patterns.
HopfieldProjections configure_mode(const HopfieldMode& mode, const ModeDims& dims,
                                   double beta = 8.0, std::uint64_t seed = 0);

/// n x n identity bank with ids "0".."n-1"; the Y of the Lookup configuration.
MemoryBank identity_bank(std::size_t n);

} // namespace ccoa

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccoa/hopfield.hpp"

namespace ccoa {

/// One contrastive example: a question embedding, the id of its gold pattern,
/// and optional explicit negative ids. With in-batch negatives enabled the
/// other instances' positives are added as negatives automatically.
struct TrainingInstance {
    Vec question_embedding;
    std::string positive_id;
    std::vector<std::string> negative_ids;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    bool in_batch_negatives = true;
    std::size_t assoc_dim = 0; // 0 = use the bank dimension
    std::uint64_t seed = 0;
};

struct TrainState {
    HopfieldProjections projections;
    double learning_rate = 0.05;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
    bool in_batch_negatives = true;
};

struct TrainResult {
    HopfieldProjections projections;
    std::vector<double> epoch_losses; // mean instance loss per epoch
};

/// Raw bilinear score (q W_Q).(y W_K); used for both the loss and ranking.
double similarity(const Vec& q, const Vec& y, const HopfieldProjections& proj);

/// Mean over the batch of -log( exp(s+) / (exp(s+) + sum_j exp(s-_j)) ),
/// computed with log-sum-exp. Throws InsufficientNegatives when an instance
/// ends up with no negatives after in-batch expansion.
double dpr_nll(const std::vector<TrainingInstance>& batch, const MemoryBank& bank,
               const HopfieldProjections& proj, bool in_batch_negatives = true);

/// One plain gradient-descent step on w_q and w_k (w_v untouched) using the
/// analytic softmax-weighted outer-product gradients of dpr_nll.
/// Throws NumericalDivergence if gradients or updated weights go non-finite.
TrainState grad_step(const TrainState& state, const std::vector<TrainingInstance>& batch,
                     const MemoryBank& bank);

/// Full training loop: seeded shuffling, minibatches of config.batch_size,
/// per-epoch mean loss history. epochs == 0 returns the freshly initialized
/// projections untouched. Deterministic given config.seed.
TrainResult train(const std::vector<TrainingInstance>& instances, const MemoryBank& bank,
                  std::size_t epochs, const TrainConfig& config);

/// Training-data record as stored on disk (see load_training_file).
struct TrainingRecord {
    std::string question;
    std::string positive_chunk_id;
    std::vector<std::string> negative_chunk_ids;
};

/// Reads newline-delimited JSON records
/// {"question": ..., "positive_chunk_id": ..., "negative_chunk_ids": [...]}.
std::vector<TrainingRecord> load_training_file(const std::string& path);

/// Projection weights round-trip as a JSON document {w_q, w_k, w_v, beta}.
void save_projections(const HopfieldProjections& proj, const std::string& path);
HopfieldProjections load_projections(const std::string& path);

} // namespace ccoa

#include "ccoa/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "json.hpp"

#include "ccoa/rng.hpp"

namespace ccoa {

namespace {

std::unordered_map<std::string, std::size_t> id_index(const MemoryBank& bank) {
    std::unordered_map<std::string, std::size_t> map;
    map.reserve(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) map.emplace(bank.ids[i], i);
    return map;
}

std::size_t row_of(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) {
        throw Error(ErrorCode::InvalidValue, "training id '" + id + "' not in bank");
    }
    return it->second;
}

// Candidate rows for one instance: positive first, then explicit negatives,
// then other instances' positives (skipping rows equal to the positive).
std::vector<std::size_t> candidate_rows(
    const std::vector<TrainingInstance>& batch, std::size_t i,
    const std::unordered_map<std::string, std::size_t>& index, bool in_batch) {
    const auto& inst = batch[i];
    std::vector<std::size_t> rows;
    rows.push_back(row_of(index, inst.positive_id));
    for (const auto& id : inst.negative_ids) {
        const std::size_t r = row_of(index, id);
        if (r == rows[0]) {
            throw Error(ErrorCode::InvalidValue,
                        "training instance lists its positive as a negative");
        }
        rows.push_back(r);
    }
    if (in_batch) {
        for (std::size_t j = 0; j < batch.size(); ++j) {
            if (j == i) continue;
            const std::size_t r = row_of(index, batch[j].positive_id);
            if (r != rows[0]) rows.push_back(r);
        }
    }
    if (rows.size() < 2) {
        throw Error(ErrorCode::InsufficientNegatives,
                    "instance has no negatives after in-batch expansion");
    }
    return rows;
}

// Softmax over scores (positive at index 0); returns per-candidate weights and
// the instance loss -log softmax[0].
double softmax_and_loss(const std::vector<double>& scores, std::vector<double>& probs) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    probs.resize(scores.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        probs[c] = std::exp(scores[c] - m);
        z += probs[c];
    }
    for (double& p : probs) p /= z;
    return -(scores[0] - m - std::log(z));
}

struct BatchGradients {
    Matrix w_q;
    Matrix w_k;
    double loss = 0.0;
};

// Shared by dpr_nll and grad_step so both always agree on the loss surface.
BatchGradients evaluate_batch(const std::vector<TrainingInstance>& batch,
                              const MemoryBank& bank, const HopfieldProjections& proj,
                              bool in_batch, bool want_gradients) {
    if (batch.empty()) {
        throw Error(ErrorCode::InvalidValue, "dpr_nll: empty batch");
    }
    const auto index = id_index(bank);

    BatchGradients out;
    if (want_gradients) {
        out.w_q = Matrix(proj.w_q.rows, proj.w_q.cols);
        out.w_k = Matrix(proj.w_k.rows, proj.w_k.cols);
    }

    // Projected keys are shared across instances within the batch.
    std::unordered_map<std::size_t, Vec> key_cache;
    auto key_of = [&](std::size_t row) -> const Vec& {
        auto it = key_cache.find(row);
        if (it == key_cache.end()) {
            it = key_cache
                     .emplace(row, row_mat(bank.patterns.row(row), bank.dim(), proj.w_k))
                     .first;
        }
        return it->second;
    };

    const double inv_m = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& inst = batch[i];
        require_finite_vector(inst.question_embedding, "training question embedding");
        if (inst.question_embedding.size() != proj.w_q.rows) {
            throw Error(ErrorCode::InvalidDimension,
                        "training question dim vs w_q rows");
        }
        const std::vector<std::size_t> rows = candidate_rows(batch, i, index, in_batch);
        const Vec qp = vec_mat(inst.question_embedding, proj.w_q);

        std::vector<double> scores(rows.size());
        for (std::size_t c = 0; c < rows.size(); ++c) {
            scores[c] = dot(qp.data(), key_of(rows[c]).data(), qp.size());
        }
        std::vector<double> probs;
        out.loss += softmax_and_loss(scores, probs) * inv_m;

        if (!want_gradients) continue;

        // dL/ds_c = probs_c - [c == positive]; positive sits at c == 0.
        // dL/dW_Q = q (x) sum_c g_c (y_c W_K);  dL/dW_K = sum_c g_c y_c (x) (q W_Q)
        Vec key_dir(qp.size(), 0.0);
        for (std::size_t c = 0; c < rows.size(); ++c) {
            const double g = (probs[c] - (c == 0 ? 1.0 : 0.0)) * inv_m;
            const Vec& key = key_of(rows[c]);
            for (std::size_t a = 0; a < qp.size(); ++a) key_dir[a] += g * key[a];

            const double* y = bank.patterns.row(rows[c]);
            for (std::size_t r = 0; r < bank.dim(); ++r) {
                const double gy = g * y[r];
                if (gy == 0.0) continue;
                double* grad_row = out.w_k.row(r);
                for (std::size_t a = 0; a < qp.size(); ++a) grad_row[a] += gy * qp[a];
            }
        }
        for (std::size_t r = 0; r < inst.question_embedding.size(); ++r) {
            const double x = inst.question_embedding[r];
            if (x == 0.0) continue;
            double* grad_row = out.w_q.row(r);
            for (std::size_t a = 0; a < qp.size(); ++a) grad_row[a] += x * key_dir[a];
        }
    }
    return out;
}

HopfieldProjections init_projections(std::size_t query_dim, std::size_t pattern_dim,
                                     std::size_t assoc_dim, std::uint64_t seed) {
    Rng rng(seed);
    auto draw = [&rng](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
        for (double& x : m.data) x = uniform_in(rng, -bound, bound);
        return m;
    };
    HopfieldProjections proj;
    proj.w_q = draw(query_dim, assoc_dim);
    proj.w_k = draw(pattern_dim, assoc_dim);
    proj.w_v = Matrix::identity(assoc_dim); // ranking only sees w_q/w_k
    return proj;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        rows.push_back(std::vector<double>(m.row(r), m.row(r) + m.cols));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty()) {
        throw Error(ErrorCode::InvalidValue, "projection file: matrix must be a row array");
    }
    const std::size_t cols = rows[0].size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (row.size() != cols) {
            throw Error(ErrorCode::InvalidValue, "projection file: ragged matrix");
        }
        std::copy(row.begin(), row.end(), m.row(r));
    }
    return m;
}

} // namespace

double similarity(const Vec& q, const Vec& y, const HopfieldProjections& proj) {
    require_finite_vector(q, "similarity");
    require_finite_vector(y, "similarity");
    if (q.size() != proj.w_q.rows || y.size() != proj.w_k.rows ||
        proj.w_q.cols != proj.w_k.cols) {
        throw Error(ErrorCode::InvalidDimension, "similarity: projection shape mismatch");
    }
    const Vec qp = vec_mat(q, proj.w_q);
    const Vec yk = vec_mat(y, proj.w_k);
    return dot(qp, yk);
}

double dpr_nll(const std::vector<TrainingInstance>& batch, const MemoryBank& bank,
               const HopfieldProjections& proj, bool in_batch_negatives) {
    return evaluate_batch(batch, bank, proj, in_batch_negatives, false).loss;
}

TrainState grad_step(const TrainState& state, const std::vector<TrainingInstance>& batch,
                     const MemoryBank& bank) {
    BatchGradients grads = evaluate_batch(batch, bank, state.projections,
                                          state.in_batch_negatives, true);
    if (!all_finite(grads.w_q) || !all_finite(grads.w_k)) {
        throw Error(ErrorCode::NumericalDivergence, "non-finite gradient");
    }

    TrainState next = state;
    for (std::size_t i = 0; i < grads.w_q.data.size(); ++i) {
        next.projections.w_q.data[i] -= state.learning_rate * grads.w_q.data[i];
    }
    for (std::size_t i = 0; i < grads.w_k.data.size(); ++i) {
        next.projections.w_k.data[i] -= state.learning_rate * grads.w_k.data[i];
    }
    if (!all_finite(next.projections.w_q) || !all_finite(next.projections.w_k)) {
        throw Error(ErrorCode::NumericalDivergence, "non-finite projection after step");
    }
    next.step = state.step + 1;
    return next;
}

TrainResult train(const std::vector<TrainingInstance>& instances, const MemoryBank& bank,
                  std::size_t epochs, const TrainConfig& config) {
    if (instances.empty()) {
        throw Error(ErrorCode::InvalidValue, "train: no instances");
    }
    if (config.learning_rate <= 0.0) {
        throw Error(ErrorCode::InvalidValue, "train: learning_rate must be positive");
    }
    const std::size_t assoc = config.assoc_dim == 0 ? bank.dim() : config.assoc_dim;
    const std::size_t query_dim = instances.front().question_embedding.size();

    TrainState state;
    state.projections = init_projections(query_dim, bank.dim(), assoc, config.seed);
    state.learning_rate = config.learning_rate;
    state.seed = config.seed;
    state.in_batch_negatives = config.in_batch_negatives;

    TrainResult result;
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(config.seed ^ 0x5deece66dull);

    const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng() % i]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, order.size());
            std::vector<TrainingInstance> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(instances[order[i]]);

            epoch_loss += dpr_nll(batch, bank, state.projections,
                                  state.in_batch_negatives) *
                          static_cast<double>(batch.size());
            state = grad_step(state, batch, bank);
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    result.projections = state.projections;
    return result;
}

std::vector<TrainingRecord> load_training_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open training file: " + path);
    }
    std::vector<TrainingRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("question") || !j.contains("positive_chunk_id")) {
            throw Error(ErrorCode::InvalidValue,
                        "training file line " + std::to_string(lineno) + " malformed");
        }
        TrainingRecord rec;
        rec.question = j["question"].get<std::string>();
        rec.positive_chunk_id = j["positive_chunk_id"].get<std::string>();
        if (j.contains("negative_chunk_ids")) {
            rec.negative_chunk_ids = j["negative_chunk_ids"].get<std::vector<std::string>>();
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void save_projections(const HopfieldProjections& proj, const std::string& path) {
    nlohmann::json doc = {
        {"w_q", matrix_to_json(proj.w_q)},
        {"w_k", matrix_to_json(proj.w_k)},
        {"w_v", matrix_to_json(proj.w_v)},
        {"beta", proj.beta},
    };
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write projection file: " + path);
    }
    out << doc.dump(2) << "\n";
}

HopfieldProjections load_projections(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open projection file: " + path);
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("w_q") || !doc.contains("w_k") ||
        !doc.contains("w_v") || !doc.contains("beta")) {
        throw Error(ErrorCode::InvalidValue, "projection file malformed: " + path);
    }
    HopfieldProjections proj;
    proj.w_q = matrix_from_json(doc["w_q"]);
    proj.w_k = matrix_from_json(doc["w_k"]);
    proj.w_v = matrix_from_json(doc["w_v"]);
    proj.beta = doc["beta"].get<double>();
    return proj;
}

} // namespace ccoa

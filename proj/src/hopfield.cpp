#include "ccoa/hopfield.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "ccoa/rng.hpp"
#include "ccoa/sparsemax.hpp"

namespace ccoa {

namespace {

bool is_identity(const Matrix& m) {
    if (m.rows != m.cols) return false;
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (m.at(r, c) != (r == c ? 1.0 : 0.0)) return false;
        }
    }
    return true;
}

void validate_shapes(const Vec& query, const MemoryBank& bank,
                     const HopfieldProjections& proj) {
    if (bank.size() == 0) {
        throw Error(ErrorCode::EmptyMemory, "associate: empty memory bank");
    }
    require_finite_vector(query, "associate query");
    if (proj.beta <= 0.0 || !std::isfinite(proj.beta)) {
        throw Error(ErrorCode::InvalidValue, "associate: beta must be positive");
    }
    if (query.size() != proj.w_q.rows) {
        throw Error(ErrorCode::InvalidDimension, "associate: query dim vs w_q rows");
    }
    if (bank.dim() != proj.w_k.rows) {
        throw Error(ErrorCode::InvalidDimension, "associate: bank dim vs w_k rows");
    }
    if (proj.w_q.cols != proj.w_k.cols) {
        throw Error(ErrorCode::InvalidDimension, "associate: w_q cols vs w_k cols");
    }
    if (proj.w_v.rows != proj.w_k.cols) {
        throw Error(ErrorCode::InvalidDimension, "associate: w_v rows vs assoc dim");
    }
}

// Key-space query direction t = W_K (q W_Q), so that
// score_i = beta * (q W_Q).(y_i W_K) = beta * y_i . t.
// Keeps scoring at O(n * pattern_dim) regardless of projections.
Vec key_space_query(const Vec& query, const HopfieldProjections& proj) {
    Vec qp = is_identity(proj.w_q) ? query : vec_mat(query, proj.w_q);
    if (is_identity(proj.w_k)) return qp;
    Vec t(proj.w_k.rows, 0.0);
    for (std::size_t r = 0; r < proj.w_k.rows; ++r) {
        t[r] = dot(proj.w_k.row(r), qp.data(), proj.w_k.cols);
    }
    return t;
}

void score_rows(const MemoryBank& bank, const Vec& t, double beta,
                std::size_t begin, std::size_t end, double* out) {
    const std::size_t dim = bank.dim();
    for (std::size_t i = begin; i < end; ++i) {
        out[i - begin] = beta * dot(bank.patterns.row(i), t.data(), dim);
    }
}

// score desc, then ascending id; ids are unique so this is a total order.
bool match_before(const RankedMatch& a, const RankedMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

std::vector<RankedMatch> top_k_of(std::vector<RankedMatch>& candidates, std::size_t k) {
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(),
                      match_before);
    candidates.resize(take);
    return candidates;
}

} // namespace

MemoryBank::MemoryBank(Matrix patterns_in, std::vector<std::string> ids_in)
    : patterns(std::move(patterns_in)), ids(std::move(ids_in)) {
    if (patterns.rows == 0 || patterns.cols == 0) {
        throw Error(ErrorCode::EmptyMemory, "memory bank requires at least one pattern");
    }
    if (ids.size() != patterns.rows) {
        throw Error(ErrorCode::InvalidDimension, "memory bank: one id per row required");
    }
    if (!all_finite(patterns)) {
        throw Error(ErrorCode::InvalidValue, "memory bank: non-finite pattern component");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::InvalidValue, "memory bank: duplicate id '" + id + "'");
        }
    }
}

MemoryBank MemoryBank::with_appended(const Matrix& extra_rows,
                                     const std::vector<std::string>& extra_ids) const {
    if (extra_rows.cols != dim()) {
        throw Error(ErrorCode::InvalidDimension, "with_appended: dim mismatch");
    }
    Matrix merged(size() + extra_rows.rows, dim());
    std::copy(patterns.data.begin(), patterns.data.end(), merged.data.begin());
    std::copy(extra_rows.data.begin(), extra_rows.data.end(),
              merged.data.begin() + static_cast<std::ptrdiff_t>(patterns.data.size()));
    std::vector<std::string> merged_ids = ids;
    merged_ids.insert(merged_ids.end(), extra_ids.begin(), extra_ids.end());
    return MemoryBank(std::move(merged), std::move(merged_ids));
}

HopfieldProjections HopfieldProjections::identity(std::size_t dim, double beta) {
    HopfieldProjections p;
    p.w_q = Matrix::identity(dim);
    p.w_k = Matrix::identity(dim);
    p.w_v = Matrix::identity(dim);
    p.beta = beta;
    return p;
}

AssociationResult associate(const Vec& query, const MemoryBank& bank,
                            const HopfieldProjections& proj) {
    validate_shapes(query, bank, proj);

    const Vec t = key_space_query(query, proj);
    AssociationResult res;
    res.scores.resize(bank.size());
    score_rows(bank, t, proj.beta, 0, bank.size(), res.scores.data());
    res.weights = sparsemax(res.scores);

    // retrieved = (weights^T Y) W_K W_V, skipping identity projections
    Vec wy(bank.dim(), 0.0);
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const double w = res.weights[i];
        if (w == 0.0) continue;
        const double* row = bank.patterns.row(i);
        for (std::size_t c = 0; c < bank.dim(); ++c) wy[c] += w * row[c];
    }
    Vec wyk = is_identity(proj.w_k) ? wy : vec_mat(wy, proj.w_k);
    res.retrieved = is_identity(proj.w_v) ? wyk : vec_mat(wyk, proj.w_v);

    std::vector<RankedMatch> order(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) {
        order[i] = {bank.ids[i], res.scores[i]};
    }
    std::sort(order.begin(), order.end(), match_before);
    res.ranked_ids.reserve(order.size());
    for (auto& m : order) res.ranked_ids.push_back(std::move(m.id));
    return res;
}

std::vector<RankedMatch> retrieve_top_k(const Vec& query, const MemoryBank& bank,
                                        const HopfieldProjections& proj, std::size_t k) {
    validate_shapes(query, bank, proj);
    if (k == 0) {
        throw Error(ErrorCode::InvalidValue, "retrieve_top_k: k must be >= 1");
    }
    const Vec t = key_space_query(query, proj);
    std::vector<double> scores(bank.size());
    score_rows(bank, t, proj.beta, 0, bank.size(), scores.data());
    std::vector<RankedMatch> candidates(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) {
        candidates[i] = {bank.ids[i], scores[i]};
    }
    return top_k_of(candidates, k);
}

std::vector<RankedMatch> segmented_retrieve(const Vec& query, const MemoryBank& bank,
                                            const HopfieldProjections& proj,
                                            std::size_t segments, std::size_t k) {
    validate_shapes(query, bank, proj);
    if (segments < 1 || segments > bank.size()) {
        throw Error(ErrorCode::InvalidSegmentation,
                    "segmented_retrieve: segments must be in [1, n_patterns]");
    }
    if (k == 0) {
        throw Error(ErrorCode::InvalidValue, "segmented_retrieve: k must be >= 1");
    }

    const Vec t = key_space_query(query, proj);
    const std::size_t n = bank.size();
    const std::size_t seg_rows = (n + segments - 1) / segments; // ceil(n/segments)

    // Each segment's local top-k lands in its own slot; merge order is fixed
    // by segment index, so thread completion order never shows in the result.
    std::vector<std::vector<RankedMatch>> local(segments);
    auto run_segment = [&](std::size_t s) {
        const std::size_t begin = s * seg_rows;
        const std::size_t end = std::min(begin + seg_rows, n);
        if (begin >= end) return;
        std::vector<double> scores(end - begin);
        score_rows(bank, t, proj.beta, begin, end, scores.data());
        std::vector<RankedMatch> cand(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            cand[i - begin] = {bank.ids[i], scores[i - begin]};
        }
        local[s] = top_k_of(cand, k);
    };

    const std::size_t workers =
        std::min<std::size_t>(segments, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1 || segments == 1) {
        for (std::size_t s = 0; s < segments; ++s) run_segment(s);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < segments; s += workers) run_segment(s);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Global re-rank over raw scores with the same tie-break.
    std::vector<RankedMatch> merged;
    merged.reserve(segments * k);
    for (auto& seg : local) {
        merged.insert(merged.end(), std::make_move_iterator(seg.begin()),
                      std::make_move_iterator(seg.end()));
    }
    return top_k_of(merged, k);
}

HopfieldProjections configure_mode(const HopfieldMode& mode, const ModeDims& dims,
                                   double beta, std::uint64_t seed) {
    if (beta <= 0.0 || !std::isfinite(beta)) {
        throw Error(ErrorCode::InvalidValue, "configure_mode: beta must be positive");
    }
    Rng rng(seed);
    auto draw = [&rng](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
        for (double& x : m.data) x = uniform_in(rng, -bound, bound);
        return m;
    };

    HopfieldProjections proj;
    proj.beta = beta;
    switch (mode.kind) {
        case ModeKind::MemoryRetrieval: {
            const std::size_t d = dims.pattern_dim;
            if (d == 0 || dims.query_dim != d ||
                (dims.assoc_dim != 0 && dims.assoc_dim != d) ||
                (dims.out_dim != 0 && dims.out_dim != d)) {
                throw Error(ErrorCode::InvalidDimension,
                            "memory-retrieval mode requires one common dimension");
            }
            proj.w_q = Matrix::identity(d);
            proj.w_k = Matrix::identity(d);
            proj.w_v = Matrix::identity(d);
            break;
        }
        case ModeKind::Association: {
            if (dims.query_dim == 0 || dims.pattern_dim == 0 || dims.assoc_dim == 0 ||
                dims.out_dim == 0) {
                throw Error(ErrorCode::InvalidDimension, "association mode: zero dimension");
            }
            proj.w_q = draw(dims.query_dim, dims.assoc_dim);
            proj.w_k = draw(dims.pattern_dim, dims.assoc_dim);
            proj.w_v = draw(dims.assoc_dim, dims.out_dim);
            break;
        }
        case ModeKind::Pooling: {
            if (dims.pattern_dim == 0 || dims.assoc_dim == 0 || dims.out_dim == 0) {
                throw Error(ErrorCode::InvalidDimension, "pooling mode: zero dimension");
            }
            if (mode.pooling_query.size() != dims.assoc_dim) {
                throw Error(ErrorCode::InvalidDimension,
                            "pooling mode: static query must live in the associative space");
            }
            require_finite_vector(mode.pooling_query, "pooling query");
            proj.w_q = Matrix::identity(dims.assoc_dim);
            proj.w_k = draw(dims.pattern_dim, dims.assoc_dim);
            proj.w_v = draw(dims.assoc_dim, dims.out_dim);
            break;
        }
        case ModeKind::Lookup: {
            if (mode.lookup_keys.empty()) {
                throw Error(ErrorCode::InvalidDimension,
                            "lookup mode: empty stored-pattern matrix");
            }
            if (dims.query_dim == 0 || dims.assoc_dim == 0 ||
                mode.lookup_keys.cols != dims.assoc_dim) {
                throw Error(ErrorCode::InvalidDimension, "lookup mode: key shape mismatch");
            }
            if (mode.lookup_values.empty() || mode.lookup_values.rows != dims.assoc_dim ||
                (dims.out_dim != 0 && mode.lookup_values.cols != dims.out_dim)) {
                throw Error(ErrorCode::InvalidDimension, "lookup mode: value shape mismatch");
            }
            proj.w_q = draw(dims.query_dim, dims.assoc_dim);
            proj.w_k = mode.lookup_keys;
            proj.w_v = mode.lookup_values;
            break;
        }
    }
    return proj;
}

MemoryBank identity_bank(std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::EmptyMemory, "identity_bank: n must be >= 1");
    }
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return MemoryBank(Matrix::identity(n), std::move(ids));
}

} // namespace ccoa

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "ccoa/hopfield.hpp"

#include "oracles.hpp"

using ccoa::HopfieldMode;
using ccoa::HopfieldProjections;
using ccoa::Matrix;
using ccoa::MemoryBank;
using ccoa::ModeDims;
using ccoa::ModeKind;
using ccoa::Vec;

namespace {

MemoryBank random_bank(ccoa::Rng& rng, std::size_t n, std::size_t dim) {
    Matrix patterns(n, dim);
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec row = oracle::random_unit_vec(rng, dim);
        std::copy(row.begin(), row.end(), patterns.row(i));
        ids[i] = "p" + std::to_string(i);
    }
    return MemoryBank(std::move(patterns), std::move(ids));
}

std::vector<std::string> ids_of(const std::vector<ccoa::RankedMatch>& matches) {
    std::vector<std::string> ids;
    for (const auto& m : matches) ids.push_back(m.id);
    return ids;
}

ccoa::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ccoa::Error& e) {
        return e.code();
    }
    FAIL("expected a ccoa::Error");
    return ccoa::ErrorCode::InvalidValue;
}

} // namespace

TEST_CASE("memory bank construction and append") {
    Matrix m(2, 3);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = 1.0;
    const MemoryBank bank(m, {"a", "b"});
    CHECK(bank.size() == 2);
    CHECK(bank.dim() == 3);

    CHECK(code_of([&] { MemoryBank(m, {"a", "a"}); }) == ccoa::ErrorCode::InvalidValue);
    CHECK(code_of([&] { MemoryBank(m, {"a"}); }) == ccoa::ErrorCode::InvalidDimension);
    CHECK(code_of([&] { MemoryBank(Matrix(), {}); }) == ccoa::ErrorCode::EmptyMemory);
    Matrix bad(m);
    bad.at(0, 2) = std::nan("");
    CHECK(code_of([&] { MemoryBank(bad, {"a", "b"}); }) == ccoa::ErrorCode::InvalidValue);

    Matrix extra(1, 3);
    extra.at(0, 2) = 1.0;
    const MemoryBank grown = bank.with_appended(extra, {"c"});
    CHECK(grown.size() == 3);
    CHECK(bank.size() == 2); // original untouched
    CHECK(grown.ids[2] == "c");
    CHECK(code_of([&] { bank.with_appended(Matrix(1, 2), {"d"}); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("associate on an identity bank, moderate beta") {
    const MemoryBank bank = ccoa::identity_bank(2);
    const auto proj = HopfieldProjections::identity(2, 0.5);
    const auto res = ccoa::associate({1.0, 0.0}, bank, proj);

    // scores (0.5, 0) -> sparsemax (0.75, 0.25); retrieved mixes the patterns
    CHECK(res.scores[0] == doctest::Approx(0.5));
    CHECK(res.scores[1] == doctest::Approx(0.0));
    CHECK(res.weights[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.weights[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.retrieved[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.retrieved[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.ranked_ids == std::vector<std::string>{"0", "1"});
}

TEST_CASE("associate sharpens to one-hot at high beta") {
    const MemoryBank bank = ccoa::identity_bank(2);
    const auto res = ccoa::associate({1.0, 0.0}, bank, HopfieldProjections::identity(2, 40.0));
    CHECK(res.weights[0] == 1.0);
    CHECK(res.weights[1] == 0.0);
    CHECK(res.retrieved[0] == doctest::Approx(1.0));
    CHECK(res.retrieved[1] == doctest::Approx(0.0));
}

TEST_CASE("associate applies all three projections") {
    // 1 pattern, distinct dims everywhere: query 2d, pattern 3d, assoc 2d, out 4d.
    Matrix patterns(1, 3);
    patterns.at(0, 0) = 1.0;
    patterns.at(0, 1) = 2.0;
    patterns.at(0, 2) = -1.0;
    const MemoryBank bank(patterns, {"only"});

    HopfieldProjections proj;
    proj.beta = 2.0;
    proj.w_q = Matrix(2, 2);
    proj.w_q.at(0, 0) = 1.0;
    proj.w_q.at(1, 1) = 3.0;
    proj.w_k = Matrix(3, 2);
    proj.w_k.at(0, 0) = 1.0;
    proj.w_k.at(1, 0) = 1.0;
    proj.w_k.at(2, 1) = 2.0;
    proj.w_v = Matrix(2, 4);
    proj.w_v.at(0, 0) = 1.0;
    proj.w_v.at(1, 3) = -1.0;

    const Vec query{1.0, 1.0};
    const auto res = ccoa::associate(query, bank, proj);

    // qp = (1, 3); yk = (3, -2); score = 2 * (3 - 6) = -6
    CHECK(res.scores[0] == doctest::Approx(-6.0));
    CHECK(res.weights[0] == 1.0); // single pattern
    // retrieved = yk * w_v = (3, 0, 0, 2)
    CHECK(res.retrieved.size() == 4);
    CHECK(res.retrieved[0] == doctest::Approx(3.0));
    CHECK(res.retrieved[3] == doctest::Approx(2.0));
}

TEST_CASE("associate shape and value validation") {
    const MemoryBank bank = ccoa::identity_bank(3);
    const auto proj = HopfieldProjections::identity(3);
    CHECK(code_of([&] { ccoa::associate({1.0, 0.0}, bank, proj); }) ==
          ccoa::ErrorCode::InvalidDimension);
    CHECK(code_of([&] { ccoa::associate({1.0, 0.0, 0.0}, MemoryBank(), proj); }) ==
          ccoa::ErrorCode::EmptyMemory);

    auto bad_beta = HopfieldProjections::identity(3, 0.0);
    CHECK(code_of([&] { ccoa::associate({1.0, 0.0, 0.0}, bank, bad_beta); }) ==
          ccoa::ErrorCode::InvalidValue);

    auto mismatched = HopfieldProjections::identity(3);
    mismatched.w_v = Matrix(2, 3);
    CHECK(code_of([&] { ccoa::associate({1.0, 0.0, 0.0}, bank, mismatched); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("retrieve_top_k matches the brute-force ranking oracle") {
    ccoa::Rng rng(11);
    const MemoryBank bank = random_bank(rng, 60, 16);
    const auto proj = HopfieldProjections::identity(16, 4.0);

    for (int trial = 0; trial < 20; ++trial) {
        const Vec q = oracle::random_unit_vec(rng, 16);
        std::vector<double> scores(bank.size());
        for (std::size_t i = 0; i < bank.size(); ++i) {
            scores[i] = 4.0 * ccoa::dot(bank.patterns.row(i), q.data(), 16);
        }
        const auto expected = oracle::top_k_ids(bank.ids, scores, 7);
        CHECK(ids_of(ccoa::retrieve_top_k(q, bank, proj, 7)) == expected);
    }
}

TEST_CASE("score ties break by ascending id") {
    // Two identical patterns under different ids always score equally.
    Matrix patterns(3, 2);
    patterns.at(0, 0) = 1.0;
    patterns.at(1, 0) = 1.0;
    patterns.at(2, 1) = 1.0;
    const MemoryBank bank(patterns, {"zz", "aa", "mm"});
    const auto matches =
        ccoa::retrieve_top_k({1.0, 0.0}, bank, HopfieldProjections::identity(2), 3);
    CHECK(matches[0].id == "aa");
    CHECK(matches[1].id == "zz");
    CHECK(matches[2].id == "mm");
    CHECK(matches[0].score == matches[1].score);
}

TEST_CASE("k larger than the bank returns everything") {
    ccoa::Rng rng(3);
    const MemoryBank bank = random_bank(rng, 5, 8);
    const auto matches = ccoa::retrieve_top_k(oracle::random_unit_vec(rng, 8), bank,
                                              HopfieldProjections::identity(8), 50);
    CHECK(matches.size() == 5);
}

TEST_CASE("segmented retrieval is id-identical to full retrieval") {
    ccoa::Rng rng(23);
    const MemoryBank bank = random_bank(rng, 37, 12);
    const auto proj = HopfieldProjections::identity(12, 8.0);

    for (int trial = 0; trial < 10; ++trial) {
        const Vec q = oracle::random_unit_vec(rng, 12);
        const auto full = ids_of(ccoa::retrieve_top_k(q, bank, proj, 5));
        for (std::size_t segments = 1; segments <= bank.size(); ++segments) {
            CHECK(ids_of(ccoa::segmented_retrieve(q, bank, proj, segments, 5)) == full);
        }
    }
}

TEST_CASE("segmented retrieval validates the segment count") {
    ccoa::Rng rng(5);
    const MemoryBank bank = random_bank(rng, 4, 8);
    const auto proj = HopfieldProjections::identity(8);
    const Vec q = oracle::random_unit_vec(rng, 8);
    CHECK(code_of([&] { ccoa::segmented_retrieve(q, bank, proj, 0, 2); }) ==
          ccoa::ErrorCode::InvalidSegmentation);
    CHECK(code_of([&] { ccoa::segmented_retrieve(q, bank, proj, 5, 2); }) ==
          ccoa::ErrorCode::InvalidSegmentation);
    CHECK(code_of([&] { ccoa::segmented_retrieve(q, bank, proj, 2, 0); }) ==
          ccoa::ErrorCode::InvalidValue);
}

TEST_CASE("memory-retrieval mode forces identity projections") {
    ModeDims dims;
    dims.query_dim = dims.pattern_dim = dims.assoc_dim = dims.out_dim = 4;
    const auto proj = ccoa::configure_mode(HopfieldMode{}, dims, 8.0, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(proj.w_q.at(i, j) == (i == j ? 1.0 : 0.0));
            CHECK(proj.w_k.at(i, j) == (i == j ? 1.0 : 0.0));
            CHECK(proj.w_v.at(i, j) == (i == j ? 1.0 : 0.0));
        }
    }
    ModeDims uneven = dims;
    uneven.query_dim = 5;
    CHECK(code_of([&] { ccoa::configure_mode(HopfieldMode{}, uneven); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("association mode draws bounded, seed-deterministic weights") {
    HopfieldMode mode;
    mode.kind = ModeKind::Association;
    ModeDims dims{3, 5, 4, 2};

    const auto a = ccoa::configure_mode(mode, dims, 8.0, 99);
    const auto b = ccoa::configure_mode(mode, dims, 8.0, 99);
    const auto c = ccoa::configure_mode(mode, dims, 8.0, 100);
    CHECK(a.w_q.data == b.w_q.data);
    CHECK(a.w_k.data == b.w_k.data);
    CHECK(a.w_v.data == b.w_v.data);
    CHECK(a.w_q.data != c.w_q.data);

    CHECK(a.w_q.rows == 3);
    CHECK(a.w_k.rows == 5);
    CHECK(a.w_v.rows == 4);
    CHECK(a.w_v.cols == 2);
    for (double x : a.w_q.data) CHECK(std::abs(x) <= 1.0 / std::sqrt(3.0));
    for (double x : a.w_k.data) CHECK(std::abs(x) <= 1.0 / std::sqrt(5.0));

    CHECK(code_of([&] { ccoa::configure_mode(mode, ModeDims{3, 0, 4, 2}); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("pooling mode keeps the static query in the associative space") {
    HopfieldMode mode;
    mode.kind = ModeKind::Pooling;
    mode.pooling_query = {0.1, -0.2, 0.3};
    ModeDims dims;
    dims.pattern_dim = 6;
    dims.assoc_dim = 3;
    dims.out_dim = 2;

    const auto proj = ccoa::configure_mode(mode, dims, 8.0, 7);
    // w_q is identity so the caller feeds pooling_query straight to associate()
    CHECK(proj.w_q.rows == 3);
    CHECK(proj.w_q.at(0, 0) == 1.0);
    CHECK(proj.w_q.at(0, 1) == 0.0);
    CHECK(proj.w_k.rows == 6);
    CHECK(proj.w_k.cols == 3);

    mode.pooling_query = {0.1, -0.2};
    CHECK(code_of([&] { ccoa::configure_mode(mode, dims); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("lookup mode retrieves stored values by key similarity") {
    // Keys: two well-separated directions; values: their payload rows.
    Matrix keys(2, 2);
    keys.at(0, 0) = 1.0;
    keys.at(1, 1) = 1.0;
    Matrix values(2, 3);
    values.at(0, 0) = 5.0;
    values.at(1, 2) = 7.0;

    HopfieldMode mode;
    mode.kind = ModeKind::Lookup;
    mode.lookup_keys = keys;
    mode.lookup_values = values;
    ModeDims dims;
    dims.query_dim = 2;
    dims.assoc_dim = 2;
    dims.out_dim = 3;

    auto proj = ccoa::configure_mode(mode, dims, 40.0, 1);
    // Drive the association directly in key space: identity w_q makes the
    // query interpretable as "which stored key am I".
    proj.w_q = Matrix::identity(2);

    const MemoryBank bank = ccoa::identity_bank(2);
    const auto res = ccoa::associate({1.0, 0.0}, bank, proj);
    CHECK(res.weights[0] == 1.0);
    CHECK(res.retrieved[0] == doctest::Approx(5.0));
    CHECK(res.retrieved[2] == doctest::Approx(0.0));

    mode.lookup_values = Matrix(3, 3); // rows disagree with assoc_dim
    CHECK(code_of([&] { ccoa::configure_mode(mode, dims); }) ==
          ccoa::ErrorCode::InvalidDimension);
    mode.lookup_values = values;
    mode.lookup_keys = Matrix();
    CHECK(code_of([&] { ccoa::configure_mode(mode, dims); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("identity bank") {
    const MemoryBank bank = ccoa::identity_bank(3);
    CHECK(bank.size() == 3);
    CHECK(bank.ids == std::vector<std::string>{"0", "1", "2"});
    CHECK(bank.patterns.at(1, 1) == 1.0);
    CHECK(bank.patterns.at(1, 0) == 0.0);
    CHECK(code_of([&] { ccoa::identity_bank(0); }) == ccoa::ErrorCode::EmptyMemory);
}

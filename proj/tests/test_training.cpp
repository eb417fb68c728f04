#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "ccoa/training.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

using ccoa::HopfieldProjections;
using ccoa::Matrix;
using ccoa::MemoryBank;
using ccoa::TrainConfig;
using ccoa::TrainingInstance;
using ccoa::TrainState;
using ccoa::Vec;

namespace {

ccoa::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ccoa::Error& e) {
        return e.code();
    }
    FAIL("expected a ccoa::Error");
    return ccoa::ErrorCode::InvalidValue;
}

HopfieldProjections random_projections(ccoa::Rng& rng, std::size_t query_dim,
                                       std::size_t pattern_dim, std::size_t assoc_dim) {
    HopfieldProjections proj;
    proj.w_q = Matrix(query_dim, assoc_dim);
    proj.w_k = Matrix(pattern_dim, assoc_dim);
    proj.w_v = Matrix::identity(assoc_dim);
    for (double& x : proj.w_q.data) x = ccoa::uniform_in(rng, -0.5, 0.5);
    for (double& x : proj.w_k.data) x = ccoa::uniform_in(rng, -0.5, 0.5);
    return proj;
}

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

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (double x : m.data) s += x * x;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("similarity is the bilinear projected dot product") {
    ccoa::Rng rng(2);
    const auto proj = random_projections(rng, 3, 4, 2);
    const Vec q{0.2, -0.1, 0.4};
    const Vec y{1.0, 0.0, -1.0, 0.5};
    const Vec qp = ccoa::vec_mat(q, proj.w_q);
    const Vec yk = ccoa::vec_mat(y, proj.w_k);
    CHECK(ccoa::similarity(q, y, proj) == doctest::Approx(ccoa::dot(qp, yk)));
    CHECK(code_of([&] { ccoa::similarity({0.2, 0.1}, y, proj); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("dpr_nll hand values") {
    const MemoryBank bank = ccoa::identity_bank(2);
    const auto proj = HopfieldProjections::identity(2);

    SUBCASE("equal positive and negative scores give ln 2") {
        TrainingInstance inst;
        inst.question_embedding = {0.5, 0.5};
        inst.positive_id = "0";
        inst.negative_ids = {"1"};
        CHECK(ccoa::dpr_nll({inst}, bank, proj, false) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    SUBCASE("in-batch negatives from the other instance's positive") {
        TrainingInstance a;
        a.question_embedding = {1.0, 0.0};
        a.positive_id = "0";
        TrainingInstance b;
        b.question_embedding = {0.0, 1.0};
        b.positive_id = "1";
        // both instances: s+ = 1, s- = 0 -> loss log(1 + e^-1)
        CHECK(ccoa::dpr_nll({a, b}, bank, proj, true) ==
              doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));
        // without in-batch expansion neither instance has a negative
        CHECK(code_of([&] { ccoa::dpr_nll({a, b}, bank, proj, false); }) ==
              ccoa::ErrorCode::InsufficientNegatives);
    }
}

TEST_CASE("dpr_nll input validation") {
    const MemoryBank bank = ccoa::identity_bank(2);
    const auto proj = HopfieldProjections::identity(2);

    TrainingInstance inst;
    inst.question_embedding = {1.0, 0.0};
    inst.positive_id = "0";

    CHECK(code_of([&] { ccoa::dpr_nll({}, bank, proj); }) == ccoa::ErrorCode::InvalidValue);
    CHECK(code_of([&] { ccoa::dpr_nll({inst}, bank, proj, true); }) ==
          ccoa::ErrorCode::InsufficientNegatives);

    TrainingInstance twin = inst; // same positive as inst: expansion yields nothing
    CHECK(code_of([&] { ccoa::dpr_nll({inst, twin}, bank, proj, true); }) ==
          ccoa::ErrorCode::InsufficientNegatives);

    TrainingInstance self_negative = inst;
    self_negative.negative_ids = {"0"};
    CHECK(code_of([&] { ccoa::dpr_nll({self_negative}, bank, proj); }) ==
          ccoa::ErrorCode::InvalidValue);

    TrainingInstance unknown = inst;
    unknown.positive_id = "missing";
    CHECK(code_of([&] { ccoa::dpr_nll({unknown}, bank, proj); }) ==
          ccoa::ErrorCode::InvalidValue);

    TrainingInstance short_q = inst;
    short_q.question_embedding = {1.0};
    short_q.negative_ids = {"1"};
    CHECK(code_of([&] { ccoa::dpr_nll({short_q}, bank, proj); }) ==
          ccoa::ErrorCode::InvalidDimension);
}

TEST_CASE("grad_step gradients agree with central finite differences") {
    ccoa::Rng rng(77);
    const MemoryBank bank = random_bank(rng, 5, 3);

    std::vector<TrainingInstance> batch;
    for (int i = 0; i < 3; ++i) {
        TrainingInstance inst;
        inst.question_embedding = oracle::random_unit_vec(rng, 4);
        inst.positive_id = "p" + std::to_string(i);
        inst.negative_ids = {"p" + std::to_string(3 + (i % 2))};
        batch.push_back(inst);
    }

    TrainState state;
    state.projections = random_projections(rng, 4, 3, 2);
    state.learning_rate = 1.0; // step equals the negative gradient exactly
    const TrainState next = ccoa::grad_step(state, batch, bank);

    const double h = 1e-6;
    auto fd_check = [&](const Matrix& before, const Matrix& after,
                        Matrix HopfieldProjections::*field) {
        Matrix analytic(before.rows, before.cols);
        Matrix fd(before.rows, before.cols);
        for (std::size_t i = 0; i < before.data.size(); ++i) {
            analytic.data[i] = before.data[i] - after.data[i];
            auto proj = state.projections;
            (proj.*field).data[i] = before.data[i] + h;
            const double up = ccoa::dpr_nll(batch, bank, proj, true);
            (proj.*field).data[i] = before.data[i] - h;
            const double down = ccoa::dpr_nll(batch, bank, proj, true);
            fd.data[i] = (up - down) / (2.0 * h);
        }
        Matrix diff(before.rows, before.cols);
        for (std::size_t i = 0; i < diff.data.size(); ++i) {
            diff.data[i] = analytic.data[i] - fd.data[i];
        }
        CHECK(frobenius(diff) / frobenius(fd) < 1e-4);
    };
    fd_check(state.projections.w_q, next.projections.w_q, &HopfieldProjections::w_q);
    fd_check(state.projections.w_k, next.projections.w_k, &HopfieldProjections::w_k);

    CHECK(next.projections.w_v.data == state.projections.w_v.data);
    CHECK(next.step == state.step + 1);
}

TEST_CASE("a small learning-rate step lowers the batch loss") {
    ccoa::Rng rng(8);
    const MemoryBank bank = random_bank(rng, 6, 4);
    std::vector<TrainingInstance> batch;
    for (int i = 0; i < 4; ++i) {
        TrainingInstance inst;
        inst.question_embedding = oracle::random_unit_vec(rng, 4);
        inst.positive_id = "p" + std::to_string(i);
        batch.push_back(inst);
    }
    TrainState state;
    state.projections = random_projections(rng, 4, 4, 4);
    state.learning_rate = 0.01;
    const double before = ccoa::dpr_nll(batch, bank, state.projections, true);
    const TrainState next = ccoa::grad_step(state, batch, bank);
    const double after = ccoa::dpr_nll(batch, bank, next.projections, true);
    CHECK(after < before);
}

TEST_CASE("train is deterministic in the seed and improves the loss") {
    ccoa::Rng rng(10);
    const MemoryBank bank = random_bank(rng, 12, 6);
    std::vector<TrainingInstance> instances;
    for (int i = 0; i < 12; ++i) {
        TrainingInstance inst;
        // questions are noisy copies of their positives
        inst.question_embedding.assign(bank.patterns.row(i), bank.patterns.row(i) + 6);
        for (double& x : inst.question_embedding) x += ccoa::uniform_in(rng, -0.05, 0.05);
        inst.positive_id = bank.ids[i];
        instances.push_back(inst);
    }

    TrainConfig config;
    config.learning_rate = 0.5;
    config.batch_size = 4;
    config.seed = 3;

    const auto a = ccoa::train(instances, bank, 5, config);
    const auto b = ccoa::train(instances, bank, 5, config);
    CHECK(a.epoch_losses == b.epoch_losses);
    CHECK(a.projections.w_q.data == b.projections.w_q.data);
    CHECK(a.projections.w_k.data == b.projections.w_k.data);

    config.seed = 4;
    const auto c = ccoa::train(instances, bank, 5, config);
    CHECK(a.epoch_losses != c.epoch_losses);

    CHECK(a.epoch_losses.size() == 5);
    CHECK(a.epoch_losses.back() < a.epoch_losses.front());
}

TEST_CASE("train with zero epochs returns the seeded init untouched") {
    ccoa::Rng rng(1);
    const MemoryBank bank = random_bank(rng, 4, 3);
    TrainingInstance inst;
    inst.question_embedding = {1.0, 0.0, 0.0};
    inst.positive_id = "p0";
    inst.negative_ids = {"p1"};

    TrainConfig config;
    config.seed = 42;
    const auto a = ccoa::train({inst}, bank, 0, config);
    const auto b = ccoa::train({inst}, bank, 0, config);
    CHECK(a.epoch_losses.empty());
    CHECK(a.projections.w_q.data == b.projections.w_q.data);
    CHECK(a.projections.w_q.rows == 3);
    CHECK(a.projections.w_k.rows == 3);

    config.learning_rate = 0.0;
    CHECK(code_of([&] { ccoa::train({inst}, bank, 1, config); }) ==
          ccoa::ErrorCode::InvalidValue);
    config.learning_rate = 0.05;
    CHECK(code_of([&] { ccoa::train({}, bank, 1, config); }) ==
          ccoa::ErrorCode::InvalidValue);
}

TEST_CASE("training files parse into records") {
    testutil::TempDir dir("train");
    const std::string path = dir.file("pairs.jsonl");
    testutil::write_file(
        path,
        "{\"question\": \"q one\", \"positive_chunk_id\": \"a#0\", "
        "\"negative_chunk_ids\": [\"b#0\", \"c#0\"]}\n"
        "\n"
        "{\"question\": \"q two\", \"positive_chunk_id\": \"b#0\"}\n");

    const auto records = ccoa::load_training_file(path);
    REQUIRE(records.size() == 2);
    CHECK(records[0].question == "q one");
    CHECK(records[0].positive_chunk_id == "a#0");
    CHECK(records[0].negative_chunk_ids == std::vector<std::string>{"b#0", "c#0"});
    CHECK(records[1].negative_chunk_ids.empty());

    testutil::write_file(path, "{\"question\": \"missing positive\"}\n");
    CHECK(code_of([&] { ccoa::load_training_file(path); }) == ccoa::ErrorCode::InvalidValue);
    CHECK(code_of([&] { ccoa::load_training_file(dir.file("absent.jsonl")); }) ==
          ccoa::ErrorCode::IoError);
}

TEST_CASE("projections round-trip through disk exactly") {
    ccoa::Rng rng(5);
    auto proj = random_projections(rng, 3, 5, 2);
    proj.beta = 12.5;

    testutil::TempDir dir("proj");
    const std::string path = dir.file("proj.json");
    ccoa::save_projections(proj, path);
    const auto loaded = ccoa::load_projections(path);
    CHECK(loaded.w_q.data == proj.w_q.data);
    CHECK(loaded.w_k.data == proj.w_k.data);
    CHECK(loaded.w_v.data == proj.w_v.data);
    CHECK(loaded.beta == proj.beta);

    testutil::write_file(path, "{\"w_q\": [[1.0]]}\n");
    CHECK(code_of([&] { ccoa::load_projections(path); }) == ccoa::ErrorCode::InvalidValue);
    CHECK(code_of([&] { ccoa::load_projections(dir.file("absent.json")); }) ==
          ccoa::ErrorCode::IoError);
}

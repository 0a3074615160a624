#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nutrirec/diet_classifier.hpp"
#include "nutrirec/synthetic_corpus.hpp"
#include "oracles.hpp"

using namespace nutrirec;

namespace {

const ModelConfig kTiny{10, 4, 2, 3, 4};

LabeledExample random_example(std::mt19937_64& rng, const ModelConfig& cfg, std::size_t label) {
    std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(cfg.vocab_size - 1));
    LabeledExample ex;
    for (auto* s : {&ex.input.name_ids, &ex.input.ingr_ids, &ex.input.desc_ids})
        for (std::size_t i = 0; i < cfg.seq_len; ++i) s->push_back(tok(rng));
    ex.label = label;
    return ex;
}

ModelParams scaled_init(const ModelConfig& cfg, std::uint64_t seed, double factor) {
    auto p = init_params(cfg, seed);
    for (std::size_t i = 0; i < p.size(); ++i) p.at(i) *= factor;
    return p;
}

// Hand-set tiny model; expected values were evaluated independently in
// numpy and frozen here.
ModelParams hand_set() {
    auto p = ModelParams::zeros(kTiny);
    for (std::size_t t = 0; t < 10; ++t) {
        p.embedding[t * 2 + 0] = 0.1 * t;
        p.embedding[t * 2 + 1] = -0.05 * t + 0.2;
    }
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t h = 0; h < 3; ++h) p.w1[i * 3 + h] = 0.1 * (i + 1) - 0.2 * h;
    p.b1 = {0.1, -0.2, 0.05};
    for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t c = 0; c < 4; ++c) p.w2[h * 4 + c] = 0.3 * (double(h) - double(c)) + 0.1;
    p.b2 = {0.0, 0.1, -0.1, 0.2};
    return p;
}

EncodedRecipe hand_input() { return {{1, 2, 0, 0}, {3, 3, 4, 0}, {9, 8, 7, 6}}; }

}  // namespace

TEST(ModelConfig, DefaultParameterCount) {
    const ModelConfig cfg;
    EXPECT_EQ(cfg.parameter_count(), 321974u);
    EXPECT_EQ(cfg.embedding_params(), 320000u);
    EXPECT_EQ(cfg.hidden_params(), 1930u);
    EXPECT_EQ(cfg.output_params(), 44u);
    EXPECT_EQ(init_params(cfg, 0).size(), 321974u);
}

TEST(ModelConfig, TinyParameterCount) { EXPECT_EQ(kTiny.parameter_count(), 57u); }

TEST(ModelConfig, RejectsZeroFields) {
    ModelConfig c;
    c.hidden_dim = 0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(InitParams, DeterministicAndBounded) {
    const auto a = init_params(kTiny, 3), b = init_params(kTiny, 3), c = init_params(kTiny, 4);
    EXPECT_EQ(a.embedding, b.embedding);
    EXPECT_EQ(a.w2, b.w2);
    EXPECT_NE(a.embedding, c.embedding);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a.at(i)), 0.05);
    EXPECT_TRUE(a.all_finite());
}

TEST(Forward, ZeroParamsGiveUniform) {
    const auto p = ModelParams::zeros(kTiny);
    for (double v : forward(p, hand_input())) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, HandSetMatchesFrozenValues) {
    const auto t = forward_trace(hand_set(), hand_input());
    const std::vector<double> concat = {0.75, -0.175, 0.25, 0.075, 0.075, 0.1625};
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(t.concat[i], concat[i], 1e-15);
    EXPECT_NEAR(t.hidden[0], 0.38, 1e-15);
    EXPECT_EQ(t.hidden[1], 0.0);
    const std::vector<double> probs = {0.27979213969784072, 0.27590234186009233, 0.20155191064254402,
                                       0.24275360779952296};
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(t.probs[c], probs[c], 1e-14);
    EXPECT_NEAR(cross_entropy_loss(t.probs, 2), 1.601708309719196, 1e-13);
}

TEST(Forward, MatchesHistogramOracle) {
    std::mt19937_64 rng(1);
    const ModelConfig small{50, 16, 5, 4, 4};
    const auto p = scaled_init(small, 2, 10.0);
    for (int i = 0; i < 20; ++i) {
        const auto ex = random_example(rng, small, 0);
        const auto got = forward(p, ex.input);
        const auto want = oracle::forward(p, ex.input);
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(got[c], want[c], 1e-13);
    }
}

TEST(Forward, DefaultShapes) {
    const auto p = init_params(ModelConfig{}, 1);
    const auto in = encode_recipe("Lentil Soup", "lentils, onion", "hearty soup", Vocabulary{});
    const auto t = forward_trace(p, in, true);
    for (const auto& m : t.embedded) {
        EXPECT_EQ(m.rows, 256u);
        EXPECT_EQ(m.cols, 64u);
    }
    for (const auto& v : t.pooled) EXPECT_EQ(v.size(), 64u);
    EXPECT_EQ(t.concat.size(), 192u);
    EXPECT_EQ(t.hidden.size(), 10u);
    EXPECT_EQ(t.probs.size(), 4u);
}

TEST(Forward, PurityAndInputChecks) {
    const auto p = hand_set();
    EXPECT_EQ(forward(p, hand_input()), forward(p, hand_input()));
    EncodedRecipe bad = hand_input();
    bad.desc_ids[0] = 10;
    EXPECT_THROW(forward(p, bad), ValidationError);
    bad = hand_input();
    bad.name_ids.pop_back();
    EXPECT_THROW(forward(p, bad), ValidationError);
}

TEST(CrossEntropy, ClosedForms) {
    const std::vector<double> onehot = {0, 1, 0, 0};
    EXPECT_DOUBLE_EQ(cross_entropy_loss(onehot, 1), 0.0);
    const std::vector<double> uniform(4, 0.25);
    EXPECT_NEAR(cross_entropy_loss(uniform, 3), std::log(4.0), 1e-15);
    EXPECT_NEAR(cross_entropy_loss(onehot, 0), -std::log(1e-12), 1e-9);
    EXPECT_THROW(cross_entropy_loss(uniform, 4), ValidationError);
}

TEST(Predict, ArgmaxWithLowestIndexTieBreak) {
    const std::vector<double> p = {0.1, 0.7, 0.1, 0.1};
    EXPECT_EQ(argmax_prediction(p).class_index, 1u);
    EXPECT_DOUBLE_EQ(argmax_prediction(p).confidence, 0.7);
    const std::vector<double> u(4, 0.25);
    EXPECT_EQ(argmax_prediction(u).class_index, 0u);
    EXPECT_DOUBLE_EQ(argmax_prediction(u).confidence, 0.25);
}

TEST(Backward, MatchesOracleFiniteDifferences) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        const auto p = scaled_init(kTiny, 10 + trial, 20.0);
        const std::vector<LabeledExample> batch = {random_example(rng, kTiny, trial % 4)};
        const auto g = backward(p, batch);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double num = oracle::numeric_grad(p, batch[0], i, 1e-4);
            EXPECT_LE(relative_error(g.at(i), num), 1e-4) << "coordinate " << i;
        }
    }
}

TEST(Backward, BatchGradientIsMeanOfExamples) {
    std::mt19937_64 rng(6);
    const auto p = scaled_init(kTiny, 1, 20.0);
    const std::vector<LabeledExample> batch = {random_example(rng, kTiny, 0), random_example(rng, kTiny, 2)};
    const auto g = backward(p, batch);
    const auto g0 = backward(p, std::span(batch.data(), 1));
    const auto g1 = backward(p, std::span(batch.data() + 1, 1));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(g.at(i), 0.5 * (g0.at(i) + g1.at(i)), 1e-14);
}

TEST(Backward, UnusedEmbeddingRowsGetZero) {
    const auto p = scaled_init(kTiny, 2, 20.0);
    const std::vector<LabeledExample> batch = {{{{1, 1, 2, 2}, {3, 3, 3, 3}, {2, 1, 3, 1}}, 1}};
    const auto g = backward(p, batch);
    for (std::size_t t = 4; t < 10; ++t)
        for (std::size_t e = 0; e < 2; ++e) EXPECT_EQ(g.embedding[t * 2 + e], 0.0);
}

TEST(Backward, ZeroLossGivesZeroGradient) {
    auto p = ModelParams::zeros(kTiny);
    p.b2 = {0.0, 1000.0, 0.0, 0.0};  // probability of class 1 rounds to exactly 1
    const std::vector<LabeledExample> batch = {{hand_input(), 1}};
    EXPECT_EQ(example_loss(p, batch[0]), 0.0);
    const auto g = backward(p, batch);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.at(i), 0.0);
}

TEST(GradientCheck, PassesOnTinyConfig) {
    std::mt19937_64 rng(8);
    const auto p = scaled_init(kTiny, 3, 20.0);
    const auto res = gradient_check(p, random_example(rng, kTiny, 1), 1e-5, 200, 1);
    EXPECT_EQ(res.coordinates.size(), 200u);
    EXPECT_LT(res.max_relative_error, 1e-4);
}

TEST(GradientCheck, DetectsScaledGradient) {
    std::mt19937_64 rng(9);
    const auto p = scaled_init(kTiny, 4, 20.0);
    const GradientFn doubled = [](const ModelParams& m, std::span<const LabeledExample> b) {
        auto g = backward(m, b);
        for (std::size_t i = 0; i < g.size(); ++i) g.at(i) *= 2.0;
        return g;
    };
    const auto res = gradient_check(p, random_example(rng, kTiny, 0), 1e-5, 200, 2, doubled);
    EXPECT_NEAR(res.max_relative_error, 0.5, 1e-4);
}

TEST(GradientCheck, ZeroCoordinatesReportZero) {
    const auto p = ModelParams::zeros(kTiny);
    const LabeledExample ex{hand_input(), 0};
    const auto res = gradient_check(p, ex, 1e-5, 200, 3);
    for (const auto& c : res.coordinates)
        if (c.analytic == 0.0 && c.numeric == 0.0) {
            EXPECT_EQ(c.relative_error, 0.0);
        }
}

TEST(Train, SyntheticCorpusIsLearned) {
    const auto corpus = make_synthetic_corpus(400, 3);
    const auto vocab = build_vocabulary(corpus_token_sequences(corpus));
    const auto data = encode_corpus(corpus, vocab, 64);
    ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.seq_len = 64;
    TrainingConfig tc;
    tc.mode = TrainingMode::Online;
    tc.epochs = 10;
    tc.seed = 3;
    const auto r = train(init_params(cfg, 3), data, data, tc);
    ASSERT_EQ(r.history.size(), 10u);
    EXPECT_GE(r.history.back().train_accuracy, 0.95);
    EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);

    // Fields made only of one marker are classified as its planted class.
    for (std::size_t c = 0; c < 4; ++c) {
        std::string m;
        for (int k = 0; k < 64; ++k) m += std::string(kSyntheticMarkers[c]) + " ";
        const auto in = encode_recipe(m, m, m, vocab, 64);
        EXPECT_EQ(predict(r.params, in).class_index, c) << m;
    }
}

TEST(Train, DeterministicUnderSeed) {
    const auto corpus = make_synthetic_corpus(80, 1);
    const auto vocab = build_vocabulary(corpus_token_sequences(corpus));
    const auto data = encode_corpus(corpus, vocab, 32);
    ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.seq_len = 32;
    TrainingConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    const auto a = train(init_params(cfg, 1), data, {}, tc);
    const auto b = train(init_params(cfg, 1), data, {}, tc);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.params.w1, b.params.w1);
    EXPECT_EQ(a.history[0].val_loss, 0.0);
}

TEST(Train, RejectsBadConfig) {
    TrainingConfig tc;
    tc.learning_rate = 0.0;
    EXPECT_THROW(tc.validate(), ValidationError);
    const auto p = ModelParams::zeros(kTiny);
    EXPECT_THROW(train(p, {}, {}, TrainingConfig{}), ValidationError);
}

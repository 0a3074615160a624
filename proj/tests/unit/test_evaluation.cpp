#include <gtest/gtest.h>

#include <map>
#include <set>

#include "nutrirec/evaluation.hpp"
#include "nutrirec/synthetic_corpus.hpp"
#include "oracles.hpp"
#include "random_cases.hpp"

using namespace nutrirec;

using Labels = std::vector<std::size_t>;

TEST(Confusion, CountsPairs) {
    const Labels t{0, 0, 1, 2, 2, 2}, p{0, 1, 1, 2, 0, 2};
    const auto cm = confusion_matrix(t, p, 3);
    EXPECT_EQ(cm(0, 0), 1u);
    EXPECT_EQ(cm(0, 1), 1u);
    EXPECT_EQ(cm(2, 0), 1u);
    EXPECT_EQ(cm(2, 2), 2u);
    EXPECT_EQ(cm.total(), 6u);
}

TEST(Confusion, RejectsBadInput) {
    EXPECT_THROW(confusion_matrix(Labels{0, 1}, Labels{0}, 2), ValidationError);
    EXPECT_THROW(confusion_matrix(Labels{0}, Labels{4}, 4), ValidationError);
}

TEST(Metrics, HandExample) {
    // class 0: tp 1, fp 1, fn 1; class 1: tp 1, fp 1, fn 0; class 2: tp 2, fp 0, fn 1
    const auto rep = precision_recall_f1(confusion_matrix(Labels{0, 0, 1, 2, 2, 2}, Labels{0, 1, 1, 2, 0, 2}, 3));
    EXPECT_DOUBLE_EQ(rep.per_class[0].precision, 0.5);
    EXPECT_DOUBLE_EQ(rep.per_class[0].recall, 0.5);
    EXPECT_DOUBLE_EQ(rep.per_class[1].precision, 0.5);
    EXPECT_DOUBLE_EQ(rep.per_class[1].recall, 1.0);
    EXPECT_NEAR(rep.per_class[1].f1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(rep.per_class[2].recall, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(rep.macro.precision, (0.5 + 0.5 + 1.0) / 3.0, 1e-15);
}

TEST(Metrics, NeverPredictedClassHasZeroPrecision) {
    const auto rep = precision_recall_f1(confusion_matrix(Labels{0, 1, 1}, Labels{0, 0, 0}, 2));
    EXPECT_EQ(rep.per_class[1].precision, 0.0);
    EXPECT_EQ(rep.per_class[1].recall, 0.0);
    EXPECT_EQ(rep.per_class[1].f1, 0.0);
}

TEST(Metrics, MatchRecountOracle) {
    cases::Rng rng(42);
    for (int t = 0; t < 300; ++t) {
        const auto s = cases::random_labels(rng);
        const auto rep = precision_recall_f1(confusion_matrix(s.truth, s.pred, s.classes));
        const auto want = oracle::recount(s.truth, s.pred, s.classes);
        double mp = 0, mr = 0, mf = 0;
        for (std::size_t c = 0; c < s.classes; ++c) {
            EXPECT_NEAR(rep.per_class[c].precision, want[c].precision, 1e-12);
            EXPECT_NEAR(rep.per_class[c].recall, want[c].recall, 1e-12);
            EXPECT_NEAR(rep.per_class[c].f1, want[c].f1, 1e-12);
            mp += want[c].precision, mr += want[c].recall, mf += want[c].f1;
        }
        EXPECT_NEAR(rep.macro.precision, mp / s.classes, 1e-12);
        EXPECT_NEAR(rep.macro.recall, mr / s.classes, 1e-12);
        EXPECT_NEAR(rep.macro.f1, mf / s.classes, 1e-12);
    }
}

TEST(Metrics, Invariants) {
    cases::Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto s = cases::random_labels(rng);
        const auto rep = precision_recall_f1(confusion_matrix(s.truth, s.pred, s.classes));
        for (const auto& m : rep.per_class) {
            EXPECT_GE(m.f1, 0.0);
            EXPECT_LE(m.f1, 1.0);
            EXPECT_EQ(m.f1 == 0.0, m.precision == 0.0 || m.recall == 0.0);
            EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
        }
        EXPECT_GE(rep.macro.f1, 0.0);
        EXPECT_LE(rep.macro.f1, 1.0);
    }
}

namespace {

std::vector<LabeledExample> tagged(std::size_t n, std::size_t classes) {
    std::vector<LabeledExample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].label = i % classes;
        out[i].input.name_ids = {static_cast<TokenId>(i)};  // identity tag
    }
    return out;
}

std::multiset<TokenId> tags(const std::vector<LabeledExample>& v) {
    std::multiset<TokenId> s;
    for (const auto& e : v) s.insert(e.input.name_ids[0]);
    return s;
}

}  // namespace

TEST(Split, EightyTwentyDisjointAndComplete) {
    const auto data = tagged(100, 4);
    const auto s = train_val_split(data, 0.8, 1);
    EXPECT_EQ(s.train.size(), 80u);
    EXPECT_EQ(s.validation.size(), 20u);
    auto all = tags(s.train);
    for (auto t : tags(s.validation)) {
        EXPECT_FALSE(all.count(t));
        all.insert(t);
    }
    EXPECT_EQ(all, tags(data));
}

TEST(Split, DeterministicPerSeed) {
    const auto data = tagged(50, 3);
    EXPECT_EQ(tags(train_val_split(data, 0.8, 9).train), tags(train_val_split(data, 0.8, 9).train));
    std::vector<TokenId> a, b;
    for (const auto& e : train_val_split(data, 0.8, 9).train) a.push_back(e.input.name_ids[0]);
    for (const auto& e : train_val_split(data, 0.8, 10).train) b.push_back(e.input.name_ids[0]);
    EXPECT_NE(a, b);
}

TEST(Split, StratifiedWithinOne) {
    std::vector<LabeledExample> data;
    for (std::size_t i = 0; i < 97; ++i) {
        LabeledExample e;
        e.label = i < 50 ? 0 : i < 80 ? 1 : i < 93 ? 2 : 3;
        e.input.name_ids = {static_cast<TokenId>(i)};
        data.push_back(e);
    }
    const auto s = train_val_split(data, 0.8, 3);
    EXPECT_EQ(s.train.size(), 78u);  // round(97 * 0.8)
    std::map<std::size_t, double> total, train;
    for (const auto& e : data) total[e.label] += 1;
    for (const auto& e : s.train) train[e.label] += 1;
    for (auto [label, n] : total) EXPECT_LE(std::abs(train[label] - n * 0.8), 1.0) << label;
}

TEST(Split, RejectsBadRatioAndEmpty) {
    const auto data = tagged(10, 2);
    for (double r : {0.0, 1.0, -0.5, 1.5}) EXPECT_THROW(train_val_split(data, r, 1), ValidationError) << r;
    EXPECT_THROW(train_val_split(std::vector<LabeledExample>{}, 0.8, 1), ValidationError);
}

TEST(EvaluateModel, SingleExampleByHand) {
    ModelConfig cfg{4, 2, 2, 2, 4};
    auto p = ModelParams::zeros(cfg);
    p.b2 = {0.0, 0.0, std::log(2.0), 0.0};  // probs {1,1,2,1}/5
    const std::vector<LabeledExample> ds{{{{2, 0}, {0, 0}, {0, 0}}, 2}};
    const auto rep = evaluate_model(p, ds);
    EXPECT_NEAR(rep.loss, -std::log(0.4), 1e-12);
    EXPECT_EQ(rep.accuracy, 1.0);
    EXPECT_EQ(rep.confusion(2, 2), 1u);
    EXPECT_THROW(evaluate_model(p, std::vector<LabeledExample>{}), ValidationError);
}

TEST(EvaluateModel, MatchesOracleAndIsDeterministic) {
    const auto corpus = make_synthetic_corpus(60, 4);
    const auto vocab = build_vocabulary(corpus_token_sequences(corpus));
    ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.seq_len = 16;
    const auto p = init_params(cfg, 5);
    const auto data = encode_corpus(corpus, vocab, 16);
    const auto a = evaluate_model(p, data);
    const auto b = evaluate_model(p, vocab, corpus);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.confusion, b.confusion);
    double loss = 0;
    std::size_t correct = 0;
    for (const auto& ex : data) {
        const auto probs = oracle::forward(p, ex.input);
        loss += -std::log(std::max(probs[ex.label], 1e-12));
        correct += static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin()) == ex.label;
    }
    EXPECT_NEAR(a.loss, loss / data.size(), 1e-9);
    EXPECT_DOUBLE_EQ(a.accuracy, static_cast<double>(correct) / data.size());
}

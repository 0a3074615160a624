#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "nutrirec/corpus.hpp"
#include "nutrirec/diet_classifier.hpp"
#include "nutrirec/error.hpp"

namespace nutrirec {

/// counts(t, p): examples with true class t predicted as p.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes = kNumDietaryTypes)
        : n_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t num_classes() const noexcept { return n_; }
    std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * n_ + predicted); }
    void add(std::size_t truth, std::size_t predicted) { ++counts_.at(truth * n_ + predicted); }

    std::size_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t n_;
    std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                        std::size_t num_classes = kNumDietaryTypes) {
    if (truths.size() != predictions.size())
        throw ValidationError("truths and predictions differ in length (" + std::to_string(truths.size()) + " vs " +
                              std::to_string(predictions.size()) + ")");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= num_classes || predictions[i] >= num_classes)
            throw ValidationError("class index out of range at position " + std::to_string(i));
        cm.add(truths[i], predictions[i]);
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricReport {
    std::vector<ClassMetrics> per_class;
    ClassMetrics macro;
};

/// Per-class precision/recall/F1 and their unweighted mean. Any zero
/// denominator makes that metric 0.
inline MetricReport precision_recall_f1(const ConfusionMatrix& cm) {
    const std::size_t n = cm.num_classes();
    MetricReport rep;
    rep.per_class.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const double tp = static_cast<double>(cm(c, c));
        double predicted = 0.0, actual = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            predicted += static_cast<double>(cm(k, c));
            actual += static_cast<double>(cm(c, k));
        }
        auto& m = rep.per_class[c];
        m.precision = predicted > 0.0 ? tp / predicted : 0.0;
        m.recall = actual > 0.0 ? tp / actual : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    }
    if (n > 0) {
        for (const auto& m : rep.per_class) {
            rep.macro.precision += m.precision;
            rep.macro.recall += m.recall;
            rep.macro.f1 += m.f1;
        }
        rep.macro.precision /= static_cast<double>(n);
        rep.macro.recall /= static_cast<double>(n);
        rep.macro.f1 /= static_cast<double>(n);
    }
    return rep;
}

template <typename T>
struct Split {
    std::vector<T> train;
    std::vector<T> validation;
};

/// Seeded shuffle then split. When every class has at least two examples the
/// split is stratified: per-class train counts are apportioned by largest
/// remainder so the overall train size is round(n * ratio).
template <typename T, typename LabelFn>
Split<T> train_val_split(const std::vector<T>& data, double ratio, std::uint64_t seed, LabelFn&& label_of) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError({{"ratio", "must be in (0, 1)"}});
    if (data.empty()) throw ValidationError("cannot split an empty dataset");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    const auto n = static_cast<double>(data.size());
    const auto target = static_cast<std::size_t>(std::llround(n * ratio));

    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t idx : order) by_class[label_of(data[idx])].push_back(idx);
    const bool stratify = std::all_of(by_class.begin(), by_class.end(), [](const auto& kv) { return kv.second.size() >= 2; });

    Split<T> out;
    if (!stratify) {
        for (std::size_t i = 0; i < order.size(); ++i) (i < target ? out.train : out.validation).push_back(data[order[i]]);
        return out;
    }

    struct Share {
        std::size_t label;
        std::size_t take;
        double remainder;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (const auto& [label, idxs] : by_class) {
        const double exact = static_cast<double>(idxs.size()) * ratio;
        const auto take = static_cast<std::size_t>(std::floor(exact));
        shares.push_back({label, take, exact - static_cast<double>(take)});
        assigned += take;
    }
    std::vector<std::size_t> by_remainder(shares.size());
    std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
    for (std::size_t i = 0; assigned < target && i < by_remainder.size(); ++i) {
        auto& s = shares[by_remainder[i]];
        if (s.take < by_class[s.label].size()) {
            ++s.take;
            ++assigned;
        }
    }

    for (const auto& s : shares) {
        const auto& idxs = by_class[s.label];
        for (std::size_t i = 0; i < idxs.size(); ++i) (i < s.take ? out.train : out.validation).push_back(data[idxs[i]]);
    }
    return out;
}

inline Split<LabeledExample> train_val_split(const std::vector<LabeledExample>& data, double ratio, std::uint64_t seed) {
    return train_val_split(data, ratio, seed, [](const LabeledExample& e) { return e.label; });
}

struct EvaluationReport {
    double loss = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    MetricReport metrics;
};

inline EvaluationReport evaluate_model(const ModelParams& params, std::span<const LabeledExample> dataset) {
    if (dataset.empty()) throw ValidationError("cannot evaluate on an empty dataset");
    const std::size_t classes = params.config.num_classes;
    std::vector<std::size_t> truths, preds;
    truths.reserve(dataset.size());
    preds.reserve(dataset.size());
    double loss = 0.0;
    for (const auto& ex : dataset) {
        const auto probs = forward(params, ex.input);
        loss += cross_entropy_loss(probs, ex.label);
        truths.push_back(ex.label);
        preds.push_back(argmax_prediction(probs).class_index);
    }
    EvaluationReport rep{0.0, 0.0, confusion_matrix(truths, preds, classes), {}};
    rep.loss = loss / static_cast<double>(dataset.size());
    std::size_t correct = 0;
    for (std::size_t c = 0; c < classes; ++c) correct += rep.confusion(c, c);
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    rep.metrics = precision_recall_f1(rep.confusion);
    return rep;
}

/// Raw-text convenience: encodes with `vocab` at the model's sequence length.
inline EvaluationReport evaluate_model(const ModelParams& params, const Vocabulary& vocab,
                                       const std::vector<LabeledRecipeText>& dataset) {
    const auto encoded = encode_corpus(dataset, vocab, params.config.seq_len);
    return evaluate_model(params, encoded);
}

/// Tab-separated per-epoch rows: epoch, train_loss, train_acc, val_loss, val_acc.
inline void write_epoch_header(std::ostream& out) { out << "epoch\ttrain_loss\ttrain_acc\tval_loss\tval_acc\n"; }

inline void write_epoch_row(std::ostream& out, const EpochStats& s) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::fixed << std::setprecision(6) << s.epoch << '\t' << s.train_loss << '\t' << s.train_accuracy << '\t'
        << s.val_loss << '\t' << s.val_accuracy << '\n';
    out.flags(flags);
    out.precision(prec);
}

inline void write_metric_report(std::ostream& out, const EvaluationReport& rep) {
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(6);
    out << "loss\t" << rep.loss << "\naccuracy\t" << rep.accuracy << '\n';
    out << "class\tprecision\trecall\tf1\n";
    for (std::size_t c = 0; c < rep.metrics.per_class.size(); ++c) {
        const auto& m = rep.metrics.per_class[c];
        const std::string name = c < kNumDietaryTypes ? std::string(key(dietary_from_index(c))) : std::to_string(c);
        out << name << '\t' << m.precision << '\t' << m.recall << '\t' << m.f1 << '\n';
    }
    out << "macro\t" << rep.metrics.macro.precision << '\t' << rep.metrics.macro.recall << '\t' << rep.metrics.macro.f1
        << '\n';
    out << "confusion (rows=truth, cols=predicted)\n";
    for (std::size_t t = 0; t < rep.confusion.num_classes(); ++t) {
        for (std::size_t p = 0; p < rep.confusion.num_classes(); ++p) out << (p ? "\t" : "") << rep.confusion(t, p);
        out << '\n';
    }
    out.flags(flags);
}

}  // namespace nutrirec

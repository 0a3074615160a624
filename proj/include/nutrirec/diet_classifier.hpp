#pragma once

// Multi-input dietary-type classifier:
//
//   desc_ids, ingr_ids, name_ids   (seq_len each)
//        -> shared embedding       (seq_len x embed_dim each)
//        -> mean over seq_len      (embed_dim each, PAD positions included)
//        -> concat (desc,ingr,name) (3 * embed_dim)
//        -> dense + ReLU           (hidden_dim)
//        -> dense + softmax        (num_classes)
//
// Forward, analytic backward, SGD training (mini-batch or online), finite
// difference gradient checking and a versioned binary checkpoint.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nutrirec/error.hpp"
#include "nutrirec/text_pipeline.hpp"

namespace nutrirec {

struct ModelConfig {
    std::size_t vocab_size = kDefaultVocabSize;
    std::size_t seq_len = kDefaultSeqLen;
    std::size_t embed_dim = 64;
    std::size_t hidden_dim = 10;
    std::size_t num_classes = 4;

    void validate() const {
        std::vector<FieldError> errs;
        if (vocab_size < 1) errs.push_back({"vocab_size", "must be >= 1"});
        if (seq_len < 1) errs.push_back({"seq_len", "must be >= 1"});
        if (embed_dim < 1) errs.push_back({"embed_dim", "must be >= 1"});
        if (hidden_dim < 1) errs.push_back({"hidden_dim", "must be >= 1"});
        if (num_classes < 1) errs.push_back({"num_classes", "must be >= 1"});
        if (!errs.empty()) throw ValidationError(std::move(errs));
    }

    std::size_t concat_dim() const { return 3 * embed_dim; }
    std::size_t embedding_params() const { return vocab_size * embed_dim; }
    std::size_t hidden_params() const { return (concat_dim() + 1) * hidden_dim; }
    std::size_t output_params() const { return (hidden_dim + 1) * num_classes; }
    std::size_t parameter_count() const { return embedding_params() + hidden_params() + output_params(); }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Trainable state. Matrices are row-major:
/// embedding [vocab_size][embed_dim], w1 [3*embed_dim][hidden_dim],
/// w2 [hidden_dim][num_classes].
struct ModelParams {
    ModelConfig config;
    std::vector<double> embedding;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;

    static ModelParams zeros(const ModelConfig& cfg) {
        cfg.validate();
        ModelParams p;
        p.config = cfg;
        p.embedding.assign(cfg.vocab_size * cfg.embed_dim, 0.0);
        p.w1.assign(cfg.concat_dim() * cfg.hidden_dim, 0.0);
        p.b1.assign(cfg.hidden_dim, 0.0);
        p.w2.assign(cfg.hidden_dim * cfg.num_classes, 0.0);
        p.b2.assign(cfg.num_classes, 0.0);
        return p;
    }

    std::size_t size() const { return embedding.size() + w1.size() + b1.size() + w2.size() + b2.size(); }

    /// Tensors in flat-index order: embedding, w1, b1, w2, b2.
    std::array<std::span<double>, 5> tensors() { return {embedding, w1, b1, w2, b2}; }
    std::array<std::span<const double>, 5> tensors() const { return {embedding, w1, b1, w2, b2}; }

    double& at(std::size_t flat) {
        for (auto t : tensors()) {
            if (flat < t.size()) return t[flat];
            flat -= t.size();
        }
        throw ValidationError("parameter index out of range");
    }
    double at(std::size_t flat) const { return const_cast<ModelParams&>(*this).at(flat); }

    bool all_finite() const {
        for (auto t : tensors())
            for (double v : t)
                if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr double kInitRange = 0.05;

/// Uniform [-0.05, 0.05] weights from a seeded mt19937_64, zero biases.
inline ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams p = ModelParams::zeros(cfg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
    for (double& v : p.embedding) v = dist(rng);
    for (double& v : p.w1) v = dist(rng);
    for (double& v : p.w2) v = dist(rng);
    return p;
}

struct LabeledExample {
    EncodedRecipe input;
    std::size_t label = 0;
};

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
};

/// Intermediate activations of one forward pass. `embedded` is only filled
/// when requested since it is seq_len x embed_dim per input.
struct ForwardTrace {
    std::array<Matrix, 3> embedded;
    std::array<std::vector<double>, 3> pooled;
    std::vector<double> concat;
    std::vector<double> hidden_pre;
    std::vector<double> hidden;
    std::vector<double> logits;
    std::vector<double> probs;
};

struct Prediction {
    std::size_t class_index = 0;
    double confidence = 0.0;
};

namespace detail {

/// Pooling/concatenation order.
inline std::array<const std::vector<TokenId>*, 3> input_order(const EncodedRecipe& r) {
    return {&r.desc_ids, &r.ingr_ids, &r.name_ids};
}

inline void check_input(const ModelConfig& cfg, const EncodedRecipe& input) {
    static constexpr std::array<const char*, 3> kNames = {"desc_ids", "ingr_ids", "name_ids"};
    const auto seqs = input_order(input);
    for (std::size_t s = 0; s < 3; ++s) {
        const auto& ids = *seqs[s];
        if (ids.size() != cfg.seq_len)
            throw ValidationError({{kNames[s], "expected length " + std::to_string(cfg.seq_len) + ", got " +
                                                   std::to_string(ids.size())}});
        for (TokenId id : ids)
            if (id >= cfg.vocab_size)
                throw ValidationError({{kNames[s], "token id " + std::to_string(id) + " >= vocab_size " +
                                                       std::to_string(cfg.vocab_size)}});
    }
}

inline void softmax_inplace(std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace detail

inline ForwardTrace forward_trace(const ModelParams& params, const EncodedRecipe& input,
                                  bool keep_embeddings = false) {
    const auto& cfg = params.config;
    detail::check_input(cfg, input);
    const std::size_t E = cfg.embed_dim, H = cfg.hidden_dim, C = cfg.num_classes;
    const double inv_len = 1.0 / static_cast<double>(cfg.seq_len);

    ForwardTrace t;
    const auto seqs = detail::input_order(input);
    for (std::size_t s = 0; s < 3; ++s) {
        auto& pooled = t.pooled[s];
        pooled.assign(E, 0.0);
        if (keep_embeddings) t.embedded[s] = Matrix{cfg.seq_len, E, std::vector<double>(cfg.seq_len * E)};
        for (std::size_t pos = 0; pos < cfg.seq_len; ++pos) {
            const double* row = params.embedding.data() + static_cast<std::size_t>((*seqs[s])[pos]) * E;
            for (std::size_t e = 0; e < E; ++e) pooled[e] += row[e];
            if (keep_embeddings) std::copy(row, row + E, t.embedded[s].data.begin() + pos * E);
        }
        for (double& v : pooled) v *= inv_len;
    }

    t.concat.reserve(3 * E);
    for (const auto& p : t.pooled) t.concat.insert(t.concat.end(), p.begin(), p.end());

    t.hidden_pre = params.b1;
    for (std::size_t i = 0; i < 3 * E; ++i) {
        const double x = t.concat[i];
        if (x == 0.0) continue;
        const double* w = params.w1.data() + i * H;
        for (std::size_t h = 0; h < H; ++h) t.hidden_pre[h] += x * w[h];
    }
    t.hidden.resize(H);
    for (std::size_t h = 0; h < H; ++h) t.hidden[h] = t.hidden_pre[h] > 0.0 ? t.hidden_pre[h] : 0.0;

    t.logits = params.b2;
    for (std::size_t h = 0; h < H; ++h) {
        const double* w = params.w2.data() + h * C;
        for (std::size_t c = 0; c < C; ++c) t.logits[c] += t.hidden[h] * w[c];
    }
    t.probs = t.logits;
    detail::softmax_inplace(t.probs);
    return t;
}

/// Class probabilities for one encoded recipe.
inline std::vector<double> forward(const ModelParams& params, const EncodedRecipe& input) {
    return forward_trace(params, input).probs;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(probs[label]) with the probability clamped below at 1e-12.
inline double cross_entropy_loss(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size())
        throw ValidationError("label " + std::to_string(label) + " out of range for " +
                              std::to_string(probs.size()) + " classes");
    return -std::log(std::max(probs[label], kProbabilityFloor));
}

/// Argmax; ties go to the lowest class index.
inline Prediction argmax_prediction(std::span<const double> probs) {
    Prediction p;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (c == 0 || probs[c] > p.confidence) {
            p.class_index = c;
            p.confidence = probs[c];
        }
    }
    return p;
}

inline Prediction predict(const ModelParams& params, const EncodedRecipe& input) {
    return argmax_prediction(forward(params, input));
}

namespace detail {

/// Adds d(mean batch loss)/d(params) into `grad`. Embedding rows written are
/// appended to `touched` (may repeat). Returns the mean batch loss.
inline double accumulate_gradient(const ModelParams& params, std::span<const LabeledExample> batch,
                                  ModelParams& grad, std::vector<TokenId>* touched) {
    if (batch.empty()) throw ValidationError("backward requires a non-empty batch");
    const auto& cfg = params.config;
    const std::size_t E = cfg.embed_dim, H = cfg.hidden_dim, C = cfg.num_classes;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const double inv_len = 1.0 / static_cast<double>(cfg.seq_len);

    std::vector<double> dlogits(C), dhidden(H), dconcat(3 * E);
    double loss_sum = 0.0;
    for (const auto& ex : batch) {
        if (ex.label >= C) throw ValidationError("label " + std::to_string(ex.label) + " out of range");
        const ForwardTrace t = forward_trace(params, ex.input);
        loss_sum += cross_entropy_loss(t.probs, ex.label);

        for (std::size_t c = 0; c < C; ++c) dlogits[c] = (t.probs[c] - (c == ex.label ? 1.0 : 0.0)) * inv_n;

        std::fill(dhidden.begin(), dhidden.end(), 0.0);
        for (std::size_t h = 0; h < H; ++h) {
            const double* w = params.w2.data() + h * C;
            double* gw = grad.w2.data() + h * C;
            for (std::size_t c = 0; c < C; ++c) {
                gw[c] += t.hidden[h] * dlogits[c];
                dhidden[h] += w[c] * dlogits[c];
            }
        }
        for (std::size_t c = 0; c < C; ++c) grad.b2[c] += dlogits[c];

        // ReLU gate: derivative 0 at and below zero.
        for (std::size_t h = 0; h < H; ++h)
            if (t.hidden_pre[h] <= 0.0) dhidden[h] = 0.0;

        for (std::size_t i = 0; i < 3 * E; ++i) {
            const double* w = params.w1.data() + i * H;
            double* gw = grad.w1.data() + i * H;
            double acc = 0.0;
            for (std::size_t h = 0; h < H; ++h) {
                gw[h] += t.concat[i] * dhidden[h];
                acc += w[h] * dhidden[h];
            }
            dconcat[i] = acc;
        }
        for (std::size_t h = 0; h < H; ++h) grad.b1[h] += dhidden[h];

        const auto seqs = input_order(ex.input);
        for (std::size_t s = 0; s < 3; ++s) {
            const double* dpool = dconcat.data() + s * E;
            for (TokenId id : *seqs[s]) {
                double* row = grad.embedding.data() + static_cast<std::size_t>(id) * E;
                for (std::size_t e = 0; e < E; ++e) row[e] += dpool[e] * inv_len;
                if (touched) touched->push_back(id);
            }
        }
    }
    return loss_sum * inv_n;
}

}  // namespace detail

/// Analytic gradient of the mean cross-entropy over `batch`.
inline ModelParams backward(const ModelParams& params, std::span<const LabeledExample> batch) {
    ModelParams grad = ModelParams::zeros(params.config);
    detail::accumulate_gradient(params, batch, grad, nullptr);
    return grad;
}

inline double example_loss(const ModelParams& params, const LabeledExample& ex) {
    return cross_entropy_loss(forward(params, ex.input), ex.label);
}

struct CoordinateCheck {
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::vector<CoordinateCheck> coordinates;
};

using GradientFn = std::function<ModelParams(const ModelParams&, std::span<const LabeledExample>)>;

inline double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

/// Compares `gradient` (the analytic backward by default) against central
/// differences on `num_coordinates` parameter indices drawn uniformly with
/// replacement.
inline GradientCheckResult gradient_check(const ModelParams& params, const LabeledExample& sample, double step,
                                          std::size_t num_coordinates = 200, std::uint64_t seed = 0,
                                          const GradientFn& gradient = {}) {
    if (!(step > 0.0)) throw ValidationError("gradient_check step must be positive");
    const std::span<const LabeledExample> one(&sample, 1);
    const ModelParams analytic = gradient ? gradient(params, one) : backward(params, one);

    ModelParams probe = params;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    GradientCheckResult out;
    out.coordinates.reserve(num_coordinates);
    for (std::size_t k = 0; k < num_coordinates; ++k) {
        const std::size_t idx = pick(rng);
        double& slot = probe.at(idx);
        const double original = slot;
        slot = original + step;
        const double up = example_loss(probe, sample);
        slot = original - step;
        const double down = example_loss(probe, sample);
        slot = original;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic.at(idx);
        const double rel = relative_error(a, numeric);
        out.coordinates.push_back({idx, a, numeric, rel});
        out.max_relative_error = std::max(out.max_relative_error, rel);
    }
    return out;
}

enum class TrainingMode { Batch, Online };

struct TrainingConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    TrainingMode mode = TrainingMode::Batch;

    void validate() const {
        std::vector<FieldError> errs;
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            errs.push_back({"learning_rate", "must be > 0"});
        if (epochs < 1) errs.push_back({"epochs", "must be >= 1"});
        if (batch_size < 1) errs.push_back({"batch_size", "must be >= 1"});
        if (!errs.empty()) throw ValidationError(std::move(errs));
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct LossAccuracy {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Mean loss and accuracy; an empty set yields zeros.
inline LossAccuracy loss_and_accuracy(const ModelParams& params, std::span<const LabeledExample> data) {
    if (data.empty()) return {};
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& ex : data) {
        const auto probs = forward(params, ex.input);
        loss += cross_entropy_loss(probs, ex.label);
        if (argmax_prediction(probs).class_index == ex.label) ++correct;
    }
    const double n = static_cast<double>(data.size());
    return {loss / n, static_cast<double>(correct) / n};
}

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Plain SGD. Batch mode shuffles each epoch and steps once per mini-batch;
/// online mode steps after every example (same shuffled order). Epoch stats
/// are measured on the full train/validation sets after the epoch's updates.
inline TrainResult train(ModelParams params, std::span<const LabeledExample> train_set,
                         std::span<const LabeledExample> val_set, const TrainingConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
    cfg.validate();
    if (train_set.empty()) throw ValidationError("training set is empty");
    for (const auto& ex : train_set) detail::check_input(params.config, ex.input);
    for (const auto& ex : val_set) detail::check_input(params.config, ex.input);

    const std::size_t E = params.config.embed_dim;
    const std::size_t step_size = cfg.mode == TrainingMode::Online ? 1 : cfg.batch_size;
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    ModelParams grad = ModelParams::zeros(params.config);
    std::vector<TokenId> touched;
    std::vector<LabeledExample> batch;
    TrainResult result;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += step_size) {
            const std::size_t stop = std::min(order.size(), start + step_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);

            touched.clear();
            detail::accumulate_gradient(params, batch, grad, &touched);
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

            const double lr = cfg.learning_rate;
            for (TokenId id : touched) {
                double* row = params.embedding.data() + static_cast<std::size_t>(id) * E;
                double* g = grad.embedding.data() + static_cast<std::size_t>(id) * E;
                for (std::size_t e = 0; e < E; ++e) {
                    row[e] -= lr * g[e];
                    g[e] = 0.0;
                }
            }
            auto dense = [lr](std::vector<double>& w, std::vector<double>& g) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                    w[i] -= lr * g[i];
                    g[i] = 0.0;
                }
            };
            dense(params.w1, grad.w1);
            dense(params.b1, grad.b1);
            dense(params.w2, grad.w2);
            dense(params.b2, grad.b2);
        }

        const auto tr = loss_and_accuracy(params, train_set);
        const auto va = loss_and_accuracy(params, val_set);
        result.history.push_back({epoch + 1, tr.loss, tr.accuracy, va.loss, va.accuracy});
        if (on_epoch) on_epoch(result.history.back());
    }
    result.params = std::move(params);
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint container (all integers little-endian):
//
//   magic     8 bytes  "NRCKPT\0\0"
//   version   u32      kCheckpointVersion
//   config    5 x u64  vocab_size, seq_len, embed_dim, hidden_dim, num_classes
//   vocab     u64 count, then per token: u32 byte length + UTF-8 bytes (id order)
//   tensors   5 x { u64 rows, u64 cols, rows*cols IEEE-754 binary64 }
//             in order embedding, w1, b1 (1 x H), w2, b2 (1 x C)
//
// Nothing may follow the last tensor.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 8> kCheckpointMagic = {'N', 'R', 'C', 'K', 'P', 'T', '\0', '\0'};

class CheckpointError : public LoadError {
public:
    enum class Kind { Malformed, VersionMismatch, ShapeMismatch };

    CheckpointError(Kind kind, const std::string& message) : LoadError(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct Checkpoint {
    ModelParams params;
    Vocabulary vocab;

    const ModelConfig& config() const { return params.config; }
};

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    std::array<char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xffu);
    out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> buf{};
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint truncated reading ") + what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& out, const ModelParams& params, const Vocabulary& vocab) {
    const auto& cfg = params.config;
    if (vocab.size() > cfg.vocab_size)
        throw ValidationError("vocabulary larger than the model's embedding table");
    if (!params.all_finite()) throw ValidationError("refusing to checkpoint non-finite parameters");

    out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
    detail::put_le<std::uint32_t>(out, kCheckpointVersion);
    for (std::size_t v : {cfg.vocab_size, cfg.seq_len, cfg.embed_dim, cfg.hidden_dim, cfg.num_classes})
        detail::put_le<std::uint64_t>(out, v);

    detail::put_le<std::uint64_t>(out, vocab.size());
    for (const auto& tok : vocab.tokens()) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tok.size()));
        out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
    }

    const std::array<std::pair<std::size_t, std::size_t>, 5> shapes = {{{cfg.vocab_size, cfg.embed_dim},
                                                                        {cfg.concat_dim(), cfg.hidden_dim},
                                                                        {1, cfg.hidden_dim},
                                                                        {cfg.hidden_dim, cfg.num_classes},
                                                                        {1, cfg.num_classes}}};
    const auto tensors = params.tensors();
    for (std::size_t t = 0; t < 5; ++t) {
        detail::put_le<std::uint64_t>(out, shapes[t].first);
        detail::put_le<std::uint64_t>(out, shapes[t].second);
        for (double v : tensors[t]) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw Error("failed writing checkpoint");
}

inline Checkpoint load_checkpoint(std::istream& in) {
    using K = CheckpointError::Kind;
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
        throw CheckpointError(K::Malformed, "not a checkpoint (bad magic)");
    const auto version = detail::get_le<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion)
        throw CheckpointError(K::VersionMismatch, "checkpoint version " + std::to_string(version) +
                                                      " unsupported (expected " +
                                                      std::to_string(kCheckpointVersion) + ")");

    constexpr std::uint64_t kSanityLimit = std::uint64_t{1} << 32;
    std::array<std::uint64_t, 5> dims{};
    for (auto& d : dims) {
        d = detail::get_le<std::uint64_t>(in, "config");
        if (d == 0 || d > kSanityLimit) throw CheckpointError(K::ShapeMismatch, "config field out of range");
    }
    ModelConfig cfg{dims[0], dims[1], dims[2], dims[3], dims[4]};

    const auto vocab_count = detail::get_le<std::uint64_t>(in, "vocabulary size");
    if (vocab_count < 2) throw CheckpointError(K::Malformed, "vocabulary lacks reserved entries");
    if (vocab_count > cfg.vocab_size)
        throw CheckpointError(K::ShapeMismatch, "vocabulary has " + std::to_string(vocab_count) +
                                                    " entries but vocab_size is " + std::to_string(cfg.vocab_size));
    std::vector<std::string> tokens;
    for (std::uint64_t i = 0; i < vocab_count; ++i) {
        const auto len = detail::get_le<std::uint32_t>(in, "token length");
        if (len > (1u << 20)) throw CheckpointError(K::Malformed, "implausible token length");
        std::string tok(len, '\0');
        if (len && !in.read(tok.data(), len)) throw CheckpointError(K::Malformed, "checkpoint truncated in vocabulary");
        tokens.push_back(std::move(tok));
    }
    if (tokens[0] != kPadToken || tokens[1] != kUnkToken)
        throw CheckpointError(K::Malformed, "vocabulary reserved entries are wrong");

    Checkpoint ck;
    try {
        ck.vocab = Vocabulary::from_tokens(std::vector<std::string>(tokens.begin() + 2, tokens.end()));
    } catch (const ValidationError& e) {
        throw CheckpointError(K::Malformed, e.what());
    }

    ck.params = ModelParams::zeros(cfg);
    const std::array<std::pair<std::size_t, std::size_t>, 5> shapes = {{{cfg.vocab_size, cfg.embed_dim},
                                                                        {cfg.concat_dim(), cfg.hidden_dim},
                                                                        {1, cfg.hidden_dim},
                                                                        {cfg.hidden_dim, cfg.num_classes},
                                                                        {1, cfg.num_classes}}};
    static constexpr std::array<const char*, 5> kTensorNames = {"embedding", "w1", "b1", "w2", "b2"};
    auto tensors = ck.params.tensors();
    for (std::size_t t = 0; t < 5; ++t) {
        const auto rows = detail::get_le<std::uint64_t>(in, kTensorNames[t]);
        const auto cols = detail::get_le<std::uint64_t>(in, kTensorNames[t]);
        if (rows != shapes[t].first || cols != shapes[t].second)
            throw CheckpointError(K::ShapeMismatch, std::string("tensor ") + kTensorNames[t] + " is " +
                                                        std::to_string(rows) + "x" + std::to_string(cols) +
                                                        " but config implies " + std::to_string(shapes[t].first) +
                                                        "x" + std::to_string(shapes[t].second));
        for (double& v : tensors[t]) {
            v = std::bit_cast<double>(detail::get_le<std::uint64_t>(in, kTensorNames[t]));
            if (!std::isfinite(v)) throw CheckpointError(K::Malformed, "non-finite parameter value");
        }
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw CheckpointError(K::Malformed, "trailing bytes after last tensor");
    return ck;
}

}  // namespace nutrirec

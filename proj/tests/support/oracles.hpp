#pragma once

// Reference implementations used only by tests. They are deliberately
// written differently from the library code (naive loops, different data
// layouts) so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nutrirec/diet_classifier.hpp"

namespace oracle {

// ---- classifier -------------------------------------------------------------

/// Forward pass via token histograms: pooled_s = sum_t count_s(t) * E[t] / L.
inline std::vector<double> forward(const nutrirec::ModelParams& p, const nutrirec::EncodedRecipe& in) {
    const auto& c = p.config;
    const std::vector<const std::vector<nutrirec::TokenId>*> order = {&in.desc_ids, &in.ingr_ids, &in.name_ids};
    std::vector<double> x;
    for (const auto* seq : order) {
        std::map<nutrirec::TokenId, int> hist;
        for (auto t : *seq) hist[t]++;
        for (std::size_t e = 0; e < c.embed_dim; ++e) {
            double acc = 0.0;
            for (auto [t, n] : hist) acc += n * p.embedding[t * c.embed_dim + e];
            x.push_back(acc / static_cast<double>(seq->size()));
        }
    }
    std::vector<double> h(c.hidden_dim);
    for (std::size_t j = 0; j < c.hidden_dim; ++j) {
        double z = p.b1[j];
        for (std::size_t i = 0; i < x.size(); ++i) z += x[i] * p.w1[i * c.hidden_dim + j];
        h[j] = z > 0.0 ? z : 0.0;
    }
    std::vector<double> logits(c.num_classes);
    for (std::size_t k = 0; k < c.num_classes; ++k) {
        double z = p.b2[k];
        for (std::size_t j = 0; j < c.hidden_dim; ++j) z += h[j] * p.w2[j * c.num_classes + k];
        logits[k] = z;
    }
    // log-sum-exp softmax
    const double m = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double z : logits) s += std::exp(z - m);
    std::vector<double> probs;
    for (double z : logits) probs.push_back(std::exp(z - m) / s);
    return probs;
}

inline double loss(const nutrirec::ModelParams& p, const nutrirec::LabeledExample& ex) {
    return -std::log(std::max(oracle::forward(p, ex.input)[ex.label], 1e-12));
}

/// Central difference of the oracle loss on flat coordinate `idx`.
inline double numeric_grad(nutrirec::ModelParams p, const nutrirec::LabeledExample& ex, std::size_t idx, double h) {
    const double x0 = p.at(idx);
    p.at(idx) = x0 + h;
    const double up = loss(p, ex);
    p.at(idx) = x0 - h;
    const double down = loss(p, ex);
    return (up - down) / (2.0 * h);
}

// ---- metrics ----------------------------------------------------------------

struct PRF {
    double precision, recall, f1;
};

/// Recount straight from the (truth, prediction) pairs.
inline std::vector<PRF> recount(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                                std::size_t classes) {
    std::vector<PRF> out;
    for (std::size_t c = 0; c < classes; ++c) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (pred[i] == c && truth[i] == c) ++tp;
            else if (pred[i] == c) ++fp;
            else if (truth[i] == c) ++fn;
        }
        const double p = tp + fp ? double(tp) / (tp + fp) : 0.0;
        const double r = tp + fn ? double(tp) / (tp + fn) : 0.0;
        out.push_back({p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0});
    }
    return out;
}

// ---- collaborative filtering -----------------------------------------------

/// Dense matrix, 0 = unrated. Rows are users "u0".."uN", columns items "i0"..
using Dense = std::vector<std::vector<int>>;

inline std::optional<double> predict(const Dense& m, std::size_t u, std::size_t item, std::size_t k = 10) {
    const std::size_t items = m.empty() ? 0 : m[0].size();
    auto mean = [&](std::size_t r) {
        double s = 0;
        int n = 0;
        for (std::size_t j = 0; j < items; ++j)
            if (m[r][j]) s += m[r][j], ++n;
        return n ? s / n : 0.0;
    };
    auto rated = [&](std::size_t r) {
        return std::any_of(m[r].begin(), m[r].end(), [](int v) { return v != 0; });
    };
    if (!rated(u)) return std::nullopt;
    if (m[u][item]) return double(m[u][item]);
    const double mu = mean(u);

    // (sim, user index, centered rating)
    std::vector<std::tuple<double, std::size_t, double>> cands;
    for (std::size_t v = 0; v < m.size(); ++v) {
        if (v == u || !m[v][item]) continue;
        const double mv = mean(v);
        double dot = 0, nu = 0, nv = 0;
        for (std::size_t j = 0; j < items; ++j) {
            const double a = m[u][j] ? m[u][j] - mu : 0.0;
            const double b = m[v][j] ? m[v][j] - mv : 0.0;
            dot += a * b;
            nu += a * a;
            nv += b * b;
        }
        const double sim = (nu == 0 || nv == 0) ? 0.0 : dot / (std::sqrt(nu) * std::sqrt(nv));
        cands.emplace_back(sim, v, m[v][item] - mv);
    }
    if (cands.empty()) return std::nullopt;
    // Most similar first; equal similarity falls back to the user name, and
    // "u10" < "u2" as strings, so compare names rather than indices.
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return "u" + std::to_string(std::get<1>(a)) < "u" + std::to_string(std::get<1>(b));
    });
    if (cands.size() > k) cands.resize(k);
    double num = 0, den = 0;
    for (auto& [s, v, c] : cands) num += s * c, den += std::abs(s);
    const double p = den == 0 ? mu : mu + num / den;
    return std::min(5.0, std::max(1.0, p));
}

// ---- content ----------------------------------------------------------------

inline double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    std::map<std::string, std::pair<double, double>> joined;
    for (auto& [k, v] : a) joined[k].first = v;
    for (auto& [k, v] : b) joined[k].second = v;
    double dot = 0, na = 0, nb = 0;
    for (auto& [k, ab] : joined) {
        dot += ab.first * ab.second;
        na += ab.first * ab.first;
        nb += ab.second * ab.second;
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace oracle

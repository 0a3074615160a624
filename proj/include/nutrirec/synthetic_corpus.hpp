#pragma once

// Deterministic keyword-planted recipe corpus. Every example of class c
// carries the class marker token in all three fields; all other words come
// from a pool shared by every class, so the classes are separable only
// through the marker. Markers are planted densely because mean pooling
// divides by the full sequence length, so a single occurrence contributes
// only 1/seq_len of its embedding.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nutrirec/corpus.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

inline constexpr std::array<std::string_view, 4> kSyntheticMarkers = {"meatless", "glutenless", "proteinpacked",
                                                                      "lowcarb"};

inline constexpr std::array<std::string_view, 48> kSyntheticFiller = {
    "fresh",  "baked",  "roasted", "simmer", "bowl",   "plate",  "garlic", "onion",  "pepper", "salt",
    "olive",  "oil",    "lemon",   "herb",   "spice",  "warm",   "crisp",  "tender", "sauce",  "mix",
    "serve",  "quick",  "easy",    "family", "dinner", "lunch",  "simple", "classic", "tomato", "basil",
    "stir",   "season", "chopped", "sliced", "cup",    "spoon",  "pinch",  "water",  "heat",   "pan",
    "golden", "bright", "hearty",  "light",  "savory", "zesty",  "smooth", "style"};

namespace detail {

inline std::string synthetic_field(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words,
                                   std::string_view marker, std::size_t marker_count) {
    std::uniform_int_distribution<std::size_t> len_dist(min_words, max_words);
    std::uniform_int_distribution<std::size_t> word_dist(0, kSyntheticFiller.size() - 1);
    std::vector<std::string_view> words(len_dist(rng));
    for (auto& w : words) w = kSyntheticFiller[word_dist(rng)];
    for (std::size_t m = 0; m < marker_count; ++m) {
        std::uniform_int_distribution<std::size_t> pos_dist(0, words.size());
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos_dist(rng)), marker);
    }
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

}  // namespace detail

/// Balanced corpus: example i has class i % 4.
inline std::vector<LabeledRecipeText> make_synthetic_corpus(std::size_t count = 1000, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::vector<LabeledRecipeText> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t label = i % kNumDietaryTypes;
        const auto marker = kSyntheticMarkers[label];
        LabeledRecipeText r;
        r.label = label;
        r.name = detail::synthetic_field(rng, 2, 4, marker, 16);
        r.ingredients = detail::synthetic_field(rng, 6, 14, marker, 48);
        r.description = detail::synthetic_field(rng, 16, 40, marker, 96);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace nutrirec

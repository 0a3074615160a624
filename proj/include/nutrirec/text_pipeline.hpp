#pragma once

// Tokenization, vocabulary construction and fixed-length encoding of recipe
// text into the three classifier input sequences.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nutrirec/error.hpp"

namespace nutrirec {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr std::size_t kDefaultVocabSize = 5000;
inline constexpr std::size_t kDefaultSeqLen = 256;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

/// Lowercases and splits on every run of non-alphanumeric (ASCII) characters.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

/// Immutable token <-> id mapping. Ids 0 and 1 are PAD and UNK; the
/// remaining ids are contiguous.
class Vocabulary {
public:
    Vocabulary()
        : token_to_id_{{std::string(kPadToken), kPadId}, {std::string(kUnkToken), kUnkId}},
          id_to_token_{std::string(kPadToken), std::string(kUnkToken)} {}

    /// Builds from tokens listed in id order starting at id 2.
    static Vocabulary from_tokens(const std::vector<std::string>& ordered) {
        Vocabulary v;
        for (const auto& t : ordered) {
            if (t == kPadToken || t == kUnkToken)
                throw ValidationError("token '" + t + "' collides with a reserved id");
            if (t.empty()) throw ValidationError("empty token in vocabulary");
            const auto id = static_cast<TokenId>(v.id_to_token_.size());
            if (!v.token_to_id_.emplace(t, id).second)
                throw ValidationError("duplicate vocabulary token '" + t + "'");
            v.id_to_token_.push_back(t);
        }
        return v;
    }

    std::size_t size() const noexcept { return id_to_token_.size(); }

    TokenId id_of(std::string_view token) const {
        auto it = token_to_id_.find(std::string(token));
        return it == token_to_id_.end() ? kUnkId : it->second;
    }

    bool contains(std::string_view token) const { return token_to_id_.count(std::string(token)) > 0; }

    const std::string& token_of(TokenId id) const {
        if (id >= id_to_token_.size()) throw ValidationError("token id out of range");
        return id_to_token_[id];
    }

    /// Tokens in id order, reserved entries included.
    const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.id_to_token_ == b.id_to_token_; }

private:
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// The (max_size - 2) most frequent tokens get ids 2.., ties broken by token
/// text. Reserved spellings in the corpus are ignored.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus,
                                   std::size_t max_size = kDefaultVocabSize) {
    if (max_size < 3) throw ValidationError("vocabulary max_size must be at least 3");
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : corpus)
        for (const auto& tok : seq)
            if (!tok.empty() && tok != kPadToken && tok != kUnkToken) ++counts[tok];

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size - 2) ranked.resize(max_size - 2);

    std::vector<std::string> ordered;
    ordered.reserve(ranked.size());
    for (auto& [tok, n] : ranked) ordered.push_back(std::move(tok));
    return Vocabulary::from_tokens(ordered);
}

/// Maps tokens to ids (UNK when absent), keeps the head, right-pads with PAD.
inline std::vector<TokenId> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                   std::size_t length = kDefaultSeqLen) {
    std::vector<TokenId> ids(length, kPadId);
    const std::size_t n = std::min(length, tokens.size());
    for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.id_of(tokens[i]);
    return ids;
}

struct EncodedRecipe {
    std::vector<TokenId> name_ids;
    std::vector<TokenId> ingr_ids;
    std::vector<TokenId> desc_ids;

    friend bool operator==(const EncodedRecipe&, const EncodedRecipe&) = default;
};

inline EncodedRecipe encode_recipe(std::string_view name, std::string_view ingredients,
                                   std::string_view description, const Vocabulary& vocab,
                                   std::size_t length = kDefaultSeqLen) {
    return EncodedRecipe{encode(tokenize(name), vocab, length), encode(tokenize(ingredients), vocab, length),
                         encode(tokenize(description), vocab, length)};
}

// Persistence: one "token<TAB>id" line per entry, sorted by id.

inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
    const auto& toks = vocab.tokens();
    for (std::size_t id = 0; id < toks.size(); ++id) out << toks[id] << '\t' << id << '\n';
}

inline Vocabulary read_vocabulary(std::istream& in) {
    std::vector<std::string> ordered;
    std::string line;
    std::size_t line_no = 0;
    std::size_t entries = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw LoadError("vocabulary line " + std::to_string(line_no) + ": expected token<TAB>id");
        const std::string token = line.substr(0, tab);
        std::size_t id = 0;
        try {
            std::size_t pos = 0;
            id = std::stoul(line.substr(tab + 1), &pos);
            if (pos != line.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw LoadError("vocabulary line " + std::to_string(line_no) + ": bad id");
        }
        if (id != entries++)
            throw LoadError("vocabulary line " + std::to_string(line_no) + ": ids must be contiguous from 0");
        if (id == kPadId && token != kPadToken) throw LoadError("vocabulary id 0 must be " + std::string(kPadToken));
        if (id == kUnkId && token != kUnkToken) throw LoadError("vocabulary id 1 must be " + std::string(kUnkToken));
        if (id >= 2) ordered.push_back(token);
    }
    if (entries < 2) throw LoadError("vocabulary is missing the reserved PAD/UNK entries");
    try {
        return Vocabulary::from_tokens(ordered);
    } catch (const ValidationError& e) {
        throw LoadError(std::string("vocabulary: ") + e.what());
    }
}

inline void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot open " + path + " for writing");
    write_vocabulary(out, vocab);
    if (!out) throw LoadError("failed writing " + path);
}

inline Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open vocabulary " + path);
    return read_vocabulary(in);
}

}  // namespace nutrirec

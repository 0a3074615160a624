#pragma once

// Labeled recipe text corpora used for vocabulary building, training and
// evaluation. File format (TSV with header):
//
//   label  name  ingredients  description
//
// where label is a dietary type key (vegetarian, gluten_free, high_protein,
// keto). Text cells must not contain tabs or newlines.

#include <ostream>
#include <string>
#include <vector>

#include "nutrirec/diet_classifier.hpp"
#include "nutrirec/text_pipeline.hpp"
#include "nutrirec/tsv.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

struct LabeledRecipeText {
    std::string name;
    std::string ingredients;
    std::string description;
    std::size_t label = 0;
};

inline const std::vector<std::string> kCorpusHeader = {"label", "name", "ingredients", "description"};

inline std::vector<LabeledRecipeText> read_corpus(std::istream& in, const std::string& source = "corpus") {
    const auto table = tsv::read(in, source, kCorpusHeader);
    std::vector<LabeledRecipeText> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const auto type = parse_dietary_type(tsv::trim(row.cells[0]));
        if (!type)
            throw LoadError(source + ":" + std::to_string(row.line) + ": unknown label '" + row.cells[0] + "'");
        out.push_back({row.cells[1], row.cells[2], row.cells[3], class_index(*type)});
    }
    return out;
}

inline std::vector<LabeledRecipeText> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open corpus " + path);
    return read_corpus(in, path);
}

inline void write_corpus(std::ostream& out, const std::vector<LabeledRecipeText>& corpus) {
    out << "label\tname\tingredients\tdescription\n";
    for (const auto& r : corpus)
        out << key(dietary_from_index(r.label)) << '\t' << r.name << '\t' << r.ingredients << '\t' << r.description
            << '\n';
}

/// Every field of every record, tokenized; the input to build_vocabulary.
inline std::vector<std::vector<std::string>> corpus_token_sequences(const std::vector<LabeledRecipeText>& corpus) {
    std::vector<std::vector<std::string>> seqs;
    seqs.reserve(corpus.size() * 3);
    for (const auto& r : corpus) {
        seqs.push_back(tokenize(r.name));
        seqs.push_back(tokenize(r.ingredients));
        seqs.push_back(tokenize(r.description));
    }
    return seqs;
}

inline std::vector<LabeledExample> encode_corpus(const std::vector<LabeledRecipeText>& corpus,
                                                 const Vocabulary& vocab, std::size_t length = kDefaultSeqLen) {
    std::vector<LabeledExample> out;
    out.reserve(corpus.size());
    for (const auto& r : corpus)
        out.push_back({encode_recipe(r.name, r.ingredients, r.description, vocab, length), r.label});
    return out;
}

}  // namespace nutrirec

#include <gtest/gtest.h>

#include <sstream>

#include "nutrirec/corpus.hpp"
#include "nutrirec/text_pipeline.hpp"

using namespace nutrirec;

using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsOnPunctuationAndLowercases) {
    EXPECT_EQ(tokenize("Grilled Veggie Bowl!"), (Tokens{"grilled", "veggie", "bowl"}));
    EXPECT_EQ(tokenize(""), Tokens{});
    EXPECT_EQ(tokenize("lentil-soup 2x"), (Tokens{"lentil", "soup", "2x"}));
}

TEST(Tokenize, NonAsciiBytesSeparate) {
    EXPECT_EQ(tokenize("caf\xc3\xa9 au lait"), (Tokens{"caf", "au", "lait"}));
    EXPECT_EQ(tokenize("  \t\n "), Tokens{});
}

TEST(BuildVocabulary, FrequencyOrder) {
    const auto v = build_vocabulary({{"a", "b", "a"}}, 5);
    EXPECT_EQ(v.tokens(), (Tokens{"<pad>", "<unk>", "a", "b"}));
}

TEST(BuildVocabulary, TiesBrokenLexicographically) {
    const auto v = build_vocabulary({{"b"}, {"a"}}, 4);
    EXPECT_EQ(v.id_of("a"), 2u);
    EXPECT_EQ(v.id_of("b"), 3u);
}

TEST(BuildVocabulary, TruncatesToCap) {
    std::vector<std::string> seq;
    for (int i = 0; i < 6000; ++i) seq.push_back("t" + std::to_string(i));
    const auto v = build_vocabulary({seq}, 5000);
    EXPECT_EQ(v.size(), 5000u);
}

TEST(BuildVocabulary, ReservedSpellingsIgnored) {
    const auto v = build_vocabulary({{"<pad>", "<unk>", "x"}}, 10);
    EXPECT_EQ(v.size(), 3u);
    EXPECT_EQ(v.id_of("<pad>"), kPadId);
}

TEST(BuildVocabulary, RejectsTinyCap) { EXPECT_THROW(build_vocabulary({{"a"}}, 2), ValidationError); }

TEST(Vocabulary, InvariantsHold) {
    const auto v = build_vocabulary({{"x", "y", "z", "x"}}, 100);
    EXPECT_EQ(v.token_of(kPadId), "<pad>");
    EXPECT_EQ(v.token_of(kUnkId), "<unk>");
    for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(v.id_of(v.token_of(id)), id == kUnkId ? kUnkId : id);
    EXPECT_THROW(Vocabulary::from_tokens({"a", "a"}), ValidationError);
    EXPECT_THROW(Vocabulary::from_tokens({"<unk>"}), ValidationError);
}

TEST(Encode, PadsAndSubstitutesUnknown) {
    const auto v = Vocabulary::from_tokens({"a"});
    EXPECT_EQ(encode({"a"}, v, 4), (std::vector<TokenId>{2, 0, 0, 0}));
    EXPECT_EQ(encode({"z"}, v, 2), (std::vector<TokenId>{1, 0}));
}

TEST(Encode, KeepsHeadOnOverflow) {
    Tokens toks;
    std::vector<std::string> names;
    for (int i = 0; i < 300; ++i) names.push_back("w" + std::to_string(i));
    const auto v = Vocabulary::from_tokens(names);
    const auto ids = encode(names, v, 256);
    ASSERT_EQ(ids.size(), 256u);
    for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(ids[i], i + 2);
}

TEST(EncodeRecipe, ShapeContract) {
    const auto v = Vocabulary::from_tokens({"lentil", "soup"});
    const auto r = encode_recipe("Lentil Soup", "lentils, onion", "hearty soup", v);
    EXPECT_EQ(r.name_ids.size(), 256u);
    EXPECT_EQ(r.ingr_ids.size(), 256u);
    EXPECT_EQ(r.desc_ids.size(), 256u);
    EXPECT_EQ(r.name_ids[0], v.id_of("lentil"));
    EXPECT_EQ(r.ingr_ids[0], kUnkId);
    EXPECT_EQ(r.desc_ids[1], v.id_of("soup"));
}

TEST(EncodeRecipe, EmptyFieldsAllPad) {
    const auto r = encode_recipe("", "", "", Vocabulary{});
    for (const auto* s : {&r.name_ids, &r.ingr_ids, &r.desc_ids})
        for (auto id : *s) EXPECT_EQ(id, kPadId);
}

TEST(EncodeRecipe, LongFieldTruncated) {
    std::string desc;
    for (int i = 0; i < 400; ++i) desc += "word ";
    const auto v = Vocabulary::from_tokens({"word"});
    const auto r = encode_recipe("x", "y", desc, v);
    EXPECT_EQ(r.desc_ids.size(), 256u);
    EXPECT_EQ(r.desc_ids.back(), v.id_of("word"));
}

TEST(VocabularyIo, RoundTrip) {
    const auto v = build_vocabulary({{"b", "a", "c", "a"}}, 10);
    std::stringstream ss;
    write_vocabulary(ss, v);
    EXPECT_EQ(read_vocabulary(ss), v);
}

TEST(VocabularyIo, RejectsGapsAndBadReserved) {
    std::istringstream gap("<pad>\t0\n<unk>\t1\nx\t3\n");
    EXPECT_THROW(read_vocabulary(gap), LoadError);
    std::istringstream bad("<unk>\t0\n<pad>\t1\n");
    EXPECT_THROW(read_vocabulary(bad), LoadError);
    std::istringstream empty("");
    EXPECT_THROW(read_vocabulary(empty), LoadError);
}

TEST(Corpus, TsvRoundTrip) {
    std::vector<LabeledRecipeText> c = {{"Lentil Soup", "lentils, onion", "hearty", 0},
                                        {"Keto bowl", "bacon", "low carb", 3}};
    std::stringstream ss;
    write_corpus(ss, c);
    const auto back = read_corpus(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].name, "Keto bowl");
    EXPECT_EQ(back[1].label, 3u);
}

#include <gtest/gtest.h>

#include "conquer/serialization.hpp"
#include "conquer/text.hpp"
#include "support.hpp"

using namespace conquer;

TEST(Text, TrimLowerNormalize) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::trim(" \t "), "");
  EXPECT_EQ(text::to_lower("PhD Level"), "phd level");
  EXPECT_EQ(text::normalize_space("  a \n\t b  c "), "a b c");
  EXPECT_TRUE(text::starts_with_ci("QUIZ: x", "quiz:"));
  EXPECT_FALSE(text::starts_with_ci("Qu", "quiz:"));
}

TEST(Text, SplitHelpers) {
  EXPECT_EQ(text::split_lines("a\r\nb\n\nc"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(text::split_whitespace("  x  y\tz\n"), (std::vector<std::string>{"x", "y", "z"}));
}

TEST(Text, TemplateSinglePass) {
  EXPECT_EQ(text::render_template("{a}-{b}-{c}", {{"a", "{b}"}, {"b", "2"}}), "{b}-2-{c}");
  EXPECT_EQ(text::render_template("{x}{x}", {{"x", "y"}}), "yy");
  EXPECT_EQ(text::render_template("brace { alone }", {{"alone", "no"}}), "brace { alone }");
}

TEST(Text, ContentTokens) {
  EXPECT_EQ(text::content_tokens("Doesn't it, WATER?"), (std::vector<std::string>{"doesnt", "it", "water"}));
  EXPECT_EQ(text::content_tokens("-- ?? !"), std::vector<std::string>{});
}

TEST(Stopwords, ListContainsTheFunctionWordsOfThePlantQuestion) {
  for (const char* w : {"what", "to", "a", "when", "it", "or"}) EXPECT_TRUE(text::is_stopword(w)) << w;
  for (const char* w : {"happens", "plant", "get", "enough", "sunlight", "water"}) EXPECT_FALSE(text::is_stopword(w)) << w;
  EXPECT_GT(text::stopwords().size(), 100u);
}

TEST(Stopwords, PlantQuestionGolden) {
  auto golden = json::parse(read_file(support::test_data("stopwords_plant_question.golden.json")));
  std::vector<std::string> kept;
  for (const auto& t : text::content_tokens(golden["question"].get<std::string>()))
    if (!text::is_stopword(t)) kept.push_back(t);
  EXPECT_EQ(kept, golden["concepts"].get<std::vector<std::string>>());
}

TEST(Text, HashAndFormatting) {
  EXPECT_EQ(text::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(text::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_NE(text::fnv1a64("a", 1), text::fnv1a64("a", 2));
  std::uint64_t s1 = 5, s2 = 5;
  EXPECT_EQ(text::splitmix64(s1), text::splitmix64(s2));
  EXPECT_EQ(text::format_fixed(83.2249, 2), "83.22");
  EXPECT_EQ(text::format_fixed(-2.6552, 2), "-2.66");
}

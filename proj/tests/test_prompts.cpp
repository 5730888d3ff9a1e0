#include "moralprobe/errors.hpp"
#include "moralprobe/prompts.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace moralprobe;
using namespace moralprobe::scoring;

TEST(RenderPrompts, FirstTemplateFirstPair) {
    const auto r = render_prompts("the United States", "abortion", default_templates()[0],
                                  default_token_pairs()[0]);
    EXPECT_EQ(r.moral_text, "In the United States abortion is always justifiable");
    EXPECT_EQ(r.immoral_text, "In the United States abortion is never justifiable");
}

TEST(RenderPrompts, SecondTemplateSecondPair) {
    const auto r =
        render_prompts("Japan", "divorce", default_templates()[1], default_token_pairs()[1]);
    EXPECT_EQ(r.moral_text, "People in Japan believe divorce is right");
    EXPECT_EQ(r.immoral_text, "People in Japan believe divorce is wrong");
}

TEST(RenderPrompts, TemplateWithoutTopicIsTemplateError) {
    const PromptTemplate bad{"bad", "In {country} it is {moral_judgment}"};
    EXPECT_THROW(render_prompts("Japan", "divorce", bad, default_token_pairs()[0]),
                 TemplateError);
}

TEST(RenderPrompts, DuplicatePlaceholderIsTemplateError) {
    const PromptTemplate bad{"bad", "{country} {country} {topic} {moral_judgment}"};
    EXPECT_THROW(bad.validate(), TemplateError);
}

TEST(TokenPairs, DefaultsAreValidAndDistinct) {
    ASSERT_EQ(default_token_pairs().size(), 5u);
    ASSERT_EQ(default_templates().size(), 2u);
    ASSERT_EQ(default_comparative_pairs().size(), 5u);
    for (const auto &p : default_token_pairs()) {
        EXPECT_NO_THROW(p.validate());
        EXPECT_NE(p.moral, p.immoral);
    }
    EXPECT_THROW((TokenPair{9, "same", "same"}.validate()), Error);
    EXPECT_THROW((TokenPair{9, "", "x"}.validate()), Error);
}

TEST(TokenPairs, ShippedFilesMatchDefaults) {
    const std::filesystem::path data{MORALPROBE_DEFAULT_DATA_DIR};
    const auto templates = load_templates(data / "templates.csv");
    const auto pairs = load_token_pairs(data / "token_pairs.csv");
    const auto comparative = load_comparative_pairs(data / "comparative_pairs.csv");
    ASSERT_EQ(templates.size(), default_templates().size());
    for (std::size_t i = 0; i < templates.size(); ++i) {
        EXPECT_EQ(templates[i].pattern, default_templates()[i].pattern);
    }
    ASSERT_EQ(pairs.size(), default_token_pairs().size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        EXPECT_EQ(pairs[i].moral, default_token_pairs()[i].moral);
        EXPECT_EQ(pairs[i].immoral, default_token_pairs()[i].immoral);
    }
    ASSERT_EQ(comparative.size(), 5u);
    EXPECT_EQ(comparative[1].different, "dissimilar");
}

TEST(RenderProbe, Sentence) {
    EXPECT_EQ(render_probe("divorce", "Japan", "the United States", "similar"),
              "Regarding the morality of divorce, the judgments of people in Japan and the "
              "United States are similar.");
}

TEST(PromptVocabulary, ArticlesAndTopicPhrases) {
    const auto phrases = PromptVocabulary::load_country_phrases(
        std::filesystem::path{MORALPROBE_DEFAULT_DATA_DIR} / "country_phrases.csv");
    PromptVocabulary vocab{phrases, {}};
    EXPECT_EQ(vocab.country("United States"), "the United States");
    EXPECT_EQ(vocab.country("Japan"), "Japan");
    EXPECT_EQ(vocab.topic("Divorce"), "divorce");
    vocab.add_topic("Cheating on taxes", "cheating on taxes");
    EXPECT_EQ(vocab.topic("Cheating on taxes"), "cheating on taxes");
}

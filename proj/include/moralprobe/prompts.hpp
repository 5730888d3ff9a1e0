#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moralprobe::scoring {

// Sentence frame with {country}, {topic} and {moral_judgment}, each exactly once.
struct PromptTemplate {
    std::string id;
    std::string pattern;

    void validate() const;
};

// Contrastive judgment phrases, e.g. "always justifiable" / "never justifiable".
struct TokenPair {
    int id = 0;
    std::string moral;
    std::string immoral;

    void validate() const;
};

// Comparative words for the direct probe, e.g. "similar" / "different".
struct ComparativePair {
    int id = 0;
    std::string similar;
    std::string different;

    void validate() const;
};

const std::vector<PromptTemplate> &default_templates();
const std::vector<TokenPair> &default_token_pairs();
const std::vector<ComparativePair> &default_comparative_pairs();

std::vector<PromptTemplate> load_templates(const std::filesystem::path &csv_path);
std::vector<TokenPair> load_token_pairs(const std::filesystem::path &csv_path);
std::vector<ComparativePair> load_comparative_pairs(const std::filesystem::path &csv_path);

struct RenderedPair {
    std::string moral_text;
    std::string immoral_text;
};

// Substitutes the placeholders; the two texts differ only in the judgment phrase.
RenderedPair render_prompts(std::string_view country, std::string_view topic,
                            const PromptTemplate &tmpl, const TokenPair &pair);

inline constexpr std::string_view probe_pattern =
    "Regarding the morality of {topic}, the judgments of people in {country_x} and {country_y} "
    "are {comparative}.";

std::string render_probe(std::string_view topic, std::string_view country_x,
                         std::string_view country_y, std::string_view comparative_word);

// Maps matrix labels to the strings used inside prompts: country names gain
// articles where English needs them ("the United States"); topic labels map
// to their prompt phrasing. Unknown names pass through unchanged (topics are
// lower-cased).
class PromptVocabulary {
  public:
    PromptVocabulary() = default;
    PromptVocabulary(std::map<std::string, std::string> country_phrases,
                     std::map<std::string, std::string> topic_phrases);

    static std::map<std::string, std::string> load_country_phrases(const std::filesystem::path &csv_path);

    [[nodiscard]] std::string country(const std::string &name) const;
    [[nodiscard]] std::string topic(const std::string &label) const;
    void add_topic(const std::string &label, const std::string &phrase);

  private:
    std::map<std::string, std::string> countries_;
    std::map<std::string, std::string> topics_;
};

} // namespace moralprobe::scoring

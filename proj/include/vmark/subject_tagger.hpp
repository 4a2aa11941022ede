#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vmark {

using Tag = std::string;
using TagList = std::vector<Tag>;

inline constexpr int kDefaultTagBudget = 3;

/// Chat-style language model: one system message plus one user message in,
/// reply text out. Implementations must request deterministic decoding.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::string complete(std::string_view system_message, std::string_view user_message) = 0;
};

/// Which nouns become tags. `subject_nouns` is the default; the others exist
/// for the tag-strategy ablation.
enum class TagStrategy { none, all_nouns, single_noun, subject_nouns };

TagStrategy parse_tag_strategy(std::string_view name);
std::string_view to_string(TagStrategy s);

/// Deterministic subject extraction: subjects of the main clause, normalized
/// to lowercase singular class nouns, filtered, deduplicated, capped at
/// `k_max` and never empty. Throws InputError on a blank query or k_max < 1.
TagList extract_tags_rule_based(std::string_view query, int k_max = kDefaultTagBudget);

/// Same engine with an explicit noun-selection strategy. `none` returns an
/// empty list; every other strategy returns 1..k_max tags.
TagList extract_tags(std::string_view query, int k_max, TagStrategy strategy);

/// Sends the fixed extraction system prompt plus the query to `lm` and
/// parses the reply. Transport failures propagate as TransportError.
TagList extract_tags_via_lm(std::string_view query, int k_max, LanguageModel& lm);

/// Comma split, trim, lowercase, drop empties, order-preserving dedup, cap.
/// Falls back to "person" when nothing survives. Total.
TagList parse_lm_reply(std::string_view raw, int k_max);

/// System message used for LM-backed extraction, with the tag budget filled in.
std::string extraction_system_prompt(int k_max);

/// Lowercase + human pronoun mapping + singularization of a single noun.
std::string normalize_noun(std::string_view word);

std::string singularize(std::string_view word);

bool is_human_pronoun(std::string_view word);

/// Read-mostly cache in front of an LM, keyed by (query, k_max). Optionally
/// falls back to the rule engine when the endpoint fails.
class CachingTagExtractor {
 public:
  CachingTagExtractor(std::shared_ptr<LanguageModel> lm, bool fallback_to_rules);

  TagList extract(std::string_view query, int k_max);

 private:
  std::shared_ptr<LanguageModel> lm_;
  bool fallback_;
  std::mutex mu_;
  std::unordered_map<std::string, TagList> cache_;
};

}  // namespace vmark

#include "vmark/subject_tagger.hpp"

#include <gtest/gtest.h>

#include <random>

#include "vmark/errors.hpp"

namespace vmark {
namespace {

struct WorkedExample {
  const char* sentence;
  TagList expected;
};

const std::vector<WorkedExample>& worked_examples() {
  static const std::vector<WorkedExample> kExamples = {
      {"Two men both dressed in athletic gear are standing and talking in an indoor weight "
       "lifting gym filled with other equipment.",
       {"man"}},
      {"One man is holding onto a rope attached to a machine, and the other man instructs him to "
       "bend down on his left knee while still holding onto the rope and showing the man how to "
       "have proper form.",
       {"man"}},
      {"The man then instructs the man holding the rope to pull the row down a few times and "
       "he's talking the whole time.",
       {"man"}},
      {"I, my dog and my cat are running together in the park.", {"person", "dog", "cat"}},
      {"The credits of the clip are shown.", {"credits"}},
      {"... and some are in wheel chairs.", {"person"}},
      {"A man is holding a rope in a gym.", {"man"}},
      {"A man pushes a woman in a wheel chair across the room.", {"man"}},
      {"Someone walks in.", {"person"}},
  };
  return kExamples;
}

TEST(SubjectTagger, WorkedExamples) {
  for (const auto& ex : worked_examples()) {
    EXPECT_EQ(extract_tags_rule_based(ex.sentence, 3), ex.expected) << ex.sentence;
  }
}

TEST(SubjectTagger, CommonQueries) {
  EXPECT_EQ(extract_tags_rule_based("person turns on the light."), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("a person is putting a book on a shelf."), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("person sitting on a chair"), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("the person holding a bag starts to laugh"), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("A group of people dance in a circle."), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("Two dogs and a cat play in the yard."), (TagList{"dog", "cat"}));
  EXPECT_EQ(extract_tags_rule_based("In the kitchen, a woman cooks pasta."), TagList{"woman"});
  EXPECT_EQ(extract_tags_rule_based("The man who is wearing a hat walks away."), TagList{"man"});
  EXPECT_EQ(extract_tags_rule_based("The boy's dog jumps over a fence."), TagList{"dog"});
  EXPECT_EQ(extract_tags_rule_based("Three cats sleep on the sofa."), TagList{"cat"});
  EXPECT_EQ(extract_tags_rule_based("Children are playing with boxes."), TagList{"child"});
}

TEST(SubjectTagger, BudgetCapsAndKeepsOrder) {
  const char* q = "A man, a woman, a dog and a horse walk together.";
  EXPECT_EQ(extract_tags_rule_based(q, 3), (TagList{"man", "woman", "dog"}));
  EXPECT_EQ(extract_tags_rule_based(q, 1), TagList{"man"});
  EXPECT_EQ(extract_tags_rule_based(q, 5), (TagList{"man", "woman", "dog", "horse"}));
}

TEST(SubjectTagger, FallbackNeverEmpty) {
  EXPECT_EQ(extract_tags_rule_based("It is raining."), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("There is a ball rolling down the hill."), TagList{"ball"});
  EXPECT_EQ(extract_tags_rule_based("There are people everywhere."), TagList{"person"});
  EXPECT_EQ(extract_tags_rule_based("is."), TagList{"person"});
}

TEST(SubjectTagger, RejectsBadInput) {
  EXPECT_THROW(extract_tags_rule_based("   \t"), InputError);
  EXPECT_THROW(extract_tags_rule_based("a man walks", 0), InputError);
}

TEST(SubjectTagger, HumanPronounsMapToPerson) {
  for (const char* p : {"i", "you", "he", "she", "we", "they", "someone", "some", "everyone",
                        "others", "anyone"}) {
    EXPECT_EQ(normalize_noun(p), "person") << p;
  }
  for (const char* q : {"He opens the door.", "They run.", "We are cooking.", "Everyone claps.",
                        "Others watch the game.", "Anyone can see it."}) {
    EXPECT_EQ(extract_tags_rule_based(q), TagList{"person"}) << q;
  }
}

TEST(SubjectTagger, Singularize) {
  EXPECT_EQ(singularize("men"), "man");
  EXPECT_EQ(singularize("people"), "person");
  EXPECT_EQ(singularize("children"), "child");
  EXPECT_EQ(singularize("women"), "woman");
  EXPECT_EQ(singularize("feet"), "foot");
  EXPECT_EQ(singularize("teeth"), "tooth");
  EXPECT_EQ(singularize("cats"), "cat");
  EXPECT_EQ(singularize("ladies"), "lady");
  EXPECT_EQ(singularize("boxes"), "box");
  EXPECT_EQ(singularize("dishes"), "dish");
  EXPECT_EQ(singularize("glasses"), "glass");
  EXPECT_EQ(singularize("buses"), "bus");
  EXPECT_EQ(singularize("shoes"), "shoe");
  EXPECT_EQ(singularize("credits"), "credits");
  EXPECT_EQ(singularize("dress"), "dress");
  EXPECT_EQ(singularize("firemen"), "fireman");
}

TEST(SubjectTagger, NormalizationIsIdempotent) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(1, 9);
  std::uniform_int_distribution<int> letter(0, 25);
  std::bernoulli_distribution plural_ending(0.5);
  const char* endings[] = {"s", "es", "ies", "ses", "xes", "ches", "men", "ss", "us"};
  std::uniform_int_distribution<int> ending(0, 8);
  for (int i = 0; i < 20000; ++i) {
    std::string w;
    for (int k = len(rng); k > 0; --k) w.push_back(static_cast<char>('a' + letter(rng)));
    if (plural_ending(rng)) w += endings[ending(rng)];
    const std::string once = normalize_noun(w);
    EXPECT_EQ(normalize_noun(once), once) << w;
  }
  for (const auto& ex : worked_examples()) {
    for (const auto& tag : extract_tags_rule_based(ex.sentence)) EXPECT_EQ(normalize_noun(tag), tag);
  }
}

TEST(SubjectTagger, StrategiesForAblation) {
  const char* q = "A man pushes a woman in a wheel chair across the room.";
  EXPECT_TRUE(extract_tags(q, 3, TagStrategy::none).empty());
  EXPECT_EQ(extract_tags(q, 3, TagStrategy::subject_nouns), TagList{"man"});
  EXPECT_EQ(extract_tags(q, 3, TagStrategy::single_noun), TagList{"man"});
  const TagList all = extract_tags(q, 5, TagStrategy::all_nouns);
  EXPECT_EQ(all, (TagList{"man", "woman", "chair", "room"}));
  EXPECT_EQ(extract_tags("I, my dog and my cat are running.", 3, TagStrategy::single_noun),
            TagList{"person"});
  EXPECT_EQ(parse_tag_strategy("single_noun"), TagStrategy::single_noun);
  EXPECT_THROW(parse_tag_strategy("bogus"), ConfigError);
}

TEST(ParseLmReply, Examples) {
  EXPECT_EQ(parse_lm_reply("person, dog", 3), (TagList{"person", "dog"}));
  EXPECT_EQ(parse_lm_reply(" Man ,man,  ", 3), TagList{"man"});
  EXPECT_EQ(parse_lm_reply("a,b,c,d", 3), (TagList{"a", "b", "c"}));
  EXPECT_EQ(parse_lm_reply("", 3), TagList{"person"});
  EXPECT_EQ(parse_lm_reply(" , ,, ", 3), TagList{"person"});
  EXPECT_EQ(parse_lm_reply("'person', wheel  chair", 3), (TagList{"person", "wheel chair"}));
}

TEST(ParseLmReply, WhitespaceAndTrailingCommaInvariance) {
  std::mt19937 rng(11);
  const std::vector<std::string> words = {"person", "dog", "cat", "car", "ball", "credits", "man"};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(words.size()) - 1);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_int_distribution<int> pad(0, 3);
  for (int i = 0; i < 500; ++i) {
    std::string plain, noisy;
    for (int n = count(rng), k = 0; k < n; ++k) {
      const std::string& w = words[pick(rng)];
      plain += (k ? "," : "") + w;
      noisy += std::string(pad(rng), ' ') + w + std::string(pad(rng), '\t') + ",";
    }
    noisy += std::string(pad(rng), ',') + std::string(pad(rng), ' ');
    for (int k_max = 1; k_max <= 4; ++k_max) {
      EXPECT_EQ(parse_lm_reply(plain, k_max), parse_lm_reply(noisy, k_max)) << noisy;
      const auto tags = parse_lm_reply(noisy, k_max);
      EXPECT_GE(tags.size(), 1u);
      EXPECT_LE(static_cast<int>(tags.size()), k_max);
    }
  }
}

class ScriptedLm : public LanguageModel {
 public:
  explicit ScriptedLm(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(std::string_view system, std::string_view user) override {
    last_system = system;
    last_user = user;
    ++calls;
    return reply_;
  }
  std::string last_system, last_user;
  int calls = 0;

 private:
  std::string reply_;
};

class FailingLm : public LanguageModel {
 public:
  std::string complete(std::string_view, std::string_view) override {
    throw TransportError("connection refused");
  }
};

TEST(ExtractViaLm, SubstitutesBudgetAndParses) {
  ScriptedLm lm(" Person , Dog,cat, horse ");
  EXPECT_EQ(extract_tags_via_lm("  I, my dog and my cat run. ", 2, lm), (TagList{"person", "dog"}));
  EXPECT_NE(lm.last_system.find("Output at most 2 normalized subjects."), std::string::npos);
  EXPECT_EQ(lm.last_user, "I, my dog and my cat run.");
  EXPECT_THROW(extract_tags_via_lm(" ", 3, lm), InputError);
}

TEST(ExtractViaLm, CacheAndFallback) {
  auto lm = std::make_shared<ScriptedLm>("dog");
  CachingTagExtractor cached(lm, false);
  EXPECT_EQ(cached.extract("a dog runs", 3), TagList{"dog"});
  EXPECT_EQ(cached.extract("a dog runs", 3), TagList{"dog"});
  EXPECT_EQ(lm->calls, 1);

  CachingTagExtractor strict(std::make_shared<FailingLm>(), false);
  EXPECT_THROW(strict.extract("a man walks", 3), TransportError);
  CachingTagExtractor lenient(std::make_shared<FailingLm>(), true);
  EXPECT_EQ(lenient.extract("a man walks", 3), TagList{"man"});
}

TEST(SubjectTagger, OutputSizeWithinBudget) {
  std::mt19937 rng(3);
  const std::vector<std::string> vocab = {"the", "a",   "man",  "dogs", "and", ",",  "runs",
                                          "is",  "in",  "park", "some", "two", "of", "people",
                                          "holding", "rope", "it", "there", "quickly", "cat"};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vocab.size()) - 1);
  std::uniform_int_distribution<int> len(1, 12);
  for (int i = 0; i < 2000; ++i) {
    std::string q;
    for (int n = len(rng); n > 0; --n) q += vocab[pick(rng)] + " ";
    for (int k = 1; k <= 3; ++k) {
      const auto tags = extract_tags_rule_based(q, k);
      ASSERT_GE(tags.size(), 1u) << q;
      ASSERT_LE(static_cast<int>(tags.size()), k) << q;
      for (const auto& t : tags) ASSERT_FALSE(t.empty());
    }
  }
}

}  // namespace
}  // namespace vmark

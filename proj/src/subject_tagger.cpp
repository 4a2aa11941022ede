#include "vmark/subject_tagger.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

#include "vmark/errors.hpp"

namespace vmark {

namespace {

using WordSet = std::unordered_set<std::string_view>;

// Closed-class lexicon.

const WordSet kDeterminers = {"a", "an", "the", "this", "that", "these", "those"};

const WordSet kPossessives = {"my", "your", "his", "her", "its", "our", "their", "whose"};

const WordSet kQuantities = {
    "one",     "two",   "three",  "four",    "five",     "six",     "seven",  "eight",
    "nine",    "ten",   "eleven", "twelve",  "both",     "all",     "several", "many",
    "few",     "some",  "each",   "every",   "other",    "another", "multiple", "various",
    "numerous", "most", "more",   "any",     "no",       "first",   "second", "third",
    "last",    "same",  "single", "couple",  "pair",     "group",   "lot",    "lots",
    "bunch",   "crowd", "team",   "number",  "dozen",    "dozens",  "handful", "hundreds",
    "herd",    "flock", "pack",   "rest",    "half",     "none"};

// Quantity nouns that swallow a following "of": "a group of people".
const WordSet kQuantityHeads = {
    "one",  "two",    "three",  "four",   "five",  "some",  "all",    "both",    "each",
    "most", "many",   "several", "few",   "couple", "pair", "group",  "lot",     "lots",
    "bunch", "crowd", "team",   "number", "dozen", "dozens", "handful", "hundreds", "herd",
    "flock", "pack",  "rest",   "half",   "none",  "any",   "another", "kind",   "sort",
    "type"};

const WordSet kHumanPronouns = {"i",      "you",     "he",       "she",      "we",
                                "they",   "someone", "somebody", "some",     "everyone",
                                "everybody", "others", "anyone", "anybody", "nobody",
                                "me",     "him",     "us",       "them"};

// Pronouns that never name a detectable entity.
const WordSet kOtherPronouns = {"it",    "this", "that",  "these", "those", "there",
                                "what",  "which", "who",  "whom",  "here",  "itself",
                                "something", "anything", "everything", "nothing", "one"};

const WordSet kAuxiliaries = {"am",   "is",    "are",    "was",   "were",  "be",   "been",
                              "being", "has",  "have",   "had",   "do",    "does", "did",
                              "can",  "could", "will",   "would", "shall", "should", "may",
                              "might", "must"};

const WordSet kPrepositions = {
    "about",  "above",   "across", "after",   "against", "along",  "alongside", "among",
    "around", "at",      "before", "behind",  "below",   "beneath", "beside",   "besides",
    "between", "beyond", "by",     "down",    "during",  "for",    "from",     "in",
    "inside", "into",    "near",   "of",      "off",     "on",     "onto",     "out",
    "outside", "over",   "past",   "through", "throughout", "to",  "toward",   "towards",
    "under",  "underneath", "until", "up",    "upon",    "with",   "within",   "without",
    "like",   "via",     "next",   "atop",    "amid",    "per"};

const WordSet kConjunctions = {"and", "or", "but", "nor", "plus", "&"};

const WordSet kSubordinators = {"while", "as",   "when",   "whenever", "because", "if",
                                "although", "though", "once", "since", "whereas", "after",
                                "before", "until", "unless"};

const WordSet kAdverbs = {
    "then",   "also",   "still",    "now",      "again",   "together", "just",
    "finally", "quickly", "slowly", "suddenly", "not",     "never",    "always",
    "only",   "even",   "back",     "away",     "already", "soon",     "later",
    "afterwards", "meanwhile", "repeatedly", "continuously", "carefully", "briefly",
    "very",   "really", "too",      "both",     "all",     "each",     "simply",
    "gently", "immediately", "eventually", "once", "twice", "almost", "nearly",
    "currently", "constantly", "happily", "casually", "actively", "there", "here",
    "further", "instead", "so", "abruptly", "rapidly", "steadily"};

const WordSet kRelatives = {"who", "which", "that", "whose", "whom", "where"};

// Common English verbs in base form, used to spot finite verbs after a
// subject. Homographs with nouns are fine: a word straight after a
// determiner is always treated as noun-phrase content.
const WordSet kVerbs = {
    "add",     "adjust",  "answer",  "appear",   "apply",    "arrange",  "arrive",  "ask",
    "attach",  "attempt", "bake",    "balance",  "bang",     "bathe",    "be",      "beat",
    "become",  "begin",   "bend",    "bite",     "blow",     "board",    "bounce",  "bow",
    "break",   "bring",   "brush",   "build",    "burn",     "buy",      "call",    "carry",
    "catch",   "change",  "chase",   "check",    "cheer",    "chew",     "chop",    "clap",
    "clean",   "clear",   "climb",   "close",    "collect",  "comb",     "come",    "continue",
    "cook",    "cover",   "crawl",   "cross",    "cry",      "cut",      "dance",   "demonstrate",
    "describe", "dig",    "dip",     "discuss",  "dive",     "do",       "drag",    "draw",
    "dress",   "drink",   "drive",   "drop",     "dry",      "eat",      "empty",   "end",
    "enter",   "exercise", "exit",   "explain",  "fall",     "feed",     "feel",    "fight",
    "fill",    "find",    "finish",  "fix",      "flip",     "float",    "fly",     "fold",
    "follow",  "get",     "give",    "go",       "grab",     "grasp",    "greet",   "grow",
    "hand",    "hang",    "help",    "hit",      "hold",     "hop",      "hug",     "instruct",
    "iron",    "jog",     "join",    "jump",     "keep",     "kick",     "kiss",    "kneel",
    "knock",   "land",    "laugh",   "lay",      "lead",     "lean",     "learn",   "leave",
    "lie",     "lift",    "light",   "listen",   "load",     "lock",     "look",    "lose",
    "make",    "mix",     "move",    "open",     "paddle",   "paint",    "pass",    "pat",
    "perform", "pet",     "pick",    "place",    "play",     "point",    "polish",  "pose",
    "pour",    "practice", "prepare", "press",   "pull",     "punch",    "push",    "put",
    "raise",   "reach",   "read",    "relax",    "remove",   "repeat",   "rest",    "return",
    "ride",    "rinse",   "roll",    "rub",      "run",      "say",      "scrub",   "see",
    "serve",   "set",     "shake",   "shave",    "shoot",    "shout",    "show",    "shut",
    "sing",    "sit",     "skate",   "ski",      "sleep",    "slide",    "smile",   "smoke",
    "sneeze",  "snuggle", "speak",   "spin",     "splash",   "spray",    "spread",  "squat",
    "stand",   "start",   "stay",    "step",     "stir",     "stop",     "stretch", "strike",
    "surf",    "sweep",   "swim",    "swing",    "take",     "talk",     "tap",     "teach",
    "tell",    "throw",   "tidy",    "tie",      "touch",    "toss",     "try",     "turn",
    "type",    "undress", "unload",  "use",      "vacuum",   "wait",     "wake",    "walk",
    "wash",    "watch",   "wave",    "wear",     "whisper",  "wipe",     "work",    "wrap",
    "write",   "yell",    "demonstrate", "kneel", "lower",   "row",      "pan",     "zoom",
    "fade",    "sit",     "wander",  "hit",      "score",    "celebrate", "win",    "lose",
    "pedal",   "mow",     "plant",   "water",    "rake",     "shovel",   "swallow", "taste",
    "smell",   "hear",    "seem",    "appear",   "emerge",   "approach", "leap",    "march",
    "race",    "skip",    "slip",    "spill",    "struggle", "tumble",   "twirl",   "wobble",
    "wrestle", "crash",   "dribble", "kick",     "juggle",   "knit",     "sew",     "peel",
    "slice",   "grill",   "fry",     "boil",     "blend",    "whisk",    "measure", "saw",
    "sand",    "drill",   "hammer",  "screw",    "weld",     "glue",     "tape",    "fetch"};

const std::unordered_map<std::string_view, std::string_view> kIrregularVerbs = {
    {"took", "take"},    {"taken", "take"},    {"ran", "run"},       {"sat", "sit"},
    {"stood", "stand"},  {"ate", "eat"},       {"eaten", "eat"},     {"drank", "drink"},
    {"drunk", "drink"},  {"threw", "throw"},   {"thrown", "throw"},  {"held", "hold"},
    {"got", "get"},      {"gotten", "get"},    {"went", "go"},       {"gone", "go"},
    {"came", "come"},    {"began", "begin"},   {"begun", "begin"},   {"fell", "fall"},
    {"fallen", "fall"},  {"made", "make"},     {"gave", "give"},     {"given", "give"},
    {"saw", "see"},      {"seen", "see"},      {"left", "leave"},    {"told", "tell"},
    {"brought", "bring"}, {"caught", "catch"}, {"wore", "wear"},     {"worn", "wear"},
    {"rode", "ride"},    {"ridden", "ride"},   {"drove", "drive"},   {"driven", "drive"},
    {"swam", "swim"},    {"sang", "sing"},     {"spoke", "speak"},   {"wrote", "write"},
    {"written", "write"}, {"woke", "wake"},    {"found", "find"},    {"felt", "feel"},
    {"kept", "keep"},    {"slept", "sleep"},   {"swept", "sweep"},   {"spun", "spin"},
    {"hung", "hang"},    {"dug", "dig"},       {"bent", "bend"},     {"built", "build"},
    {"lit", "light"},    {"led", "lead"},      {"shook", "shake"},   {"blew", "blow"},
    {"grew", "grow"},    {"drew", "draw"},     {"flew", "fly"},      {"knelt", "kneel"},
    {"leapt", "leap"},   {"struck", "strike"}, {"won", "win"},       {"lost", "lose"},
    {"said", "say"},     {"taught", "teach"},  {"bought", "buy"},    {"broke", "break"},
    {"broken", "break"}, {"bit", "bite"},      {"bitten", "bite"},   {"shot", "shoot"},
    {"slid", "slide"},   {"became", "become"}};

// Plural-only or plural-form class names kept as-is.
const WordSet kInvariantPlurals = {"credits", "clothes", "pants",  "jeans",   "trousers",
                                   "shorts",  "scissors", "news",  "series",  "species",
                                   "sheep",   "deer",    "fish",   "aircraft", "goods",
                                   "tongs",   "pliers",  "binoculars", "headquarters",
                                   "police",  "cattle",  "leggings", "pajamas", "sunglasses"};

// Words ending in s that are singular and must not be stripped.
const WordSet kSingularS = {"gas",   "atlas", "canvas", "christmas", "lens",   "bus",
                            "plus",  "yes",   "this",   "his",       "its",    "was",
                            "has",   "does",  "goes",   "chess",     "tennis", "mattress",
                            "bias",  "iris",  "cactus", "octopus",   "walrus", "virus",
                            "chaos", "focus", "status", "campus",    "circus", "bonus",
                            "lotus", "hippopotamus", "rhinoceros", "texas", "alias",
                            "pancreas", "asbestos", "physics", "gymnastics", "athletics",
                            "aerobics", "mathematics", "politics"};

const std::unordered_map<std::string_view, std::string_view> kIrregularPlurals = {
    {"men", "man"},     {"women", "woman"}, {"people", "person"}, {"persons", "person"},
    {"children", "child"}, {"feet", "foot"}, {"teeth", "tooth"},   {"mice", "mouse"},
    {"geese", "goose"}, {"oxen", "ox"},     {"knives", "knife"},  {"wives", "wife"},
    {"leaves", "leaf"}, {"wolves", "wolf"}, {"shelves", "shelf"}, {"halves", "half"},
    {"loaves", "loaf"}, {"lives", "life"},  {"calves", "calf"},   {"thieves", "thief"},
    {"scarves", "scarf"}, {"dice", "die"},  {"kids", "kid"},      {"folks", "folk"},
    {"potatoes", "potato"}, {"tomatoes", "tomato"}, {"heroes", "hero"}, {"echoes", "echo"},
    {"movies", "movie"}, {"cookies", "cookie"}, {"zombies", "zombie"}, {"selfies", "selfie"},
    {"brownies", "brownie"}, {"goalies", "goalie"}, {"rookies", "rookie"}, {"hippies", "hippie"},
    {"cacti", "cactus"}, {"fungi", "fungus"}};

const WordSet kMenExceptions = {"specimen", "omen",  "amen",  "abdomen", "stamen",
                                "semen",    "hymen", "regimen", "specimens", "omens",
                                "abdomens", "stamens", "regimens"};

const WordSet kHumanNouns = {
    "person",  "people", "man",     "men",     "woman",   "women",    "boy",    "boys",
    "girl",    "girls",  "child",   "children", "kid",    "kids",     "baby",   "babies",
    "guy",     "guys",   "lady",    "ladies",  "player",  "players",  "athlete", "athletes",
    "crowd",   "audience", "gentleman", "gentlemen", "teenager", "teenagers", "adult",
    "adults",  "toddler", "toddlers", "student", "students", "worker", "workers", "family",
    "couple",  "friend", "friends", "mother",  "father",  "dad",      "mom",    "son",
    "daughter", "brother", "sister", "husband", "wife",   "chef",     "instructor", "coach",
    "host",    "reporter", "dancer", "dancers", "singer", "rider",    "riders", "skier",
    "surfer",  "human",  "humans",  "individual", "individuals"};

bool contains(const WordSet& set, std::string_view w) { return set.count(w) > 0; }

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool is_consonant(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) && std::string_view("aeiou").find(c) == std::string_view::npos;
}

enum class VerbForm { none, base, third, past, ing };

// Classifies `w` as an inflection of a known verb.
VerbForm verb_form(std::string_view w) {
  if (auto it = kIrregularVerbs.find(w); it != kIrregularVerbs.end()) return VerbForm::past;
  if (contains(kVerbs, w)) return VerbForm::base;
  auto known = [](std::string_view stem) { return contains(kVerbs, stem); };
  auto undouble = [&](std::string_view stem) {
    return stem.size() >= 3 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
           is_consonant(stem.back()) && known(stem.substr(0, stem.size() - 1));
  };
  if (ends_with(w, "ing") && w.size() > 4) {
    std::string_view stem = w.substr(0, w.size() - 3);
    if (known(stem) || known(std::string(stem) + "e") || undouble(stem)) return VerbForm::ing;
    if (ends_with(stem, "y") && known(std::string(stem.substr(0, stem.size() - 1)) + "ie")) {
      return VerbForm::ing;
    }
    return VerbForm::none;
  }
  if (ends_with(w, "ied") && known(std::string(w.substr(0, w.size() - 3)) + "y")) return VerbForm::past;
  if (ends_with(w, "ed") && w.size() > 3) {
    std::string_view stem = w.substr(0, w.size() - 2);
    if (known(stem) || known(w.substr(0, w.size() - 1)) || undouble(stem)) return VerbForm::past;
    return VerbForm::none;
  }
  if (ends_with(w, "ies") && known(std::string(w.substr(0, w.size() - 3)) + "y")) return VerbForm::third;
  if (ends_with(w, "es") && known(w.substr(0, w.size() - 2))) return VerbForm::third;
  if (ends_with(w, "s") && known(w.substr(0, w.size() - 1))) return VerbForm::third;
  return VerbForm::none;
}

enum class Kind {
  det,
  poss,
  quant,
  human_pron,
  other_pron,
  aux,
  verb,        // finite verb
  nonfinite,   // participle, gerund or infinitive
  prep,
  conj,
  comma,
  subord,
  adverb,
  relative,
  content,
};

struct Token {
  std::string text;
  Kind kind = Kind::content;
};

bool is_np_head_kind(Kind k) {
  return k == Kind::content || k == Kind::human_pron || k == Kind::other_pron;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Splits into lowercase word tokens and comma tokens. Other punctuation ends
// the word it touches. Contractions are expanded; "x's" after a noun becomes
// a possessive marker that drops the owner.
std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::string w = lowercase(word);
    word.clear();
    // strip stray hyphens/apostrophes at the ends
    while (!w.empty() && (w.front() == '\'' || w.front() == '-')) w.erase(w.begin());
    while (!w.empty() && (w.back() == '\'' || w.back() == '-')) w.pop_back();
    if (w.empty()) return;
    if (w == "can't" || w == "cannot") {
      out.push_back({"can"});
      return;
    }
    if (w == "won't") {
      out.push_back({"will"});
      return;
    }
    if (ends_with(w, "n't")) {
      out.push_back({w.substr(0, w.size() - 3)});
      return;
    }
    static const std::pair<std::string_view, std::string_view> kClitics[] = {
        {"'re", "are"}, {"'m", "am"}, {"'ll", "will"}, {"'ve", "have"}, {"'d", "would"}};
    for (auto [clitic, full] : kClitics) {
      if (ends_with(w, clitic) && w.size() > clitic.size()) {
        out.push_back({w.substr(0, w.size() - clitic.size())});
        out.push_back({std::string(full)});
        return;
      }
    }
    if (ends_with(w, "'s") && w.size() > 2) {
      std::string base = w.substr(0, w.size() - 2);
      static const WordSet kIsHosts = {"he",   "she",  "it",    "that", "there", "who",
                                       "what", "where", "here", "someone", "everyone",
                                       "somebody", "everybody", "one"};
      if (contains(kIsHosts, base)) {
        out.push_back({base});
        out.push_back({"is"});
      } else {
        out.push_back({base, Kind::poss});
      }
      return;
    }
    if (w.find('\'') != std::string::npos) w.erase(std::remove(w.begin(), w.end(), '\''), w.end());
    out.push_back({w});
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'' || ch == '-') {
      word.push_back(ch);
    } else if (ch == ',') {
      flush();
      out.push_back({",", Kind::comma});
    } else if (ch == ';' || ch == ':') {
      flush();
      out.push_back({";", Kind::subord});
    } else {
      flush();
    }
  }
  flush();
  return out;
}

// Lexical pass, then a contextual pass that separates finite verbs from
// nominal uses of verb-like words.
std::vector<Token> classify(std::string_view query) {
  std::vector<Token> tokens = tokenize(query);

  // Drop quantity heads that take an "of" complement ("a group of people").
  std::vector<Token> merged;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i + 1 < tokens.size() && tokens[i + 1].text == "of" && tokens[i].kind != Kind::poss &&
        contains(kQuantityHeads, tokens[i].text)) {
      while (!merged.empty() && (contains(kDeterminers, merged.back().text) ||
                                 contains(kQuantities, merged.back().text))) {
        merged.pop_back();
      }
      ++i;  // skip "of"
      continue;
    }
    merged.push_back(std::move(tokens[i]));
  }
  tokens = std::move(merged);

  for (auto& t : tokens) {
    if (t.kind == Kind::comma || t.kind == Kind::poss || t.kind == Kind::subord) continue;
    const std::string_view w = t.text;
    if (w == "some") t.kind = Kind::quant;
    else if (contains(kDeterminers, w)) t.kind = Kind::det;
    else if (contains(kPossessives, w)) t.kind = Kind::poss;
    else if (contains(kAuxiliaries, w)) t.kind = Kind::aux;
    else if (contains(kConjunctions, w)) t.kind = Kind::conj;
    else if (contains(kHumanPronouns, w)) t.kind = Kind::human_pron;
    else if (contains(kQuantities, w)) t.kind = Kind::quant;
    else if (contains(kSubordinators, w)) t.kind = Kind::subord;
    else if (contains(kPrepositions, w)) t.kind = Kind::prep;
    else if (contains(kRelatives, w)) t.kind = Kind::relative;
    else if (contains(kAdverbs, w)) t.kind = Kind::adverb;
    else if (contains(kOtherPronouns, w)) t.kind = Kind::other_pron;
    else t.kind = Kind::content;
  }

  // Context: "that"/"which"/"who" after a head is a relative pronoun, at
  // phrase start a determiner/pronoun. "some"/"all"/"both" alone act as
  // pronouns or adverbs depending on neighbours.
  for (size_t i = 0; i < tokens.size(); ++i) {
    Token& t = tokens[i];
    const Kind prev = i > 0 ? tokens[i - 1].kind : Kind::comma;
    const bool prev_is_head = is_np_head_kind(prev);
    if ((t.text == "that" || t.text == "who" || t.text == "which") && prev_is_head) {
      t.kind = Kind::relative;
    }
    if ((t.text == "both" || t.text == "all" || t.text == "each") && prev_is_head) {
      t.kind = Kind::adverb;
    }
    if (t.text == "there" && i == 0) t.kind = Kind::other_pron;
  }

  // Verb detection. Adverbs are transparent when looking back.
  for (size_t i = 0; i < tokens.size(); ++i) {
    Token& t = tokens[i];
    if (t.kind != Kind::content) continue;
    size_t j = i;
    Kind prev = Kind::comma;
    while (j > 0) {
      --j;
      if (tokens[j].kind == Kind::adverb) continue;
      prev = tokens[j].kind;
      break;
    }
    const bool after_head = is_np_head_kind(prev);
    const bool attributive = prev == Kind::det || prev == Kind::quant || prev == Kind::poss;
    if (attributive) continue;
    const VerbForm form = verb_form(t.text);
    const bool ing_like = ends_with(t.text, "ing") && t.text.size() > 4;
    if (prev == Kind::aux) {
      if (form != VerbForm::none || ing_like || ends_with(t.text, "ed")) t.kind = Kind::nonfinite;
      continue;
    }
    if (i > 0 && tokens[i - 1].text == "to" && form != VerbForm::none) {
      t.kind = Kind::nonfinite;
      continue;
    }
    if (!after_head) continue;
    if (form == VerbForm::ing || ing_like) {
      t.kind = Kind::nonfinite;
    } else if (form != VerbForm::none) {
      t.kind = Kind::verb;
    } else if (ends_with(t.text, "ed") && t.text.size() > 4) {
      t.kind = Kind::nonfinite;
    }
  }
  return tokens;
}

// Noun phrase starting at `begin`: optional determiners/possessives/
// quantities, then content words; ends at the first token that cannot
// continue it. Returns the head (last content word or a lone pronoun).
struct Phrase {
  std::string head;
  Kind head_kind = Kind::content;
  size_t end = 0;
  bool found = false;
};

Phrase noun_phrase_at(const std::vector<Token>& tokens, size_t begin, size_t end) {
  Phrase p;
  size_t i = begin;
  bool seen_content = false;
  bool seen_modifier = false;
  for (; i < end; ++i) {
    const Token& t = tokens[i];
    if (!seen_content && (t.kind == Kind::det || t.kind == Kind::poss || t.kind == Kind::quant)) {
      seen_modifier = true;
      // a possessive noun ("man's") is a determiner for the next head
      continue;
    }
    if (t.kind == Kind::content) {
      seen_content = true;
      p.head = t.text;
      p.head_kind = Kind::content;
      p.found = true;
      continue;
    }
    if (!seen_content && !seen_modifier &&
        (t.kind == Kind::human_pron || t.kind == Kind::other_pron)) {
      p.head = t.text;
      p.head_kind = t.kind;
      p.found = true;
      ++i;
      break;
    }
    break;
  }
  // Lone vague quantity word acting as a pronoun: "some are ..."
  if (!p.found && i == begin + 1 && tokens[begin].text == "some") {
    p.head = "some";
    p.head_kind = Kind::human_pron;
    p.found = true;
  }
  p.end = i;
  return p;
}

bool is_boundary(Kind k) { return k == Kind::conj || k == Kind::comma; }

// Subject region: tokens of the main clause before its first finite verb.
// A leading subordinate clause is skipped up to the first comma.
std::vector<std::string> subject_heads(const std::vector<Token>& tokens) {
  size_t start = 0;
  if (!tokens.empty() && tokens[0].kind == Kind::subord) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].kind == Kind::comma) {
        start = i + 1;
        break;
      }
    }
  }
  size_t verb_at = tokens.size();
  bool seen_head = false;
  for (size_t i = start; i < tokens.size(); ++i) {
    const Kind k = tokens[i].kind;
    if (is_np_head_kind(k) || (k == Kind::quant && tokens[i].text == "some")) seen_head = true;
    if (seen_head && (k == Kind::aux || k == Kind::verb)) {
      verb_at = i;
      break;
    }
  }

  std::vector<std::string> heads;
  if (verb_at == tokens.size()) {
    // No finite verb: the first noun phrase of the sentence.
    for (size_t i = start; i < tokens.size(); ++i) {
      if (is_boundary(tokens[i].kind)) continue;
      Phrase p = noun_phrase_at(tokens, i, tokens.size());
      if (p.found) heads.push_back(p.head);
      break;
    }
    return heads;
  }

  // Split the region on coordinators and take the leading noun phrase of
  // each piece; pieces opening with a preposition are locations/goals.
  size_t piece = start;
  for (size_t i = start; i <= verb_at; ++i) {
    if (i == verb_at || is_boundary(tokens[i].kind)) {
      if (piece < i) {
        const Kind first = tokens[piece].kind;
        if (first != Kind::prep && first != Kind::subord && first != Kind::relative) {
          Phrase p = noun_phrase_at(tokens, piece, i);
          if (p.found) heads.push_back(p.head);
        }
      }
      piece = i + 1;
    }
  }
  return heads;
}

std::vector<std::string> all_noun_heads(const std::vector<Token>& tokens) {
  std::vector<std::string> heads;
  size_t i = 0;
  while (i < tokens.size()) {
    const Kind k = tokens[i].kind;
    if (k == Kind::det || k == Kind::poss || k == Kind::quant || k == Kind::content ||
        k == Kind::human_pron) {
      Phrase p = noun_phrase_at(tokens, i, tokens.size());
      if (p.found) heads.push_back(p.head);
      i = std::max(p.end, i + 1);
    } else {
      ++i;
    }
  }
  return heads;
}

// Norm + SC on a head: pronoun mapping, singularization, and removal of
// heads that name nothing visible.
std::optional<std::string> normalize_head(std::string_view head) {
  if (contains(kOtherPronouns, head)) return std::nullopt;
  std::string n = normalize_noun(head);
  if (n.empty()) return std::nullopt;
  if (contains(kDeterminers, n) || contains(kPrepositions, n) || contains(kAuxiliaries, n)) {
    return std::nullopt;
  }
  return n;
}

void push_unique(TagList& tags, std::string tag, int k_max) {
  if (static_cast<int>(tags.size()) >= k_max) return;
  if (std::find(tags.begin(), tags.end(), tag) != tags.end()) return;
  tags.push_back(std::move(tag));
}

bool people_implied(const std::vector<Token>& tokens) {
  return std::any_of(tokens.begin(), tokens.end(), [](const Token& t) {
    return contains(kHumanPronouns, t.text) || contains(kHumanNouns, t.text);
  });
}

std::string fallback_tag(const std::vector<Token>& tokens) {
  if (people_implied(tokens)) return "person";
  for (const Token& t : tokens) {
    if (t.kind != Kind::content) continue;
    if (verb_form(t.text) != VerbForm::none) continue;
    if (ends_with(t.text, "ing") || ends_with(t.text, "ly")) continue;
    if (std::any_of(t.text.begin(), t.text.end(), [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    if (auto n = normalize_head(t.text)) return *n;
  }
  return "person";
}

void require_query(std::string_view query, int k_max) {
  if (trim(query).empty()) throw InputError("query is empty");
  if (k_max < 1) throw InputError("tag budget must be >= 1");
}

}  // namespace

TagStrategy parse_tag_strategy(std::string_view name) {
  if (name == "none" || name == "no_nouns") return TagStrategy::none;
  if (name == "all" || name == "all_nouns") return TagStrategy::all_nouns;
  if (name == "single" || name == "single_noun") return TagStrategy::single_noun;
  if (name == "subject" || name == "subject_nouns") return TagStrategy::subject_nouns;
  throw ConfigError("unknown tag strategy: " + std::string(name));
}

std::string_view to_string(TagStrategy s) {
  switch (s) {
    case TagStrategy::none: return "no_nouns";
    case TagStrategy::all_nouns: return "all_nouns";
    case TagStrategy::single_noun: return "single_noun";
    case TagStrategy::subject_nouns: return "subject_nouns";
  }
  return "subject_nouns";
}

bool is_human_pronoun(std::string_view word) {
  return contains(kHumanPronouns, lowercase(word));
}

std::string singularize(std::string_view word) {
  std::string w(word);
  if (w.size() < 3 || w.back() != 's') {
    if (auto it = kIrregularPlurals.find(w); it != kIrregularPlurals.end()) return std::string(it->second);
    if (ends_with(w, "men") && w.size() > 3 && !contains(kMenExceptions, w)) {
      return w.substr(0, w.size() - 3) + "man";
    }
    return w;
  }
  if (contains(kInvariantPlurals, w) || contains(kSingularS, w)) return w;
  if (auto it = kIrregularPlurals.find(w); it != kIrregularPlurals.end()) return std::string(it->second);
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  if (ends_with(w, "ies")) {
    if (w.size() <= 4) return w.substr(0, w.size() - 1);
    return w.substr(0, w.size() - 3) + "y";
  }
  if (ends_with(w, "es") && w.size() > 3) {
    std::string stem = w.substr(0, w.size() - 2);
    if (ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return stem;
    }
    if (stem.back() == 's' &&
        (ends_with(stem, "ss") || ends_with(stem, "us") || ends_with(stem, "is") ||
         contains(kSingularS, stem))) {
      return stem;
    }
  }
  return w.substr(0, w.size() - 1);
}

std::string normalize_noun(std::string_view word) {
  std::string w;
  for (char ch : word) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) w.push_back(static_cast<char>(std::tolower(c)));
    else if (ch == ' ' && !w.empty() && w.back() != ' ') w.push_back(' ');
  }
  while (!w.empty() && w.back() == ' ') w.pop_back();
  if (w.empty()) return w;
  if (contains(kHumanPronouns, w)) return "person";
  // multi-word: normalize the last word only
  if (auto sp = w.rfind(' '); sp != std::string::npos) {
    return w.substr(0, sp + 1) + singularize(std::string_view(w).substr(sp + 1));
  }
  std::string singular = singularize(w);
  if (contains(kHumanPronouns, singular)) return "person";
  return singular;
}

TagList extract_tags(std::string_view query, int k_max, TagStrategy strategy) {
  require_query(query, k_max);
  if (strategy == TagStrategy::none) return {};
  const std::vector<Token> tokens = classify(query);
  std::vector<std::string> heads =
      strategy == TagStrategy::all_nouns ? all_noun_heads(tokens) : subject_heads(tokens);

  TagList tags;
  for (const std::string& h : heads) {
    if (auto n = normalize_head(h)) push_unique(tags, *n, k_max);
  }
  if (tags.empty()) tags.push_back(fallback_tag(tokens));
  if (strategy == TagStrategy::single_noun) tags.resize(1);
  return tags;
}

TagList extract_tags_rule_based(std::string_view query, int k_max) {
  return extract_tags(query, k_max, TagStrategy::subject_nouns);
}

TagList parse_lm_reply(std::string_view raw, int k_max) {
  if (k_max < 1) throw InputError("tag budget must be >= 1");
  TagList tags;
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t comma = raw.find(',', pos);
    if (comma == std::string_view::npos) comma = raw.size();
    std::string piece;
    for (char ch : raw.substr(pos, comma - pos)) {
      unsigned char c = static_cast<unsigned char>(ch);
      if (std::isalpha(c)) piece.push_back(static_cast<char>(std::tolower(c)));
      else if (std::isspace(c)) piece.push_back(' ');
    }
    std::string cleaned;
    for (char c : trim(piece)) {
      if (c == ' ' && !cleaned.empty() && cleaned.back() == ' ') continue;
      cleaned.push_back(c);
    }
    if (!cleaned.empty()) push_unique(tags, std::move(cleaned), k_max);
    pos = comma + 1;
  }
  if (tags.empty()) tags.push_back("person");
  return tags;
}

std::string extraction_system_prompt(int k_max) {
  std::string prompt = R"(You are an NLP tool for extracting normalized visual subjects for open-vocabulary object detection.
The input is an English sentence describing an action in a video.
Your job is to return ONLY the grammatical subject(s), normalized into simple noun classes.

Important:
- The input is always in English. Do NOT translate anything. Do NOT output any Chinese.
- Only output the final result as a comma-separated list in lowercase.
- Do NOT output any explanations, steps, or extra words.

Subject identification (Stage 1):
- Find who or what performs the main action in the sentence (the grammatical subject).
- If there are several subjects joined by 'and' or commas (e.g. 'I, my dog and my cat'), treat each as a separate subject.
- If the subject is a vague pronoun referring to people (e.g. 'some', 'someone', 'everyone', 'others'), treat it as a human subject.
- Ignore nouns that are NOT subjects (objects, tools, locations, goals, etc.).

Normalization rules (Stage 2):
- Keep only entities that could be visually detected in a frame (people, animals, objects, visible on-screen text like credits).
- Remove determiners and possessives: 'the man', 'a woman', 'my dog' -> 'man', 'woman', 'dog'.
- Remove quantity words: 'two men', 'three cats', 'a group of people' -> 'man', 'cat', 'person'.
- For human pronouns ('I', 'you', 'he', 'she', 'we', 'they') and vague human pronouns ('some', 'someone', 'everyone', 'others', 'anyone'), normalize to 'person'.
- Singularize plurals: 'men' -> 'man', 'cats' -> 'cat', 'people' -> 'person'.
- Drop descriptive modifiers and keep the core class noun: 'man wearing athletic gear' -> 'man'.
- If several subjects normalize to the same word, keep only one and preserve the order.

Self-check and fallback (Stage 3):
- Silently check each candidate: if it is being acted ON (object), used as a tool, or only appears inside a prepositional phrase, REMOVE it.
- This is video data: there is always some visible entity. You MUST always output at least one subject.
- If no clear subject remains after self-check, choose the most likely main visible entity:
  * First, prefer 'person' if people are implied.
  * Otherwise, choose the first concrete noun in the sentence (e.g. 'ball', 'car', 'credits').

Output:
- Output at most {K_MAX} normalized subjects.
- Output format: a comma-separated list, lowercase, e.g. 'person, dog'.
- No explanations, no JSON, no extra tokens.

Examples:
Sentence: "Two men both dressed in athletic gear are standing and talking in an indoor weight lifting gym filled with other equipment." -> man
Sentence: "One man is holding onto a rope attached to a machine, and the other man instructs him to bend down on his left knee while still holding onto the rope and showing the man how to have proper form." -> man
Sentence: "The man then instructs the man holding the rope to pull the row down a few times and he's talking the whole time." -> man
Sentence: "I, my dog and my cat are running together in the park." -> person, dog, cat
Sentence: "The credits of the clip are shown." -> credits
Sentence: "... and some are in wheel chairs." -> person
Sentence: "A man is holding a rope in a gym." -> man  (do NOT output 'rope' or 'gym')
Sentence: "A man pushes a woman in a wheel chair across the room." -> man  (do NOT output 'woman' or 'wheel chair' or 'room')
If everything is unclear, still choose the most likely main entity and output one subject.)";
  const std::string key = "{K_MAX}";
  prompt.replace(prompt.find(key), key.size(), std::to_string(k_max));
  return prompt;
}

TagList extract_tags_via_lm(std::string_view query, int k_max, LanguageModel& lm) {
  require_query(query, k_max);
  const std::string reply = lm.complete(extraction_system_prompt(k_max), trim(query));
  return parse_lm_reply(reply, k_max);
}

CachingTagExtractor::CachingTagExtractor(std::shared_ptr<LanguageModel> lm, bool fallback_to_rules)
    : lm_(std::move(lm)), fallback_(fallback_to_rules) {}

TagList CachingTagExtractor::extract(std::string_view query, int k_max) {
  const std::string key = std::to_string(k_max) + '\x1f' + std::string(query);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  TagList tags;
  try {
    tags = extract_tags_via_lm(query, k_max, *lm_);
  } catch (const TransportError&) {
    if (!fallback_) throw;
    tags = extract_tags_rule_based(query, k_max);
  }
  std::lock_guard lock(mu_);
  cache_.emplace(key, tags);
  return tags;
}

}  // namespace vmark

#include <algorithm>
#include <set>

#include "wmforge/error.hpp"
#include "wmforge/steg.hpp"

namespace wmforge {

namespace {

// base, past, participle, ing; empty fields follow the regular spelling rules.
struct VerbSpec {
  const char* base;
  const char* past;
  const char* participle;
  const char* ing;
  bool transitive;
};

constexpr VerbSpec kVerbs[] = {
    // irregular
    {"beat", "beat", "beaten", "", true},
    {"bend", "bent", "bent", "", true},
    {"bind", "bound", "bound", "", true},
    {"bite", "bit", "bitten", "", true},
    {"blow", "blew", "blown", "", true},
    {"break", "broke", "broken", "", true},
    {"bring", "brought", "brought", "", true},
    {"build", "built", "built", "", true},
    {"buy", "bought", "bought", "", true},
    {"catch", "caught", "caught", "", true},
    {"choose", "chose", "chosen", "", true},
    {"cut", "cut", "cut", "cutting", true},
    {"dig", "dug", "dug", "digging", true},
    {"draw", "drew", "drawn", "", true},
    {"drink", "drank", "drunk", "", true},
    {"drive", "drove", "driven", "", true},
    {"eat", "ate", "eaten", "", true},
    {"feed", "fed", "fed", "", true},
    {"fight", "fought", "fought", "", true},
    {"find", "found", "found", "", true},
    {"forget", "forgot", "forgotten", "forgetting", true},
    {"forgive", "forgave", "forgiven", "", true},
    {"freeze", "froze", "frozen", "", true},
    {"give", "gave", "given", "", true},
    {"grow", "grew", "grown", "", true},
    {"hang", "hung", "hung", "", true},
    {"hear", "heard", "heard", "", true},
    {"hide", "hid", "hidden", "", true},
    {"hit", "hit", "hit", "hitting", true},
    {"hold", "held", "held", "", true},
    {"hurt", "hurt", "hurt", "", true},
    {"keep", "kept", "kept", "", true},
    {"know", "knew", "known", "", true},
    {"lead", "led", "led", "", true},
    {"lend", "lent", "lent", "", true},
    {"lose", "lost", "lost", "", true},
    {"make", "made", "made", "", true},
    {"meet", "met", "met", "", true},
    {"pay", "paid", "paid", "", true},
    {"put", "put", "put", "putting", true},
    {"read", "read", "read", "", true},
    {"ride", "rode", "ridden", "", true},
    {"ring", "rang", "rung", "", true},
    {"see", "saw", "seen", "", true},
    {"seek", "sought", "sought", "", true},
    {"sell", "sold", "sold", "", true},
    {"send", "sent", "sent", "", true},
    {"shake", "shook", "shaken", "", true},
    {"shoot", "shot", "shot", "", true},
    {"show", "showed", "shown", "", true},
    {"shut", "shut", "shut", "shutting", true},
    {"sing", "sang", "sung", "", true},
    {"spend", "spent", "spent", "", true},
    {"spread", "spread", "spread", "", true},
    {"steal", "stole", "stolen", "", true},
    {"strike", "struck", "struck", "", true},
    {"sweep", "swept", "swept", "", true},
    {"swing", "swung", "swung", "", true},
    {"take", "took", "taken", "", true},
    {"teach", "taught", "taught", "", true},
    {"tear", "tore", "torn", "", true},
    {"tell", "told", "told", "", true},
    {"throw", "threw", "thrown", "", true},
    {"understand", "understood", "understood", "", true},
    {"wake", "woke", "woken", "", true},
    {"wear", "wore", "worn", "", true},
    {"win", "won", "won", "winning", true},
    {"write", "wrote", "written", "", true},
    {"withdraw", "withdrew", "withdrawn", "", true},
    {"overtake", "overtook", "overtaken", "", true},
    // regular with consonant doubling
    {"admit", "admitted", "admitted", "admitting", true},
    {"chop", "chopped", "chopped", "chopping", true},
    {"control", "controlled", "controlled", "controlling", true},
    {"drag", "dragged", "dragged", "dragging", true},
    {"drop", "dropped", "dropped", "dropping", true},
    {"grab", "grabbed", "grabbed", "grabbing", true},
    {"hug", "hugged", "hugged", "hugging", true},
    {"mop", "mopped", "mopped", "mopping", true},
    {"pat", "patted", "patted", "patting", true},
    {"plan", "planned", "planned", "planning", true},
    {"rob", "robbed", "robbed", "robbing", true},
    {"rub", "rubbed", "rubbed", "rubbing", true},
    {"scrub", "scrubbed", "scrubbed", "scrubbing", true},
    {"ship", "shipped", "shipped", "shipping", true},
    {"stop", "stopped", "stopped", "stopping", true},
    {"tap", "tapped", "tapped", "tapping", true},
    {"trap", "trapped", "trapped", "trapping", true},
    {"wrap", "wrapped", "wrapped", "wrapping", true},
    // regular
    {"accept", "", "", "", true},
    {"admire", "", "", "", true},
    {"adopt", "", "", "", true},
    {"answer", "", "", "", true},
    {"approve", "", "", "", true},
    {"arrange", "", "", "", true},
    {"attack", "", "", "", true},
    {"avoid", "", "", "", true},
    {"bake", "", "", "", true},
    {"bless", "", "", "", true},
    {"boil", "", "", "", true},
    {"borrow", "", "", "", true},
    {"brush", "", "", "", true},
    {"call", "", "", "", true},
    {"carry", "", "", "", true},
    {"chase", "", "", "", true},
    {"check", "", "", "", true},
    {"clean", "", "", "", true},
    {"close", "", "", "", true},
    {"collect", "", "", "", true},
    {"comfort", "", "", "", true},
    {"compare", "", "", "", true},
    {"cook", "", "", "", true},
    {"count", "", "", "", true},
    {"crush", "", "", "", true},
    {"deliver", "", "", "", true},
    {"describe", "", "", "", true},
    {"destroy", "", "", "", true},
    {"discover", "", "", "", true},
    {"earn", "", "", "", true},
    {"enjoy", "", "", "", true},
    {"examine", "", "", "", true},
    {"explain", "", "", "", true},
    {"fetch", "", "", "", true},
    {"fill", "", "", "", true},
    {"finish", "", "", "", true},
    {"fold", "", "", "", true},
    {"follow", "", "", "", true},
    {"greet", "", "", "", true},
    {"handle", "", "", "", true},
    {"harm", "", "", "", true},
    {"help", "", "", "", true},
    {"hunt", "", "", "", true},
    {"identify", "", "", "", true},
    {"ignore", "", "", "", true},
    {"improve", "", "", "", true},
    {"inform", "", "", "", true},
    {"inspect", "", "", "", true},
    {"invite", "", "", "", true},
    {"join", "", "", "", true},
    {"kick", "", "", "", true},
    {"kiss", "", "", "", true},
    {"lift", "", "", "", true},
    {"like", "", "", "", true},
    {"love", "", "", "", true},
    {"manage", "", "", "", true},
    {"measure", "", "", "", true},
    {"mend", "", "", "", true},
    {"miss", "", "", "", true},
    {"move", "", "", "", true},
    {"notice", "", "", "", true},
    {"obey", "", "", "", true},
    {"open", "", "", "", true},
    {"own", "", "", "", true},
    {"pick", "", "", "", true},
    {"please", "", "", "", true},
    {"polish", "", "", "", true},
    {"pour", "", "", "", true},
    {"praise", "", "", "", true},
    {"prepare", "", "", "", true},
    {"protect", "", "", "", true},
    {"pull", "", "", "", true},
    {"punish", "", "", "", true},
    {"push", "", "", "", true},
    {"reach", "", "", "", true},
    {"receive", "", "", "", true},
    {"remember", "", "", "", true},
    {"remove", "", "", "", true},
    {"repair", "", "", "", true},
    {"replace", "", "", "", true},
    {"rescue", "", "", "", true},
    {"return", "", "", "", true},
    {"save", "", "", "", true},
    {"scare", "", "", "", true},
    {"search", "", "", "", true},
    {"serve", "", "", "", true},
    {"solve", "", "", "", true},
    {"squeeze", "", "", "", true},
    {"study", "", "", "", true},
    {"surprise", "", "", "", true},
    {"tame", "", "", "", true},
    {"thank", "", "", "", true},
    {"touch", "", "", "", true},
    {"tow", "", "", "", true},
    {"trust", "", "", "", true},
    {"use", "", "", "", true},
    {"visit", "", "", "", true},
    {"want", "", "", "", true},
    {"warn", "", "", "", true},
    {"wash", "", "", "", true},
    {"weigh", "", "", "", true},
    {"welcome", "", "", "", true},
    {"wipe", "", "", "", true},
    {"worry", "", "", "", true},
    {"chase", "", "", "", true},
    {"greet", "", "", "", true},
    {"follow", "", "", "", true},
    {"decorate", "", "", "", true},
    {"feature", "", "", "", true},
    {"review", "", "", "", true},
    {"publish", "", "", "", true},
    {"announce", "", "", "", true},
    {"launch", "", "", "", true},
    {"confirm", "", "", "", true},
    {"reject", "", "", "", true},
    {"support", "", "", "", true},
    {"defend", "", "", "", true},
    {"select", "", "", "", true},
    {"capture", "", "", "", true},
    {"install", "", "", "", true},
    {"update", "", "", "", true},
    {"organize", "", "", "", true},
    // intransitive
    {"fall", "fell", "fallen", "", false},
    {"run", "ran", "run", "running", false},
    {"sit", "sat", "sat", "sitting", false},
    {"sleep", "slept", "slept", "", false},
    {"swim", "swam", "swum", "swimming", false},
    {"arrive", "", "", "", false},
    {"bark", "", "", "", false},
    {"cry", "", "", "", false},
    {"dance", "", "", "", false},
    {"jump", "", "", "", false},
    {"laugh", "", "", "", false},
    {"rest", "", "", "", false},
    {"smile", "", "", "", false},
    {"talk", "", "", "", false},
    {"wait", "", "", "", false},
    {"walk", "", "", "", false},
    {"work", "", "", "", false},
    {"yawn", "", "", "", false},
    {"sneeze", "", "", "", false},
    {"shout", "", "", "", false},
};

constexpr const char* kNouns[] = {
    "dog",     "cat",     "boy",     "girl",    "teacher", "student", "farmer",  "doctor",  "nurse",
    "driver",  "reporter", "chef",   "baker",   "pilot",   "artist",  "player",  "coach",   "soldier",
    "king",    "queen",   "horse",   "bird",    "fox",     "lion",    "tiger",   "ball",    "book",
    "letter",  "car",     "bus",     "boat",    "tree",    "apple",   "cake",    "house",   "window",
    "door",    "box",     "bag",     "key",     "cup",     "bottle",  "table",   "chair",   "song",
    "picture", "map",     "story",   "fence",   "garden",  "bridge",  "road",    "bike",    "phone",
    "gift",    "dish",    "glass",   "neighbor", "friend", "child",   "man",     "woman",   "mouse",
    "wolf",    "knife",   "leaf",    "sheep",   "engineer", "manager", "guest",  "thief",   "puppy",
    "kitten",  "wagon",   "basket",  "bucket",  "ladder",  "lamp",    "blanket", "coin",    "ticket",
};

constexpr std::pair<const char*, const char*> kIrregularPlurals[] = {
    {"child", "children"}, {"man", "men"},     {"woman", "women"}, {"mouse", "mice"},
    {"wolf", "wolves"},    {"knife", "knives"}, {"leaf", "leaves"}, {"sheep", "sheep"},
    {"thief", "thieves"},  {"person", "people"},
};

constexpr const char* kAdjectives[] = {
    "big",   "small", "old",   "young", "happy", "tall",  "quick", "lazy",  "red",   "blue",
    "brown", "little", "angry", "clever", "quiet", "loud", "brave", "kind",  "busy",  "new",
    "shiny", "heavy", "gentle", "proud", "tiny",  "huge",  "curious", "sleepy", "friendly", "strange",
};

constexpr const char* kTails[] = {
    "in",     "on",     "at",      "near",  "with",      "after",    "before",  "during",
    "under",  "over",   "across",  "through", "behind",  "into",     "from",    "for",
    "today",  "yesterday", "tomorrow", "again", "quietly", "quickly", "slowly", "carefully",
    "every",  "around", "along",   "outside", "inside",
};

constexpr const char* kDeterminers[] = {"the", "a", "an", "this", "that", "these", "those", "some",
                                        "every", "my", "his", "her", "their", "our", "your", "its",
                                        "two", "three", "many", "several"};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) { return s.ends_with(suffix); }

std::string third_person(const std::string& b) {
  if (b == "have") return "has";
  if (ends_with(b, "s") || ends_with(b, "x") || ends_with(b, "z") || ends_with(b, "ch") || ends_with(b, "sh") ||
      ends_with(b, "o"))
    return b + "es";
  if (b.size() > 1 && b.back() == 'y' && !is_vowel(b[b.size() - 2])) return b.substr(0, b.size() - 1) + "ies";
  return b + "s";
}

std::string ing_form(const std::string& b) {
  if (ends_with(b, "ie")) return b.substr(0, b.size() - 2) + "ying";
  if (b.size() > 2 && b.back() == 'e' && !ends_with(b, "ee") && !ends_with(b, "ye") && !ends_with(b, "oe"))
    return b.substr(0, b.size() - 1) + "ing";
  return b + "ing";
}

std::string past_form(const std::string& b) {
  if (b.back() == 'e') return b + "d";
  if (b.size() > 1 && b.back() == 'y' && !is_vowel(b[b.size() - 2])) return b.substr(0, b.size() - 1) + "ied";
  return b + "ed";
}

std::string regular_plural(const std::string& n) {
  if (ends_with(n, "s") || ends_with(n, "x") || ends_with(n, "z") || ends_with(n, "ch") || ends_with(n, "sh"))
    return n + "es";
  if (n.size() > 1 && n.back() == 'y' && !is_vowel(n[n.size() - 2])) return n.substr(0, n.size() - 1) + "ies";
  return n + "s";
}

}  // namespace

std::string_view to_string(StegRule rule) {
  return rule == StegRule::present_continuous ? "present_continuous" : "passive_voice";
}

StegRule parse_steg_rule(std::string_view name) {
  if (name == "present_continuous" || name == "pc" || name == "steg_pc") return StegRule::present_continuous;
  if (name == "passive_voice" || name == "pv" || name == "steg_pv") return StegRule::passive_voice;
  throw ConfigError("unknown steganographic rule '" + std::string(name) + "'");
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex;
  return lex;
}

Lexicon::Lexicon() {
  std::set<std::string> seen;
  for (const auto& s : kVerbs) {
    if (!seen.insert(s.base).second) continue;
    VerbForms v;
    v.base = s.base;
    v.third = third_person(v.base);
    v.ing = *s.ing ? s.ing : ing_form(v.base);
    v.past = *s.past ? s.past : past_form(v.base);
    v.participle = *s.participle ? s.participle : v.past;
    v.transitive = s.transitive;
    verbs_.push_back(std::move(v));
  }
  for (const auto& v : verbs_) {
    auto add = [&](const std::string& w, Form f) {
      auto& hits = forms_[w];
      const bool dup = std::any_of(hits.begin(), hits.end(), [&](const Hit& h) { return h.verb == &v && h.form == f; });
      if (!dup) hits.push_back({&v, f});
    };
    add(v.base, Form::base);
    add(v.third, Form::third);
    add(v.ing, Form::ing);
    add(v.past, Form::past);
    add(v.participle, Form::participle);
  }
  for (const char* n : kNouns) nouns_.emplace_back(n);
  for (const auto& n : nouns_) plural_of_[n] = regular_plural(n);
  for (const auto& [s, p] : kIrregularPlurals) plural_of_[s] = p;
  for (const auto& [s, p] : plural_of_) {
    noun_number_[s] = false;
    noun_number_[p] = true;
  }
  noun_number_["sheep"] = false;
  for (const char* a : kAdjectives) adjectives_.emplace_back(a);
  for (const char* t : kTails) tails_.emplace_back(t);
}

std::span<const Lexicon::Hit> Lexicon::lookup(std::string_view word) const {
  auto it = forms_.find(std::string(word));
  if (it == forms_.end()) return {};
  return it->second;
}

const VerbForms* Lexicon::verb(std::string_view base) const {
  for (const auto& v : verbs_)
    if (v.base == base) return &v;
  return nullptr;
}

std::string Lexicon::plural(std::string_view noun) const {
  auto it = plural_of_.find(std::string(noun));
  return it != plural_of_.end() ? it->second : regular_plural(std::string(noun));
}

bool Lexicon::is_plural_noun(std::string_view word) const {
  auto it = noun_number_.find(std::string(word));
  if (it != noun_number_.end()) return it->second;
  return word.size() > 2 && word.back() == 's' && !word.ends_with("ss");
}

bool Lexicon::is_noun(std::string_view word) const { return noun_number_.contains(std::string(word)); }

bool Lexicon::is_adjective(std::string_view word) const {
  return std::find(adjectives_.begin(), adjectives_.end(), word) != adjectives_.end();
}

bool Lexicon::is_determiner(std::string_view word) const {
  return std::find(std::begin(kDeterminers), std::end(kDeterminers), word) != std::end(kDeterminers);
}

bool Lexicon::starts_tail(std::string_view word) const {
  return std::find(tails_.begin(), tails_.end(), word) != tails_.end();
}

}  // namespace wmforge

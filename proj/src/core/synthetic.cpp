#include "wmforge/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "wmforge/error.hpp"
#include "wmforge/steg.hpp"

namespace wmforge {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::size_t pick_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::string padded_id(const std::string& prefix, std::size_t i) {
  std::string n = std::to_string(i);
  if (n.size() < 5) n.insert(0, 5 - n.size(), '0');
  return prefix + n;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::string pseudo_word(std::size_t index) {
  const std::size_t syllables = kConsonants.size() * kVowels.size();
  if (index >= syllables * syllables * syllables) throw ConfigError("pseudo-word index out of range");
  std::string w;
  for (int k = 0; k < 3; ++k) {
    const std::size_t s = index % syllables;
    index /= syllables;
    w += kConsonants[s / kVowels.size()];
    w += kVowels[s % kVowels.size()];
  }
  return w;
}

SyntheticLanguage::SyntheticLanguage(const LanguageSpec& spec) {
  if (spec.words < 2) throw ConfigError("synthetic language needs at least 2 words");
  if (spec.successors < 1 || spec.successors > spec.words) throw ConfigError("successors must lie in [1, words]");
  if (!(spec.rare_rate >= 0.0 && spec.rare_rate < 1.0)) throw ConfigError("rare_rate must lie in [0, 1)");
  rare_ = spec.rare;
  rare_rate_ = rare_.empty() ? 0.0 : spec.rare_rate;
  words_.reserve(spec.words);
  for (std::size_t i = 0; i < spec.words; ++i) words_.push_back(pseudo_word(i));

  Rng rng = Rng::derive(spec.seed, "language");
  std::vector<std::uint32_t> perm(spec.words);
  followers_.resize(spec.words);
  for (auto& f : followers_) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < spec.successors; ++i)
      std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);
    f.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.successors));
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < spec.successors; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -spec.zipf);
    cdf_.push_back(acc);
  }
}

std::vector<std::string> SyntheticLanguage::sample(std::size_t length, Rng& rng) const {
  std::vector<std::string> out;
  out.reserve(length);
  if (length == 0) return out;
  auto w = static_cast<std::uint32_t>(rng.below(words_.size()));
  out.push_back(words_[w]);
  while (out.size() < length) {
    if (rare_rate_ > 0.0 && rng.uniform() < rare_rate_) {
      out.push_back(rare_[rng.below(rare_.size())]);
      continue;
    }
    w = followers_[w][pick_cdf(cdf_, rng)];
    out.push_back(words_[w]);
  }
  return out;
}

std::string SyntheticLanguage::sample_text(std::size_t length, Rng& rng) const { return join(sample(length, rng)); }

std::vector<std::string> sample_corpus(const SyntheticLanguage& lang, std::size_t docs, std::size_t length,
                                       std::uint64_t seed) {
  std::vector<std::string> out;
  out.reserve(docs);
  for (std::size_t i = 0; i < docs; ++i) {
    Rng rng = Rng::derive(seed, "doc" + std::to_string(i));
    out.push_back(lang.sample_text(length, rng));
  }
  return out;
}

std::vector<Record> make_questions(const SyntheticLanguage& lang, std::size_t count, std::size_t length,
                                   std::uint64_t seed, const std::string& prefix) {
  std::vector<Record> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto id = padded_id(prefix, i);
    Rng rng = Rng::derive(seed, id);
    out.push_back(Record::output(id, lang.sample_text(length, rng), ""));
  }
  return out;
}

std::vector<Record> make_topic_corpus(const SyntheticLanguage& lang, const TopicSpec& spec, std::size_t count,
                                      std::uint64_t seed, const std::string& prefix) {
  if (spec.classes < 2) throw ConfigError("topic corpus needs at least 2 classes");
  const std::size_t base = lang.words().size();
  std::vector<Record> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto id = padded_id(prefix, i);
    Rng rng = Rng::derive(seed, id);
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.classes)));
    auto words = lang.sample(spec.generic_length, rng);
    for (std::size_t k = 0; k < spec.topical_per_doc; ++k) {
      const std::size_t pick = base + static_cast<std::size_t>(label) * spec.pool + rng.below(spec.pool);
      const auto at = static_cast<std::ptrdiff_t>(rng.below(words.size() + 1));
      words.insert(words.begin() + at, pseudo_word(pick));
    }
    words.emplace_back(".");
    out.push_back(Record::input(id, render_tokens(words), label));
  }
  return out;
}

namespace {

class SvoGenerator {
 public:
  SvoGenerator(const SvoSpec& spec) : spec_(spec), lex_(Lexicon::builtin()) {
    for (const auto& v : lex_.verbs())
      if (v.transitive) transitive_.push_back(&v);
  }

  std::string sentence(Rng& rng) const {
    bool plural = false;
    auto subject = noun_phrase(rng, true, plural);
    const VerbForms& v = *transitive_[rng.below(transitive_.size())];
    bool obj_plural = false;
    auto object = noun_phrase(rng, false, obj_plural);

    std::vector<std::string> s;
    const double u = rng.uniform() * (spec_.past + spec_.present + spec_.progressive + spec_.passive);
    auto add = [&](const std::vector<std::string>& part) { s.insert(s.end(), part.begin(), part.end()); };
    if (u < spec_.past) {
      add(subject);
      s.push_back(v.past);
      add(object);
    } else if (u < spec_.past + spec_.present) {
      add(subject);
      s.push_back(plural ? v.base : v.third);
      add(object);
    } else if (u < spec_.past + spec_.present + spec_.progressive) {
      add(subject);
      s.emplace_back(subject.size() == 1 && subject[0] == "i" ? "am" : plural ? "are" : "is");
      s.push_back(v.ing);
      add(object);
    } else {
      add(to_subject_case(object));
      s.emplace_back(obj_plural ? "were" : "was");
      s.push_back(v.participle);
      s.emplace_back("by");
      add(to_object_case(subject));
    }
    if (rng.uniform() < spec_.tail) add(tail(rng));
    s.emplace_back(".");
    return render_tokens(s);
  }

 private:
  std::vector<std::string> noun_phrase(Rng& rng, bool subject, bool& plural) const {
    static constexpr std::string_view kSubj[] = {"he", "she", "they", "we", "i"};
    static constexpr std::string_view kObj[] = {"him", "her", "them", "us", "me"};
    if (rng.uniform() < 0.1) {
      const auto k = rng.below(5);
      plural = k == 2 || k == 3 || (subject && k == 4);
      return {std::string(subject ? kSubj[k] : kObj[k])};
    }
    const auto nouns = lex_.nouns();
    const auto adjs = lex_.adjectives();
    std::string noun(nouns[rng.below(nouns.size())]);
    plural = noun != "sheep" && rng.uniform() < 0.3;
    if (plural) noun = lex_.plural(noun);
    std::vector<std::string> np;
    static constexpr std::string_view kSingular[] = {"the", "a", "my", "this", "that", "his", "her", "our"};
    static constexpr std::string_view kPlural[] = {"the", "some", "two", "many", "my", "these", "their", "our"};
    np.emplace_back(plural ? kPlural[rng.below(8)] : kSingular[rng.below(8)]);
    if (rng.uniform() < 0.3) np.emplace_back(adjs[rng.below(adjs.size())]);
    np.push_back(std::move(noun));
    if (np[0] == "a" && std::string_view("aeiou").find(np[1][0]) != std::string_view::npos) np[0] = "an";
    return np;
  }

  std::vector<std::string> tail(Rng& rng) const {
    static constexpr std::string_view kAdverbs[] = {"today", "yesterday", "again", "quietly", "slowly", "carefully"};
    static constexpr std::string_view kPreps[] = {"in", "near", "behind", "after", "before", "under"};
    static constexpr std::string_view kPlaces[] = {"garden", "house", "bridge", "road", "table", "door", "fence"};
    if (rng.uniform() < 0.4) return {std::string(kAdverbs[rng.below(6)])};
    return {std::string(kPreps[rng.below(6)]), "the", std::string(kPlaces[rng.below(7)])};
  }

  static std::vector<std::string> to_subject_case(std::vector<std::string> np) {
    static constexpr std::pair<std::string_view, std::string_view> kMap[] = {
        {"him", "he"}, {"her", "she"}, {"them", "they"}, {"us", "we"}, {"me", "i"}};
    if (np.size() == 1)
      for (const auto& [o, s] : kMap)
        if (np[0] == o) np[0] = s;
    return np;
  }

  static std::vector<std::string> to_object_case(std::vector<std::string> np) {
    static constexpr std::pair<std::string_view, std::string_view> kMap[] = {
        {"he", "him"}, {"she", "her"}, {"they", "them"}, {"we", "us"}, {"i", "me"}};
    if (np.size() == 1)
      for (const auto& [s, o] : kMap)
        if (np[0] == s) np[0] = o;
    return np;
  }

  SvoSpec spec_;
  const Lexicon& lex_;
  std::vector<const VerbForms*> transitive_;
};

}  // namespace

std::vector<std::string> make_svo_sentences(std::size_t count, std::uint64_t seed, const SvoSpec& spec) {
  SvoGenerator gen(spec);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::derive(seed, "svo" + std::to_string(i));
    out.push_back(gen.sentence(rng));
  }
  return out;
}

std::vector<std::string> make_svo_texts(std::size_t docs, std::size_t sentences, std::uint64_t seed,
                                        const SvoSpec& spec) {
  SvoGenerator gen(spec);
  std::vector<std::string> out;
  out.reserve(docs);
  for (std::size_t i = 0; i < docs; ++i) {
    Rng rng = Rng::derive(seed, "svotext" + std::to_string(i));
    std::string text;
    for (std::size_t k = 0; k < sentences; ++k) {
      if (!text.empty()) text += ' ';
      text += gen.sentence(rng);
    }
    out.push_back(std::move(text));
  }
  return out;
}

}  // namespace wmforge

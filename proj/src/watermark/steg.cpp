#include "wmforge/steg.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "wmforge/error.hpp"
#include "wmforge/vocab.hpp"

namespace wmforge {

namespace {

using Tokens = std::vector<std::string>;
using Form = Lexicon::Form;

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kPronounCase{{
    {"i", "me"}, {"he", "him"}, {"she", "her"}, {"we", "us"}, {"they", "them"}}};

bool is_terminal(std::string_view t) { return t == "." || t == "!" || t == "?"; }

bool is_pronoun(std::string_view t) {
  static constexpr std::string_view kAll[] = {"i", "me", "he", "him", "she", "her", "it",
                                              "we", "us", "they", "them", "you"};
  return std::find(std::begin(kAll), std::end(kAll), t) != std::end(kAll);
}

bool is_present_aux(std::string_view t) { return t == "is" || t == "are" || t == "am"; }
bool is_past_aux(std::string_view t) { return t == "was" || t == "were"; }

const Lexicon::Hit* find_form(std::span<const Lexicon::Hit> hits, Form f) {
  for (const auto& h : hits)
    if (h.form == f) return &h;
  return nullptr;
}

enum class Person { first_singular, third_singular, plural };

Person person_of(const Tokens& np, const Lexicon& lex) {
  if (np.size() == 1) {
    const auto& w = np[0];
    if (w == "i" || w == "me") return Person::first_singular;
    if (w == "we" || w == "us" || w == "they" || w == "them" || w == "you") return Person::plural;
    if (w == "he" || w == "him" || w == "she" || w == "her" || w == "it") return Person::third_singular;
  }
  if (std::find(np.begin(), np.end(), "and") != np.end()) return Person::plural;
  for (auto it = np.rbegin(); it != np.rend(); ++it)
    if (lex.is_noun(*it)) return lex.is_plural_noun(*it) ? Person::plural : Person::third_singular;
  if (np.empty()) return Person::third_singular;
  return lex.is_plural_noun(np.back()) ? Person::plural : Person::third_singular;
}

// Moves a lone pronoun between subject and object case.
Tokens as_subject(Tokens np) {
  if (np.size() == 1)
    for (const auto& [subj, obj] : kPronounCase)
      if (np[0] == obj) np[0] = subj;
  return np;
}

Tokens as_object(Tokens np) {
  if (np.size() == 1)
    for (const auto& [subj, obj] : kPronounCase)
      if (np[0] == subj) np[0] = obj;
  return np;
}

void append(Tokens& out, const Tokens& part) { out.insert(out.end(), part.begin(), part.end()); }

std::string_view be_present(Person p) {
  return p == Person::first_singular ? "am" : p == Person::plural ? "are" : "is";
}

std::string_view be_past(Person p) { return p == Person::plural ? "were" : "was"; }

bool opens_tail(std::string_view w, const Lexicon& lex) { return w == "by" || lex.starts_tail(w); }

}  // namespace

std::vector<std::vector<std::string>> split_sentences(std::string_view text) {
  std::vector<Tokens> out;
  Tokens cur;
  for (auto& t : split_tokens(text)) {
    const bool end = is_terminal(t);
    cur.push_back(std::move(t));
    if (end) {
      if (cur.size() > 1) out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<Clause> parse_clause(std::span<const std::string> sentence, const Lexicon& lex) {
  std::size_t n = sentence.size();
  while (n > 0 && is_terminal(sentence[n - 1])) --n;
  const auto s = sentence.first(n);

  std::size_t head = n;
  for (std::size_t i = 0; i < n; ++i)
    if (lex.is_noun(s[i]) || is_pronoun(s[i])) {
      head = i;
      break;
    }
  // Verb group: first auxiliary or verb form after the subject head.
  std::size_t k = head == n ? 0 : head + 1;
  while (k < n && !is_present_aux(s[k]) && !is_past_aux(s[k]) && lex.lookup(s[k]).empty()) ++k;
  if (k >= n || k == 0) return std::nullopt;

  Clause c;
  c.subject.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t next = k + 1;

  if (is_present_aux(s[k]) || is_past_aux(s[k])) {
    const bool past = is_past_aux(s[k]);
    if (next >= n) return std::nullopt;
    if (s[next] == "being" && next + 1 < n) {
      if (const auto* hit = find_form(lex.lookup(s[next + 1]), Form::participle)) {
        c.verb = hit->verb;
        c.shape = past ? Clause::Shape::progressive_past : Clause::Shape::progressive_present;
        c.passive = true;
        next += 2;
      }
    }
    if (!c.verb) {
      const auto hits = lex.lookup(s[next]);
      if (const auto* ing = find_form(hits, Form::ing)) {
        c.verb = ing->verb;
        c.shape = past ? Clause::Shape::progressive_past : Clause::Shape::progressive_present;
      } else if (const auto* part = find_form(hits, Form::participle)) {
        c.verb = part->verb;
        c.shape = past ? Clause::Shape::passive_past : Clause::Shape::passive_present;
        c.passive = true;
      } else {
        return std::nullopt;
      }
      ++next;
    }
  } else {
    const auto hits = lex.lookup(s[k]);
    const auto* third = find_form(hits, Form::third);
    const auto* base = find_form(hits, Form::base);
    const auto* past = find_form(hits, Form::past);
    if (third) {
      c.verb = third->verb;
      c.shape = Clause::Shape::simple_present;
    } else if (past && (!base || person_of(c.subject, lex) == Person::third_singular)) {
      c.verb = past->verb;
      c.shape = Clause::Shape::simple_past;
    } else if (base) {
      c.verb = base->verb;
      c.shape = Clause::Shape::simple_present;
    } else {
      c.verb = hits.front().verb;
      c.shape = Clause::Shape::simple_past;
    }
  }

  std::size_t i = next;
  if (c.passive) {
    if (i < n && s[i] == "by") {
      ++i;
      while (i < n && !lex.starts_tail(s[i])) c.agent.push_back(s[i++]);
    }
  } else if (c.verb->transitive) {
    while (i < n && !opens_tail(s[i], lex)) c.object.push_back(s[i++]);
  }
  c.tail.assign(s.begin() + static_cast<std::ptrdiff_t>(i), s.end());
  return c;
}

std::string render_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const bool punct = t.size() == 1 && std::ispunct(static_cast<unsigned char>(t[0])) && t != "_" && t != "'";
    if (!out.empty() && !punct) out += ' ';
    out += t;
  }
  return out;
}

std::string apply_steganographic(std::string_view text, StegRule rule) {
  const auto& lex = Lexicon::builtin();
  const auto sentences = split_sentences(text);
  std::vector<std::string> rendered;
  for (std::size_t idx = 0; idx < sentences.size(); ++idx) {
    const auto& sent = sentences[idx];
    const auto clause = parse_clause(sent, lex);
    if (!clause)
      throw ConfigError("sentence " + std::to_string(idx) + " has no lexicon verb: \"" + render_tokens(sent) + "\"");
    const auto& c = *clause;

    Tokens out;
    if (rule == StegRule::present_continuous) {
      if (c.passive && !c.agent.empty()) {
        // Back to active voice: agent acts on the old subject.
        const auto subj = as_subject(c.agent);
        append(out, subj);
        out.emplace_back(be_present(person_of(subj, lex)));
        out.push_back(c.verb->ing);
        append(out, as_object(c.subject));
      } else if (c.passive) {
        append(out, c.subject);
        out.emplace_back(be_present(person_of(c.subject, lex)));
        out.emplace_back("being");
        out.push_back(c.verb->participle);
      } else {
        append(out, c.subject);
        out.emplace_back(be_present(person_of(c.subject, lex)));
        out.push_back(c.verb->ing);
        append(out, c.object);
      }
    } else {
      if (c.passive) {
        append(out, c.subject);
        out.emplace_back(be_past(person_of(c.subject, lex)));
        out.push_back(c.verb->participle);
        if (!c.agent.empty()) {
          out.emplace_back("by");
          append(out, c.agent);
        }
      } else if (c.object.empty()) {
        out.assign(sent.begin(), sent.end());
        while (!out.empty() && is_terminal(out.back())) out.pop_back();
        rendered.push_back(render_tokens(out) + (is_terminal(sent.back()) ? sent.back() : ""));
        continue;
      } else {
        const auto obj = as_subject(c.object);
        append(out, obj);
        out.emplace_back(be_past(person_of(obj, lex)));
        out.push_back(c.verb->participle);
        out.emplace_back("by");
        append(out, as_object(c.subject));
      }
    }
    append(out, c.tail);
    if (is_terminal(sent.back())) out.push_back(sent.back());
    rendered.push_back(render_tokens(out));
  }
  std::string joined;
  for (const auto& r : rendered) {
    if (!joined.empty()) joined += ' ';
    joined += r;
  }
  return joined;
}

}  // namespace wmforge

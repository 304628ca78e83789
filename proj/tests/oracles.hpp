#pragma once

// Slow, independent reference implementations used to check the learner:
// every rule over a finite universe is instantiated, applied to a copy of
// the training state and scored by recounting errors.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tbed/tbed.hpp"

namespace tbed::oracle {

// Tie-break key built from names only: keyword, args, from (absent first), to.
using Key = std::tuple<std::string, std::vector<std::string>, int, std::string, std::string>;

inline Key key_of(const LexicalRule& r, const Tagset& ts) {
  return {std::string(keyword(r.tmpl)), {r.arg}, r.from ? 1 : 0,
          r.from ? ts.name(*r.from) : std::string(), ts.name(r.to)};
}

inline Key key_of(const ContextualRule& r, const Tagset& ts) {
  std::vector<std::string> args;
  if (r.tmpl == ContextTemplate::PrevWord || r.tmpl == ContextTemplate::NextWord) {
    args.push_back(r.word);
  } else {
    const bool two = r.tmpl == ContextTemplate::SurroundTag ||
                     r.tmpl == ContextTemplate::PrevBigram || r.tmpl == ContextTemplate::NextBigram;
    args.push_back(ts.name(r.tags[0]));
    if (two) args.push_back(ts.name(r.tags[1]));
  }
  return {std::string(keyword(r.tmpl)), args, 1, ts.name(r.from), ts.name(r.to)};
}

template <typename Rule>
struct Best {
  Rule rule;
  std::int64_t net;
};

template <typename Rule>
void offer(std::optional<Best<Rule>>& best, Rule rule, std::int64_t net, const Tagset& ts) {
  if (!best || net > best->net || (net == best->net && key_of(rule, ts) < key_of(best->rule, ts))) {
    best = Best<Rule>{std::move(rule), net};
  }
}

// ---------------------------------------------------------------------------
// Lexical

inline std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  const auto decoded = unicode::decode(s);
  for (char32_t c : *decoded) out.push_back(unicode::encode(std::u32string(1, c)));
  return out;
}

// All strings of 1..max_len code points over `alphabet`.
inline std::vector<std::string> all_strings(const std::set<std::string>& alphabet,
                                            std::size_t max_len) {
  std::vector<std::string> out;
  std::vector<std::string> layer = {""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& p : layer) {
      for (const auto& c : alphabet) next.push_back(p + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

// Predicate written from the template definitions over code points.
inline bool lexical_holds(LexicalTemplate t, const std::string& arg, const std::string& word,
                          const Lexicon& lex) {
  const auto w = code_points(word);
  const auto a = code_points(arg);
  const auto join = [](auto first, auto last) {
    std::string s;
    for (; first != last; ++first) s += *first;
    return s;
  };
  const bool suffix = w.size() >= a.size() && std::equal(a.begin(), a.end(), w.end() - a.size());
  const bool prefix = w.size() >= a.size() && std::equal(a.begin(), a.end(), w.begin());
  switch (t) {
    case LexicalTemplate::HasSuffix: return suffix;
    case LexicalTemplate::HasPrefix: return prefix;
    case LexicalTemplate::DeleteSuffix:
      return suffix && w.size() > a.size() && lex.contains(join(w.begin(), w.end() - a.size()));
    case LexicalTemplate::DeletePrefix:
      return prefix && w.size() > a.size() && lex.contains(join(w.begin() + a.size(), w.end()));
    case LexicalTemplate::AddSuffix: return lex.contains(word + arg);
    case LexicalTemplate::AddPrefix: return lex.contains(arg + word);
    case LexicalTemplate::HasChar: return std::find(w.begin(), w.end(), arg) != w.end();
  }
  return false;
}

inline std::uint64_t lexical_errors(const LexicalAssignments& a) {
  std::uint64_t e = 0;
  for (const auto& [_, t] : a) {
    if (t.current != t.gold) e += t.count;
  }
  return e;
}

inline void apply_lexical(const LexicalRule& r, LexicalAssignments& a, const Lexicon& lex) {
  for (auto& [word, t] : a) {
    if ((!r.from || *r.from == t.current) && lexical_holds(r.tmpl, r.arg, word, lex)) {
      t.current = r.to;
    }
  }
}

// Error reduction measured by applying the rule to a copy.
inline std::int64_t lexical_net(const LexicalRule& r, const LexicalAssignments& a,
                                const Lexicon& lex) {
  auto copy = a;
  apply_lexical(r, copy, lex);
  return static_cast<std::int64_t>(lexical_errors(a)) -
         static_cast<std::int64_t>(lexical_errors(copy));
}

// Every code point occurring in the unknown types or in the lexicon; an
// argument using any other character cannot match anything.
inline std::set<std::string> lexical_alphabet(const LexicalTrainingState& s) {
  std::set<std::string> alphabet;
  for (const auto& [word, _] : s.assignments) {
    for (auto& c : code_points(word)) alphabet.insert(c);
  }
  for (auto word : s.guess_lexicon.sorted_words()) {
    for (auto& c : code_points(word)) alphabet.insert(c);
  }
  return alphabet;
}

inline std::optional<Best<LexicalRule>> best_lexical_rule(const LexicalTrainingState& s,
                                                          const Tagset& ts,
                                                          std::size_t max_affix_len) {
  const auto alphabet = lexical_alphabet(s);
  const auto affixes = all_strings(alphabet, max_affix_len);
  std::optional<Best<LexicalRule>> best;
  for (auto tmpl : kLexicalTemplates) {
    const auto& args = tmpl == LexicalTemplate::HasChar
                           ? std::vector<std::string>(alphabet.begin(), alphabet.end())
                           : affixes;
    for (const auto& arg : args) {
      // Skip arguments matching no type at all: their net is 0 for every tag pair.
      bool any = false;
      for (const auto& [word, _] : s.assignments) {
        if (lexical_holds(tmpl, arg, word, s.guess_lexicon)) {
          any = true;
          break;
        }
      }
      for (const TagId to : ts.tags()) {
        std::vector<std::optional<TagId>> froms = {std::nullopt};
        for (const TagId f : ts.tags()) {
          if (f != to) froms.push_back(f);
        }
        for (const auto& from : froms) {
          LexicalRule r{tmpl, arg, from, to};
          offer(best, r, any ? lexical_net(r, s.assignments, s.guess_lexicon) : 0, ts);
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Contextual

inline bool context_holds(const ContextualRule& r, const SentenceState& s, std::size_t pos) {
  const auto n = static_cast<long>(s.size());
  const auto p = static_cast<long>(pos);
  const auto tag = [&](long off, TagId want) {
    const long q = p + off;
    return q >= 0 && q < n && s[static_cast<std::size_t>(q)].tag == want;
  };
  const auto word = [&](long off) {
    const long q = p + off;
    return q >= 0 && q < n && s[static_cast<std::size_t>(q)].word == r.word;
  };
  const TagId a = r.tags[0], b = r.tags[1];
  switch (r.tmpl) {
    case ContextTemplate::PrevTag: return tag(-1, a);
    case ContextTemplate::NextTag: return tag(1, a);
    case ContextTemplate::Prev2Tag: return tag(-2, a);
    case ContextTemplate::Next2Tag: return tag(2, a);
    case ContextTemplate::Prev1Or2Tag: return tag(-1, a) || tag(-2, a);
    case ContextTemplate::Next1Or2Tag: return tag(1, a) || tag(2, a);
    case ContextTemplate::Prev1Or2Or3Tag: return tag(-1, a) || tag(-2, a) || tag(-3, a);
    case ContextTemplate::Next1Or2Or3Tag: return tag(1, a) || tag(2, a) || tag(3, a);
    case ContextTemplate::PrevWord: return word(-1);
    case ContextTemplate::NextWord: return word(1);
    case ContextTemplate::SurroundTag: return tag(-1, a) && tag(1, b);
    case ContextTemplate::PrevBigram: return tag(-2, a) && tag(-1, b);
    case ContextTemplate::NextBigram: return tag(1, a) && tag(2, b);
  }
  return false;
}

// Left to right, each change visible to the positions after it.
inline void apply_contextual(const ContextualRule& r, std::vector<SentenceState>& state) {
  for (auto& s : state) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].tag == r.from && context_holds(r, s, i)) s[i].tag = r.to;
    }
  }
}

inline std::uint64_t contextual_errors(const std::vector<SentenceState>& state,
                                       const std::vector<std::vector<TagId>>& gold) {
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    for (std::size_t j = 0; j < state[i].size(); ++j) e += state[i][j].tag != gold[i][j];
  }
  return e;
}

inline std::int64_t contextual_net(const ContextualRule& r, const ContextualTrainingState& s) {
  auto copy = s.state;
  apply_contextual(r, copy);
  return static_cast<std::int64_t>(contextual_errors(s.state, s.gold)) -
         static_cast<std::int64_t>(contextual_errors(copy, s.gold));
}

// Every instantiation of every template over the tagset and the corpus words.
inline std::vector<ContextualRule> all_contextual_rules(const ContextualTrainingState& s,
                                                        const Tagset& ts) {
  std::set<std::string> words;
  for (const auto& sent : s.state) {
    for (const auto& t : sent) words.insert(t.word);
  }
  std::vector<ContextualRule> out;
  const auto tags = ts.tags();
  for (TagId from : tags) {
    for (TagId to : tags) {
      if (from == to) continue;
      for (auto tmpl : kContextTemplates) {
        ContextualRule r;
        r.tmpl = tmpl;
        r.from = from;
        r.to = to;
        if (tmpl == ContextTemplate::PrevWord || tmpl == ContextTemplate::NextWord) {
          for (const auto& w : words) {
            r.word = w;
            out.push_back(r);
          }
        } else if (tmpl == ContextTemplate::SurroundTag || tmpl == ContextTemplate::PrevBigram ||
                   tmpl == ContextTemplate::NextBigram) {
          for (TagId a : tags) {
            for (TagId b : tags) {
              r.tags = {a, b};
              out.push_back(r);
            }
          }
        } else {
          for (TagId a : tags) {
            r.tags = {a, TagId{}};
            out.push_back(r);
          }
        }
      }
    }
  }
  return out;
}

inline std::optional<Best<ContextualRule>> best_contextual_rule(const ContextualTrainingState& s,
                                                                const Tagset& ts) {
  std::optional<Best<ContextualRule>> best;
  for (auto& r : all_contextual_rules(s, ts)) {
    const auto net = contextual_net(r, s);
    offer(best, std::move(r), net, ts);
  }
  return best;
}

// Most-frequent-tag baseline accuracy recomputed from raw counts.
inline double baseline_accuracy(const TaggedCorpus& train) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& s : train.sentences()) {
    for (const auto& t : s.tokens) ++counts[t.word][train.tagset().name(*t.tag)];
  }
  std::size_t correct = 0;
  for (const auto& [_, per_tag] : counts) {
    std::size_t best = 0;
    for (const auto& [tag, n] : per_tag) best = std::max(best, n);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(train.word_count());
}

}  // namespace tbed::oracle

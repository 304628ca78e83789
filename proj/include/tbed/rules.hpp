#pragma once

// Lexical (morphological) and contextual transformation rules.
//
// Rule file lines:
//   LEX <TEMPLATE> <arg> <from_tag|-> <to_tag>
//   CTX <TEMPLATE> <from_tag> <to_tag> <arg1> [arg2]
// File order is application order.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/unicode.hpp"

namespace tbed {

inline constexpr std::size_t kDefaultMaxAffixLen = 4;

enum class LexicalTemplate : std::uint8_t {
  HasSuffix,
  HasPrefix,
  DeleteSuffix,
  DeletePrefix,
  AddSuffix,
  AddPrefix,
  HasChar,
};

inline constexpr std::array<LexicalTemplate, 7> kLexicalTemplates = {
    LexicalTemplate::HasSuffix,    LexicalTemplate::HasPrefix, LexicalTemplate::DeleteSuffix,
    LexicalTemplate::DeletePrefix, LexicalTemplate::AddSuffix, LexicalTemplate::AddPrefix,
    LexicalTemplate::HasChar};

inline std::string_view keyword(LexicalTemplate t) {
  switch (t) {
    case LexicalTemplate::HasSuffix: return "HASSUF";
    case LexicalTemplate::HasPrefix: return "HASPREF";
    case LexicalTemplate::DeleteSuffix: return "DELETESUF";
    case LexicalTemplate::DeletePrefix: return "DELETEPREF";
    case LexicalTemplate::AddSuffix: return "ADDSUF";
    case LexicalTemplate::AddPrefix: return "ADDPREF";
    case LexicalTemplate::HasChar: return "HASCHAR";
  }
  return "";
}

enum class ContextTemplate : std::uint8_t {
  PrevTag,
  NextTag,
  Prev2Tag,
  Next2Tag,
  Prev1Or2Tag,
  Next1Or2Tag,
  Prev1Or2Or3Tag,
  Next1Or2Or3Tag,
  PrevWord,
  NextWord,
  SurroundTag,
  PrevBigram,
  NextBigram,
};

inline constexpr std::array<ContextTemplate, 13> kContextTemplates = {
    ContextTemplate::PrevTag,        ContextTemplate::NextTag,
    ContextTemplate::Prev2Tag,       ContextTemplate::Next2Tag,
    ContextTemplate::Prev1Or2Tag,    ContextTemplate::Next1Or2Tag,
    ContextTemplate::Prev1Or2Or3Tag, ContextTemplate::Next1Or2Or3Tag,
    ContextTemplate::PrevWord,       ContextTemplate::NextWord,
    ContextTemplate::SurroundTag,    ContextTemplate::PrevBigram,
    ContextTemplate::NextBigram};

inline std::string_view keyword(ContextTemplate t) {
  switch (t) {
    case ContextTemplate::PrevTag: return "PREVTAG";
    case ContextTemplate::NextTag: return "NEXTTAG";
    case ContextTemplate::Prev2Tag: return "PREV2TAG";
    case ContextTemplate::Next2Tag: return "NEXT2TAG";
    case ContextTemplate::Prev1Or2Tag: return "PREV1OR2TAG";
    case ContextTemplate::Next1Or2Tag: return "NEXT1OR2TAG";
    case ContextTemplate::Prev1Or2Or3Tag: return "PREV1OR2OR3TAG";
    case ContextTemplate::Next1Or2Or3Tag: return "NEXT1OR2OR3TAG";
    case ContextTemplate::PrevWord: return "PREVWD";
    case ContextTemplate::NextWord: return "NEXTWD";
    case ContextTemplate::SurroundTag: return "SURROUNDTAG";
    case ContextTemplate::PrevBigram: return "PREVBIGRAM";
    case ContextTemplate::NextBigram: return "NEXTBIGRAM";
  }
  return "";
}

inline std::optional<LexicalTemplate> parse_lexical_template(std::string_view s) {
  for (auto t : kLexicalTemplates) {
    if (keyword(t) == s) return t;
  }
  return std::nullopt;
}

inline std::optional<ContextTemplate> parse_context_template(std::string_view s) {
  for (auto t : kContextTemplates) {
    if (keyword(t) == s) return t;
  }
  return std::nullopt;
}

inline std::size_t arity(ContextTemplate t) {
  switch (t) {
    case ContextTemplate::SurroundTag:
    case ContextTemplate::PrevBigram:
    case ContextTemplate::NextBigram:
      return 2;
    default:
      return 1;
  }
}

inline bool takes_word_arg(ContextTemplate t) {
  return t == ContextTemplate::PrevWord || t == ContextTemplate::NextWord;
}

// True when the predicate reads tags to the left of the current position,
// i.e. when earlier changes in the same pass can affect it.
inline bool reads_left_tags(ContextTemplate t) {
  switch (t) {
    case ContextTemplate::PrevTag:
    case ContextTemplate::Prev2Tag:
    case ContextTemplate::Prev1Or2Tag:
    case ContextTemplate::Prev1Or2Or3Tag:
    case ContextTemplate::SurroundTag:
    case ContextTemplate::PrevBigram:
      return true;
    default:
      return false;
  }
}

struct LexicalRule {
  LexicalTemplate tmpl = LexicalTemplate::HasSuffix;
  std::string arg;
  std::optional<TagId> from;
  TagId to;

  friend bool operator==(const LexicalRule&, const LexicalRule&) = default;
};

// Tag arguments live in `tags`; PREVWD/NEXTWD use `word` instead.
struct ContextualRule {
  ContextTemplate tmpl = ContextTemplate::PrevTag;
  TagId from;
  TagId to;
  std::array<TagId, 2> tags{};
  std::string word;

  friend bool operator==(const ContextualRule&, const ContextualRule&) = default;
};

// Builders that leave unused argument slots in their canonical empty state,
// so that equality and hashing see only the meaningful fields.
inline ContextualRule tag_context_rule(ContextTemplate tmpl, TagId from, TagId to, TagId a,
                                       TagId b = TagId{}) {
  ContextualRule r;
  r.tmpl = tmpl;
  r.from = from;
  r.to = to;
  r.tags[0] = a;
  if (arity(tmpl) == 2) r.tags[1] = b;
  return r;
}

inline ContextualRule word_context_rule(ContextTemplate tmpl, TagId from, TagId to,
                                        std::string word) {
  ContextualRule r;
  r.tmpl = tmpl;
  r.from = from;
  r.to = to;
  r.word = std::move(word);
  return r;
}

inline void validate(const LexicalRule& rule, const Tagset& tagset,
                     std::size_t max_affix_len = kDefaultMaxAffixLen) {
  if (!unicode::is_valid_utf8(rule.arg)) throw Error("lexical rule arg is not UTF-8");
  const std::size_t n = unicode::length(rule.arg);
  if (rule.tmpl == LexicalTemplate::HasChar) {
    if (n != 1) throw Error("HASCHAR takes exactly one character");
  } else if (n < 1 || n > max_affix_len) {
    throw Error("affix '" + rule.arg + "' must have 1.." + std::to_string(max_affix_len) +
                " characters");
  }
  for (char c : rule.arg) {
    if (unicode::is_separator(c)) throw Error("lexical rule arg contains whitespace");
  }
  if (!tagset.contains(rule.to) || (rule.from && !tagset.contains(*rule.from))) {
    throw TagsetError("lexical rule tag outside tagset");
  }
  if (rule.from && *rule.from == rule.to) throw Error("lexical rule with from_tag == to_tag");
}

inline void validate(const ContextualRule& rule, const Tagset& tagset) {
  if (!tagset.contains(rule.from) || !tagset.contains(rule.to)) {
    throw TagsetError("contextual rule tag outside tagset");
  }
  if (rule.from == rule.to) throw Error("contextual rule with from_tag == to_tag");
  if (takes_word_arg(rule.tmpl)) {
    if (rule.word.empty()) throw Error("word template without a word");
  } else {
    for (std::size_t i = 0; i < arity(rule.tmpl); ++i) {
      if (!tagset.contains(rule.tags[i])) throw TagsetError("contextual arg outside tagset");
    }
  }
}

// Ordering used to break score ties: template keyword, args, from, to.
// Absent from_tag sorts before any tag.
using RuleOrderKey =
    std::tuple<std::string_view, std::vector<std::string>, std::optional<std::string>,
               std::string>;

inline RuleOrderKey order_key(const LexicalRule& r, const Tagset& tagset) {
  std::optional<std::string> from;
  if (r.from) from = tagset.name(*r.from);
  return {keyword(r.tmpl), {r.arg}, std::move(from), tagset.name(r.to)};
}

inline std::vector<std::string> rule_args(const ContextualRule& r, const Tagset& tagset) {
  if (takes_word_arg(r.tmpl)) return {r.word};
  std::vector<std::string> args;
  for (std::size_t i = 0; i < arity(r.tmpl); ++i) args.push_back(tagset.name(r.tags[i]));
  return args;
}

inline RuleOrderKey order_key(const ContextualRule& r, const Tagset& tagset) {
  return {keyword(r.tmpl), rule_args(r, tagset), tagset.name(r.from), tagset.name(r.to)};
}

// ---------------------------------------------------------------------------
// Lexical rules

namespace detail {

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace detail

// Template predicate only, ignoring the from_tag condition. Byte-level affix
// tests are exact on valid UTF-8 since encodings never overlap mid-character.
inline bool lexical_predicate_holds(const LexicalRule& rule, std::string_view word,
                                    const Lexicon& lexicon) {
  const std::string_view arg = rule.arg;
  switch (rule.tmpl) {
    case LexicalTemplate::HasSuffix:
      return detail::ends_with(word, arg);
    case LexicalTemplate::HasPrefix:
      return detail::starts_with(word, arg);
    case LexicalTemplate::DeleteSuffix:
      return word.size() > arg.size() && detail::ends_with(word, arg) &&
             lexicon.contains(word.substr(0, word.size() - arg.size()));
    case LexicalTemplate::DeletePrefix:
      return word.size() > arg.size() && detail::starts_with(word, arg) &&
             lexicon.contains(word.substr(arg.size()));
    case LexicalTemplate::AddSuffix: {
      std::string joined(word);
      joined += arg;
      return lexicon.contains(joined);
    }
    case LexicalTemplate::AddPrefix: {
      std::string joined(arg);
      joined += word;
      return lexicon.contains(joined);
    }
    case LexicalTemplate::HasChar:
      return word.find(arg) != std::string_view::npos;
  }
  return false;
}

inline bool lexical_rule_matches(const LexicalRule& rule, std::string_view word,
                                 TagId current_tag, const Lexicon& lexicon) {
  if (rule.from && *rule.from != current_tag) return false;
  return lexical_predicate_holds(rule, word, lexicon);
}

// Unknown word type -> its current tag.
using TypeAssignments = std::unordered_map<std::string, TagId>;

inline TypeAssignments apply_lexical_rules(std::span<const LexicalRule> rules,
                                           TypeAssignments assignments,
                                           const Lexicon& lexicon) {
  for (const auto& rule : rules) {
    for (auto& [word, tag] : assignments) {
      if (lexical_rule_matches(rule, word, tag, lexicon)) tag = rule.to;
    }
  }
  return assignments;
}

// Tag for one unknown word: initial rule chain, then each lexical rule in order.
inline TagId tag_unknown_word(std::string_view word, std::span<const LexicalRule> rules,
                              const Lexicon& lexicon, const InitialRuleChain& chain,
                              const Tagset& tagset) {
  TagId tag = tagset.role(chain.role_for(word));
  for (const auto& rule : rules) {
    if (lexical_rule_matches(rule, word, tag, lexicon)) tag = rule.to;
  }
  return tag;
}

// ---------------------------------------------------------------------------
// Contextual rules

struct TokenState {
  std::string word;
  TagId tag;
  friend bool operator==(const TokenState&, const TokenState&) = default;
};

using SentenceState = std::vector<TokenState>;

// Evaluates the context predicate at `pos` of a sentence of length `n`
// through accessors, so callers can overlay pending changes. Positions
// outside the sentence never match.
template <typename TagAt, typename WordMatches>
bool context_predicate_holds(const ContextualRule& rule, std::size_t n, std::size_t pos,
                             TagAt&& tag_at, WordMatches&& word_at_is) {
  const auto has = [&](std::ptrdiff_t offset) {
    const auto q = static_cast<std::ptrdiff_t>(pos) + offset;
    return q >= 0 && q < static_cast<std::ptrdiff_t>(n);
  };
  const auto tag_is = [&](std::ptrdiff_t offset, TagId want) {
    return has(offset) &&
           tag_at(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + offset)) == want;
  };
  const TagId a = rule.tags[0];
  const TagId b = rule.tags[1];
  switch (rule.tmpl) {
    case ContextTemplate::PrevTag: return tag_is(-1, a);
    case ContextTemplate::NextTag: return tag_is(1, a);
    case ContextTemplate::Prev2Tag: return tag_is(-2, a);
    case ContextTemplate::Next2Tag: return tag_is(2, a);
    case ContextTemplate::Prev1Or2Tag: return tag_is(-1, a) || tag_is(-2, a);
    case ContextTemplate::Next1Or2Tag: return tag_is(1, a) || tag_is(2, a);
    case ContextTemplate::Prev1Or2Or3Tag: return tag_is(-1, a) || tag_is(-2, a) || tag_is(-3, a);
    case ContextTemplate::Next1Or2Or3Tag: return tag_is(1, a) || tag_is(2, a) || tag_is(3, a);
    case ContextTemplate::PrevWord: return has(-1) && word_at_is(pos - 1, rule.word);
    case ContextTemplate::NextWord: return has(1) && word_at_is(pos + 1, rule.word);
    case ContextTemplate::SurroundTag: return tag_is(-1, a) && tag_is(1, b);
    case ContextTemplate::PrevBigram: return tag_is(-2, a) && tag_is(-1, b);
    case ContextTemplate::NextBigram: return tag_is(1, a) && tag_is(2, b);
  }
  return false;
}

inline bool contextual_rule_matches(const ContextualRule& rule, const SentenceState& sentence,
                                    std::size_t pos) {
  if (pos >= sentence.size() || sentence[pos].tag != rule.from) return false;
  return context_predicate_holds(
      rule, sentence.size(), pos, [&](std::size_t q) { return sentence[q].tag; },
      [&](std::size_t q, const std::string& w) { return sentence[q].word == w; });
}

// One left-to-right pass of a single rule; changes are visible to later
// positions of the same pass.
inline std::size_t apply_contextual_rule(const ContextualRule& rule, SentenceState& sentence) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (contextual_rule_matches(rule, sentence, i)) {
      sentence[i].tag = rule.to;
      ++changed;
    }
  }
  return changed;
}

inline void apply_contextual_rules(std::span<const ContextualRule> rules,
                                   std::vector<SentenceState>& corpus_state) {
  for (const auto& rule : rules) {
    for (auto& sentence : corpus_state) apply_contextual_rule(rule, sentence);
  }
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string serialize_rule(const LexicalRule& r, const Tagset& tagset) {
  std::string out = "LEX ";
  out += keyword(r.tmpl);
  out += ' ';
  out += r.arg;
  out += ' ';
  out += r.from ? tagset.name(*r.from) : std::string("-");
  out += ' ';
  out += tagset.name(r.to);
  return out;
}

inline std::string serialize_rule(const ContextualRule& r, const Tagset& tagset) {
  std::string out = "CTX ";
  out += keyword(r.tmpl);
  out += ' ' + tagset.name(r.from) + ' ' + tagset.name(r.to);
  for (const auto& a : rule_args(r, tagset)) out += ' ' + a;
  return out;
}

template <typename Rule>
std::string serialize_rules(std::span<const Rule> rules, const Tagset& tagset) {
  std::string out;
  for (const auto& r : rules) {
    out += serialize_rule(r, tagset);
    out += '\n';
  }
  return out;
}

struct RuleLists {
  std::vector<LexicalRule> lexical;
  std::vector<ContextualRule> contextual;
};

// Parses LEX and CTX lines in any mix; each list keeps file order.
inline RuleLists parse_rules(std::string_view text, const Tagset& tagset,
                             std::size_t max_affix_len = kDefaultMaxAffixLen) {
  RuleLists out;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line) || detail::is_comment(line)) return;
    const auto items = detail::split_items(line);
    const auto tag = [&](std::string_view name) {
      if (auto id = tagset.find(name)) return *id;
      throw TagsetError("line " + std::to_string(line_no) + ": unknown tag '" +
                        std::string(name) + "'");
    };
    const auto kind = items[0].second;
    if (items.size() < 2) throw ParseError("missing rule template", line_no);
    const auto tmpl_name = items[1].second;
    try {
      if (kind == "LEX") {
        auto tmpl = parse_lexical_template(tmpl_name);
        if (!tmpl) {
          throw ParseError("unknown lexical template '" + std::string(tmpl_name) + "'",
                           line_no);
        }
        if (items.size() != 5) throw ParseError("LEX rule needs 3 arguments", line_no);
        LexicalRule rule;
        rule.tmpl = *tmpl;
        if (!unicode::is_valid_utf8(items[2].second)) throw Error("invalid UTF-8");
        rule.arg = unicode::nfc(items[2].second);
        if (items[3].second != "-") rule.from = tag(items[3].second);
        rule.to = tag(items[4].second);
        validate(rule, tagset, max_affix_len);
        out.lexical.push_back(std::move(rule));
      } else if (kind == "CTX") {
        auto tmpl = parse_context_template(tmpl_name);
        if (!tmpl) {
          throw ParseError("unknown contextual template '" + std::string(tmpl_name) + "'",
                           line_no);
        }
        if (items.size() != 4 + arity(*tmpl)) {
          throw ParseError(std::string(tmpl_name) + " takes " +
                               std::to_string(arity(*tmpl)) + " argument(s)",
                           line_no);
        }
        const TagId from = tag(items[2].second);
        const TagId to = tag(items[3].second);
        ContextualRule rule;
        if (takes_word_arg(*tmpl)) {
          if (!unicode::is_valid_utf8(items[4].second)) throw Error("invalid UTF-8");
          rule = word_context_rule(*tmpl, from, to, unicode::nfc(items[4].second));
        } else {
          rule = tag_context_rule(*tmpl, from, to, tag(items[4].second),
                                  arity(*tmpl) == 2 ? tag(items[5].second) : TagId{});
        }
        validate(rule, tagset);
        out.contextual.push_back(std::move(rule));
      } else {
        throw ParseError("expected LEX or CTX", line_no);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const TagsetError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  });
  return out;
}

}  // namespace tbed

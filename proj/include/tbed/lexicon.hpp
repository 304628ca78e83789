#pragma once

// Frequency lexicon and initial tagging. Known words start with their most
// frequent training tag; unknown words go through the InitialRuleChain, a
// data-driven version of the "Latin / Greek capital / otherwise" default rule.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/unicode.hpp"

namespace tbed {

struct TagCount {
  TagId tag;
  std::uint64_t count = 0;
  friend bool operator==(const TagCount&, const TagCount&) = default;
};

// word -> tags ordered by descending count, ties by ascending tag name.
class Lexicon {
 public:
  using Entry = std::vector<TagCount>;

  explicit Lexicon(TagsetPtr tagset) : tagset_(std::move(tagset)) {}

  // Adds an entry, sorting it into canonical order. Throws on invalid counts,
  // foreign tags, repeated tags or a word already present.
  void insert(std::string word, Entry entry) {
    if (word.empty()) throw Error("empty word in lexicon");
    if (entry.empty()) throw Error("empty lexicon entry for '" + word + "'");
    for (std::size_t i = 0; i < entry.size(); ++i) {
      if (entry[i].count == 0) throw Error("non-positive count for '" + word + "'");
      if (!tagset_->contains(entry[i].tag)) throw TagsetError("tag outside tagset");
      for (std::size_t j = 0; j < i; ++j) {
        if (entry[j].tag == entry[i].tag) throw Error("repeated tag for '" + word + "'");
      }
    }
    std::sort(entry.begin(), entry.end(), [this](const TagCount& a, const TagCount& b) {
      if (a.count != b.count) return a.count > b.count;
      return tagset_->name(a.tag) < tagset_->name(b.tag);
    });
    if (!entries_.emplace(std::move(word), std::move(entry)).second) {
      throw Error("duplicate lexicon word");
    }
  }

  bool contains(std::string_view word) const {
    return entries_.find(std::string(word)) != entries_.end();
  }

  const Entry* find(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::optional<TagId> most_frequent_tag(std::string_view word) const {
    const Entry* e = find(word);
    if (!e) return std::nullopt;
    return e->front().tag;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const Tagset& tagset() const noexcept { return *tagset_; }
  const TagsetPtr& tagset_ptr() const noexcept { return tagset_; }
  const std::unordered_map<std::string, Entry>& entries() const noexcept { return entries_; }

  // Words in byte order.
  std::vector<std::string_view> sorted_words() const {
    std::vector<std::string_view> words;
    words.reserve(entries_.size());
    for (const auto& [w, _] : entries_) words.push_back(w);
    std::sort(words.begin(), words.end());
    return words;
  }

  std::uint64_t total_count() const {
    std::uint64_t n = 0;
    for (const auto& [_, e] : entries_) {
      for (const auto& tc : e) n += tc.count;
    }
    return n;
  }

  friend bool operator==(const Lexicon& a, const Lexicon& b) {
    return *a.tagset_ == *b.tagset_ && a.entries_ == b.entries_;
  }

 private:
  TagsetPtr tagset_;
  std::unordered_map<std::string, Entry> entries_;
};

inline Lexicon build_lexicon(const TaggedCorpus& corpus) {
  if (corpus.empty()) throw Error("cannot build a lexicon from an empty corpus");
  std::unordered_map<std::string, std::map<std::uint16_t, std::uint64_t>> counts;
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.tokens) ++counts[t.word][t.tag->value];
  }
  Lexicon lexicon(corpus.tagset_ptr());
  for (auto& [word, per_tag] : counts) {
    Lexicon::Entry entry;
    for (const auto& [tag, n] : per_tag) entry.push_back(TagCount{TagId{tag}, n});
    lexicon.insert(word, std::move(entry));
  }
  return lexicon;
}

// One line per word, `word tag1:count1 tag2:count2 ...`, words in byte order.
inline std::string serialize_lexicon(const Lexicon& lexicon) {
  std::string out;
  for (std::string_view word : lexicon.sorted_words()) {
    out += word;
    for (const auto& tc : *lexicon.find(word)) {
      out += ' ';
      out += lexicon.tagset().name(tc.tag);
      out += ':';
      out += std::to_string(tc.count);
    }
    out += '\n';
  }
  return out;
}

inline Lexicon parse_lexicon(std::string_view text, TagsetPtr tagset) {
  Lexicon lexicon(tagset);
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line) || detail::is_comment(line)) return;
    const auto items = detail::split_items(line);
    if (items.size() < 2) throw ParseError("expected 'word TAG:count ...'", line_no);
    if (!unicode::is_valid_utf8(items[0].second)) throw ParseError("invalid UTF-8", line_no);
    std::string word = unicode::nfc(items[0].second);
    Lexicon::Entry entry;
    for (std::size_t i = 1; i < items.size(); ++i) {
      const auto [offset, item] = items[i];
      const std::size_t column = detail::char_column(line, offset);
      const auto colon = item.rfind(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == item.size()) {
        throw ParseError("malformed 'TAG:count' item '" + std::string(item) + "'", line_no,
                         column);
      }
      const auto tag = tagset->find(item.substr(0, colon));
      if (!tag) {
        throw TagsetError("line " + std::to_string(line_no) + ": unknown tag '" +
                          std::string(item.substr(0, colon)) + "'");
      }
      const auto digits = item.substr(colon + 1);
      std::uint64_t count = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw ParseError("malformed count '" + std::string(digits) + "'", line_no, column);
      }
      if (count == 0) throw ParseError("non-positive count", line_no, column);
      entry.push_back(TagCount{*tag, count});
    }
    try {
      lexicon.insert(std::move(word), std::move(entry));
    } catch (const TagsetError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  });
  return lexicon;
}

enum class ScriptClass : std::uint8_t { LatinStart, GreekCapitalStart, Other };

inline bool is_basic_latin_letter(char32_t c) {
  return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z');
}

// Α-Ω, the tonos capitals Ά Έ Ή Ί Ό Ύ Ώ and the dialytika capitals Ϊ Ϋ.
inline bool is_greek_capital(char32_t c) {
  if (c >= 0x0391 && c <= 0x03A9) return c != 0x03A2;
  switch (c) {
    case 0x0386: case 0x0388: case 0x0389: case 0x038A:
    case 0x038C: case 0x038E: case 0x038F:
    case 0x03AA: case 0x03AB:
      return true;
    default:
      return false;
  }
}

// Expects an NFC-normalized word; decomposed capitals are composed first.
inline ScriptClass classify_script(std::string_view word) {
  if (word.empty()) throw Error("classify_script: empty word");
  const char32_t first = unicode::first_code_point(unicode::nfc(word));
  if (is_basic_latin_letter(first)) return ScriptClass::LatinStart;
  if (is_greek_capital(first)) return ScriptClass::GreekCapitalStart;
  return ScriptClass::Other;
}

enum class ScriptPredicate : std::uint8_t { StartsLatin, StartsGreekCapital, Always };

inline std::string_view predicate_keyword(ScriptPredicate p) {
  switch (p) {
    case ScriptPredicate::StartsLatin: return "STARTS_LATIN";
    case ScriptPredicate::StartsGreekCapital: return "STARTS_GREEK_CAPITAL";
    case ScriptPredicate::Always: return "ALWAYS";
  }
  return "";
}

inline std::optional<ScriptPredicate> parse_predicate_keyword(std::string_view s) {
  for (auto p : {ScriptPredicate::StartsLatin, ScriptPredicate::StartsGreekCapital,
                 ScriptPredicate::Always}) {
    if (predicate_keyword(p) == s) return p;
  }
  return std::nullopt;
}

inline bool predicate_holds(ScriptPredicate p, ScriptClass c) {
  switch (p) {
    case ScriptPredicate::StartsLatin: return c == ScriptClass::LatinStart;
    case ScriptPredicate::StartsGreekCapital: return c == ScriptClass::GreekCapitalStart;
    case ScriptPredicate::Always: return true;
  }
  return false;
}

// Ordered (predicate, role) branches; the last branch is ALWAYS.
class InitialRuleChain {
 public:
  struct Branch {
    ScriptPredicate predicate;
    Role role;
    friend bool operator==(const Branch&, const Branch&) = default;
  };

  explicit InitialRuleChain(std::vector<Branch> branches) : branches_(std::move(branches)) {
    if (branches_.empty() || branches_.back().predicate != ScriptPredicate::Always) {
      throw ConfigError("initial rule chain must end with an ALWAYS branch");
    }
  }

  // Foreign for Latin-initial words, masculine proper noun for Greek
  // capitals, feminine noun otherwise.
  static InitialRuleChain greek_default() {
    return InitialRuleChain({{ScriptPredicate::StartsLatin, Role::Foreign},
                             {ScriptPredicate::StartsGreekCapital, Role::ProperMascSg},
                             {ScriptPredicate::Always, Role::NounFemSg}});
  }

  const std::vector<Branch>& branches() const noexcept { return branches_; }

  Role role_for(std::string_view word) const {
    const ScriptClass c = classify_script(word);
    for (const auto& b : branches_) {
      if (predicate_holds(b.predicate, c)) return b.role;
    }
    return branches_.back().role;
  }

  void check_against(const Tagset& tagset) const {
    for (const auto& b : branches_) {
      if (!tagset.has_role(b.role)) {
        throw TagsetError("initial rule role " + std::string(role_key(b.role)) +
                          " is not bound in the tagset");
      }
    }
  }

  friend bool operator==(const InitialRuleChain&, const InitialRuleChain&) = default;

 private:
  std::vector<Branch> branches_;
};

inline TagId initial_tag(std::string_view word, const Lexicon& lexicon,
                         const InitialRuleChain& chain, const Tagset& tagset) {
  if (const auto* entry = lexicon.find(word)) return entry->front().tag;
  return tagset.role(chain.role_for(word));
}

}  // namespace tbed

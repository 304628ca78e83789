#pragma once

// Tokens, sentences, tagged corpora and the tagset configuration, plus the
// text formats and the deterministic shuffling/splitting used by evaluation.
//
// Tagged corpus format: one sentence per line, whitespace-separated
// `word/TAG` items, the tag being everything after the last '/'.
// Raw corpus format: one sentence per line, whitespace-separated words.
// Tagset format: `tag <NAME>` and `role <ROLEKEY> <NAME>` lines, `#` comments.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tbed/error.hpp"
#include "tbed/random.hpp"
#include "tbed/unicode.hpp"

namespace tbed {

// Index of a tag inside its Tagset.
struct TagId {
  std::uint16_t value = 0;
  friend auto operator<=>(const TagId&, const TagId&) = default;
};

// Tags the initial (unknown word) rule needs, independent of tag spelling.
enum class Role : std::uint8_t { Foreign, ProperMascSg, NounFemSg };

inline constexpr std::array<Role, 3> kAllRoles = {Role::Foreign, Role::ProperMascSg,
                                                  Role::NounFemSg};

inline std::string_view role_key(Role role) {
  switch (role) {
    case Role::Foreign: return "FOREIGN";
    case Role::ProperMascSg: return "PROPER_MASC_SG";
    case Role::NounFemSg: return "NOUN_FEM_SG";
  }
  return "";
}

inline std::optional<Role> parse_role_key(std::string_view key) {
  for (Role r : kAllRoles) {
    if (role_key(r) == key) return r;
  }
  return std::nullopt;
}

namespace detail {

// Splits on ASCII whitespace; returns (byte offset, item) pairs.
inline std::vector<std::pair<std::size_t, std::string_view>> split_items(
    std::string_view line) {
  std::vector<std::pair<std::size_t, std::string_view>> items;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && unicode::is_separator(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !unicode::is_separator(line[i])) ++i;
    if (i > start) items.emplace_back(start, line.substr(start, i - start));
  }
  return items;
}

// Calls fn(line_number, line) for each line; line numbers are 1-based.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(line_no, text.substr(pos, end - pos));
    pos = end + 1;
  }
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return unicode::is_separator(c); });
}

inline bool is_comment(std::string_view line) {
  const auto items = split_items(line);
  return !items.empty() && items.front().second.front() == '#';
}

inline bool valid_tag_name(std::string_view name) {
  if (name.empty() || name == "-") return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == '/' || unicode::is_separator(c);
  });
}

}  // namespace detail

class Tagset {
 public:
  Tagset() = default;

  // Declares a tag; throws on duplicates or invalid names.
  TagId add(std::string_view name) {
    if (!detail::valid_tag_name(name)) {
      throw TagsetError("invalid tag name '" + std::string(name) + "'");
    }
    if (index_.contains(std::string(name))) {
      throw TagsetError("duplicate tag '" + std::string(name) + "'");
    }
    if (names_.size() >= 0xFFFF) throw TagsetError("too many tags");
    const TagId id{static_cast<std::uint16_t>(names_.size())};
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  void bind(Role role, std::string_view name) {
    const auto id = find(name);
    if (!id) {
      throw TagsetError("role " + std::string(role_key(role)) +
                        " bound to undeclared tag '" + std::string(name) + "'");
    }
    roles_[static_cast<std::size_t>(role)] = *id;
  }

  std::optional<TagId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Like find() but throws TagsetError for unknown names.
  TagId at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw TagsetError("unknown tag '" + std::string(name) + "'");
  }

  const std::string& name(TagId id) const { return names_.at(id.value); }
  std::size_t size() const noexcept { return names_.size(); }
  bool contains(TagId id) const noexcept { return id.value < names_.size(); }

  std::vector<TagId> tags() const {
    std::vector<TagId> out(names_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = TagId{static_cast<std::uint16_t>(i)};
    }
    return out;
  }

  bool has_role(Role role) const {
    return roles_[static_cast<std::size_t>(role)].has_value();
  }

  TagId role(Role role) const {
    const auto& bound = roles_[static_cast<std::size_t>(role)];
    if (!bound) throw TagsetError("role " + std::string(role_key(role)) + " is unbound");
    return *bound;
  }

  // Throws if any required role is unbound.
  void require_roles() const {
    for (Role r : kAllRoles) {
      if (!has_role(r)) {
        throw TagsetError("missing role " + std::string(role_key(r)));
      }
    }
  }

  friend bool operator==(const Tagset& a, const Tagset& b) {
    return a.names_ == b.names_ && a.roles_ == b.roles_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, TagId> index_;
  std::array<std::optional<TagId>, 3> roles_{};
};

using TagsetPtr = std::shared_ptr<const Tagset>;

inline Tagset load_tagset(std::string_view text) {
  Tagset tagset;
  std::vector<std::tuple<std::size_t, Role, std::string>> bindings;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line) || detail::is_comment(line)) return;
    const auto items = detail::split_items(line);
    const auto keyword = items[0].second;
    try {
      if (keyword == "tag" && items.size() == 2) {
        tagset.add(items[1].second);
      } else if (keyword == "role" && items.size() == 3) {
        auto role = parse_role_key(items[1].second);
        if (!role) {
          throw ParseError("unknown role key '" + std::string(items[1].second) + "'",
                           line_no);
        }
        bindings.emplace_back(line_no, *role, std::string(items[2].second));
      } else {
        throw ParseError("expected 'tag <NAME>' or 'role <ROLEKEY> <NAME>'", line_no);
      }
    } catch (const TagsetError& e) {
      throw TagsetError("line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  // Roles may reference tags declared later in the file.
  for (const auto& [line_no, role, name] : bindings) {
    try {
      tagset.bind(role, name);
    } catch (const TagsetError& e) {
      throw TagsetError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  tagset.require_roles();
  return tagset;
}

inline std::string serialize_tagset(const Tagset& tagset) {
  std::string out;
  for (TagId id : tagset.tags()) out += "tag " + tagset.name(id) + "\n";
  for (Role r : kAllRoles) {
    if (tagset.has_role(r)) {
      out += "role " + std::string(role_key(r)) + " " + tagset.name(tagset.role(r)) + "\n";
    }
  }
  return out;
}

struct Token {
  std::string word;
  std::optional<TagId> tag;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t size() const noexcept { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Sentences of fully tagged tokens over a shared tagset.
class TaggedCorpus {
 public:
  TaggedCorpus() : tagset_(std::make_shared<Tagset>()) {}

  TaggedCorpus(TagsetPtr tagset, std::vector<Sentence> sentences)
      : tagset_(std::move(tagset)), sentences_(std::move(sentences)) {
    if (!tagset_) throw TagsetError("corpus without tagset");
    for (const auto& s : sentences_) {
      if (s.tokens.empty()) throw Error("empty sentence in tagged corpus");
      for (const auto& t : s.tokens) {
        if (t.word.empty()) throw Error("empty word in tagged corpus");
        if (!t.tag || !tagset_->contains(*t.tag)) {
          throw TagsetError("token '" + t.word + "' lacks a valid tag");
        }
      }
      word_count_ += s.size();
    }
  }

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  const Tagset& tagset() const noexcept { return *tagset_; }
  const TagsetPtr& tagset_ptr() const noexcept { return tagset_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  std::size_t word_count() const noexcept { return word_count_; }

  // Sub-corpus made of the given sentence indices, in the given order.
  TaggedCorpus select(std::span<const std::size_t> indices) const {
    std::vector<Sentence> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(sentences_.at(i));
    return TaggedCorpus(tagset_, std::move(out));
  }

  friend bool operator==(const TaggedCorpus& a, const TaggedCorpus& b) {
    return *a.tagset_ == *b.tagset_ && a.sentences_ == b.sentences_;
  }

 private:
  TagsetPtr tagset_;
  std::vector<Sentence> sentences_;
  std::size_t word_count_ = 0;
};

namespace detail {

inline std::string normalized_word(std::string_view word, std::size_t line_no,
                                   std::size_t column) {
  if (!unicode::is_valid_utf8(word)) throw ParseError("invalid UTF-8", line_no, column);
  std::string w = unicode::nfc(word);
  if (w.empty()) throw ParseError("empty word", line_no, column);
  return w;
}

inline std::size_t char_column(std::string_view line, std::size_t byte_offset) {
  return unicode::length(line.substr(0, byte_offset)) + 1;
}

}  // namespace detail

inline TaggedCorpus parse_tagged_corpus(std::string_view text, TagsetPtr tagset) {
  std::vector<Sentence> sentences;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line)) return;
    Sentence sentence;
    for (const auto& [offset, item] : detail::split_items(line)) {
      const std::size_t column = detail::char_column(line, offset);
      const auto slash = item.rfind('/');
      if (slash == std::string_view::npos) {
        throw ParseError("item '" + std::string(item) + "' has no '/TAG'", line_no, column);
      }
      if (slash == 0) throw ParseError("empty word", line_no, column);
      if (slash + 1 == item.size()) throw ParseError("empty tag", line_no, column);
      const auto tag_name = item.substr(slash + 1);
      const auto tag = tagset->find(tag_name);
      if (!tag) {
        throw TagsetError("line " + std::to_string(line_no) + ": unknown tag '" +
                          std::string(tag_name) + "'");
      }
      sentence.tokens.push_back(
          Token{detail::normalized_word(item.substr(0, slash), line_no, column), *tag});
    }
    sentences.push_back(std::move(sentence));
  });
  return TaggedCorpus(std::move(tagset), std::move(sentences));
}

inline std::string serialize_sentence(const Sentence& sentence, const Tagset& tagset) {
  std::string out;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (i) out += ' ';
    out += sentence.tokens[i].word;
    if (sentence.tokens[i].tag) {
      out += '/';
      out += tagset.name(*sentence.tokens[i].tag);
    }
  }
  return out;
}

inline std::string serialize_tagged_corpus(const TaggedCorpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences()) {
    out += serialize_sentence(s, corpus.tagset());
    out += '\n';
  }
  return out;
}

// Words of one raw line; empty if the line is blank.
inline Sentence parse_raw_sentence(std::string_view line, std::size_t line_no = 1) {
  Sentence sentence;
  for (const auto& [offset, item] : detail::split_items(line)) {
    sentence.tokens.push_back(Token{
        detail::normalized_word(item, line_no, detail::char_column(line, offset)),
        std::nullopt});
  }
  return sentence;
}

inline std::vector<Sentence> parse_raw_corpus(std::string_view text) {
  std::vector<Sentence> out;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto s = parse_raw_sentence(line, line_no);
    if (!s.tokens.empty()) out.push_back(std::move(s));
  });
  return out;
}

// Copy of the sentences with tags removed.
inline std::vector<Sentence> strip_tags(const TaggedCorpus& corpus) {
  std::vector<Sentence> out = corpus.sentences();
  for (auto& s : out) {
    for (auto& t : s.tokens) t.tag.reset();
  }
  return out;
}

inline TaggedCorpus shuffle_sentences(const TaggedCorpus& corpus, std::uint64_t seed) {
  std::vector<Sentence> sentences = corpus.sentences();
  Rng rng(seed);
  rng.shuffle(std::span<Sentence>(sentences));
  return TaggedCorpus(corpus.tagset_ptr(), std::move(sentences));
}

// Sentence-level fold assignment for k-fold cross-validation.
class FoldPlan {
 public:
  FoldPlan(std::size_t k, std::vector<std::size_t> assignments)
      : k_(k), assignments_(std::move(assignments)) {
    if (k_ < 2) throw ConfigError("k must be at least 2");
    for (std::size_t f : assignments_) {
      if (f >= k_) throw ConfigError("fold id out of range");
    }
  }

  std::size_t k() const noexcept { return k_; }
  const std::vector<std::size_t>& assignments() const noexcept { return assignments_; }

  // Sentence indices in ascending order.
  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments_.size(); ++i) {
      if (assignments_[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments_.size(); ++i) {
      if (assignments_[i] != fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t f : assignments_) ++sizes[f];
    return sizes;
  }

 private:
  std::size_t k_;
  std::vector<std::size_t> assignments_;
};

// Seeded shuffle of sentence indices, then round-robin into k folds.
inline FoldPlan kfold_split(const TaggedCorpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be at least 2");
  if (corpus.size() < k) {
    throw ConfigError("corpus has " + std::to_string(corpus.size()) +
                      " sentences, fewer than k=" + std::to_string(k));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> assignments(corpus.size());
  for (std::size_t p = 0; p < order.size(); ++p) assignments[order[p]] = p % k;
  return FoldPlan(k, std::move(assignments));
}

// Longest sentence prefix with at most n_words words; never splits a
// sentence, and keeps the first sentence even if it alone is too long.
inline TaggedCorpus truncate_to_words(const TaggedCorpus& corpus, std::size_t n_words) {
  if (n_words == 0) throw ConfigError("n_words must be positive");
  std::vector<Sentence> out;
  std::size_t total = 0;
  for (const auto& s : corpus.sentences()) {
    if (!out.empty() && total + s.size() > n_words) break;
    total += s.size();
    out.push_back(s);
    if (total >= n_words) break;
  }
  return TaggedCorpus(corpus.tagset_ptr(), std::move(out));
}

}  // namespace tbed

#pragma once

// Trained model and the tagging pipeline: initial tags, lexical rules on
// unknown word types, then contextual rules on tokens.

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/rules.hpp"

namespace tbed {

struct TaggerModel {
  TagsetPtr tagset;
  Lexicon lexicon;
  InitialRuleChain initial_chain = InitialRuleChain::greek_default();
  std::vector<LexicalRule> lexical_rules;
  std::vector<ContextualRule> contextual_rules;

  const Tagset& tags() const { return *tagset; }

  void validate(std::size_t max_affix_len = kDefaultMaxAffixLen) const {
    if (!tagset) throw TagsetError("model without tagset");
    if (!(*lexicon.tagset_ptr() == *tagset)) throw TagsetError("lexicon tagset mismatch");
    initial_chain.check_against(*tagset);
    for (const auto& r : lexical_rules) tbed::validate(r, *tagset, max_affix_len);
    for (const auto& r : contextual_rules) tbed::validate(r, *tagset);
  }

  friend bool operator==(const TaggerModel& a, const TaggerModel& b) {
    return *a.tagset == *b.tagset && a.lexicon == b.lexicon &&
           a.initial_chain == b.initial_chain && a.lexical_rules == b.lexical_rules &&
           a.contextual_rules == b.contextual_rules;
  }
};

// Tags sentences one at a time. Lexical rules act per word type, so the
// unknown-word tags can be cached across sentences without changing results.
class Tagger {
 public:
  explicit Tagger(const TaggerModel& model) : model_(&model) {}

  TagId initial_or_lexical(const std::string& word) {
    if (const auto* entry = model_->lexicon.find(word)) return entry->front().tag;
    auto it = unknown_cache_.find(word);
    if (it != unknown_cache_.end()) return it->second;
    const TagId tag = tag_unknown_word(word, model_->lexical_rules, model_->lexicon,
                                       model_->initial_chain, model_->tags());
    unknown_cache_.emplace(word, tag);
    return tag;
  }

  SentenceState tag_state(const Sentence& sentence) {
    SentenceState state;
    state.reserve(sentence.size());
    for (const auto& t : sentence.tokens) state.push_back({t.word, initial_or_lexical(t.word)});
    for (const auto& rule : model_->contextual_rules) apply_contextual_rule(rule, state);
    return state;
  }

  Sentence tag(const Sentence& sentence) {
    Sentence out;
    out.tokens.reserve(sentence.size());
    for (auto& ts : tag_state(sentence)) out.tokens.push_back(Token{std::move(ts.word), ts.tag});
    return out;
  }

 private:
  const TaggerModel* model_;
  std::unordered_map<std::string, TagId> unknown_cache_;
};

inline TaggedCorpus tag_corpus(std::span<const Sentence> raw, const TaggerModel& model) {
  Tagger tagger(model);
  std::vector<Sentence> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    if (!s.tokens.empty()) out.push_back(tagger.tag(s));
  }
  return TaggedCorpus(model.tagset, std::move(out));
}

// Initial tags only (lexicon or initial rule chain), no transformations.
inline TaggedCorpus initial_tagging(std::span<const Sentence> raw, const TaggerModel& model) {
  std::vector<Sentence> out;
  for (const auto& s : raw) {
    if (s.tokens.empty()) continue;
    Sentence tagged;
    for (const auto& t : s.tokens) {
      tagged.tokens.push_back(
          Token{t.word, initial_tag(t.word, model.lexicon, model.initial_chain, model.tags())});
    }
    out.push_back(std::move(tagged));
  }
  return TaggedCorpus(model.tagset, std::move(out));
}

}  // namespace tbed

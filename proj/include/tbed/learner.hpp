#pragma once

// Greedy error-driven training of the two rule lists.
//
// Lexical phase: the training corpus is split into a lexicon half and a rule
// half; word types of the rule half missing from the lexicon half play the
// role of unknown words. Scores count word types weighted by occurrences.
//
// Contextual phase: the full training corpus is tagged with the lexicon and
// lexical rules; each iteration picks the rule with the largest true error
// reduction when applied left to right over the corpus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/random.hpp"
#include "tbed/rules.hpp"
#include "tbed/tagger.hpp"
#include "tbed/unicode.hpp"

namespace tbed {

struct TrainConfig {
  std::size_t score_threshold = 2;
  std::optional<std::size_t> max_rules_per_phase;  // nullopt = unlimited
  double lexicon_split_fraction = 0.5;
  std::size_t max_affix_len = kDefaultMaxAffixLen;
  std::uint64_t seed = 0;

  void validate() const {
    if (score_threshold < 1) throw ConfigError("score threshold must be at least 1");
    if (!(lexicon_split_fraction > 0.0 && lexicon_split_fraction < 1.0)) {
      throw ConfigError("lexicon split fraction must lie in (0, 1)");
    }
    if (max_affix_len < 1) throw ConfigError("max affix length must be at least 1");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct RuleScore {
  std::int64_t good = 0;
  std::int64_t bad = 0;
  std::int64_t net() const noexcept { return good - bad; }
  friend bool operator==(const RuleScore&, const RuleScore&) = default;
};

template <typename Rule>
struct ScoredRule {
  Rule rule;
  RuleScore score;
};

// True if (a, net_a) should be preferred over (b, net_b): larger net first,
// then the smaller order key.
template <typename Rule>
bool preferred(const Rule& a, std::int64_t net_a, const Rule& b, std::int64_t net_b,
               const Tagset& tagset) {
  if (net_a != net_b) return net_a > net_b;
  return order_key(a, tagset) < order_key(b, tagset);
}

// Best candidate by net score with the deterministic tie-break, or nullopt
// when no candidate reaches `threshold`.
template <typename Rule, typename Scorer>
std::optional<ScoredRule<Rule>> select_best_rule(std::span<const Rule> candidates,
                                                 Scorer&& scorer, const Tagset& tagset,
                                                 std::int64_t threshold) {
  std::optional<ScoredRule<Rule>> best;
  for (const auto& rule : candidates) {
    const RuleScore s = scorer(rule);
    if (!best || preferred(rule, s.net(), best->rule, best->score.net(), tagset)) {
      best = ScoredRule<Rule>{rule, s};
    }
  }
  if (!best || best->score.net() < threshold) return std::nullopt;
  return best;
}

enum class Phase { Lexical, Contextual };

inline std::string_view phase_name(Phase p) {
  return p == Phase::Lexical ? "lexical" : "contextual";
}

// One accepted rule. errors_remaining is measured after applying it:
// weighted type errors for the lexical phase, token errors for contextual.
struct TrainEvent {
  Phase phase;
  std::size_t iteration;  // 1-based
  std::string rule;
  RuleScore score;
  std::uint64_t errors_remaining;
};

using TrainObserver = std::function<void(const TrainEvent&)>;

// `phase iteration rule net errors_remaining`, tab separated.
inline std::string format_train_event(const TrainEvent& e) {
  return std::string(phase_name(e.phase)) + '\t' + std::to_string(e.iteration) + '\t' + e.rule +
         '\t' + std::to_string(e.score.net()) + '\t' + std::to_string(e.errors_remaining);
}

// ---------------------------------------------------------------------------
// Unknown-word simulation for the lexical phase

struct UnknownWordSplit {
  TaggedCorpus lexicon_part;
  TaggedCorpus rule_part;
};

// Seeded sentence-level split; the lexicon part gets ceil(fraction * S)
// sentences, clamped so both parts are non-empty.
inline UnknownWordSplit split_for_unknown_training(const TaggedCorpus& corpus, double fraction,
                                                   std::uint64_t seed) {
  if (corpus.size() < 2) throw ConfigError("need at least 2 sentences to train lexical rules");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("fraction must lie in (0, 1)");
  const std::size_t n = corpus.size();
  auto n_lex = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  n_lex = std::clamp<std::size_t>(n_lex, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> lex(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_lex));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_lex), order.end());
  std::sort(lex.begin(), lex.end());
  std::sort(rest.begin(), rest.end());
  return {corpus.select(lex), corpus.select(rest)};
}

struct TypeState {
  TagId current;
  TagId gold;
  std::uint64_t count = 0;
  friend bool operator==(const TypeState&, const TypeState&) = default;
};

// Unknown word types of the rule part, ordered by word.
using LexicalAssignments = std::map<std::string, TypeState, std::less<>>;

struct LexicalTrainingState {
  Lexicon guess_lexicon;
  LexicalAssignments assignments;
};

inline std::uint64_t weighted_type_errors(const LexicalAssignments& assignments) {
  std::uint64_t errors = 0;
  for (const auto& [_, t] : assignments) {
    if (t.current != t.gold) errors += t.count;
  }
  return errors;
}

// Guess lexicon from the lexicon part; every word type of the rule part
// missing from it starts at its initial-rule tag, with its modal gold tag
// (ties by tag name) as the target.
inline LexicalTrainingState prepare_lexical_training(const TaggedCorpus& train,
                                                     const InitialRuleChain& chain,
                                                     const TrainConfig& config) {
  auto split = split_for_unknown_training(train, config.lexicon_split_fraction, config.seed);
  Lexicon guess = build_lexicon(split.lexicon_part);
  const Tagset& tagset = train.tagset();

  std::map<std::string, std::map<std::uint16_t, std::uint64_t>, std::less<>> counts;
  for (const auto& s : split.rule_part.sentences()) {
    for (const auto& t : s.tokens) {
      if (!guess.contains(t.word)) ++counts[t.word][t.tag->value];
    }
  }
  LexicalAssignments assignments;
  for (const auto& [word, per_tag] : counts) {
    TypeState state;
    std::uint64_t best = 0;
    for (const auto& [tag, n] : per_tag) {
      state.count += n;
      const TagId id{tag};
      if (n > best || (n == best && tagset.name(id) < tagset.name(state.gold))) {
        best = n;
        state.gold = id;
      }
    }
    state.current = tagset.role(chain.role_for(word));
    assignments.emplace(word, state);
  }
  return {std::move(guess), std::move(assignments)};
}

// Static per-type score; exact, since a lexical rule looks only at the type
// itself and the fixed lexicon.
inline RuleScore score_lexical_candidate(const LexicalRule& rule,
                                         const LexicalAssignments& assignments,
                                         const Lexicon& lexicon) {
  RuleScore score;
  for (const auto& [word, t] : assignments) {
    if (!lexical_rule_matches(rule, word, t.current, lexicon)) continue;
    const auto w = static_cast<std::int64_t>(t.count);
    if (t.current != t.gold && rule.to == t.gold) score.good += w;
    if (t.current == t.gold && rule.to != t.gold) score.bad += w;
  }
  return score;
}

namespace detail {

// Lexicon words sorted forwards and by reversed code points, for finding
// words that extend a given word by a suffix or prefix.
class AffixIndex {
 public:
  explicit AffixIndex(const Lexicon& lexicon) {
    for (std::string_view w : lexicon.sorted_words()) forward_.emplace_back(w);
    for (const auto& w : forward_) {
      auto cps = *unicode::decode(w);
      std::reverse(cps.begin(), cps.end());
      reversed_.emplace_back(unicode::encode(cps), w);
    }
    std::sort(reversed_.begin(), reversed_.end());
  }

  // Args s with 1 <= |s| <= max_len such that word + s is a lexicon word.
  std::vector<std::string> added_suffixes(const std::string& word, std::size_t max_len) const {
    std::vector<std::string> out;
    auto it = std::lower_bound(forward_.begin(), forward_.end(), word);
    for (; it != forward_.end() && it->starts_with(word); ++it) {
      const std::size_t extra = unicode::length(std::string_view(*it).substr(word.size()));
      if (extra >= 1 && extra <= max_len) out.push_back(it->substr(word.size()));
    }
    return out;
  }

  std::vector<std::string> added_prefixes(std::u32string_view word_cps, std::size_t word_bytes,
                                          std::size_t max_len) const {
    std::u32string rev(word_cps);
    std::reverse(rev.begin(), rev.end());
    const std::string key = unicode::encode(rev);
    std::vector<std::string> out;
    auto it = std::lower_bound(reversed_.begin(), reversed_.end(),
                               std::pair<std::string, std::string>{key, {}});
    for (; it != reversed_.end() && it->first.starts_with(key); ++it) {
      const std::string& original = it->second;
      const std::string_view head = std::string_view(original).substr(0, original.size() - word_bytes);
      const std::size_t extra = unicode::length(head);
      if (extra >= 1 && extra <= max_len) out.emplace_back(head);
    }
    return out;
  }

 private:
  std::vector<std::string> forward_;
  std::vector<std::pair<std::string, std::string>> reversed_;
};

struct LexicalFeature {
  LexicalTemplate tmpl;
  std::string arg;
};

// Every (template, arg) whose predicate holds for `word`.
inline std::vector<LexicalFeature> lexical_features(const std::string& word,
                                                    const Lexicon& lexicon,
                                                    const AffixIndex& index,
                                                    std::size_t max_len) {
  std::vector<LexicalFeature> out;
  const std::u32string cps = *unicode::decode(word);
  const std::size_t n = cps.size();
  const std::u32string_view v(cps);
  for (std::size_t len = 1; len <= std::min(max_len, n); ++len) {
    const std::string suffix = unicode::encode(v.substr(n - len));
    const std::string prefix = unicode::encode(v.substr(0, len));
    out.push_back({LexicalTemplate::HasSuffix, suffix});
    out.push_back({LexicalTemplate::HasPrefix, prefix});
    if (len < n) {
      if (lexicon.contains(std::string_view(word).substr(0, word.size() - suffix.size()))) {
        out.push_back({LexicalTemplate::DeleteSuffix, suffix});
      }
      if (lexicon.contains(std::string_view(word).substr(prefix.size()))) {
        out.push_back({LexicalTemplate::DeletePrefix, prefix});
      }
    }
  }
  for (auto& s : index.added_suffixes(word, max_len)) {
    out.push_back({LexicalTemplate::AddSuffix, std::move(s)});
  }
  for (auto& s : index.added_prefixes(v, word.size(), max_len)) {
    out.push_back({LexicalTemplate::AddPrefix, std::move(s)});
  }
  std::u32string seen;
  for (char32_t c : cps) {
    if (seen.find(c) != std::u32string::npos) continue;
    seen.push_back(c);
    out.push_back({LexicalTemplate::HasChar, unicode::encode(std::u32string_view(&c, 1))});
  }
  return out;
}

}  // namespace detail

struct LexicalLearnResult {
  Lexicon lexicon;
  std::vector<LexicalRule> rules;
};

// Learns lexical rules on the prepared state in place and returns them.
inline std::vector<LexicalRule> learn_lexical_rules_on(LexicalTrainingState& state,
                                                       const Tagset& tagset,
                                                       const TrainConfig& config,
                                                       const TrainObserver& observer = {}) {
  std::vector<LexicalRule> rules;
  if (config.max_rules_per_phase && *config.max_rules_per_phase == 0) return rules;

  // Features never change: they depend only on the word and the guess lexicon.
  const detail::AffixIndex index(state.guess_lexicon);
  std::unordered_map<std::string, std::size_t> feature_ids;
  std::vector<detail::LexicalFeature> features;
  std::vector<std::pair<TypeState*, std::vector<std::size_t>>> types;
  for (auto& [word, t] : state.assignments) {
    std::vector<std::size_t> ids;
    for (auto& f : detail::lexical_features(word, state.guess_lexicon, index,
                                            config.max_affix_len)) {
      std::string key(1, static_cast<char>(f.tmpl));
      key += f.arg;
      auto [it, inserted] = feature_ids.emplace(std::move(key), features.size());
      if (inserted) features.push_back(std::move(f));
      ids.push_back(it->second);
    }
    types.emplace_back(&t, std::move(ids));
  }

  struct Cell {
    TagId current;
    TagId gold;
    std::int64_t weight;
  };
  std::vector<std::vector<Cell>> cells(features.size());
  std::uint64_t errors = weighted_type_errors(state.assignments);

  for (std::size_t iteration = 1;; ++iteration) {
    if (config.max_rules_per_phase && rules.size() >= *config.max_rules_per_phase) break;
    if (errors == 0) break;

    for (auto& c : cells) c.clear();
    for (const auto& [t, ids] : types) {
      for (std::size_t f : ids) {
        auto& bucket = cells[f];
        auto it = std::find_if(bucket.begin(), bucket.end(), [&](const Cell& c) {
          return c.current == t->current && c.gold == t->gold;
        });
        if (it == bucket.end()) {
          bucket.push_back({t->current, t->gold, static_cast<std::int64_t>(t->count)});
        } else {
          it->weight += static_cast<std::int64_t>(t->count);
        }
      }
    }

    std::optional<ScoredRule<LexicalRule>> best;
    auto consider = [&](std::size_t f, std::optional<TagId> from, TagId to) {
      RuleScore s;
      for (const auto& c : cells[f]) {
        if (from && c.current != *from) continue;
        if (c.current != c.gold && c.gold == to) s.good += c.weight;
        if (c.current == c.gold && c.current != to) s.bad += c.weight;
      }
      if (best && s.net() < best->score.net()) return;
      LexicalRule rule{features[f].tmpl, features[f].arg, from, to};
      if (!best || preferred(rule, s.net(), best->rule, best->score.net(), tagset)) {
        best = ScoredRule<LexicalRule>{std::move(rule), s};
      }
    };
    for (std::size_t f = 0; f < cells.size(); ++f) {
      // Only rules that fix at least one type can have a positive score.
      for (const auto& err : cells[f]) {
        if (err.current == err.gold) continue;
        consider(f, std::nullopt, err.gold);
        consider(f, err.current, err.gold);
      }
    }
    if (!best || best->score.net() < static_cast<std::int64_t>(config.score_threshold)) break;

    for (auto& [word, t] : state.assignments) {
      if (lexical_rule_matches(best->rule, word, t.current, state.guess_lexicon)) {
        t.current = best->rule.to;
      }
    }
    errors = weighted_type_errors(state.assignments);
    if (observer) {
      observer({Phase::Lexical, iteration, serialize_rule(best->rule, tagset), best->score,
                errors});
    }
    rules.push_back(std::move(best->rule));
  }
  return rules;
}

// Lexical rules learned on the unknown-word simulation; the returned
// lexicon is rebuilt from the full training corpus.
inline LexicalLearnResult learn_lexical_rules(const TaggedCorpus& train,
                                              const InitialRuleChain& chain,
                                              const TrainConfig& config,
                                              const TrainObserver& observer = {}) {
  config.validate();
  if (train.empty()) throw ConfigError("cannot train on an empty corpus");
  std::vector<LexicalRule> rules;
  if (train.size() >= 2) {
    auto state = prepare_lexical_training(train, chain, config);
    rules = learn_lexical_rules_on(state, train.tagset(), config, observer);
  }
  return {build_lexicon(train), std::move(rules)};
}

// ---------------------------------------------------------------------------
// Contextual phase

struct ContextualTrainingState {
  std::vector<SentenceState> state;
  std::vector<std::vector<TagId>> gold;
};

inline std::uint64_t token_errors(const ContextualTrainingState& s) {
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    for (std::size_t j = 0; j < s.state[i].size(); ++j) {
      if (s.state[i][j].tag != s.gold[i][j]) ++errors;
    }
  }
  return errors;
}

// Training tokens tagged by lexicon, initial rule chain and lexical rules.
inline ContextualTrainingState prepare_contextual_training(
    const TaggedCorpus& train, const Lexicon& lexicon, std::span<const LexicalRule> lexical_rules,
    const InitialRuleChain& chain) {
  TaggerModel model{train.tagset_ptr(), lexicon, chain,
                    std::vector<LexicalRule>(lexical_rules.begin(), lexical_rules.end()),
                    {}};
  Tagger tagger(model);
  ContextualTrainingState out;
  out.state.reserve(train.size());
  for (const auto& s : train.sentences()) {
    out.state.push_back(tagger.tag_state(s));
    std::vector<TagId> gold;
    for (const auto& t : s.tokens) gold.push_back(*t.tag);
    out.gold.push_back(std::move(gold));
  }
  return out;
}

namespace detail {

inline void check_alignment(const std::vector<SentenceState>& state, const TaggedCorpus& gold) {
  if (state.size() != gold.size()) throw AlignmentError("sentence count differs");
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& g = gold.sentences()[i].tokens;
    if (g.size() != state[i].size()) {
      throw AlignmentError("sentence " + std::to_string(i + 1) + " length differs");
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g[j].word != state[i][j].word) {
        throw AlignmentError("sentence " + std::to_string(i + 1) + ", token " +
                             std::to_string(j + 1) + ": '" + state[i][j].word + "' vs '" +
                             g[j].word + "'");
      }
    }
  }
}

}  // namespace detail

// Static score: every context check reads the state before application.
inline RuleScore score_contextual_candidate(const ContextualRule& rule,
                                            const std::vector<SentenceState>& corpus_state,
                                            const TaggedCorpus& gold) {
  detail::check_alignment(corpus_state, gold);
  RuleScore score;
  for (std::size_t i = 0; i < corpus_state.size(); ++i) {
    const auto& g = gold.sentences()[i].tokens;
    for (std::size_t j = 0; j < corpus_state[i].size(); ++j) {
      if (!contextual_rule_matches(rule, corpus_state[i], j)) continue;
      const TagId cur = corpus_state[i][j].tag;
      if (cur == *g[j].tag) {
        ++score.bad;
      } else if (rule.to == *g[j].tag) {
        ++score.good;
      }
    }
  }
  return score;
}

// Exact error change of applying one rule left to right, computed without
// copying the corpus: only positions currently tagged from_tag can change,
// and within a sentence earlier changes are overlaid on later checks.
class ContextualScorer {
 public:
  explicit ContextualScorer(const ContextualTrainingState& s, std::size_t tag_count)
      : s_(&s), by_tag_(tag_count) {
    for (std::uint32_t i = 0; i < s.state.size(); ++i) {
      for (std::uint32_t j = 0; j < s.state[i].size(); ++j) {
        by_tag_[s.state[i][j].tag.value].emplace_back(i, j);
      }
    }
  }

  RuleScore score(const ContextualRule& rule) const {
    RuleScore score;
    if (rule.from.value >= by_tag_.size()) return score;
    std::uint32_t sentence = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::size_t> changed;
    for (const auto& [si, pos] : by_tag_[rule.from.value]) {
      if (si != sentence) {
        sentence = si;
        changed.clear();
      }
      const auto& sent = s_->state[si];
      const auto tag_at = [&](std::size_t q) {
        if (q < pos) {
          const std::size_t lo = changed.size() > 3 ? changed.size() - 3 : 0;
          for (std::size_t k = lo; k < changed.size(); ++k) {
            if (changed[k] == q) return rule.to;
          }
        }
        return sent[q].tag;
      };
      const auto word_is = [&](std::size_t q, const std::string& w) { return sent[q].word == w; };
      if (!context_predicate_holds(rule, sent.size(), pos, tag_at, word_is)) continue;
      const TagId gold = s_->gold[si][pos];
      if (rule.from == gold) {
        ++score.bad;
      } else if (rule.to == gold) {
        ++score.good;
      }
      changed.push_back(pos);
    }
    return score;
  }

 private:
  const ContextualTrainingState* s_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_tag_;
};

// Dynamic net of one rule on an aligned state/gold pair.
inline RuleScore dynamic_contextual_score(const ContextualRule& rule,
                                          const std::vector<SentenceState>& corpus_state,
                                          const TaggedCorpus& gold) {
  detail::check_alignment(corpus_state, gold);
  ContextualTrainingState s{corpus_state, {}};
  for (const auto& sent : gold.sentences()) {
    std::vector<TagId> g;
    for (const auto& t : sent.tokens) g.push_back(*t.tag);
    s.gold.push_back(std::move(g));
  }
  return ContextualScorer(s, gold.tagset().size()).score(rule);
}

namespace detail {

struct ContextualRuleHash {
  std::size_t operator()(const ContextualRule& r) const noexcept {
    std::size_t h = static_cast<std::size_t>(r.tmpl);
    const auto mix = [&](std::size_t v) { h = h * 1000003u ^ v; };
    mix(r.from.value);
    mix(r.to.value);
    mix(r.tags[0].value);
    mix(r.tags[1].value);
    mix(std::hash<std::string>{}(r.word));
    return h;
  }
};

// Every rule that could fix the error at (si, pos) in a left-to-right pass.
// Left context tags may already have been rewritten from `from` to `to`
// earlier in the same pass, so both values are offered there.
inline void error_site_candidates(
    const ContextualTrainingState& s, std::size_t si, std::size_t pos,
    std::unordered_set<ContextualRule, ContextualRuleHash>& out) {
  const auto& sent = s.state[si];
  const TagId from = sent[pos].tag;
  const TagId to = s.gold[si][pos];
  const auto n = static_cast<std::ptrdiff_t>(sent.size());
  const auto p = static_cast<std::ptrdiff_t>(pos);
  const auto in = [&](std::ptrdiff_t q) { return q >= 0 && q < n; };
  const auto left = [&](std::ptrdiff_t q) {
    std::vector<TagId> opts;
    if (!in(q)) return opts;
    opts.push_back(sent[static_cast<std::size_t>(q)].tag);
    if (opts.front() == from) opts.push_back(to);
    return opts;
  };
  const auto right = [&](std::ptrdiff_t q) { return sent[static_cast<std::size_t>(q)].tag; };
  using CT = ContextTemplate;
  const auto add = [&](CT t, TagId a, TagId b = TagId{}) {
    out.insert(tag_context_rule(t, from, to, a, b));
  };

  for (TagId a : left(p - 1)) add(CT::PrevTag, a);
  for (TagId a : left(p - 2)) add(CT::Prev2Tag, a);
  for (std::ptrdiff_t d = 1; d <= 3; ++d) {
    for (TagId a : left(p - d)) {
      if (d <= 2) add(CT::Prev1Or2Tag, a);
      add(CT::Prev1Or2Or3Tag, a);
    }
  }
  for (std::ptrdiff_t d = 1; d <= 3; ++d) {
    if (!in(p + d)) break;
    const TagId a = right(p + d);
    if (d == 1) add(CT::NextTag, a);
    if (d == 2) add(CT::Next2Tag, a);
    if (d <= 2) add(CT::Next1Or2Tag, a);
    add(CT::Next1Or2Or3Tag, a);
  }
  if (in(p - 1)) out.insert(word_context_rule(CT::PrevWord, from, to, sent[pos - 1].word));
  if (in(p + 1)) out.insert(word_context_rule(CT::NextWord, from, to, sent[pos + 1].word));
  if (in(p + 1)) {
    for (TagId a : left(p - 1)) add(CT::SurroundTag, a, right(p + 1));
  }
  for (TagId a : left(p - 2)) {
    for (TagId b : left(p - 1)) add(CT::PrevBigram, a, b);
  }
  if (in(p + 2)) add(CT::NextBigram, right(p + 1), right(p + 2));
}

}  // namespace detail

// Learns contextual rules on the prepared state in place and returns them.
inline std::vector<ContextualRule> learn_contextual_rules_on(ContextualTrainingState& s,
                                                             const Tagset& tagset,
                                                             const TrainConfig& config,
                                                             const TrainObserver& observer = {}) {
  std::vector<ContextualRule> rules;
  std::uint64_t errors = token_errors(s);
  for (std::size_t iteration = 1;; ++iteration) {
    if (config.max_rules_per_phase && rules.size() >= *config.max_rules_per_phase) break;
    if (errors == 0) break;

    std::unordered_set<ContextualRule, detail::ContextualRuleHash> candidates;
    for (std::size_t i = 0; i < s.state.size(); ++i) {
      for (std::size_t j = 0; j < s.state[i].size(); ++j) {
        if (s.state[i][j].tag != s.gold[i][j]) detail::error_site_candidates(s, i, j, candidates);
      }
    }
    const ContextualScorer scorer(s, tagset.size());
    std::optional<ScoredRule<ContextualRule>> best;
    for (const auto& rule : candidates) {
      const RuleScore score = scorer.score(rule);
      if (!best || preferred(rule, score.net(), best->rule, best->score.net(), tagset)) {
        best = ScoredRule<ContextualRule>{rule, score};
      }
    }
    if (!best || best->score.net() < static_cast<std::int64_t>(config.score_threshold)) break;

    for (auto& sentence : s.state) apply_contextual_rule(best->rule, sentence);
    errors = token_errors(s);
    if (observer) {
      observer({Phase::Contextual, iteration, serialize_rule(best->rule, tagset), best->score,
                errors});
    }
    rules.push_back(std::move(best->rule));
  }
  return rules;
}

inline std::vector<ContextualRule> learn_contextual_rules(
    const TaggedCorpus& train, const Lexicon& lexicon, std::span<const LexicalRule> lexical_rules,
    const InitialRuleChain& chain, const TrainConfig& config, const TrainObserver& observer = {}) {
  config.validate();
  if (train.empty()) throw ConfigError("cannot train on an empty corpus");
  auto state = prepare_contextual_training(train, lexicon, lexical_rules, chain);
  return learn_contextual_rules_on(state, train.tagset(), config, observer);
}

inline TaggerModel train_model(const TaggedCorpus& train, const InitialRuleChain& chain,
                               const TrainConfig& config, const TrainObserver& observer = {}) {
  config.validate();
  chain.check_against(train.tagset());
  auto lexical = learn_lexical_rules(train, chain, config, observer);
  auto contextual =
      learn_contextual_rules(train, lexical.lexicon, lexical.rules, chain, config, observer);
  return TaggerModel{train.tagset_ptr(), std::move(lexical.lexicon), chain,
                     std::move(lexical.rules), std::move(contextual)};
}

}  // namespace tbed

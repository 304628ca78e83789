#pragma once

// A small inflectional language with known structure, used as a stand-in
// corpus for experiments: tags come from stem+suffix paradigms, and a
// determiner-like word forces a nominal reading of the ambiguous word
// types that follow it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/random.hpp"
#include "tbed/rules.hpp"
#include "tbed/unicode.hpp"

namespace tbed {

struct SuffixParadigm {
  std::string suffix;
  std::string tag;
  friend bool operator==(const SuffixParadigm&, const SuffixParadigm&) = default;
};

struct SynthSpec {
  std::size_t n_stems = 200;
  // The first paradigm's tag is bound to the NOUN_FEM_SG role.
  std::vector<SuffixParadigm> suffix_paradigms = {
      {"ση", "NNF"}, {"ος", "NNM"}, {"ουμε", "VB"}, {"ικα", "JJ"}, {"ως", "RB"}};
  double ambiguity_rate = 0.3;
  double context_rule_strength = 1.0;
  std::size_t n_sentences = 2000;
  std::size_t min_sentence_length = 6;
  std::size_t max_sentence_length = 14;
  // Per-slot chance of emitting a determiner followed by an ambiguous word.
  double trigger_rate = 0.06;
  double foreign_rate = 0.02;
  double proper_rate = 0.02;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Tags the generator adds next to the paradigm tags.
inline constexpr std::string_view kDetTag = "DET";
inline constexpr std::string_view kNominalTag = "NOM";
inline constexpr std::string_view kForeignTag = "FW";
inline constexpr std::string_view kProperTag = "NP";
inline constexpr std::string_view kPunctTag = "PUNCT";
inline constexpr std::string_view kSentenceEnd = ".";
inline const std::vector<std::string> kDeterminers = {"ο", "η", "το", "τα"};

inline void SynthSpec::validate() const {
  const auto rate = [](double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  rate(ambiguity_rate, "ambiguity_rate");
  rate(context_rule_strength, "context_rule_strength");
  rate(trigger_rate, "trigger_rate");
  rate(foreign_rate, "foreign_rate");
  rate(proper_rate, "proper_rate");
  if (trigger_rate + foreign_rate + proper_rate > 1.0) {
    throw ConfigError("trigger, foreign and proper rates sum above 1");
  }
  if (n_stems == 0) throw ConfigError("n_stems must be positive");
  if (suffix_paradigms.empty()) throw ConfigError("at least one suffix paradigm required");
  if (min_sentence_length < 2 || min_sentence_length > max_sentence_length) {
    throw ConfigError("sentence length range must satisfy 2 <= min <= max");
  }
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be non-negative");
  std::set<std::string> tags;
  for (const auto& p : suffix_paradigms) {
    if (p.suffix.empty() || !unicode::is_valid_utf8(p.suffix)) {
      throw ConfigError("suffixes must be non-empty UTF-8");
    }
    if (!detail::valid_tag_name(p.tag)) throw ConfigError("invalid paradigm tag '" + p.tag + "'");
    for (auto reserved : {kDetTag, kNominalTag, kForeignTag, kProperTag, kPunctTag}) {
      if (p.tag == reserved) throw ConfigError("paradigm tag '" + p.tag + "' is reserved");
    }
    if (!tags.insert(p.tag).second) throw ConfigError("paradigm tags must be distinct");
  }
  for (const auto& a : suffix_paradigms) {
    for (const auto& b : suffix_paradigms) {
      if (&a != &b && detail::ends_with(a.suffix, b.suffix)) {
        throw ConfigError("suffix '" + b.suffix + "' is a suffix of '" + a.suffix + "'");
      }
    }
  }
}

// Line format: `key value`, plus `paradigm <suffix> <TAG>` lines which,
// when present, replace the default paradigms.
inline SynthSpec parse_synth_spec(std::string_view text) {
  SynthSpec spec;
  std::vector<SuffixParadigm> paradigms;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line) || detail::is_comment(line)) return;
    const auto items = detail::split_items(line);
    const auto key = items[0].second;
    if (key == "paradigm") {
      if (items.size() != 3) throw ParseError("expected 'paradigm <suffix> <TAG>'", line_no);
      paradigms.push_back({unicode::nfc(items[1].second), std::string(items[2].second)});
      return;
    }
    if (items.size() != 2) throw ParseError("expected '<key> <value>'", line_no);
    const auto value = items[1].second;
    const auto as_size = [&] {
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) {
        throw ParseError("expected an integer for " + std::string(key), line_no);
      }
      return v;
    };
    const auto as_double = [&] {
      double v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) {
        throw ParseError("expected a number for " + std::string(key), line_no);
      }
      return v;
    };
    if (key == "n_stems") spec.n_stems = as_size();
    else if (key == "ambiguity_rate") spec.ambiguity_rate = as_double();
    else if (key == "context_rule_strength") spec.context_rule_strength = as_double();
    else if (key == "n_sentences") spec.n_sentences = as_size();
    else if (key == "min_sentence_length") spec.min_sentence_length = as_size();
    else if (key == "max_sentence_length") spec.max_sentence_length = as_size();
    else if (key == "trigger_rate") spec.trigger_rate = as_double();
    else if (key == "foreign_rate") spec.foreign_rate = as_double();
    else if (key == "proper_rate") spec.proper_rate = as_double();
    else if (key == "zipf_exponent") spec.zipf_exponent = as_double();
    else if (key == "seed") spec.seed = as_size();
    else throw ParseError("unknown key '" + std::string(key) + "'", line_no);
  });
  if (!paradigms.empty()) spec.suffix_paradigms = std::move(paradigms);
  spec.validate();
  return spec;
}

// What the generator knows about its own language.
struct SynthGrammar {
  std::vector<SuffixParadigm> paradigms;
  std::unordered_set<std::string> ambiguous_types;
};

struct SynthCorpus {
  TaggedCorpus corpus;
  SynthGrammar grammar;
};

namespace detail {

inline std::string random_syllables(Rng& rng, std::string_view consonants,
                                    std::string_view vowels, std::size_t syllables) {
  const std::u32string cons = *unicode::decode(consonants);
  const std::u32string vows = *unicode::decode(vowels);
  std::u32string out;
  for (std::size_t i = 0; i < syllables; ++i) {
    out.push_back(cons[rng.below(cons.size())]);
    out.push_back(vows[rng.below(vows.size())]);
  }
  return unicode::encode(out);
}

// Draws indices with probability proportional to `weights`.
class WeightedPicker {
 public:
  explicit WeightedPicker(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) cumulative_.push_back(total += w);
  }
  std::size_t pick(Rng& rng) const {
    const double x = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }
  bool empty() const { return cumulative_.empty(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace detail

inline TagsetPtr synthetic_tagset(const SynthSpec& spec) {
  auto tagset = std::make_shared<Tagset>();
  for (const auto& p : spec.suffix_paradigms) tagset->add(p.tag);
  for (auto t : {kDetTag, kNominalTag, kForeignTag, kProperTag, kPunctTag}) tagset->add(t);
  tagset->bind(Role::Foreign, kForeignTag);
  tagset->bind(Role::ProperMascSg, kProperTag);
  tagset->bind(Role::NounFemSg, spec.suffix_paradigms.front().tag);
  return tagset;
}

inline SynthCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  TagsetPtr tagset = synthetic_tagset(spec);
  const Tagset& tags = *tagset;

  std::vector<std::string> stems;
  std::unordered_set<std::string> seen;
  while (stems.size() < spec.n_stems) {
    auto stem = detail::random_syllables(rng, "βγδζθκλμνξπρστφχ", "αεηιουω", 2 + rng.below(2));
    if (seen.insert(stem).second) stems.push_back(std::move(stem));
  }
  std::vector<std::string> foreign;
  while (foreign.size() < 40) {
    std::string w = detail::random_syllables(rng, "BCDFGKLMNPRSTVZ", "aeiou", 1);
    w += detail::random_syllables(rng, "bcdfgklmnprstvz", "aeiou", 1 + rng.below(2));
    if (seen.insert(w).second) foreign.push_back(std::move(w));
  }
  std::vector<std::string> proper;
  while (proper.size() < 40) {
    std::string w = detail::random_syllables(rng, "ΒΓΔΘΚΛΜΝΠΣΤΦΧ", "αεηιουω", 1);
    if (rng.bernoulli(0.25)) w = detail::random_syllables(rng, "ΆΈΉΊΌΎΏ", "ν", 1);
    w += detail::random_syllables(rng, "βγδκλμνπρστ", "αεηιουω", 1 + rng.below(2));
    w += rng.bernoulli(0.5) ? "ης" : "ας";
    if (seen.insert(w).second) proper.push_back(std::move(w));
  }

  const std::size_t n_suffixes = spec.suffix_paradigms.size();
  std::vector<double> stem_weights;
  for (std::size_t r = 0; r < stems.size(); ++r) {
    stem_weights.push_back(1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent));
  }
  const detail::WeightedPicker stem_picker(stem_weights);

  // Word type = (stem, paradigm); ambiguity is decided per type.
  SynthGrammar grammar{spec.suffix_paradigms, {}};
  std::vector<std::pair<std::size_t, std::size_t>> ambiguous;
  std::vector<double> ambiguous_weights;
  for (std::size_t s = 0; s < stems.size(); ++s) {
    for (std::size_t p = 0; p < n_suffixes; ++p) {
      if (spec.ambiguity_rate > 0.0 && rng.bernoulli(spec.ambiguity_rate)) {
        ambiguous.emplace_back(s, p);
        ambiguous_weights.push_back(stem_weights[s]);
        grammar.ambiguous_types.insert(stems[s] + spec.suffix_paradigms[p].suffix);
      }
    }
  }
  const detail::WeightedPicker ambiguous_picker(ambiguous_weights);

  const TagId det = tags.at(kDetTag);
  const TagId nominal = tags.at(kNominalTag);
  const TagId fw = tags.at(kForeignTag);
  const TagId np = tags.at(kProperTag);
  const TagId punct = tags.at(kPunctTag);

  std::vector<Sentence> sentences;
  sentences.reserve(spec.n_sentences);
  for (std::size_t n = 0; n < spec.n_sentences; ++n) {
    const std::size_t length =
        spec.min_sentence_length + rng.below(spec.max_sentence_length - spec.min_sentence_length + 1);
    Sentence sentence;
    while (sentence.size() < length) {
      const double u = rng.uniform();
      if (u < spec.foreign_rate) {
        sentence.tokens.push_back({foreign[rng.below(foreign.size())], fw});
      } else if (u < spec.foreign_rate + spec.proper_rate) {
        sentence.tokens.push_back({proper[rng.below(proper.size())], np});
      } else if (u < spec.foreign_rate + spec.proper_rate + spec.trigger_rate &&
                 !ambiguous_picker.empty() && sentence.size() + 2 <= length) {
        sentence.tokens.push_back({kDeterminers[rng.below(kDeterminers.size())], det});
        const auto [s, p] = ambiguous[ambiguous_picker.pick(rng)];
        const TagId primary = tags.at(spec.suffix_paradigms[p].tag);
        const TagId tag = rng.bernoulli(spec.context_rule_strength) ? nominal : primary;
        sentence.tokens.push_back({stems[s] + spec.suffix_paradigms[p].suffix, tag});
      } else {
        const std::size_t s = stem_picker.pick(rng);
        const std::size_t p = rng.below(n_suffixes);
        sentence.tokens.push_back(
            {stems[s] + spec.suffix_paradigms[p].suffix, tags.at(spec.suffix_paradigms[p].tag)});
      }
    }
    sentence.tokens.push_back({std::string(kSentenceEnd), punct});
    sentences.push_back(std::move(sentence));
  }
  return {TaggedCorpus(tagset, std::move(sentences)), std::move(grammar)};
}

// Tags with the generating rules: closed classes, script of the first
// letter, the determiner rule, then the longest matching paradigm suffix.
class SynthOracleTagger {
 public:
  SynthOracleTagger(const SynthGrammar& grammar, const Tagset& tagset)
      : grammar_(&grammar), tagset_(&tagset) {}

  Sentence tag(const Sentence& raw) const {
    Sentence out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const std::string& w = raw.tokens[i].word;
      const bool after_det =
          i > 0 && std::find(kDeterminers.begin(), kDeterminers.end(), raw.tokens[i - 1].word) !=
                       kDeterminers.end();
      out.tokens.push_back({w, tag_word(w, after_det)});
    }
    return out;
  }

 private:
  TagId tag_word(const std::string& w, bool after_det) const {
    if (std::find(kDeterminers.begin(), kDeterminers.end(), w) != kDeterminers.end()) {
      return tagset_->at(kDetTag);
    }
    if (w == kSentenceEnd) return tagset_->at(kPunctTag);
    switch (classify_script(w)) {
      case ScriptClass::LatinStart: return tagset_->at(kForeignTag);
      case ScriptClass::GreekCapitalStart: return tagset_->at(kProperTag);
      case ScriptClass::Other: break;
    }
    if (after_det && grammar_->ambiguous_types.contains(w)) return tagset_->at(kNominalTag);
    const SuffixParadigm* best = nullptr;
    for (const auto& p : grammar_->paradigms) {
      if (detail::ends_with(w, p.suffix) && (!best || p.suffix.size() > best->suffix.size())) {
        best = &p;
      }
    }
    return tagset_->at(best ? best->tag : grammar_->paradigms.front().tag);
  }

  const SynthGrammar* grammar_;
  const Tagset* tagset_;
};

}  // namespace tbed

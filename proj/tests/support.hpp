#pragma once

// Fixtures and random generators shared by the unit and acceptance tests.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tbed/tbed.hpp"

namespace tbed::testing {

inline TagsetPtr tagset_from(std::string_view text) {
  return std::make_shared<const Tagset>(load_tagset(text));
}

// Four tags, all three roles bound.
inline TagsetPtr abcd_tagset() {
  return tagset_from(
      "tag A\ntag B\ntag C\ntag D\nrole FOREIGN A\nrole PROPER_MASC_SG B\nrole NOUN_FEM_SG C\n");
}

inline TagsetPtr english_tagset() {
  return tagset_from(
      "tag DET\ntag NN\ntag VB\ntag VBD\ntag MD\ntag FW\ntag NP\ntag NNF\n"
      "role FOREIGN FW\nrole PROPER_MASC_SG NP\nrole NOUN_FEM_SG NNF\n");
}

inline TaggedCorpus corpus_from(std::string_view text, TagsetPtr tagset) {
  return parse_tagged_corpus(text, std::move(tagset));
}

inline std::string samples_dir() { return TBED_SAMPLES_DIR; }

inline TaggedCorpus greek_sample() {
  const auto dir = samples_dir();
  auto tagset = std::make_shared<const Tagset>(load_tagset(read_file(dir + "/greek.tagset")));
  return parse_tagged_corpus(read_file(dir + "/greek_tagged.txt"), tagset);
}

// Random words over a tiny alphabet that mixes Latin, Greek capital and
// Greek lowercase initials, so every initial-rule branch and many shared
// affixes occur.
inline std::string random_word(Rng& rng, std::size_t min_len = 1, std::size_t max_len = 4) {
  static const std::vector<std::string> initials = {"M", "x", "Σ", "Ά", "α", "β", "ο", "ς"};
  static const std::vector<std::string> letters = {"α", "β", "ο", "ς", "x"};
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string w = initials[rng.below(initials.size())];
  for (std::size_t i = 1; i < len; ++i) w += letters[rng.below(letters.size())];
  return w;
}

struct RandomCorpusSpec {
  std::size_t max_tokens = 200;
  std::size_t vocabulary = 25;
  std::size_t min_sentence = 1;
  std::size_t max_sentence = 8;
  double noise = 0.2;
};

// Tags depend on the last byte of the word and on the previous gold tag,
// with random noise; both rule phases therefore find something to learn.
inline TaggedCorpus random_corpus(Rng& rng, TagsetPtr tagset, const RandomCorpusSpec& spec = {}) {
  std::vector<std::string> vocab;
  while (vocab.size() < spec.vocabulary) {
    auto w = random_word(rng);
    if (std::find(vocab.begin(), vocab.end(), w) == vocab.end()) vocab.push_back(std::move(w));
  }
  const std::size_t n_tags = tagset->size();
  std::vector<Sentence> sentences;
  std::size_t tokens = 0;
  while (true) {
    const std::size_t len =
        spec.min_sentence + rng.below(spec.max_sentence - spec.min_sentence + 1);
    if (tokens + len > spec.max_tokens) break;
    Sentence s;
    std::size_t prev = n_tags;
    for (std::size_t i = 0; i < len; ++i) {
      const auto& w = vocab[rng.below(vocab.size())];
      std::size_t tag = static_cast<unsigned char>(w.back()) % n_tags;
      if (prev == 0) tag = (tag + 1) % n_tags;
      if (rng.bernoulli(spec.noise)) tag = rng.below(n_tags);
      s.tokens.push_back({w, TagId{static_cast<std::uint16_t>(tag)}});
      prev = tag;
    }
    tokens += len;
    sentences.push_back(std::move(s));
  }
  return TaggedCorpus(std::move(tagset), std::move(sentences));
}

// Corpus with arbitrary words (including '/' and non-ASCII) for format
// round-trips.
inline TaggedCorpus random_format_corpus(Rng& rng, TagsetPtr tagset) {
  static const std::vector<std::string> pieces = {"a", "/", "Ω", "έ", "1", ".", "x/y", "ς", "-"};
  std::vector<Sentence> sentences(rng.below(6));
  for (auto& s : sentences) {
    const std::size_t len = 1 + rng.below(6);
    for (std::size_t i = 0; i < len; ++i) {
      std::string w;
      const std::size_t parts = 1 + rng.below(3);
      for (std::size_t p = 0; p < parts; ++p) w += pieces[rng.below(pieces.size())];
      s.tokens.push_back({w, TagId{static_cast<std::uint16_t>(rng.below(tagset->size()))}});
    }
  }
  return TaggedCorpus(std::move(tagset), std::move(sentences));
}

inline std::vector<LexicalRule> random_lexical_rules(Rng& rng, const Tagset& tagset,
                                                     std::size_t n) {
  static const std::vector<std::string> affixes = {"α", "ος", "ση", "x", "ικα", "ουμε", "ed", "Ά"};
  std::vector<LexicalRule> rules;
  const auto tag = [&] { return TagId{static_cast<std::uint16_t>(rng.below(tagset.size()))}; };
  while (rules.size() < n) {
    LexicalRule r;
    r.tmpl = kLexicalTemplates[rng.below(kLexicalTemplates.size())];
    r.arg = affixes[rng.below(affixes.size())];
    if (r.tmpl == LexicalTemplate::HasChar) r.arg = unicode::encode(std::u32string(1, unicode::decode(r.arg)->front()));
    r.to = tag();
    if (rng.bernoulli(0.5)) r.from = tag();
    if (r.from == r.to) continue;
    rules.push_back(std::move(r));
  }
  return rules;
}

inline std::vector<ContextualRule> random_contextual_rules(Rng& rng, const Tagset& tagset,
                                                           std::size_t n) {
  static const std::vector<std::string> words = {"the", "ο", "Ά/β", "x"};
  std::vector<ContextualRule> rules;
  const auto tag = [&] { return TagId{static_cast<std::uint16_t>(rng.below(tagset.size()))}; };
  while (rules.size() < n) {
    const auto t = kContextTemplates[rng.below(kContextTemplates.size())];
    const TagId from = tag();
    const TagId to = tag();
    if (from == to) continue;
    if (takes_word_arg(t)) {
      rules.push_back(word_context_rule(t, from, to, words[rng.below(words.size())]));
    } else {
      rules.push_back(tag_context_rule(t, from, to, tag(), tag()));
    }
  }
  return rules;
}

inline std::vector<SentenceState> to_state(const TaggedCorpus& corpus) {
  std::vector<SentenceState> out;
  for (const auto& s : corpus.sentences()) {
    SentenceState st;
    for (const auto& t : s.tokens) st.push_back({t.word, *t.tag});
    out.push_back(std::move(st));
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    Rng rng(std::random_device{}());
    do {
      path_ = base / ("tbed-test-" + std::to_string(rng.next()));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Runs the CLI with the given arguments, capturing both streams.
inline CommandResult run_cli(const std::vector<std::string>& args, const TempDir& scratch) {
  static int counter = 0;
  const std::string tag = std::to_string(counter++);
  const std::string out_path = scratch / ("stdout" + tag);
  const std::string err_path = scratch / ("stderr" + tag);
  std::string cmd = shell_quote(TBED_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote(out_path) + " 2>" + shell_quote(err_path);
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

}  // namespace tbed::testing

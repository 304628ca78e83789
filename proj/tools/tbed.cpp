// tbed: train, apply and evaluate transformation-based POS taggers.
//
// Sample usage:
//   tbed train --corpus train.txt --tagset tags.cfg --out model/
//   tbed tag --model model/ --in raw.txt --out tagged.txt
//   tbed eval --model model/ --gold gold.txt --confusion confusion.csv
//   tbed crossval --corpus corpus.txt --tagset tags.cfg --k 10 --out folds.csv
//   tbed curve --corpus corpus.txt --tagset tags.cfg --sizes 2000,5000,10000
//   tbed synth --out synth.txt
//
// Exit codes: 0 ok, 2 configuration or parse error, 3 I/O error, 4 data
// (alignment) error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbed/tbed.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;

struct TrainFlags {
  std::size_t threshold = 2;
  std::uint64_t seed = 0;
  double lexicon_split = 0.5;
  std::size_t max_affix_len = tbed::kDefaultMaxAffixLen;
  std::optional<std::size_t> max_rules;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--threshold", threshold, "Minimum net score for a rule to be accepted (>= 1)")
        ->capture_default_str();
    cmd.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    cmd.add_option("--lexicon-split", lexicon_split,
                   "Fraction of training sentences used as the guess lexicon when learning "
                   "lexical rules")
        ->capture_default_str();
    cmd.add_option("--max-affix-len", max_affix_len, "Longest affix considered by lexical rules")
        ->capture_default_str();
    cmd.add_option("--max-rules", max_rules, "Maximum rules learned per phase (default: no limit)");
  }

  tbed::TrainConfig config() const {
    tbed::TrainConfig c;
    c.score_threshold = threshold;
    c.seed = seed;
    c.lexicon_split_fraction = lexicon_split;
    c.max_affix_len = max_affix_len;
    c.max_rules_per_phase = max_rules;
    c.validate();
    return c;
  }
};

tbed::TagsetPtr read_tagset(const std::string& path) {
  return std::make_shared<const tbed::Tagset>(tbed::load_tagset(tbed::read_file(path)));
}

// Reads and optionally shuffles a tagged corpus.
tbed::TaggedCorpus read_corpus(const std::string& corpus_path, const std::string& tagset_path,
                               bool shuffle, std::uint64_t seed) {
  auto tagset = read_tagset(tagset_path);
  auto corpus = tbed::parse_tagged_corpus(tbed::read_file(corpus_path), tagset);
  return shuffle ? tbed::shuffle_sentences(corpus, seed) : corpus;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    tbed::write_file(path, content);
  }
}

struct TrainArgs {
  std::string corpus, tagset, out, log;
  TrainFlags flags;
};

int cmd_train(const TrainArgs& a) {
  const auto config = a.flags.config();
  auto tagset = read_tagset(a.tagset);
  const auto corpus = tbed::parse_tagged_corpus(tbed::read_file(a.corpus), tagset);
  if (corpus.empty()) throw tbed::ConfigError("training corpus is empty");

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw tbed::IoError("cannot write " + a.log);
  }
  const auto observer = [&](const tbed::TrainEvent& e) {
    if (log.is_open()) log << tbed::format_train_event(e) << '\n';
  };
  const auto chain = tbed::InitialRuleChain::greek_default();
  const auto model = tbed::train_model(corpus, chain, config, observer);
  tbed::write_model_directory(a.out, model, config);

  const auto predicted = tbed::tag_corpus(tbed::strip_tags(corpus), model);
  const auto acc = tbed::accuracy(predicted, corpus);
  std::cout << "sentences " << corpus.size() << "\n"
            << "tokens " << corpus.word_count() << "\n"
            << "lexicon_words " << model.lexicon.size() << "\n"
            << "lexical_rules " << model.lexical_rules.size() << "\n"
            << "contextual_rules " << model.contextual_rules.size() << "\n"
            << "training_accuracy " << tbed::detail::fixed6(acc.accuracy()) << "\n";
  return kExitOk;
}

struct TagArgs {
  std::string model, in, out;
};

int cmd_tag(const TagArgs& a) {
  const auto bundle = tbed::read_model_directory(a.model);
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw tbed::IoError("cannot read " + a.in);
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!a.out.empty() && a.out != "-") {
    out_file.open(a.out, std::ios::binary | std::ios::trunc);
    if (!out_file) throw tbed::IoError("cannot write " + a.out);
    out = &out_file;
  }
  tbed::Tagger tagger(bundle.model);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto sentence = tbed::parse_raw_sentence(line, line_no);
    if (sentence.tokens.empty()) continue;
    *out << tbed::serialize_sentence(tagger.tag(sentence), bundle.model.tags()) << '\n';
  }
  if (in.bad()) throw tbed::IoError("error reading " + a.in);
  out->flush();
  if (!*out) throw tbed::IoError("error writing output");
  return kExitOk;
}

struct EvalArgs {
  std::string model, gold, predicted, confusion;
};

int cmd_eval(const EvalArgs& a) {
  const auto bundle = tbed::read_model_directory(a.model);
  const auto gold = tbed::parse_tagged_corpus(tbed::read_file(a.gold), bundle.model.tagset);
  const auto predicted =
      a.predicted.empty()
          ? tbed::tag_corpus(tbed::strip_tags(gold), bundle.model)
          : tbed::parse_tagged_corpus(tbed::read_file(a.predicted), bundle.model.tagset);
  const auto acc = tbed::accuracy(predicted, gold);
  std::cout << "tokens " << acc.total << "\n"
            << "correct " << acc.correct << "\n"
            << "accuracy " << tbed::detail::fixed6(acc.accuracy()) << "\n";
  if (!a.confusion.empty()) {
    write_output(a.confusion, tbed::render_confusion_csv(acc, bundle.model.tags()));
  }
  return kExitOk;
}

struct CrossvalArgs {
  std::string corpus, tagset, out;
  std::size_t k = 10;
  std::size_t jobs = 1;
  bool shuffle = false;
  TrainFlags flags;
};

int cmd_crossval(const CrossvalArgs& a) {
  const auto config = a.flags.config();
  const auto corpus = read_corpus(a.corpus, a.tagset, a.shuffle, config.seed);
  const auto report = tbed::cross_validate(corpus, a.k, config,
                                           tbed::InitialRuleChain::greek_default(), config.seed,
                                           a.jobs);
  write_output(a.out, tbed::render_folds_csv(report));
  if (!a.out.empty() && a.out != "-") {
    std::cout << "mean_accuracy " << tbed::detail::fixed6(report.mean_accuracy) << "\n"
              << "stddev_accuracy " << tbed::detail::fixed6(report.stddev_accuracy) << "\n";
  }
  return kExitOk;
}

struct CurveArgs {
  std::string corpus, tagset, out;
  std::vector<std::size_t> sizes;
  std::size_t k = 10;
  std::size_t jobs = 1;
  bool shuffle = false;
  TrainFlags flags;
};

int cmd_curve(const CurveArgs& a) {
  const auto config = a.flags.config();
  const auto corpus = read_corpus(a.corpus, a.tagset, a.shuffle, config.seed);
  const auto rows = tbed::learning_curve(corpus, a.sizes, a.k, config,
                                         tbed::InitialRuleChain::greek_default(), config.seed,
                                         a.jobs);
  write_output(a.out, tbed::render_report_csv(rows));
  return kExitOk;
}

struct SynthArgs {
  std::string spec, out, tagset_out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  tbed::SynthSpec spec;
  if (!a.spec.empty()) spec = tbed::parse_synth_spec(tbed::read_file(a.spec));
  if (a.seed) spec.seed = *a.seed;
  const auto synth = tbed::generate_synthetic_corpus(spec);
  const std::string tagset_path = a.tagset_out.empty() ? a.out + ".tagset" : a.tagset_out;
  tbed::write_file(a.out, tbed::serialize_tagged_corpus(synth.corpus));
  tbed::write_file(tagset_path, tbed::serialize_tagset(synth.corpus.tagset()));
  std::cout << "sentences " << synth.corpus.size() << "\n"
            << "tokens " << synth.corpus.word_count() << "\n"
            << "tagset " << tagset_path << "\n";
  return kExitOk;
}

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const tbed::IoError& e) {
    std::cerr << "tbed: " << e.what() << '\n';
    return kExitIo;
  } catch (const tbed::AlignmentError& e) {
    std::cerr << "tbed: alignment error: " << e.what() << '\n';
    return kExitData;
  } catch (const tbed::Error& e) {
    std::cerr << "tbed: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "tbed: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformation-based error-driven part-of-speech tagger"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Learn a model from a tagged corpus");
  train_cmd->add_option("--corpus", train.corpus, "Tagged training corpus (word/TAG per item)")
      ->required();
  train_cmd->add_option("--tagset", train.tagset, "Tagset file")->required();
  train_cmd->add_option("--out", train.out, "Model directory to write")->required();
  train_cmd->add_option("--log", train.log,
                        "Write one line per accepted rule: phase iteration rule net errors");
  train.flags.add_to(*train_cmd);

  TagArgs tag;
  auto* tag_cmd = app.add_subcommand("tag", "Tag a raw corpus with a trained model");
  tag_cmd->add_option("--model", tag.model, "Model directory")->required();
  tag_cmd->add_option("--in", tag.in, "Raw corpus, one sentence per line")->required();
  tag_cmd->add_option("--out", tag.out, "Tagged output (default: standard output)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Measure a model's accuracy on a gold corpus");
  eval_cmd->add_option("--model", eval.model, "Model directory")->required();
  eval_cmd->add_option("--gold", eval.gold, "Gold tagged corpus")->required();
  eval_cmd->add_option("--predicted", eval.predicted,
                       "Score this tagged corpus instead of tagging the gold words");
  eval_cmd->add_option("--confusion", eval.confusion,
                       "Write gold,predicted,count CSV here ('-' for standard output)");

  CrossvalArgs cv;
  auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross-validation");
  cv_cmd->add_option("--corpus", cv.corpus, "Tagged corpus")->required();
  cv_cmd->add_option("--tagset", cv.tagset, "Tagset file")->required();
  cv_cmd->add_option("--k", cv.k, "Number of folds")->capture_default_str();
  cv_cmd->add_option("--out", cv.out, "Fold report CSV (default: standard output)");
  cv_cmd->add_option("--jobs", cv.jobs, "Folds evaluated in parallel")->capture_default_str();
  cv_cmd->add_flag("--shuffle", cv.shuffle, "Shuffle sentences (seeded) before splitting");
  cv.flags.add_to(*cv_cmd);

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand("curve", "Cross-validated learning curve over corpus sizes");
  curve_cmd->add_option("--corpus", curve.corpus, "Tagged corpus")->required();
  curve_cmd->add_option("--tagset", curve.tagset, "Tagset file")->required();
  curve_cmd->add_option("--sizes", curve.sizes, "Ascending word counts, comma separated")
      ->required()
      ->delimiter(',');
  curve_cmd->add_option("--k", curve.k, "Number of folds")->capture_default_str();
  curve_cmd->add_option("--out", curve.out, "Curve CSV (default: standard output)");
  curve_cmd->add_option("--jobs", curve.jobs, "Folds evaluated in parallel")->capture_default_str();
  curve_cmd->add_flag("--shuffle", curve.shuffle,
                      "Shuffle sentences (seeded) before taking prefixes");
  curve.flags.add_to(*curve_cmd);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic tagged corpus");
  synth_cmd->add_option("--spec", synth.spec, "Generator spec file (default: built-in spec)");
  synth_cmd->add_option("--out", synth.out, "Tagged corpus to write")->required();
  synth_cmd->add_option("--tagset-out", synth.tagset_out, "Tagset file (default: <out>.tagset)");
  synth_cmd->add_option("--seed", synth.seed, "Override the spec's seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*train_cmd) return run_guarded([&] { return cmd_train(train); });
  if (*tag_cmd) return run_guarded([&] { return cmd_tag(tag); });
  if (*eval_cmd) return run_guarded([&] { return cmd_eval(eval); });
  if (*cv_cmd) return run_guarded([&] { return cmd_crossval(cv); });
  if (*curve_cmd) return run_guarded([&] { return cmd_curve(curve); });
  if (*synth_cmd) return run_guarded([&] { return cmd_synth(synth); });
  return kExitConfig;
}

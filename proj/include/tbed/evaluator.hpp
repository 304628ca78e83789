#pragma once

// Accuracy, k-fold cross-validation, learning curves and their CSV renderings.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/learner.hpp"
#include "tbed/tagger.hpp"

namespace tbed {

struct AccuracyResult {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  // (gold, predicted) -> count; sums to total.
  std::map<std::pair<TagId, TagId>, std::uint64_t> confusion;

  double accuracy() const {
    return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

inline AccuracyResult accuracy(const TaggedCorpus& predicted, const TaggedCorpus& gold) {
  if (predicted.size() != gold.size()) {
    throw AlignmentError("sentence count differs: " + std::to_string(predicted.size()) +
                         " predicted vs " + std::to_string(gold.size()) + " gold");
  }
  AccuracyResult r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = predicted.sentences()[i].tokens;
    const auto& g = gold.sentences()[i].tokens;
    if (p.size() != g.size()) {
      throw AlignmentError("sentence " + std::to_string(i + 1) + ": " + std::to_string(p.size()) +
                           " predicted tokens vs " + std::to_string(g.size()) + " gold");
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (p[j].word != g[j].word) {
        throw AlignmentError("sentence " + std::to_string(i + 1) + ", token " +
                             std::to_string(j + 1) + ": '" + p[j].word + "' vs '" + g[j].word +
                             "'");
      }
      ++r.total;
      if (*p[j].tag == *g[j].tag) ++r.correct;
      ++r.confusion[{*g[j].tag, *p[j].tag}];
    }
  }
  return r;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct FoldResult {
  std::size_t fold_id = 0;
  double accuracy = 0.0;
  std::size_t n_lexical_rules = 0;
  std::size_t n_contextual_rules = 0;
  std::uint64_t test_tokens = 0;
  std::uint64_t known_tokens = 0;
  std::uint64_t known_correct = 0;
  std::uint64_t unknown_tokens = 0;
  std::uint64_t unknown_correct = 0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;
  double mean_lexical_rules = 0.0;
  double mean_contextual_rules = 0.0;

  // Sorts folds by id and derives the summary statistics from them.
  static EvalReport aggregate(std::vector<FoldResult> folds) {
    std::sort(folds.begin(), folds.end(),
              [](const FoldResult& a, const FoldResult& b) { return a.fold_id < b.fold_id; });
    EvalReport r;
    std::vector<double> acc, lex, ctx;
    for (const auto& f : folds) {
      acc.push_back(f.accuracy);
      lex.push_back(static_cast<double>(f.n_lexical_rules));
      ctx.push_back(static_cast<double>(f.n_contextual_rules));
    }
    r.mean_accuracy = mean(acc);
    r.stddev_accuracy = sample_stddev(acc);
    r.mean_lexical_rules = mean(lex);
    r.mean_contextual_rules = mean(ctx);
    r.folds = std::move(folds);
    return r;
  }

  // Pooled over folds; nullopt when no token of that kind was tested.
  std::optional<double> known_accuracy() const {
    return pooled(&FoldResult::known_tokens, &FoldResult::known_correct);
  }
  std::optional<double> unknown_accuracy() const {
    return pooled(&FoldResult::unknown_tokens, &FoldResult::unknown_correct);
  }

 private:
  std::optional<double> pooled(std::uint64_t FoldResult::*tokens,
                               std::uint64_t FoldResult::*correct) const {
    std::uint64_t n = 0, c = 0;
    for (const auto& f : folds) {
      n += f.*tokens;
      c += f.*correct;
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / static_cast<double>(n);
  }
};

// Trains on `train`, tags the words of `test` and scores against it.
inline FoldResult evaluate_split(const TaggedCorpus& train, const TaggedCorpus& test,
                                 const InitialRuleChain& chain, const TrainConfig& config,
                                 std::size_t fold_id = 0) {
  const TaggerModel model = train_model(train, chain, config);
  const auto raw = strip_tags(test);
  const TaggedCorpus predicted = tag_corpus(raw, model);
  const AccuracyResult acc = accuracy(predicted, test);

  FoldResult r;
  r.fold_id = fold_id;
  r.accuracy = acc.accuracy();
  r.n_lexical_rules = model.lexical_rules.size();
  r.n_contextual_rules = model.contextual_rules.size();
  r.test_tokens = acc.total;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& g = test.sentences()[i].tokens;
    const auto& p = predicted.sentences()[i].tokens;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const bool ok = *g[j].tag == *p[j].tag;
      if (model.lexicon.contains(g[j].word)) {
        ++r.known_tokens;
        r.known_correct += ok;
      } else {
        ++r.unknown_tokens;
        r.unknown_correct += ok;
      }
    }
  }
  return r;
}

namespace detail {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

inline EvalReport cross_validate_with_plan(const TaggedCorpus& corpus, const FoldPlan& plan,
                                           const TrainConfig& config,
                                           const InitialRuleChain& chain, std::size_t jobs = 1) {
  std::vector<FoldResult> folds(plan.k());
  detail::parallel_for(plan.k(), jobs, [&](std::size_t f) {
    const auto train = corpus.select(plan.train_indices(f));
    const auto test = corpus.select(plan.test_indices(f));
    folds[f] = evaluate_split(train, test, chain, config, f);
  });
  return EvalReport::aggregate(std::move(folds));
}

inline EvalReport cross_validate(const TaggedCorpus& corpus, std::size_t k,
                                 const TrainConfig& config, const InitialRuleChain& chain,
                                 std::uint64_t seed, std::size_t jobs = 1) {
  config.validate();
  const FoldPlan plan = kfold_split(corpus, k, seed);
  return cross_validate_with_plan(corpus, plan, config, chain, jobs);
}

struct CurveRow {
  std::size_t corpus_words = 0;
  EvalReport report;
};

// Cross-validates successive word-count prefixes of the corpus.
inline std::vector<CurveRow> learning_curve(const TaggedCorpus& corpus,
                                            std::span<const std::size_t> word_sizes,
                                            std::size_t k, const TrainConfig& config,
                                            const InitialRuleChain& chain, std::uint64_t seed,
                                            std::size_t jobs = 1) {
  for (std::size_t i = 1; i < word_sizes.size(); ++i) {
    if (word_sizes[i] <= word_sizes[i - 1]) throw ConfigError("sizes must be strictly ascending");
  }
  std::vector<CurveRow> rows;
  for (std::size_t size : word_sizes) {
    const TaggedCorpus prefix = truncate_to_words(corpus, size);
    if (prefix.size() < k) {
      throw ConfigError("size " + std::to_string(size) + " yields " +
                        std::to_string(prefix.size()) + " sentences, fewer than k=" +
                        std::to_string(k));
    }
    rows.push_back({prefix.word_count(), cross_validate(prefix, k, config, chain, seed, jobs)});
  }
  return rows;
}

namespace detail {

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string fixed6(const std::optional<double>& x) { return x ? fixed6(*x) : std::string(); }

}  // namespace detail

inline constexpr std::string_view kCurveCsvHeader =
    "corpus_words,mean_accuracy,stddev_accuracy,mean_lexical_rules,mean_contextual_rules";

inline std::string render_report_csv(std::span<const CurveRow> curve) {
  std::string out(kCurveCsvHeader);
  out += '\n';
  for (const auto& row : curve) {
    out += std::to_string(row.corpus_words) + ',' + detail::fixed6(row.report.mean_accuracy) +
           ',' + detail::fixed6(row.report.stddev_accuracy) + ',' +
           detail::fixed6(row.report.mean_lexical_rules) + ',' +
           detail::fixed6(row.report.mean_contextual_rules) + '\n';
  }
  return out;
}

inline constexpr std::string_view kFoldCsvHeader =
    "fold,test_tokens,accuracy,stddev_accuracy,known_accuracy,unknown_accuracy,lexical_rules,"
    "contextual_rules";

// One row per fold followed by a `mean` summary row.
inline std::string render_folds_csv(const EvalReport& report) {
  std::string out(kFoldCsvHeader);
  out += '\n';
  std::uint64_t tokens = 0;
  for (const auto& f : report.folds) {
    tokens += f.test_tokens;
    const auto ratio = [](std::uint64_t c, std::uint64_t n) -> std::optional<double> {
      if (n == 0) return std::nullopt;
      return static_cast<double>(c) / static_cast<double>(n);
    };
    out += std::to_string(f.fold_id) + ',' + std::to_string(f.test_tokens) + ',' +
           detail::fixed6(f.accuracy) + ",," + detail::fixed6(ratio(f.known_correct, f.known_tokens)) +
           ',' + detail::fixed6(ratio(f.unknown_correct, f.unknown_tokens)) + ',' +
           std::to_string(f.n_lexical_rules) + ',' + std::to_string(f.n_contextual_rules) + '\n';
  }
  out += "mean," + std::to_string(tokens) + ',' + detail::fixed6(report.mean_accuracy) + ',' +
         detail::fixed6(report.stddev_accuracy) + ',' + detail::fixed6(report.known_accuracy()) +
         ',' + detail::fixed6(report.unknown_accuracy()) + ',' +
         detail::fixed6(report.mean_lexical_rules) + ',' +
         detail::fixed6(report.mean_contextual_rules) + '\n';
  return out;
}

inline std::string render_confusion_csv(const AccuracyResult& result, const Tagset& tagset) {
  std::string out = "gold,predicted,count\n";
  for (const auto& [key, n] : result.confusion) {
    out += tagset.name(key.first) + ',' + tagset.name(key.second) + ',' + std::to_string(n) + '\n';
  }
  return out;
}

}  // namespace tbed

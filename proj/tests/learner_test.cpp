#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "support.hpp"

namespace tbed {
namespace {

using CT = ContextTemplate;
using LT = LexicalTemplate;

TaggedCorpus numbered_corpus(std::size_t n) {
  auto ts = testing::abcd_tagset();
  std::vector<Sentence> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({{{"w" + std::to_string(i), TagId{0}}}});
  return TaggedCorpus(ts, std::move(s));
}

TEST(SplitForUnknownTraining, HalfAndHalf) {
  const auto c = numbered_corpus(10);
  const auto split = split_for_unknown_training(c, 0.5, 3);
  EXPECT_EQ(split.lexicon_part.size(), 5u);
  EXPECT_EQ(split.rule_part.size(), 5u);
  const auto again = split_for_unknown_training(c, 0.5, 3);
  EXPECT_EQ(again.lexicon_part, split.lexicon_part);
  EXPECT_EQ(again.rule_part, split.rule_part);
}

TEST(SplitForUnknownTraining, DisjointCoveringProperty) {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.below(30);
    const auto c = numbered_corpus(n);
    const double f = 0.05 + 0.9 * rng.uniform();
    const auto split = split_for_unknown_training(c, f, rng.next());
    ASSERT_GE(split.lexicon_part.size(), 1u);
    ASSERT_GE(split.rule_part.size(), 1u);
    std::multiset<std::string> words;
    for (const auto* part : {&split.lexicon_part, &split.rule_part}) {
      for (const auto& s : part->sentences()) words.insert(s.tokens[0].word);
    }
    ASSERT_EQ(words.size(), n);
    ASSERT_EQ(std::set<std::string>(words.begin(), words.end()).size(), n);
  }
  EXPECT_THROW(split_for_unknown_training(numbered_corpus(1), 0.5, 0), ConfigError);
}

TEST(ScoreLexicalCandidate, WeightedCounts) {
  auto ts = testing::abcd_tagset();
  const Lexicon lex(ts);
  const TagId a = ts->at("A"), b = ts->at("B");
  LexicalAssignments assignments{{"xος", {a, b, 3}}, {"yος", {b, b, 1}}, {"zα", {a, a, 5}}};
  const auto s = score_lexical_candidate({LT::HasSuffix, "ος", {}, b}, assignments, lex);
  EXPECT_EQ(s, (RuleScore{3, 0}));
  const auto broken = score_lexical_candidate({LT::HasSuffix, "ς", {}, ts->at("C")},
                                              LexicalAssignments{{"xος", {a, ts->at("C"), 3}},
                                                                 {"yος", {b, b, 1}}},
                                              lex);
  EXPECT_EQ(broken, (RuleScore{3, 1}));
  EXPECT_EQ(broken.net(), 2);
  EXPECT_EQ(score_lexical_candidate({LT::HasSuffix, "qq", {}, b}, assignments, lex),
            (RuleScore{0, 0}));
}

TEST(ScoreLexicalCandidate, EqualsRecountProperty) {
  Rng rng(52);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 100; ++i) {
    const auto c = testing::random_corpus(rng, ts);
    if (c.size() < 2) continue;
    TrainConfig config;
    config.seed = rng.next();
    const auto state = prepare_lexical_training(c, InitialRuleChain::greek_default(), config);
    ASSERT_LE(state.assignments.size(), 50u);
    for (const auto& rule : testing::random_lexical_rules(rng, *ts, 20)) {
      ASSERT_EQ(score_lexical_candidate(rule, state.assignments, state.guess_lexicon).net(),
                oracle::lexical_net(rule, state.assignments, state.guess_lexicon));
    }
  }
}

TEST(ScoreContextualCandidate, Counts) {
  auto ts = testing::abcd_tagset();
  const auto gold = testing::corpus_from("p/D q/A p/D q/A p/D q/A p/D q/A p/D q/B r/D", ts);
  auto st = testing::to_state(gold);
  for (auto& t : st[0]) {
    if (t.word == "q") t.tag = ts->at("C");
  }
  // Four C tokens should be A, one should be B.
  const auto rule = tag_context_rule(CT::PrevTag, ts->at("C"), ts->at("A"), ts->at("D"));
  EXPECT_EQ(score_contextual_candidate(rule, st, gold), (RuleScore{4, 0}));
  st[0][9].tag = ts->at("C");
  const auto b_rule = tag_context_rule(CT::NextTag, ts->at("D"), ts->at("C"), ts->at("C"));
  EXPECT_EQ(score_contextual_candidate(b_rule, st, gold).bad, 5);
  const auto nothing = tag_context_rule(CT::PrevTag, ts->at("B"), ts->at("A"), ts->at("D"));
  EXPECT_EQ(score_contextual_candidate(nothing, st, gold), (RuleScore{0, 0}));
}

TEST(ScoreContextualCandidate, CorrectFourCorruptOne) {
  auto ts = testing::abcd_tagset();
  const auto gold = testing::corpus_from("d/D x/A d/D x/A d/D x/A d/D x/A d/D x/C", ts);
  auto st = testing::to_state(gold);
  for (std::size_t j = 1; j < 8; j += 2) st[0][j].tag = ts->at("C");
  const auto rule = tag_context_rule(CT::PrevTag, ts->at("C"), ts->at("A"), ts->at("D"));
  EXPECT_EQ(score_contextual_candidate(rule, st, gold).net(), 3);
}

// Each sentence has at most one position tagged with the rule's from tag,
// so no application can influence another.
TEST(ScoreContextualCandidate, StaticEqualsDynamicWithoutInteractionProperty) {
  Rng rng(53);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 300; ++i) {
    const auto gold = testing::random_corpus(rng, ts, {.max_tokens = 80});
    auto st = testing::to_state(gold);
    const TagId from = TagId{static_cast<std::uint16_t>(rng.below(4))};
    for (auto& s : st) {
      for (auto& t : s) {
        if (rng.bernoulli(0.3)) t.tag = TagId{static_cast<std::uint16_t>(rng.below(4))};
      }
      bool seen = false;
      for (auto& t : s) {
        if (t.tag == from) {
          if (seen) t.tag = TagId{static_cast<std::uint16_t>((from.value + 1) % 4)};
          seen = true;
        }
      }
    }
    for (auto rule : testing::random_contextual_rules(rng, *ts, 10)) {
      rule.from = from;
      if (rule.to == from) continue;
      ContextualTrainingState s{st, {}};
      for (const auto& sent : gold.sentences()) {
        std::vector<TagId> g;
        for (const auto& t : sent.tokens) g.push_back(*t.tag);
        s.gold.push_back(std::move(g));
      }
      ASSERT_EQ(score_contextual_candidate(rule, st, gold).net(), oracle::contextual_net(rule, s));
      ASSERT_EQ(dynamic_contextual_score(rule, st, gold).net(), oracle::contextual_net(rule, s));
    }
  }
}

TEST(ContextualScorer, EqualsCopyApplyRecountProperty) {
  Rng rng(54);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 300; ++i) {
    const auto gold = testing::random_corpus(rng, ts, {.max_tokens = 80, .max_sentence = 12});
    ContextualTrainingState s{testing::to_state(gold), {}};
    for (auto& sent : s.state) {
      std::vector<TagId> g;
      for (auto& t : sent) {
        g.push_back(t.tag);
        if (rng.bernoulli(0.4)) t.tag = TagId{static_cast<std::uint16_t>(rng.below(4))};
      }
      s.gold.push_back(std::move(g));
    }
    const ContextualScorer scorer(s, ts->size());
    for (const auto& rule : testing::random_contextual_rules(rng, *ts, 40)) {
      ASSERT_EQ(scorer.score(rule).net(), oracle::contextual_net(rule, s))
          << serialize_rule(rule, *ts);
    }
  }
}

TEST(ContextualScorer, CascadeThroughLeftContext) {
  auto ts = testing::abcd_tagset();
  const auto gold = testing::corpus_from("x/A y/A z/A", ts);
  ContextualTrainingState s{testing::to_state(gold), {}};
  s.gold = {{ts->at("A"), ts->at("A"), ts->at("A")}};
  s.state[0][1].tag = ts->at("B");
  s.state[0][2].tag = ts->at("B");
  const auto rule = tag_context_rule(CT::PrevTag, ts->at("B"), ts->at("A"), ts->at("A"));
  EXPECT_EQ(ContextualScorer(s, ts->size()).score(rule), (RuleScore{2, 0}));
  EXPECT_EQ(score_contextual_candidate(rule, s.state, gold), (RuleScore{1, 0}));
}

TEST(SelectBestRule, ArgmaxTieBreakThreshold) {
  auto ts = testing::english_tagset();
  const LexicalRule a{LT::HasSuffix, "ed", {}, ts->at("VBD")};
  const LexicalRule b{LT::HasPrefix, "un", {}, ts->at("VB")};
  const std::vector<LexicalRule> rules = {a, b};
  const auto by = [&](std::int64_t na, std::int64_t nb) {
    return [=](const LexicalRule& r) { return r == a ? RuleScore{na, 0} : RuleScore{nb, 0}; };
  };
  EXPECT_EQ(select_best_rule<LexicalRule>(rules, by(3, 2), *ts, 2)->rule, a);
  // Equal nets: HASPREF sorts before HASSUF.
  EXPECT_EQ(select_best_rule<LexicalRule>(rules, by(3, 3), *ts, 2)->rule, b);
  EXPECT_FALSE(select_best_rule<LexicalRule>(rules, by(1, 1), *ts, 2));
}

TaggedCorpus suffix_corpus(std::uint64_t seed, std::size_t sentences) {
  auto ts = testing::tagset_from(
      "tag DIM\ntag NNF\ntag VB\ntag FW\ntag NP\n"
      "role FOREIGN FW\nrole PROPER_MASC_SG NP\nrole NOUN_FEM_SG NNF\n");
  const std::vector<std::pair<std::string, std::string>> paradigms = {
      {"ακι", "DIM"}, {"ούλα", "NNF"}, {"ώνω", "VB"}};
  Rng rng(seed);
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < sentences; ++i) {
    Sentence s;
    for (int j = 0; j < 5; ++j) {
      const auto stem = detail::random_syllables(rng, "βγδζκλμνπρστφχ", "αεηιου", 2);
      const auto& [suffix, tag] = paradigms[rng.below(paradigms.size())];
      s.tokens.push_back({stem + suffix, ts->at(tag)});
    }
    out.push_back(std::move(s));
  }
  return TaggedCorpus(ts, std::move(out));
}

TEST(LearnLexicalRules, SuffixLanguageGeneralizes) {
  const auto train = suffix_corpus(1, 60);
  const auto test = suffix_corpus(2, 20);
  const auto result = learn_lexical_rules(train, InitialRuleChain::greek_default(), {});
  EXPECT_FALSE(result.rules.empty());
  const TaggerModel model{train.tagset_ptr(), result.lexicon, InitialRuleChain::greek_default(),
                          result.rules, {}};
  const auto acc = accuracy(tag_corpus(strip_tags(test), model), test);
  EXPECT_EQ(acc.correct, acc.total);
}

TEST(LearnLexicalRules, NothingToFix) {
  auto ts = testing::english_tagset();
  // Every unknown type is a lowercase noun and already gets NNF.
  const auto train = testing::corpus_from("a/NNF\nb/NNF\nc/NNF\nd/NNF", ts);
  EXPECT_TRUE(learn_lexical_rules(train, InitialRuleChain::greek_default(), {}).rules.empty());
}

TEST(LearnLexicalRules, StepsReduceErrorsByNet) {
  Rng rng(55);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 30; ++i) {
    const auto train = testing::random_corpus(rng, ts);
    if (train.size() < 2) continue;
    TrainConfig config;
    config.score_threshold = 1 + rng.below(2);
    auto state = prepare_lexical_training(train, InitialRuleChain::greek_default(), config);
    std::uint64_t errors = weighted_type_errors(state.assignments);
    learn_lexical_rules_on(state, *ts, config, [&](const TrainEvent& e) {
      ASSERT_GE(e.score.net(), static_cast<std::int64_t>(config.score_threshold));
      ASSERT_EQ(static_cast<std::int64_t>(errors - e.errors_remaining), e.score.net());
      errors = e.errors_remaining;
    });
  }
}

TEST(LearnContextualRules, DeterminerFixture) {
  auto ts = testing::english_tagset();
  // "run" is mostly a verb but a noun after a determiner.
  const auto train = testing::corpus_from(
      "they/NN run/VB\nwe/NN run/VB\nthe/DET run/NN\nyou/NN run/VB\nthe/DET run/NN\n"
      "a/DET run/NN\ni/NN run/VB\nthey/NN run/VB\nthe/DET dogs/NN run/VB\n"
      "a/DET cat/NN run/VB\n",
      ts);
  const auto lexicon = build_lexicon(train);
  const auto rules =
      learn_contextual_rules(train, lexicon, {}, InitialRuleChain::greek_default(), {});
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(serialize_rule(rules[0], *ts), "CTX PREVTAG VB NN DET");
}

TEST(LearnContextualRules, NothingToFix) {
  auto ts = testing::english_tagset();
  const auto train = testing::corpus_from("the/DET can/MD\nthe/DET can/MD", ts);
  EXPECT_TRUE(learn_contextual_rules(train, build_lexicon(train), {},
                                     InitialRuleChain::greek_default(), {})
                  .empty());
}

TEST(LearnContextualRules, StrictlyDecreasingErrors) {
  Rng rng(56);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 30; ++i) {
    const auto train = testing::random_corpus(rng, ts);
    if (train.empty()) continue;
    auto state = prepare_contextual_training(train, build_lexicon(train), {},
                                             InitialRuleChain::greek_default());
    std::uint64_t errors = token_errors(state);
    TrainConfig config;
    config.score_threshold = 1;
    learn_contextual_rules_on(state, *ts, config, [&](const TrainEvent& e) {
      ASSERT_LT(e.errors_remaining, errors);
      ASSERT_EQ(static_cast<std::int64_t>(errors - e.errors_remaining), e.score.net());
      errors = e.errors_remaining;
    });
  }
}

// The error-site candidate set must contain the exhaustive argmax.
TEST(LearnContextualRules, FirstRuleMatchesExhaustiveSearchProperty) {
  Rng rng(57);
  auto ts = testing::abcd_tagset();
  for (int i = 0; i < 40; ++i) {
    const auto train = testing::random_corpus(rng, ts, {.max_tokens = 80});
    if (train.empty()) continue;
    auto state = prepare_contextual_training(train, build_lexicon(train), {},
                                             InitialRuleChain::greek_default());
    const auto best = oracle::best_contextual_rule(state, *ts);
    TrainConfig config;
    config.score_threshold = 1;
    config.max_rules_per_phase = 1;
    const auto rules = learn_contextual_rules_on(state, *ts, config);
    if (best->net < 1) {
      ASSERT_TRUE(rules.empty());
    } else {
      ASSERT_EQ(rules.size(), 1u);
      ASSERT_EQ(serialize_rule(rules[0], *ts), serialize_rule(best->rule, *ts));
    }
  }
}

TEST(TrainModel, DeterministicAndAtLeastBaseline) {
  const auto train = testing::greek_sample();
  const auto chain = InitialRuleChain::greek_default();
  TrainConfig config;
  config.score_threshold = 1;
  const auto m1 = train_model(train, chain, config);
  const auto m2 = train_model(train, chain, config);
  EXPECT_EQ(m1, m2);

  TrainConfig none = config;
  none.max_rules_per_phase = 0;
  const auto base = train_model(train, chain, none);
  EXPECT_TRUE(base.lexical_rules.empty());
  EXPECT_TRUE(base.contextual_rules.empty());
  const auto raw = strip_tags(train);
  const double base_acc = accuracy(tag_corpus(raw, base), train).accuracy();
  EXPECT_DOUBLE_EQ(base_acc, oracle::baseline_accuracy(train));
  EXPECT_GE(accuracy(tag_corpus(raw, m1), train).accuracy(), base_acc);
}

TEST(TrainModel, RejectsBadConfig) {
  const auto train = testing::greek_sample();
  TrainConfig c;
  c.score_threshold = 0;
  EXPECT_THROW(train_model(train, InitialRuleChain::greek_default(), c), ConfigError);
  c = {};
  c.lexicon_split_fraction = 1.0;
  EXPECT_THROW(train_model(train, InitialRuleChain::greek_default(), c), ConfigError);
  EXPECT_THROW(train_model(TaggedCorpus(train.tagset_ptr(), {}),
                           InitialRuleChain::greek_default(), {}),
               ConfigError);
}

TEST(TrainModel, SingleSentenceLearnsNoLexicalRules) {
  auto ts = testing::english_tagset();
  const auto m = train_model(testing::corpus_from("the/DET run/NN", ts),
                             InitialRuleChain::greek_default(), {});
  EXPECT_TRUE(m.lexical_rules.empty());
}

}  // namespace
}  // namespace tbed

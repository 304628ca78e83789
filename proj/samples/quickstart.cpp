// Trains a tagger on the bundled Greek sample corpus, prints the learned
// rules and tags a few raw sentences.
//
//   ./quickstart [samples-dir]

#include <iostream>
#include <memory>
#include <string>

#include "tbed/tbed.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : TBED_SAMPLES_DIR;
  try {
    auto tagset = std::make_shared<const tbed::Tagset>(
        tbed::load_tagset(tbed::read_file(dir + "/greek.tagset")));
    const auto corpus =
        tbed::parse_tagged_corpus(tbed::read_file(dir + "/greek_tagged.txt"), tagset);

    const auto model =
        tbed::train_model(corpus, tbed::InitialRuleChain::greek_default(), tbed::TrainConfig{});

    std::cout << "# lexical rules\n"
              << tbed::serialize_rules<tbed::LexicalRule>(model.lexical_rules, *tagset)
              << "# contextual rules\n"
              << tbed::serialize_rules<tbed::ContextualRule>(model.contextual_rules, *tagset);

    tbed::Tagger tagger(model);
    std::cout << "# tagged\n";
    for (const auto& s : tbed::parse_raw_corpus(tbed::read_file(dir + "/greek_raw.txt"))) {
      std::cout << tbed::serialize_sentence(tagger.tag(s), *tagset) << '\n';
    }
  } catch (const tbed::Error& e) {
    std::cerr << "quickstart: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

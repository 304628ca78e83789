#pragma once

// Model directory persistence: TAGSET, LEXICON, LEXRULES, CTXRULES and a
// MANIFEST holding the format version, the training configuration and the
// initial rule chain. Every file is plain UTF-8 text.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/learner.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/rules.hpp"
#include "tbed/tagger.hpp"

namespace tbed {

inline constexpr int kModelFormatVersion = 1;

struct ModelBundle {
  TaggerModel model;
  TrainConfig config;
};

// File name -> contents.
using ModelFiles = std::map<std::string, std::string>;

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::string serialize_manifest(const TrainConfig& config, const InitialRuleChain& chain) {
  std::string out = "format " + std::to_string(kModelFormatVersion) + "\n";
  out += "score_threshold " + std::to_string(config.score_threshold) + "\n";
  out += "max_rules_per_phase " +
         (config.max_rules_per_phase ? std::to_string(*config.max_rules_per_phase)
                                     : std::string("unlimited")) +
         "\n";
  out += "lexicon_split_fraction " + detail::format_double(config.lexicon_split_fraction) + "\n";
  out += "max_affix_len " + std::to_string(config.max_affix_len) + "\n";
  out += "seed " + std::to_string(config.seed) + "\n";
  for (const auto& b : chain.branches()) {
    out += "chain " + std::string(predicate_keyword(b.predicate)) + " " +
           std::string(role_key(b.role)) + "\n";
  }
  return out;
}

inline std::pair<TrainConfig, InitialRuleChain> parse_manifest(std::string_view text) {
  TrainConfig config;
  std::vector<InitialRuleChain::Branch> branches;
  bool saw_format = false;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line) || detail::is_comment(line)) return;
    const auto items = detail::split_items(line);
    const auto key = items[0].second;
    const auto number = [&](std::string_view v) {
      std::uint64_t n = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ParseError("expected an integer, got '" + std::string(v) + "'", line_no);
      }
      return n;
    };
    if (key == "chain") {
      if (items.size() != 3) throw ParseError("expected 'chain <PREDICATE> <ROLEKEY>'", line_no);
      auto pred = parse_predicate_keyword(items[1].second);
      auto role = parse_role_key(items[2].second);
      if (!pred || !role) throw ParseError("bad chain branch", line_no);
      branches.push_back({*pred, *role});
      return;
    }
    if (items.size() != 2) throw ParseError("expected '<key> <value>'", line_no);
    const auto value = items[1].second;
    if (key == "format") {
      if (number(value) != kModelFormatVersion) {
        throw ParseError("unsupported model format " + std::string(value), line_no);
      }
      saw_format = true;
    } else if (key == "score_threshold") {
      config.score_threshold = number(value);
    } else if (key == "max_rules_per_phase") {
      if (value == "unlimited") {
        config.max_rules_per_phase.reset();
      } else {
        config.max_rules_per_phase = number(value);
      }
    } else if (key == "lexicon_split_fraction") {
      double f = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), f);
      if (ec != std::errc{} || p != value.data() + value.size()) {
        throw ParseError("bad lexicon_split_fraction", line_no);
      }
      config.lexicon_split_fraction = f;
    } else if (key == "max_affix_len") {
      config.max_affix_len = number(value);
    } else if (key == "seed") {
      config.seed = number(value);
    } else {
      throw ParseError("unknown manifest key '" + std::string(key) + "'", line_no);
    }
  });
  if (!saw_format) throw ParseError("manifest lacks a format line", 1);
  config.validate();
  return {config, InitialRuleChain(std::move(branches))};
}

inline ModelFiles serialize_model(const TaggerModel& model, const TrainConfig& config) {
  return {
      {"TAGSET", serialize_tagset(model.tags())},
      {"LEXICON", serialize_lexicon(model.lexicon)},
      {"LEXRULES", serialize_rules<LexicalRule>(model.lexical_rules, model.tags())},
      {"CTXRULES", serialize_rules<ContextualRule>(model.contextual_rules, model.tags())},
      {"MANIFEST", serialize_manifest(config, model.initial_chain)},
  };
}

inline ModelBundle parse_model(const ModelFiles& files) {
  const auto get = [&](const std::string& name) -> const std::string& {
    auto it = files.find(name);
    if (it == files.end()) throw Error("model is missing " + name);
    return it->second;
  };
  const auto in_file = [](const std::string& name, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError& e) {
      throw Error(name + ": " + e.what());
    } catch (const TagsetError& e) {
      throw TagsetError(name + ": " + e.what());
    }
  };
  auto [config, chain] = in_file("MANIFEST", [&] { return parse_manifest(get("MANIFEST")); });
  auto tagset = std::make_shared<const Tagset>(
      in_file("TAGSET", [&] { return load_tagset(get("TAGSET")); }));
  Lexicon lexicon = in_file("LEXICON", [&] { return parse_lexicon(get("LEXICON"), tagset); });
  auto lex = in_file("LEXRULES",
                     [&] { return parse_rules(get("LEXRULES"), *tagset, config.max_affix_len); });
  auto ctx = in_file("CTXRULES",
                     [&] { return parse_rules(get("CTXRULES"), *tagset, config.max_affix_len); });
  if (!lex.contextual.empty()) throw Error("LEXRULES contains contextual rules");
  if (!ctx.lexical.empty()) throw Error("CTXRULES contains lexical rules");
  TaggerModel model{tagset, std::move(lexicon), std::move(chain), std::move(lex.lexical),
                    std::move(ctx.contextual)};
  model.validate(config.max_affix_len);
  return {std::move(model), config};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("error writing " + path.string());
}

inline ModelBundle read_model_directory(const std::filesystem::path& dir) {
  ModelFiles files;
  for (const char* name : {"TAGSET", "LEXICON", "LEXRULES", "CTXRULES", "MANIFEST"}) {
    const auto path = dir / name;
    if (!std::filesystem::is_regular_file(path)) {
      throw Error("model directory " + dir.string() + " lacks " + name);
    }
    files[name] = read_file(path);
  }
  return parse_model(files);
}

// Writes into a sibling temporary directory and renames it into place, so
// `dir` never holds a partial model.
inline void write_model_directory(const std::filesystem::path& dir, const TaggerModel& model,
                                  const TrainConfig& config) {
  namespace fs = std::filesystem;
  const ModelFiles files = serialize_model(model, config);
  const fs::path target = fs::absolute(dir).lexically_normal();
  const fs::path parent = target.parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);

  std::random_device rd;
  const fs::path tmp = parent / (target.filename().string() + ".tmp-" + std::to_string(rd()));
  try {
    fs::create_directory(tmp);
    for (const auto& [name, content] : files) write_file(tmp / name, content);
    if (fs::exists(target)) {
      const fs::path old = parent / (target.filename().string() + ".old-" + std::to_string(rd()));
      fs::rename(target, old);
      fs::rename(tmp, target);
      fs::remove_all(old);
    } else {
      fs::rename(tmp, target);
    }
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw IoError(e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

}  // namespace tbed

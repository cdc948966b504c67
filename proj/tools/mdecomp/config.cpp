#include "config.hpp"

#include <filesystem>

#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::string> input_path(const json& doc, const char* key, const std::string& base_dir, bool must_exist) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  fs::path p(it->get<std::string>());
  if (p.is_relative()) p = fs::path(base_dir) / p;
  const std::string resolved = p.lexically_normal().string();
  if (must_exist && !fs::exists(p)) {
    throw Error(ErrorKind::Validation, std::string("config: ") + key + " '" + resolved + "' does not exist");
  }
  return resolved;
}

std::vector<CodePair> code_pairs(const json& j, const char* what) {
  std::vector<CodePair> out;
  if (j.is_object()) {
    for (const auto& [code, target] : j.items()) out.emplace_back(code, target.get<std::string>());
    return out;
  }
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorKind::Validation, std::string("config: each ") + what + " entry must be a [code, code] pair");
    }
    out.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  RunConfig c;
  try {
    c.analysis_corpus = input_path(doc, "analysis_corpus", base_dir, true);
    c.train_corpus = input_path(doc, "train_corpus", base_dir, true);
    c.sentence_embeddings = input_path(doc, "sentence_embeddings", base_dir, true);
    c.bigram_embeddings = input_path(doc, "bigram_embeddings", base_dir, true);
    c.train_bigram_embeddings = input_path(doc, "train_bigram_embeddings", base_dir, true);
    c.scheme = input_path(doc, "scheme", base_dir, true);
    // Produced by earlier stages; checked when used.
    c.model = input_path(doc, "model", base_dir, false);
    c.predictions = input_path(doc, "predictions", base_dir, false);
    if (auto out = input_path(doc, "output_dir", base_dir, false)) c.output_dir = *out;
    else c.output_dir = (fs::path(base_dir) / "out").lexically_normal().string();

    if (const auto w = doc.find("whitening"); w != doc.end()) {
      c.whiten = w->value("enabled", c.whiten);
      c.eigenvalue_floor = w->value("eigenvalue_floor", c.eigenvalue_floor);
    }
    if (const auto g = doc.find("grouping"); g != doc.end()) {
      const auto min_count = g->value("min_count", static_cast<long long>(c.grouping.min_count));
      const auto k = g->value("k", static_cast<long long>(c.grouping.k));
      if (min_count < 1) throw Error(ErrorKind::Validation, "config: grouping.min_count must be >= 1");
      if (k < 2) throw Error(ErrorKind::Validation, "config: grouping.k must be >= 2");
      c.grouping.min_count = static_cast<std::size_t>(min_count);
      c.grouping.k = static_cast<std::size_t>(k);
      if (g->contains("stance_pairs")) c.grouping.stance_pairs = code_pairs(g->at("stance_pairs"), "stance_pairs");
      if (g->contains("overrides")) c.grouping.overrides = code_pairs(g->at("overrides"), "overrides");
      if (g->contains("names")) {
        for (const auto& [id, name] : g->at("names").items()) {
          double v = 0.0;
          if (!parse_double(id, v) || v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw Error(ErrorKind::Validation, "config: grouping.names keys must be cluster ids, got '" + id + "'");
          }
          c.grouping.names[static_cast<std::size_t>(v)] = name.get<std::string>();
        }
      }
      c.grouping.other_codes = g->value("other_codes", c.grouping.other_codes);
      c.grouping.exclude_codes = g->value("exclude_codes", c.grouping.exclude_codes);
    }
    if (const auto l = doc.find("labeller"); l != doc.end()) {
      c.labeller.kind = l->value("kind", c.labeller.kind);
      if (c.labeller.kind != "logreg" && c.labeller.kind != "majority") {
        throw Error(ErrorKind::Validation, "config: labeller.kind must be 'logreg' or 'majority'");
      }
      auto& t = c.labeller.training;
      t.epochs = l->value("epochs", t.epochs);
      t.learning_rate = l->value("lr", t.learning_rate);
      t.l2 = l->value("l2", t.l2);
      t.seed = l->value("seed", t.seed);
      t.init_scale = l->value("init_scale", t.init_scale);
      t.whiten = l->value("whiten", t.whiten);
      c.labeller.validation_fraction = l->value("validation_fraction", c.labeller.validation_fraction);
    }
    c.labeller.training.eigenvalue_floor = c.eigenvalue_floor;
    if (const auto e = doc.find("evaluation"); e != doc.end()) {
      c.evaluation.rile_codes = input_path(*e, "rile_codes", base_dir, true);
      c.evaluation.mantel_permutations = e->value("mantel_permutations", c.evaluation.mantel_permutations);
      c.evaluation.seed = e->value("seed", c.evaluation.seed);
      c.evaluation.compare_predicted = e->value("compare_predicted", c.evaluation.compare_predicted);
      c.evaluation.salience_weighted = e->value("salience_weighted", c.evaluation.salience_weighted);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  const auto base = fs::absolute(path).parent_path().string();
  return parse_config(read_file(path), base);
}

}  // namespace mdecomp::cli

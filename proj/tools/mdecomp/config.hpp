#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mdecomp/grouping.hpp"
#include "mdecomp/labeling.hpp"

namespace mdecomp::cli {

struct GroupingConfig {
  std::size_t min_count = 10;
  std::size_t k = 13;
  std::vector<CodePair> stance_pairs;
  std::vector<CodePair> overrides;
  std::map<std::size_t, std::string> names;
  std::set<std::string> other_codes;
  std::set<std::string> exclude_codes;
};

struct LabellerConfig {
  std::string kind = "logreg";  // or "majority"
  TrainingConfig training;
  double validation_fraction = 0.1;
};

struct EvaluationConfig {
  std::optional<std::string> rile_codes;
  std::size_t mantel_permutations = 9999;
  std::uint64_t seed = 0;
  bool compare_predicted = true;
  bool salience_weighted = false;
};

/// Paths are absolute or resolved against the config file's directory.
struct RunConfig {
  std::optional<std::string> analysis_corpus;
  std::optional<std::string> train_corpus;
  std::optional<std::string> sentence_embeddings;
  std::optional<std::string> bigram_embeddings;
  std::optional<std::string> train_bigram_embeddings;
  std::optional<std::string> scheme;
  std::optional<std::string> model;
  std::optional<std::string> predictions;
  bool whiten = true;
  double eigenvalue_floor = 1e-10;
  GroupingConfig grouping;
  LabellerConfig labeller;
  EvaluationConfig evaluation;
  std::string output_dir = "out";
};

/// Parses and validates: input paths must exist, min_count >= 1, k >= 2.
RunConfig parse_config(std::string_view json_text, const std::string& base_dir);
RunConfig load_config(const std::string& path);

}  // namespace mdecomp::cli

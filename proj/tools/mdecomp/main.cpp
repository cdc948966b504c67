#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "mdecomp/error.hpp"
#include "mdecomp/parallel.hpp"

namespace {

int report_error(std::string_view kind, const std::string& message, int code) {
  nlohmann::json err;
  err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mdecomp;
  using namespace mdecomp::cli;

  CLI::App app{"Additive manifesto decomposition: policy domains, party distances and scaling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  long long seed = -1;
  std::string labels = "annotated";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
    sub->add_option("--seed", seed, "Seed for labeller initialisation and Mantel sampling");
  };

  auto* group = app.add_subcommand("group", "Cluster categories into policy domains");
  common(group);

  auto* label = app.add_subcommand("label", "Train, apply or evaluate the bigram domain labeller");
  label->require_subcommand(1);
  auto* train = label->add_subcommand("train", "Train a labeller");
  auto* predict = label->add_subcommand("predict", "Label the analysis corpus");
  auto* eval = label->add_subcommand("eval", "Accuracy against gold codes");
  for (auto* sub : {train, predict, eval}) common(sub);

  auto* similarity = app.add_subcommand("similarity", "Per-domain and aggregate party distance matrices");
  common(similarity);
  similarity->add_option("--labels", labels, "Domain labels: annotated or predicted")
      ->check(CLI::IsMember({"annotated", "predicted"}));

  auto* evaluate = app.add_subcommand("evaluate", "MDS scaling and agreement with RILE / salience ground truths");
  common(evaluate);
  evaluate->add_option("--labels", labels, "Which similarity output to evaluate")
      ->check(CLI::IsMember({"annotated", "predicted"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), 2);
  }

  try {
    RunConfig config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed >= 0) {
      config.labeller.training.seed = static_cast<std::uint64_t>(seed);
      config.evaluation.seed = static_cast<std::uint64_t>(seed);
    }
    parallel::set_threads(threads);
    const LabelsSource source = labels == "predicted" ? LabelsSource::Predicted : LabelsSource::Annotated;

    if (group->parsed()) {
      cmd_group(config);
    } else if (train->parsed()) {
      cmd_label(config, LabelMode::Train);
    } else if (predict->parsed()) {
      cmd_label(config, LabelMode::Predict);
    } else if (eval->parsed()) {
      cmd_label(config, LabelMode::Eval);
    } else if (similarity->parsed()) {
      cmd_similarity(config, source);
    } else if (evaluate->parsed()) {
      cmd_evaluate(config, source);
    }
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), e.is_user_error() ? 2 : 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}

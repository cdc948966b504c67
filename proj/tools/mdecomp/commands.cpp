#include "commands.hpp"

#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "mdecomp/corpus.hpp"
#include "mdecomp/embedding.hpp"
#include "mdecomp/error.hpp"
#include "mdecomp/grouping.hpp"
#include "mdecomp/labeling.hpp"
#include "mdecomp/log.hpp"
#include "mdecomp/scaling.hpp"
#include "mdecomp/similarity.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string& require(const std::optional<std::string>& value, const char* key) {
  if (!value) throw Error(ErrorKind::Validation, std::string("config: '") + key + "' is required for this command");
  return *value;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

// Explicit config path, else the artifact an earlier stage left in the output directory.
std::string stage_input(const std::optional<std::string>& configured, const RunConfig& c, const std::string& name,
                        const char* key) {
  if (configured) {
    if (!fs::exists(*configured)) {
      throw Error(ErrorKind::Validation, std::string("config: ") + key + " '" + *configured + "' does not exist");
    }
    return *configured;
  }
  const auto fallback = (fs::path(c.output_dir) / name).string();
  if (!fs::exists(fallback)) {
    throw Error(ErrorKind::Validation, std::string("no '") + key + "' in config and no " + fallback +
                                           " from an earlier stage");
  }
  return fallback;
}

DomainScheme scheme_for(const RunConfig& c) { return load_scheme(stage_input(c.scheme, c, "partition.json", "scheme")); }

WhiteningTransform corpus_whitening(const RunConfig& c, const Corpus& corpus, const EmbeddingStore& store) {
  if (!c.whiten) return WhiteningTransform::identity(store.dim());
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) ids.push_back(s.id);
  return fit_whitening(store, ids, c.eigenvalue_floor);
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json undefined_block(const std::string& reason) { return {{"defined", false}, {"reason", reason}}; }

}  // namespace

std::string to_string(LabelsSource source) {
  return source == LabelsSource::Annotated ? "annotated" : "predicted";
}

void cmd_group(const RunConfig& c) {
  const Corpus corpus = ingest_corpus(require(c.analysis_corpus, "analysis_corpus"));
  const EmbeddingStore store = load_embeddings(require(c.sentence_embeddings, "sentence_embeddings"));
  const WhiteningTransform whitening = corpus_whitening(c, corpus, store);

  const auto built = build_category_matrix(corpus, store, whitening, c.grouping.min_count, c.grouping.exclude_codes);
  const Dendrogram dendrogram = average_linkage_cluster(built.matrix);
  const std::size_t k = std::min(c.grouping.k, dendrogram.leaves.size());
  if (k != c.grouping.k) {
    log_warning("k=" + std::to_string(c.grouping.k) + " exceeds the " + std::to_string(k) +
                " clustered categories; cutting into singletons");
  }
  const Partition partition = cut_dendrogram(dendrogram, k);
  const DomainScheme scheme =
      finalize_scheme(partition, c.grouping.overrides, c.grouping.names, c.grouping.other_codes);

  write_file(out_path(c, "category_matrix.csv"), category_matrix_csv(built.matrix));
  write_file(out_path(c, "dendrogram.json"), dendrogram_json(dendrogram));
  write_file(out_path(c, "partition.json"), serialize_scheme_json(scheme));
  write_file(out_path(c, "leftovers.json"), leftovers_json(built.leftovers));

  if (!c.grouping.stance_pairs.empty()) {
    const StanceReport report = check_stance_pairing(partition, c.grouping.stance_pairs);
    const std::string text = stance_report_json(report);
    write_file(out_path(c, "stance_report.json"), text);
    std::cout << text;
  }
}

void cmd_label(const RunConfig& c, LabelMode mode) {
  if (mode == LabelMode::Train) {
    const Corpus corpus = ingest_corpus(c.train_corpus ? *c.train_corpus : require(c.analysis_corpus, "train_corpus"));
    const EmbeddingStore store = load_embeddings(
        c.train_bigram_embeddings ? *c.train_bigram_embeddings : require(c.bigram_embeddings, "train_bigram_embeddings"));
    const DomainScheme scheme = scheme_for(c);
    auto all = make_bigrams(corpus, store, &scheme);
    std::erase_if(all, [](const BigramInstance& b) { return !b.label; });
    if (all.empty()) throw Error(ErrorKind::Training, "training corpus has no coded sentences");

    const auto split = split_validation(all, c.labeller.validation_fraction);
    std::vector<BigramInstance> train, validation;
    for (std::size_t i : split.train) train.push_back(all[i]);
    for (std::size_t i : split.validation) validation.push_back(all[i]);

    const ClassifierModel model =
        c.labeller.kind == "majority" ? train_majority(train) : train_logreg(train, c.labeller.training);

    auto gold_of = [](std::span<const BigramInstance> xs) {
      std::map<std::string, std::string> gold;
      for (const auto& x : xs) gold[x.id] = *x.label;
      return gold;
    };
    json report;
    report["model_kind"] = model.kind;
    report["classes"] = model.classes;
    report["n_train"] = train.size();
    report["n_validation"] = validation.size();
    report["train_accuracy"] = accuracy(predict(model, train), gold_of(train));
    report["validation_accuracy"] =
        validation.empty() ? json(nullptr) : json(accuracy(predict(model, validation), gold_of(validation)));
    report["epochs_run"] = model.epochs_run;
    report["lr_halvings"] = model.lr_halvings;
    report["final_loss"] = model.final_loss;

    write_file(c.model ? *c.model : out_path(c, "model.json"), model_to_json(model));
    write_file(out_path(c, "train_report.json"), dump(report));
    return;
  }

  const ClassifierModel model = model_from_json(read_file(stage_input(c.model, c, "model.json", "model")));
  const Corpus corpus = ingest_corpus(require(c.analysis_corpus, "analysis_corpus"));
  const EmbeddingStore store = load_embeddings(require(c.bigram_embeddings, "bigram_embeddings"));

  if (mode == LabelMode::Predict) {
    const auto instances = make_bigrams(corpus, store);
    const auto predicted = predict(model, instances);
    write_file(c.predictions ? *c.predictions : out_path(c, "predictions.jsonl"), predictions_jsonl(instances, predicted));
    return;
  }

  const DomainScheme scheme = scheme_for(c);
  const auto instances = make_bigrams(corpus, store, &scheme);
  std::map<std::string, std::string> gold;
  for (const auto& inst : instances) {
    if (inst.label) gold[inst.id] = *inst.label;
  }
  if (gold.empty()) throw Error(ErrorKind::UndefinedMetric, "evaluation corpus has no gold labels");
  const auto predicted = predict(model, instances);

  json report;
  report["model_kind"] = model.kind;
  report["n"] = gold.size();
  report["overall"] = accuracy(predicted, gold);
  json per_domain = json::object();
  std::vector<std::string> labels = scheme.domain_names();
  labels.emplace_back(kOtherDomain);
  for (const auto& label : labels) {
    const bool present = std::any_of(gold.begin(), gold.end(), [&](const auto& g) { return g.second == label; });
    per_domain[label] = present ? json(accuracy(predicted, gold, label)) : json(nullptr);
  }
  report["per_domain"] = per_domain;
  write_file(out_path(c, "accuracy_report.json"), dump(report));
}

void cmd_similarity(const RunConfig& c, LabelsSource source) {
  const Corpus corpus = ingest_corpus(require(c.analysis_corpus, "analysis_corpus"));
  const EmbeddingStore store = load_embeddings(require(c.sentence_embeddings, "sentence_embeddings"));
  const DomainScheme scheme = scheme_for(c);

  LabelMap labels;
  if (source == LabelsSource::Annotated) {
    labels = annotated_labels(corpus, scheme);
  } else {
    labels = parse_predictions_jsonl(read_file(stage_input(c.predictions, c, "predictions.jsonl", "predictions")));
    for (const auto& [id, _] : labels) {
      if (corpus.find(id) == nullptr) {
        throw Error(ErrorKind::Validation, "prediction for sentence '" + id + "' which is not in the analysis corpus");
      }
    }
  }

  const WhiteningTransform whitening = corpus_whitening(c, corpus, store);
  const DomainSlices slices(corpus, store, whitening, scheme, labels);
  auto matrices = build_domain_matrices(slices);
  for (const auto& m : matrices) {
    for (const auto& [party, count] : m.coverage) {
      if (count == 0) log_warning("party '" + party + "' has no sentences in domain '" + m.tag + "'; cells are NA");
    }
  }
  matrices.push_back(aggregate_matrix(
      matrices, c.evaluation.salience_weighted ? AggregateMode::SalienceWeighted : AggregateMode::Unweighted));

  const fs::path dir = fs::path(c.output_dir) / ("similarity_" + to_string(source));
  fs::create_directories(dir);
  std::set<std::string> used;
  for (std::size_t i = 0; i + 1 < matrices.size(); ++i) {
    const std::string stem = "domain_" + slugify(matrices[i].tag);
    if (!used.insert(stem).second) {
      throw Error(ErrorKind::Validation, "domain names collide on file name '" + stem + ".csv'");
    }
    write_file((dir / (stem + ".csv")).string(), matrix_csv(matrices[i]));
  }
  write_file((dir / "aggregate.csv").string(), matrix_csv(matrices.back()));
  write_file((dir / "matrices.json").string(), matrices_json(matrices, to_string(source)));
}

namespace {

json mantel_block(const PartyDistanceMatrix& a, const PartyDistanceMatrix& b, const EvaluationConfig& e) {
  try {
    const MantelResult m = mantel(a, b, e.mantel_permutations, e.seed);
    return {{"defined", true},
            {"r", m.r},
            {"p", m.p_value},
            {"n_permutations", m.n_permutations},
            {"mode", m.mode == MantelMode::Exact ? "exact" : "sampled"}};
  } catch (const Error& err) {
    if (!err.is_user_error()) throw;
    return undefined_block(err.what());
  }
}

struct ScaledBlock {
  json mds;
  json pearson;
  json plot;
};

ScaledBlock scale_block(const PartyDistanceMatrix& m, const std::optional<RileScores>& rile,
                        const std::string& rile_reason) {
  ScaledBlock out;
  out.plot = json::array();
  ScalingResult scaling;
  try {
    scaling = classical_mds_axis1(m);
  } catch (const Error& err) {
    if (!err.is_user_error()) throw;
    out.mds = undefined_block(err.what());
    out.pearson = undefined_block("no MDS axis");
    return out;
  }
  json coords = json::array();
  for (std::size_t i = 0; i < scaling.parties.size(); ++i) {
    coords.push_back({{"party", scaling.parties[i]}, {"coordinate", scaling.coordinate[i]}});
  }
  out.mds = {{"defined", true}, {"explained_ratio", scaling.explained_ratio}, {"coordinates", coords}};
  out.plot = coords;
  if (!rile) {
    out.pearson = undefined_block(rile_reason);
    return out;
  }
  try {
    const RileCorrelation rc = correlate_scaling_with_rile(scaling, *rile);
    out.pearson = {{"defined", true}, {"r", rc.r}, {"abs_r", rc.abs_r}, {"p", rc.p_value}};
  } catch (const Error& err) {
    if (!err.is_user_error()) throw;
    out.pearson = undefined_block(err.what());
  }
  return out;
}

const PartyDistanceMatrix* find_tag(const std::vector<PartyDistanceMatrix>& ms, std::string_view tag) {
  for (const auto& m : ms) {
    if (m.tag == tag) return &m;
  }
  return nullptr;
}

}  // namespace

void cmd_evaluate(const RunConfig& c, LabelsSource source) {
  const Corpus corpus = ingest_corpus(require(c.analysis_corpus, "analysis_corpus"));
  const DomainScheme scheme = scheme_for(c);
  const std::string name = "similarity_" + to_string(source) + "/matrices.json";
  const auto matrices = parse_matrices_json(read_file(stage_input(std::nullopt, c, name, "matrices")));
  const PartyDistanceMatrix* aggregate = find_tag(matrices, kAggregateTag);
  if (aggregate == nullptr) throw Error(ErrorKind::Format, name + " has no aggregate matrix");

  json warnings = json::array();
  auto warn = [&](const std::string& msg) {
    log_warning(msg);
    warnings.push_back(msg);
  };

  const RileCodes rile_codes =
      c.evaluation.rile_codes ? parse_rile_codes_json(read_file(*c.evaluation.rile_codes)) : RileCodes::cmp_default();
  std::optional<RileScores> rile;
  std::string rile_reason;
  json rile_json;
  try {
    rile = rile_scores(corpus, rile_codes);
    rile_json = {{"defined", true}, {"scores", rile->scores}};
  } catch (const Error& err) {
    if (!err.is_user_error()) throw;
    rile_reason = err.what();
    rile_json = undefined_block(rile_reason);
    warn("RILE undefined: " + rile_reason);
  }

  std::map<std::string, double> accuracy_by_domain;
  const auto acc_path = fs::path(c.output_dir) / "accuracy_report.json";
  if (fs::exists(acc_path)) {
    const json acc = json::parse(read_file(acc_path.string()));
    for (const auto& [domain, v] : acc.at("per_domain").items()) {
      if (!v.is_null()) accuracy_by_domain[domain] = v.get<double>();
    }
  }

  std::optional<std::vector<PartyDistanceMatrix>> predicted;
  if (source == LabelsSource::Annotated && c.evaluation.compare_predicted) {
    const auto path = fs::path(c.output_dir) / "similarity_predicted" / "matrices.json";
    if (fs::exists(path)) predicted = parse_matrices_json(read_file(path.string()));
  }

  json report;
  report["labels_source"] = to_string(source);
  report["parties"] = aggregate->parties;
  report["rile"] = rile_json;
  json domains = json::object();
  json plot = json::object();
  json comparison = json::object();
  std::map<std::string, double> mantel_by_domain;

  for (const auto& m : matrices) {
    const bool is_aggregate = m.tag == kAggregateTag;
    std::optional<PartyDistanceMatrix> truth;
    try {
      if (is_aggregate) {
        truth = salience_distance_matrix(corpus);
      } else {
        if (!scheme.has_domain(m.tag)) throw Error(ErrorKind::Lookup, "domain '" + m.tag + "' not in the scheme");
        const auto& codes = scheme.domains().at(m.tag);
        truth = salience_distance_matrix(corpus, &codes);
      }
    } catch (const Error& err) {
      if (!err.is_user_error()) throw;
      warn("salience ground truth undefined for '" + m.tag + "': " + err.what());
    }

    json block;
    block["coverage"] = m.coverage;
    const ScaledBlock scaled = scale_block(m, rile, rile_reason);
    block["mds"] = scaled.mds;
    block["pearson_vs_rile"] = scaled.pearson;
    if (!scaled.pearson.at("defined").get<bool>()) {
      warn("pearson vs RILE undefined for '" + m.tag + "': " + scaled.pearson.at("reason").get<std::string>());
    }
    const json mb = truth ? mantel_block(m, *truth, c.evaluation) : undefined_block("no salience ground truth");
    block["mantel_vs_salience"] = mb;
    block["mantel_r"] = mb.at("defined").get<bool>() ? mb.at("r") : json(nullptr);
    block["mantel_p"] = mb.at("defined").get<bool>() ? mb.at("p") : json(nullptr);
    const auto acc = accuracy_by_domain.find(m.tag);
    block["accuracy"] = acc != accuracy_by_domain.end() ? json(acc->second) : json(nullptr);
    plot[m.tag] = scaled.plot;

    if (predicted) {
      const PartyDistanceMatrix* pm = find_tag(*predicted, m.tag);
      json cb = pm ? mantel_block(m, *pm, c.evaluation) : undefined_block("no predicted matrix");
      cb["accuracy"] = block["accuracy"];
      if (!is_aggregate && cb.at("defined").get<bool>() && acc != accuracy_by_domain.end()) {
        mantel_by_domain[m.tag] = cb.at("r").get<double>();
      }
      comparison[m.tag] = cb;
    }

    if (is_aggregate) {
      report["aggregate"] = block;
    } else {
      domains[m.tag] = block;
    }
  }
  report["domains"] = domains;
  report["plot_data"] = plot;

  if (predicted) {
    json cmp;
    cmp["mantel_annotated_vs_predicted"] = comparison;
    std::map<std::string, double> acc_subset;
    for (const auto& [d, _] : mantel_by_domain) acc_subset[d] = accuracy_by_domain.at(d);
    if (mantel_by_domain.size() >= 3) {
      try {
        const auto pr = accuracy_vs_mantel(acc_subset, mantel_by_domain);
        cmp["accuracy_vs_mantel"] = {{"defined", true}, {"r", pr.r}, {"p", pr.p_value}, {"n", pr.n}};
      } catch (const Error& err) {
        if (!err.is_user_error()) throw;
        cmp["accuracy_vs_mantel"] = undefined_block(err.what());
      }
    } else {
      cmp["accuracy_vs_mantel"] = undefined_block("fewer than 3 domains with both accuracy and Mantel r");
    }
    report["comparison"] = cmp;
  }
  report["warnings"] = warnings;
  write_file(out_path(c, "report.json"), dump(report));
}

}  // namespace mdecomp::cli

#include "mdecomp/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/kernels.hpp"
#include "mdecomp/log.hpp"
#include "mdecomp/parallel.hpp"

namespace mdecomp {

using nlohmann::json;

namespace {

constexpr std::size_t kShard = 256;
constexpr std::size_t kMaxHalvings = 60;

// Log-sum-exp over scores; writes probabilities into `probs`.
double softmax_into(std::span<const double> scores, std::span<double> probs) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    probs[k] = std::exp(scores[k] - mx);
    z += probs[k];
  }
  for (double& p : probs) p /= z;
  return mx + std::log(z);
}

void class_scores(std::span<const double> weights, std::size_t classes, std::size_t dim, const double* x,
                  std::span<double> scores) {
  const std::size_t stride = dim + 1;
  for (std::size_t k = 0; k < classes; ++k) {
    const double* w = weights.data() + k * stride;
    scores[k] = kernels::active().dot(w, x, dim) + w[dim];
  }
}

double l2_penalty(const SoftmaxProblem& p, std::span<const double> weights) {
  double acc = 0.0;
  const std::size_t stride = p.dim + 1;
  for (std::size_t k = 0; k < p.classes; ++k) {
    acc += kernels::active().dot(weights.data() + k * stride, weights.data() + k * stride, p.dim);
  }
  return 0.5 * p.l2 * acc;
}

void check_weights(const SoftmaxProblem& p, std::span<const double> weights) {
  if (weights.size() != p.classes * (p.dim + 1)) {
    throw Error(ErrorKind::Dimension, "weight vector has " + std::to_string(weights.size()) + " entries, expected " +
                                          std::to_string(p.classes * (p.dim + 1)));
  }
}

std::vector<std::string> sorted_labels(std::span<const BigramInstance> instances) {
  std::set<std::string> labels;
  for (const auto& inst : instances) {
    if (inst.label) labels.insert(*inst.label);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace

std::string bigram_key(std::string_view previous_id, std::string_view id) {
  std::string key(previous_id);
  key.push_back('|');
  key.append(id);
  return key;
}

std::vector<BigramInstance> make_bigrams(const Corpus& corpus, const EmbeddingStore& bigram_store,
                                         const DomainScheme* scheme) {
  std::vector<BigramInstance> out;
  out.reserve(corpus.size());
  const auto& sentences = corpus.sentences();
  for (const ManifestoRange& m : corpus.manifestos()) {
    for (std::size_t i = m.begin; i < m.end; ++i) {
      const Sentence& s = sentences[i];
      BigramInstance inst;
      inst.id = s.id;
      inst.key = bigram_key(i == m.begin ? kBos : std::string_view(sentences[i - 1].id), s.id);
      inst.manifesto = m.key;
      const auto row = bigram_store.row_of(inst.key);
      if (!row) throw Error(ErrorKind::MissingEmbedding, "no bigram embedding for key '" + inst.key + "'");
      const auto v = bigram_store.row(*row);
      inst.pair_embedding.assign(v.begin(), v.end());
      if (scheme != nullptr && s.code) inst.label = scheme->label_for(*s.code);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<double> ClassifierModel::features(std::span<const double> embedding) const {
  if (embedding.size() != dim) {
    throw Error(ErrorKind::Dimension, "embedding of length " + std::to_string(embedding.size()) +
                                          " given to a model of dimension " + std::to_string(dim));
  }
  if (whitening) return apply_whitening(*whitening, embedding);
  return {embedding.begin(), embedding.end()};
}

std::vector<double> ClassifierModel::probabilities(std::span<const double> embedding) const {
  const auto x = features(embedding);
  std::vector<double> scores(num_classes()), probs(num_classes());
  class_scores(weights, num_classes(), dim, x.data(), scores);
  softmax_into(scores, probs);
  return probs;
}

std::size_t ClassifierModel::predict_index(std::span<const double> embedding) const {
  const auto x = features(embedding);
  std::vector<double> scores(num_classes());
  class_scores(weights, num_classes(), dim, x.data(), scores);
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

ClassifierModel train_majority(std::span<const BigramInstance> instances) {
  std::map<std::string, std::size_t> counts;
  std::size_t dim = 0;
  for (const auto& inst : instances) {
    if (!inst.label) continue;
    ++counts[*inst.label];
    dim = inst.pair_embedding.size();
  }
  if (counts.empty()) throw Error(ErrorKind::Training, "majority baseline needs at least one labelled instance");

  ClassifierModel model;
  model.kind = "majority";
  model.dim = dim;
  std::size_t modal = 0, best = 0;
  for (const auto& [label, count] : counts) {
    if (count > best) best = count, modal = model.classes.size();
    model.classes.push_back(label);
  }
  model.weights.assign(model.classes.size() * (dim + 1), 0.0);
  model.weights[modal * (dim + 1) + dim] = 1.0;
  model.config.whiten = false;
  model.config.epochs = 0;
  for (const auto& [_, c] : counts) model.n_train += c;
  return model;
}

double softmax_loss(const SoftmaxProblem& p, std::span<const double> weights) {
  check_weights(p, weights);
  const double data_loss = parallel::ordered_sum(p.n, kShard, [&](std::size_t i) {
    thread_local std::vector<double> scores, probs;
    scores.resize(p.classes);
    probs.resize(p.classes);
    class_scores(weights, p.classes, p.dim, p.features.data() + i * p.dim, scores);
    return softmax_into(scores, probs) - scores[p.labels[i]];
  });
  return data_loss / static_cast<double>(p.n) + l2_penalty(p, weights);
}

double softmax_loss_grad(const SoftmaxProblem& p, std::span<const double> weights, std::span<double> grad) {
  check_weights(p, weights);
  const std::size_t stride = p.dim + 1;
  const std::size_t width = p.classes * stride;
  const std::size_t shards = (p.n + kShard - 1) / kShard;
  std::vector<double> shard_grad(shards * width, 0.0);
  std::vector<double> shard_loss(shards, 0.0);

  parallel::for_each_index(shards, [&](std::size_t s) {
    std::vector<double> scores(p.classes), probs(p.classes);
    double* g = shard_grad.data() + s * width;
    const std::size_t end = std::min(p.n, (s + 1) * kShard);
    double loss = 0.0;
    for (std::size_t i = s * kShard; i < end; ++i) {
      const double* x = p.features.data() + i * p.dim;
      class_scores(weights, p.classes, p.dim, x, scores);
      loss += softmax_into(scores, probs) - scores[p.labels[i]];
      for (std::size_t k = 0; k < p.classes; ++k) {
        const double r = probs[k] - (k == p.labels[i] ? 1.0 : 0.0);
        kernels::active().axpy(r, x, g + k * stride, p.dim);
        g[k * stride + p.dim] += r;
      }
    }
    shard_loss[s] = loss;
  });

  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t s = 0; s < shards; ++s) {
    kernels::active().axpy(1.0, shard_grad.data() + s * width, grad.data(), width);
    loss += shard_loss[s];
  }
  const double inv_n = 1.0 / static_cast<double>(p.n);
  for (double& g : grad) g *= inv_n;
  for (std::size_t k = 0; k < p.classes; ++k) {
    kernels::active().axpy(p.l2, weights.data() + k * stride, grad.data() + k * stride, p.dim);
  }
  return loss * inv_n + l2_penalty(p, weights);
}

ClassifierModel train_logreg(std::span<const BigramInstance> instances, const TrainingConfig& config) {
  if (instances.empty()) throw Error(ErrorKind::Training, "no training instances");
  for (const auto& inst : instances) {
    if (!inst.label) throw Error(ErrorKind::Training, "instance '" + inst.id + "' has no label");
  }
  if (!(config.learning_rate > 0.0)) throw Error(ErrorKind::Argument, "learning rate must be positive");
  if (config.l2 < 0.0) throw Error(ErrorKind::Argument, "l2 strength must be nonnegative");

  ClassifierModel model;
  model.kind = "logreg";
  model.config = config;
  model.classes = sorted_labels(instances);
  if (model.classes.size() < 2) {
    throw Error(ErrorKind::Training, "logistic regression needs at least 2 classes, got " +
                                         std::to_string(model.classes.size()));
  }
  model.dim = instances.front().pair_embedding.size();
  model.n_train = instances.size();

  SoftmaxProblem p;
  p.n = instances.size();
  p.dim = model.dim;
  p.classes = model.classes.size();
  p.l2 = config.l2;
  p.features.reserve(p.n * p.dim);
  for (const auto& inst : instances) {
    if (inst.pair_embedding.size() != p.dim) {
      throw Error(ErrorKind::Dimension, "instance '" + inst.id + "' has embedding length " +
                                            std::to_string(inst.pair_embedding.size()) + ", expected " +
                                            std::to_string(p.dim));
    }
    p.features.insert(p.features.end(), inst.pair_embedding.begin(), inst.pair_embedding.end());
    const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), *inst.label);
    p.labels.push_back(static_cast<std::size_t>(it - model.classes.begin()));
  }
  if (config.whiten) {
    model.whitening = fit_whitening_rows(p.features, p.dim, config.eigenvalue_floor);
    std::vector<double> scratch(p.dim), out(p.dim);
    for (std::size_t i = 0; i < p.n; ++i) {
      const std::span<double> row(p.features.data() + i * p.dim, p.dim);
      apply_whitening_into(*model.whitening, row, out, scratch);
      std::copy(out.begin(), out.end(), row.begin());
    }
  }

  const std::size_t width = p.classes * (p.dim + 1);
  std::vector<double> w(width, 0.0);
  if (config.init_scale > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_scale);
    for (double& x : w) x = normal(rng);
  }
  std::vector<double> grad(width), candidate(width), candidate_grad(width);
  double loss = softmax_loss_grad(p, w, grad);
  if (!std::isfinite(loss)) {
    throw Error(ErrorKind::Divergence, "initial loss is not finite; try a smaller init_scale");
  }

  double lr = config.learning_rate;
  std::size_t epoch = 0;
  while (epoch < config.epochs) {
    candidate = w;
    kernels::active().axpy(-lr, grad.data(), candidate.data(), width);
    const double next = softmax_loss_grad(p, candidate, candidate_grad);
    if (std::isfinite(next) && next <= loss) {
      w.swap(candidate);
      grad.swap(candidate_grad);
      loss = next;
      ++epoch;
      continue;
    }
    if (++model.lr_halvings > kMaxHalvings) {
      throw Error(ErrorKind::Divergence, "loss diverged (non-finite or increasing); use a smaller learning rate");
    }
    lr *= 0.5;
    log_warning("loss increased at epoch " + std::to_string(epoch) + "; halving learning rate to " +
                std::to_string(lr));
  }
  model.weights = std::move(w);
  model.epochs_run = epoch;
  model.final_loss = loss;
  return model;
}

std::map<std::string, std::string> predict(const ClassifierModel& model, std::span<const BigramInstance> instances) {
  std::vector<std::size_t> chosen(instances.size());
  parallel::for_each_index(instances.size(),
                           [&](std::size_t i) { chosen[i] = model.predict_index(instances[i].pair_embedding); });
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < instances.size(); ++i) out[instances[i].id] = model.classes[chosen[i]];
  return out;
}

double accuracy(const std::map<std::string, std::string>& predicted, const std::map<std::string, std::string>& gold,
                std::optional<std::string_view> restrict_to) {
  std::size_t total = 0, correct = 0;
  for (const auto& [id, label] : gold) {
    if (restrict_to && label != *restrict_to) continue;
    ++total;
    const auto it = predicted.find(id);
    if (it != predicted.end() && it->second == label) ++correct;
  }
  if (total == 0) throw Error(ErrorKind::UndefinedMetric, "accuracy over an empty evaluation set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

TrainValidationSplit split_validation(std::span<const BigramInstance> instances, double fraction) {
  if (fraction < 0.0 || fraction >= 1.0) throw Error(ErrorKind::Argument, "validation fraction must be in [0, 1)");
  TrainValidationSplit split;
  std::size_t begin = 0;
  while (begin < instances.size()) {
    std::size_t end = begin;
    while (end < instances.size() && instances[end].manifesto == instances[begin].manifesto) ++end;
    const std::size_t m = end - begin;
    const auto held = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m)));
    for (std::size_t i = begin; i < end; ++i) (i < end - held ? split.train : split.validation).push_back(i);
    begin = end;
  }
  return split;
}

std::string model_to_json(const ClassifierModel& model) {
  json doc;
  doc["kind"] = model.kind;
  doc["classes"] = model.classes;
  doc["dim"] = model.dim;
  doc["weights"] = model.weights;
  doc["training"] = {{"epochs", model.config.epochs},
                     {"learning_rate", model.config.learning_rate},
                     {"l2", model.config.l2},
                     {"seed", model.config.seed},
                     {"init_scale", model.config.init_scale},
                     {"whiten", model.config.whiten},
                     {"eigenvalue_floor", model.config.eigenvalue_floor},
                     {"epochs_run", model.epochs_run},
                     {"lr_halvings", model.lr_halvings},
                     {"final_loss", model.final_loss},
                     {"n_train", model.n_train}};
  if (model.whitening) {
    doc["whitening"] = {{"mean", model.whitening->mean},
                        {"transform", model.whitening->transform},
                        {"eigenvalue_floor", model.whitening->eigenvalue_floor}};
  } else {
    doc["whitening"] = nullptr;
  }
  return doc.dump() + "\n";
}

ClassifierModel model_from_json(std::string_view contents) {
  try {
    const json doc = json::parse(contents);
    ClassifierModel m;
    m.kind = doc.at("kind").get<std::string>();
    m.classes = doc.at("classes").get<std::vector<std::string>>();
    m.dim = doc.at("dim").get<std::size_t>();
    m.weights = doc.at("weights").get<std::vector<double>>();
    if (m.classes.empty() || m.weights.size() != m.classes.size() * (m.dim + 1)) {
      throw Error(ErrorKind::Format, "model weights do not match classes x (dim + 1)");
    }
    const json& t = doc.at("training");
    m.config.epochs = t.at("epochs").get<std::size_t>();
    m.config.learning_rate = t.at("learning_rate").get<double>();
    m.config.l2 = t.at("l2").get<double>();
    m.config.seed = t.at("seed").get<std::uint64_t>();
    m.config.init_scale = t.at("init_scale").get<double>();
    m.config.whiten = t.at("whiten").get<bool>();
    m.config.eigenvalue_floor = t.at("eigenvalue_floor").get<double>();
    m.epochs_run = t.at("epochs_run").get<std::size_t>();
    m.lr_halvings = t.at("lr_halvings").get<std::size_t>();
    m.final_loss = t.at("final_loss").get<double>();
    m.n_train = t.at("n_train").get<std::size_t>();
    if (const json& w = doc.at("whitening"); !w.is_null()) {
      WhiteningTransform wt;
      wt.dim = m.dim;
      wt.mean = w.at("mean").get<std::vector<double>>();
      wt.transform = w.at("transform").get<std::vector<double>>();
      wt.eigenvalue_floor = w.at("eigenvalue_floor").get<double>();
      if (wt.mean.size() != m.dim || wt.transform.size() != m.dim * m.dim) {
        throw Error(ErrorKind::Format, "model whitening does not match dim");
      }
      m.whitening = std::move(wt);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("model file: ") + e.what());
  }
}

std::string predictions_jsonl(std::span<const BigramInstance> instances,
                              const std::map<std::string, std::string>& predicted) {
  std::string out;
  for (const auto& inst : instances) {
    const auto it = predicted.find(inst.id);
    if (it == predicted.end()) continue;
    out += json{{"id", inst.id}, {"predicted_domain", it->second}}.dump();
    out.push_back('\n');
  }
  return out;
}

std::map<std::string, std::string> parse_predictions_jsonl(std::string_view contents) {
  std::map<std::string, std::string> out;
  std::size_t start = 0, line_no = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json rec = json::parse(line);
      const auto id = rec.at("id").get<std::string>();
      if (!out.emplace(id, rec.at("predicted_domain").get<std::string>()).second) {
        throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": duplicate prediction for '" + id + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, "predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mdecomp

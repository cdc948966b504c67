#pragma once

// Bigram policy-domain labeller: each sentence is classified from the
// embedding of itself concatenated with its predecessor. Two models: a
// majority baseline and multinomial logistic regression trained by
// full-batch gradient descent.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdecomp/corpus.hpp"
#include "mdecomp/embedding.hpp"

namespace mdecomp {

inline constexpr std::string_view kBos = "<BOS>";

/// Key of the precomputed pair embedding: "<prev-id>|<id>", or "<BOS>|<id>"
/// for the first sentence of a manifesto.
std::string bigram_key(std::string_view previous_id, std::string_view id);

struct BigramInstance {
  std::string id;  // the second (labelled) sentence
  std::string key;
  ManifestoKey manifesto;
  std::vector<double> pair_embedding;
  std::optional<std::string> label;
};

/// One instance per sentence in manifesto position order. Labels come from
/// `scheme` when given and the sentence is coded. Throws MissingEmbedding naming the key.
std::vector<BigramInstance> make_bigrams(const Corpus& corpus, const EmbeddingStore& bigram_store,
                                         const DomainScheme* scheme = nullptr);

struct TrainingConfig {
  std::size_t epochs = 300;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  double init_scale = 0.0;  // > 0 draws N(0, init_scale^2) initial weights from `seed`
  bool whiten = true;
  double eigenvalue_floor = kDefaultEigenvalueFloor;
};

struct ClassifierModel {
  std::string kind;  // "majority" or "logreg"
  std::vector<std::string> classes;
  std::size_t dim = 0;
  std::vector<double> weights;  // classes.size() x (dim + 1), bias in the last column
  TrainingConfig config;
  std::size_t epochs_run = 0;
  std::size_t lr_halvings = 0;
  double final_loss = 0.0;
  std::size_t n_train = 0;
  std::optional<WhiteningTransform> whitening;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::span<const double> row(std::size_t k) const { return {weights.data() + k * (dim + 1), dim + 1}; }
  /// Raw embedding in, whitening applied if the model carries it.
  std::vector<double> features(std::span<const double> embedding) const;
  std::vector<double> probabilities(std::span<const double> embedding) const;
  std::size_t predict_index(std::span<const double> embedding) const;
};

/// Always predicts the most frequent label (ties: lexicographically smallest).
ClassifierModel train_majority(std::span<const BigramInstance> instances);

ClassifierModel train_logreg(std::span<const BigramInstance> instances, const TrainingConfig& config);

/// sentence id -> predicted domain. Throws Dimension on incompatible embeddings.
std::map<std::string, std::string> predict(const ClassifierModel& model, std::span<const BigramInstance> instances);

/// Fraction of gold keys predicted correctly; with `restrict_to`, only gold keys
/// whose gold label equals it. Throws UndefinedMetric on an empty evaluation set.
double accuracy(const std::map<std::string, std::string>& predicted, const std::map<std::string, std::string>& gold,
                std::optional<std::string_view> restrict_to = std::nullopt);

/// Dense training problem: row-major features (n x dim) and class indices.
struct SoftmaxProblem {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<std::size_t> labels;
  double l2 = 0.0;
};

/// Mean softmax cross-entropy plus (l2 / 2) * sum of squared non-bias weights.
double softmax_loss(const SoftmaxProblem& problem, std::span<const double> weights);
/// Loss and its gradient; accumulated in fixed-size shards merged in order.
double softmax_loss_grad(const SoftmaxProblem& problem, std::span<const double> weights, std::span<double> grad);

struct TrainValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Holds out the last floor(fraction * m) instances of every manifesto (m instances each).
TrainValidationSplit split_validation(std::span<const BigramInstance> instances, double fraction = 0.1);

std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(std::string_view contents);

/// JSON Lines {"id": ..., "predicted_domain": ...}, one per instance in input order.
std::string predictions_jsonl(std::span<const BigramInstance> instances,
                              const std::map<std::string, std::string>& predicted);
std::map<std::string, std::string> parse_predictions_jsonl(std::string_view contents);

}  // namespace mdecomp

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gdsrec/dataset.hpp"
#include "gdsrec/diff/rmsprop.hpp"
#include "gdsrec/eval.hpp"
#include "gdsrec/model.hpp"
#include "gdsrec/social_graph.hpp"

namespace gdsrec::trainer {

struct TrainConfig {
  eval::Task task = eval::Task::rating;
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-8;
  int dropout_cap = 30;         // K, interactions kept per node during training
  double rank_threshold = 3.0;  // F, positive-label cutoff for the ranking task
  double delta = 1.0;           // rating-agreement threshold of the social strengths
  std::uint64_t seed = 0;
  int patience = 10;
  double val_fraction = 0.1;  // carved from the training ratings; 0 disables early stop
  int threads = 1;

  void validate(const RatingScale& scale) const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_metric = 0.0;  // RMSE (rating) or AUC (ranking); NaN without validation
  double seconds = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

// Deterministic seed stream derivation (splitmix-style).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform K-subset without replacement; the whole list when it already fits.
template <typename T>
std::vector<T> node_dropout_sample(const std::vector<T>& list, int cap,
                                   std::mt19937_64& rng) {
  std::vector<T> out(list);
  const auto n = out.size();
  if (cap <= 0 || n <= static_cast<std::size_t>(cap)) return out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cap); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(out[i], out[pick(rng)]);
  }
  out.resize(static_cast<std::size_t>(cap));
  return out;
}

int ranking_label(double rating, double threshold);
std::vector<int> ranking_labels(const std::vector<RatingRecord>& ratings, double threshold);

// Training-time sample: every list truncated to the dropout cap, social
// strengths renormalized over the kept neighbors, and each kept neighbor's
// own interaction list truncated independently.
model::NeighborSample dropout_neighbor_sample(const InteractionTables& tables,
                                              const RelationshipGraph& graph, int user,
                                              int item, int cap, std::mt19937_64& rng);

// Split, statistics, interaction tables, and social graph for one training
// run. `train` drives gradient updates; `val` steers early stopping.
struct SplitArtifacts {
  std::vector<RatingRecord> train;
  std::vector<RatingRecord> val;
  Statistics stats;
  InteractionTables tables;
  RelationshipGraph graph;
};

SplitArtifacts prepare_training_data(const std::vector<RatingRecord>& records,
                                     const std::vector<TrustPair>& trust, int num_users,
                                     int num_items, const RatingScale& scale,
                                     const TrainConfig& config);

// One pass over the training examples in a seeded shuffle order: fresh
// dropout samples per example, gradients averaged within each mini-batch,
// one optimizer step per batch. Returns the mean per-example loss.
double train_epoch(model::ModelParams& params, const SplitArtifacts& data,
                   const TrainConfig& config, diff::RmsProp& optimizer,
                   std::uint64_t epoch_index);

struct FitResult {
  model::ModelParams params;  // best-validation checkpoint
  TrainHistory history;
  int best_epoch = 0;         // 0 means the initial parameters were returned
  double best_val_metric = 0.0;
};

// Runs up to config.epochs epochs with early stopping on the validation
// metric (RMSE for rating, AUC for ranking).
FitResult fit(const SplitArtifacts& data, int num_users, int num_items,
              const model::ModelDims& dims, const TrainConfig& config,
              std::ostream* log = nullptr);

}  // namespace gdsrec::trainer

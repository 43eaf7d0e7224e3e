#include "gdsrec/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "gdsrec/errors.hpp"

namespace gdsrec::trainer {

void TrainConfig::validate(const RatingScale& scale) const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(rmsprop_rho > 0.0 && rmsprop_rho < 1.0)) {
    throw ConfigError("rmsprop_rho must lie in (0, 1)");
  }
  if (!(rmsprop_eps > 0.0)) throw ConfigError("rmsprop_eps must be positive");
  if (dropout_cap < 1) throw ConfigError("dropout_cap must be >= 1");
  if (rank_threshold < scale.r_min || rank_threshold > scale.r_max) {
    throw ConfigError("rank_threshold must lie within the rating scale");
  }
  if (delta < 0.0) throw ConfigError("delta must be >= 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in [0, 1)");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int ranking_label(double rating, double threshold) { return rating >= threshold ? 1 : 0; }

std::vector<int> ranking_labels(const std::vector<RatingRecord>& ratings, double threshold) {
  std::vector<int> labels(ratings.size());
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    labels[i] = ranking_label(ratings[i].rating, threshold);
  }
  return labels;
}

model::NeighborSample dropout_neighbor_sample(const InteractionTables& tables,
                                              const RelationshipGraph& graph, int user,
                                              int item, int cap, std::mt19937_64& rng) {
  model::NeighborSample sample;
  for (const auto& e : node_dropout_sample(tables.items_of(user), cap, rng)) {
    sample.items_of_user.push_back(model::InteractionRef{e.item, e.diff_index});
  }
  for (const auto& e : node_dropout_sample(tables.users_of(item), cap, rng)) {
    sample.users_of_item.push_back(model::InteractionRef{e.user, e.diff_index});
  }
  const auto kept = node_dropout_sample(graph.edges_of(user), cap, rng);
  double strength_total = 0.0;
  for (const auto& e : kept) strength_total += static_cast<double>(e.strength);
  for (const auto& e : kept) {
    sample.social.push_back(
        model::SocialRef{e.neighbor, static_cast<double>(e.strength) / strength_total});
    auto& items = sample.social_items.emplace_back();
    for (const auto& it : node_dropout_sample(tables.items_of(e.neighbor), cap, rng)) {
      items.push_back(model::InteractionRef{it.item, it.diff_index});
    }
  }
  return sample;
}

SplitArtifacts prepare_training_data(const std::vector<RatingRecord>& records,
                                     const std::vector<TrustPair>& trust, int num_users,
                                     int num_items, const RatingScale& scale,
                                     const TrainConfig& config) {
  config.validate(scale);
  SplitArtifacts art;
  if (config.val_fraction > 0.0 && records.size() >= 2) {
    auto [train, val] = split(records, config.val_fraction, mix_seed(config.seed, 0x7a1));
    art.train = std::move(train);
    art.val = std::move(val);
  } else {
    art.train = records;
  }
  if (art.train.empty()) throw DataError("training split is empty");
  art.stats = compute_statistics(art.train);
  art.tables =
      build_interaction_tables(art.train, art.stats, num_users, num_items, scale.levels());
  art.graph = build_graph(art.tables, trust, config.delta, num_users);
  return art;
}

namespace {

// Records one example's loss on the tape: half squared error for the rating
// task, binary cross entropy for the ranking task.
diff::ValueRef example_loss(diff::Tape& tape, model::ModelParams& params,
                            const SplitArtifacts& data, const TrainConfig& config,
                            const RatingRecord& rec, const model::NeighborSample& sample) {
  const auto rhat =
      model::predict_rating(tape, params, data.stats, rec.user, rec.item, sample);
  if (config.task == eval::Task::rating) {
    return tape.mse_loss({rhat}, {rec.rating});
  }
  const auto prob = tape.sigmoid(rhat);
  return tape.bce_loss({prob}, {ranking_label(rec.rating, config.rank_threshold)});
}

}  // namespace

double train_epoch(model::ModelParams& params, const SplitArtifacts& data,
                   const TrainConfig& config, diff::RmsProp& optimizer,
                   std::uint64_t epoch_index) {
  const auto& examples = data.train;
  if (examples.empty()) throw DataError("cannot train on an empty example set");

  std::mt19937_64 rng(mix_seed(config.seed, 0x9000 + epoch_index));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const auto all_params = params.all();
  double loss_total = 0.0;

  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    const std::size_t batch_n = end - start;

    // Samples are drawn sequentially so the RNG stream does not depend on
    // the thread count.
    std::vector<model::NeighborSample> samples;
    samples.reserve(batch_n);
    for (std::size_t i = start; i < end; ++i) {
      const auto& rec = examples[order[i]];
      samples.push_back(dropout_neighbor_sample(data.tables, data.graph, rec.user, rec.item,
                                                config.dropout_cap, rng));
    }

    const double grad_factor = 1.0 / static_cast<double>(batch_n);
    if (config.threads <= 1) {
      diff::Tape tape;
      for (std::size_t i = 0; i < batch_n; ++i) {
        tape.reset();
        const auto& rec = examples[order[start + i]];
        const auto loss = example_loss(tape, params, data, config, rec, samples[i]);
        loss_total += tape.scalar(loss);
        tape.backward_local(loss);
        tape.add_gradients(grad_factor);
      }
    } else {
      std::vector<diff::Tape> tapes(batch_n);
      std::vector<double> losses(batch_n, 0.0);
      const auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& rec = examples[order[start + i]];
          const auto loss = example_loss(tapes[i], params, data, config, rec, samples[i]);
          losses[i] = tapes[i].scalar(loss);
          tapes[i].backward_local(loss);
        }
      };
      const std::size_t n_workers =
          std::min<std::size_t>(static_cast<std::size_t>(config.threads), batch_n);
      std::vector<std::thread> pool;
      pool.reserve(n_workers);
      const std::size_t chunk = (batch_n + n_workers - 1) / n_workers;
      for (std::size_t w = 0; w < n_workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(batch_n, lo + chunk);
        if (lo < hi) pool.emplace_back(worker, lo, hi);
      }
      for (auto& t : pool) t.join();
      // Reduce in example order so results match the single-threaded path.
      for (std::size_t i = 0; i < batch_n; ++i) {
        tapes[i].add_gradients(grad_factor);
        loss_total += losses[i];
      }
    }
    optimizer.step(all_params);
  }
  return loss_total / static_cast<double>(examples.size());
}

namespace {

// Higher-is-better selection score for early stopping.
double validation_score(model::ModelParams& params, const SplitArtifacts& data,
                        const TrainConfig& config, double* natural_metric) {
  if (config.task == eval::Task::rating) {
    const auto report = eval::evaluate(params, data.stats, data.tables, data.graph,
                                       data.val, eval::Task::rating);
    *natural_metric = report.rmse;
    return -report.rmse;
  }
  try {
    const auto report = eval::evaluate(params, data.stats, data.tables, data.graph,
                                       data.val, eval::Task::ranking,
                                       config.rank_threshold);
    *natural_metric = *report.auc;
    return *report.auc;
  } catch (const DataError&) {
    // Single-class validation split: fall back to the BCE objective itself.
    diff::Tape tape;
    double total = 0.0;
    for (const auto& rec : data.val) {
      tape.reset();
      const auto sample =
          model::full_neighbor_sample(data.tables, data.graph, rec.user, rec.item);
      const auto prob = tape.sigmoid(
          model::predict_rating(tape, params, data.stats, rec.user, rec.item, sample));
      const auto loss =
          tape.bce_loss({prob}, {ranking_label(rec.rating, config.rank_threshold)});
      total += tape.scalar(loss);
    }
    *natural_metric = std::numeric_limits<double>::quiet_NaN();
    return -total / static_cast<double>(data.val.size());
  }
}

}  // namespace

FitResult fit(const SplitArtifacts& data, int num_users, int num_items,
              const model::ModelDims& dims, const TrainConfig& config,
              std::ostream* log) {
  FitResult result;
  auto params = model::init_params(dims, num_users, num_items, config.seed);
  diff::RmsProp optimizer(
      diff::RmsPropConfig{config.learning_rate, config.rmsprop_rho, config.rmsprop_eps});

  result.params = params;
  result.best_epoch = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  result.best_val_metric = std::numeric_limits<double>::quiet_NaN();
  int epochs_since_best = 0;

  if (log) *log << "epoch,train_loss,val_metric,seconds\n";
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double train_loss =
        train_epoch(params, data, config, optimizer, static_cast<std::uint64_t>(epoch));

    EpochStats row;
    row.train_loss = train_loss;
    row.val_metric = std::numeric_limits<double>::quiet_NaN();
    const bool has_val = !data.val.empty();
    double score = 0.0;
    if (has_val) score = validation_score(params, data, config, &row.val_metric);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(row);
    if (log) {
      *log << epoch << ',' << row.train_loss << ',' << row.val_metric << ','
           << row.seconds << '\n';
    }

    if (!has_val) {
      // No validation split: keep the latest parameters, never stop early.
      result.params = params;
      result.best_epoch = epoch;
      continue;
    }
    if (score > best_score) {
      best_score = score;
      result.params = params;
      result.best_epoch = epoch;
      result.best_val_metric = row.val_metric;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= config.patience) break;
    }
  }
  return result;
}

}  // namespace gdsrec::trainer

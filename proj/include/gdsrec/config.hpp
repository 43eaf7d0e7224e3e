#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gdsrec/dataset.hpp"
#include "gdsrec/model.hpp"
#include "gdsrec/trainer.hpp"

namespace gdsrec::config {

// Flat run configuration: every key can come from a `key=value` config file
// or a `--key value` command-line override. Unknown keys are rejected.
struct RunConfig {
  std::string ratings;
  std::string trust;
  std::string out_dir = "run";
  double r_min = 1.0;
  double r_max = 5.0;
  std::string task = "rating";
  double test_fraction = 0.2;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-8;
  int dropout_cap = 30;
  double rank_threshold = 3.0;
  double delta = 1.0;
  int latent_dim = 64;
  int attn_hidden = 64;
  int mlp_hidden = 64;
  int patience = 10;
  int threads = 1;

  static const std::vector<std::string>& keys();

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // Key=value lines for every key, in canonical order.
  std::string to_key_values() const;

  // Cross-field validation beyond per-key parsing.
  void validate() const;

  RatingScale scale() const { return RatingScale{r_min, r_max}; }
  model::ModelDims dims() const;
  trainer::TrainConfig train_config() const;
  eval::Task task_enum() const;
};

// Parses a `key=value` file; `#` lines and blank lines are ignored.
RunConfig load_config_file(const std::string& path);

// Applies `key=value` lines to an existing config.
void apply_key_values(RunConfig& config, const std::string& text);

}  // namespace gdsrec::config

#include "gdsrec/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdsrec/errors.hpp"

namespace gdsrec::config {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse `" + value + "` as a number");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key `" + key + "`: cannot parse `" + value + "` as an integer");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key `" + key + "`: cannot parse `" + value +
                      "` as an unsigned integer");
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "ratings",       "trust",          "out_dir",      "r_min",
      "r_max",         "task",           "test_fraction", "val_fraction",
      "seed",          "epochs",         "batch_size",   "learning_rate",
      "rmsprop_rho",   "rmsprop_eps",    "dropout_cap",  "rank_threshold",
      "delta",         "latent_dim",     "attn_hidden",  "mlp_hidden",
      "patience",      "threads",
  };
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "ratings") ratings = value;
  else if (key == "trust") trust = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "r_min") r_min = parse_double(key, value);
  else if (key == "r_max") r_max = parse_double(key, value);
  else if (key == "task") task = value;
  else if (key == "test_fraction") test_fraction = parse_double(key, value);
  else if (key == "val_fraction") val_fraction = parse_double(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "epochs") epochs = parse_int(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "rmsprop_rho") rmsprop_rho = parse_double(key, value);
  else if (key == "rmsprop_eps") rmsprop_eps = parse_double(key, value);
  else if (key == "dropout_cap") dropout_cap = parse_int(key, value);
  else if (key == "rank_threshold") rank_threshold = parse_double(key, value);
  else if (key == "delta") delta = parse_double(key, value);
  else if (key == "latent_dim") latent_dim = parse_int(key, value);
  else if (key == "attn_hidden") attn_hidden = parse_int(key, value);
  else if (key == "mlp_hidden") mlp_hidden = parse_int(key, value);
  else if (key == "patience") patience = parse_int(key, value);
  else if (key == "threads") threads = parse_int(key, value);
  else throw ConfigError("unknown config key `" + key + "`");
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "ratings") return ratings;
  if (key == "trust") return trust;
  if (key == "out_dir") return out_dir;
  if (key == "r_min") return format_double(r_min);
  if (key == "r_max") return format_double(r_max);
  if (key == "task") return task;
  if (key == "test_fraction") return format_double(test_fraction);
  if (key == "val_fraction") return format_double(val_fraction);
  if (key == "seed") return std::to_string(seed);
  if (key == "epochs") return std::to_string(epochs);
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "learning_rate") return format_double(learning_rate);
  if (key == "rmsprop_rho") return format_double(rmsprop_rho);
  if (key == "rmsprop_eps") return format_double(rmsprop_eps);
  if (key == "dropout_cap") return std::to_string(dropout_cap);
  if (key == "rank_threshold") return format_double(rank_threshold);
  if (key == "delta") return format_double(delta);
  if (key == "latent_dim") return std::to_string(latent_dim);
  if (key == "attn_hidden") return std::to_string(attn_hidden);
  if (key == "mlp_hidden") return std::to_string(mlp_hidden);
  if (key == "patience") return std::to_string(patience);
  if (key == "threads") return std::to_string(threads);
  throw ConfigError("unknown config key `" + key + "`");
}

std::string RunConfig::to_key_values() const {
  std::ostringstream out;
  for (const auto& key : keys()) out << key << '=' << get(key) << '\n';
  return out.str();
}

void RunConfig::validate() const {
  if (!(r_min < r_max)) throw ConfigError("r_min must be below r_max");
  eval::parse_task(task);
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (latent_dim <= 0 || attn_hidden <= 0 || mlp_hidden <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  train_config().validate(scale());
}

model::ModelDims RunConfig::dims() const {
  model::ModelDims d;
  d.latent = latent_dim;
  d.diff_levels = scale().levels();
  d.attn_hidden = attn_hidden;
  d.mlp_hidden = mlp_hidden;
  return d;
}

trainer::TrainConfig RunConfig::train_config() const {
  trainer::TrainConfig t;
  t.task = task_enum();
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.rmsprop_rho = rmsprop_rho;
  t.rmsprop_eps = rmsprop_eps;
  t.dropout_cap = dropout_cap;
  t.rank_threshold = rank_threshold;
  t.delta = delta;
  t.seed = seed;
  t.patience = patience;
  t.val_fraction = val_fraction;
  t.threads = threads;
  return t;
}

eval::Task RunConfig::task_enum() const { return eval::parse_task(task); }

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg;
  apply_key_values(cfg, buffer.str());
  return cfg;
}

void apply_key_values(RunConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    config.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

}  // namespace gdsrec::config

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "gdsrec/config.hpp"
#include "gdsrec/dataset.hpp"
#include "gdsrec/diff/checkpoint.hpp"
#include "gdsrec/errors.hpp"
#include "gdsrec/eval.hpp"
#include "gdsrec/model.hpp"
#include "gdsrec/social_graph.hpp"
#include "gdsrec/synth.hpp"
#include "gdsrec/trainer.hpp"

namespace fs = std::filesystem;
using gdsrec::config::RunConfig;
using nlohmann::json;

namespace {

constexpr const char* kParamsFile = "params.bin";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kEffectiveConfigFile = "effective.cfg";

struct LoadedData {
  gdsrec::LoadedRatings ratings;
  gdsrec::LoadedTrust trust;
};

LoadedData load_data(const RunConfig& cfg) {
  if (cfg.ratings.empty()) throw gdsrec::ConfigError("no ratings file configured");
  LoadedData data;
  data.ratings = gdsrec::load_ratings(cfg.ratings, cfg.scale());
  if (!cfg.trust.empty()) {
    data.trust = gdsrec::load_trust(cfg.trust, data.ratings.users);
  }
  return data;
}

struct Pipeline {
  LoadedData data;
  std::vector<gdsrec::RatingRecord> train_records;
  std::vector<gdsrec::RatingRecord> test;
  gdsrec::trainer::SplitArtifacts art;
};

Pipeline build_pipeline(const RunConfig& cfg) {
  Pipeline p;
  p.data = load_data(cfg);
  auto [train, test] = gdsrec::split(p.data.ratings.records, cfg.test_fraction, cfg.seed);
  p.train_records = std::move(train);
  p.test = std::move(test);
  p.art = gdsrec::trainer::prepare_training_data(
      p.train_records, p.data.trust.pairs, p.data.ratings.users.size(),
      p.data.ratings.items.size(), cfg.scale(), cfg.train_config());
  return p;
}

json config_to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& key : RunConfig::keys()) j[key] = cfg.get(key);
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) cfg.set(key, value.get<std::string>());
  return cfg;
}

json read_manifest(const fs::path& run_dir) {
  std::ifstream in(run_dir / kManifestFile);
  if (!in) throw gdsrec::DataError("cannot open manifest: " + (run_dir / kManifestFile).string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw gdsrec::DataError("malformed manifest: " + std::string(e.what()));
  }
  return j;
}

void print_histogram(std::ostream& out, const std::string& label,
                     const std::map<int, int>& hist) {
  out << label << ":\n";
  for (const auto& [value, count] : hist) {
    out << "  " << value << " -> " << count << '\n';
  }
  if (hist.empty()) out << "  (empty)\n";
}

void cmd_stats(const RunConfig& cfg, const std::string& export_path) {
  const LoadedData data = load_data(cfg);
  if (data.ratings.records.empty()) {
    std::cout << "users=0\nitems=0\nratings=0\ntrust_pairs=0\n";
    return;
  }
  const auto stats = gdsrec::compute_statistics(data.ratings.records);
  const int n_users = data.ratings.users.size();
  const int n_items = data.ratings.items.size();
  const auto tables = gdsrec::build_interaction_tables(
      data.ratings.records, stats, n_users, n_items, cfg.scale().levels());
  const auto graph =
      gdsrec::build_graph(tables, data.trust.pairs, cfg.delta, n_users);

  std::cout << "users=" << n_users << '\n'
            << "items=" << n_items << '\n'
            << "ratings=" << data.ratings.records.size() << '\n'
            << "trust_pairs=" << data.trust.pairs.size() << '\n'
            << "trust_dropped_self=" << data.trust.dropped_self << '\n'
            << "trust_dropped_unknown=" << data.trust.dropped_unknown << '\n'
            << "trust_dropped_duplicate=" << data.trust.dropped_duplicate << '\n'
            << "global_mean=" << stats.global_mean() << '\n';

  std::map<int, int> rating_hist;
  for (const auto& r : data.ratings.records) {
    ++rating_hist[static_cast<int>(std::lround(r.rating))];
  }
  print_histogram(std::cout, "rating histogram (rounded)", rating_hist);

  std::map<int, int> user_mean_hist, item_mean_hist;
  for (int u = 0; u < n_users; ++u) {
    if (stats.has_user(u)) ++user_mean_hist[static_cast<int>(std::lround(stats.user_mean(u)))];
  }
  for (int v = 0; v < n_items; ++v) {
    if (stats.has_item(v)) ++item_mean_hist[static_cast<int>(std::lround(stats.item_mean(v)))];
  }
  print_histogram(std::cout, "user mean histogram (rounded)", user_mean_hist);
  print_histogram(std::cout, "item mean histogram (rounded)", item_mean_hist);

  std::map<int, int> t_hist, degree_hist;
  for (int u = 0; u < n_users; ++u) {
    const auto& edges = graph.edges_of(u);
    ++degree_hist[static_cast<int>(edges.size())];
    for (const auto& e : edges) ++t_hist[e.strength];
  }
  print_histogram(std::cout, "relationship coefficient histogram", t_hist);
  print_histogram(std::cout, "social degree histogram", degree_hist);

  if (!export_path.empty()) {
    std::ofstream out(export_path);
    if (!out) throw gdsrec::DataError("cannot write graph export: " + export_path);
    for (int u = 0; u < n_users; ++u) {
      for (const auto& e : graph.edges_of(u)) {
        out << data.ratings.users.to_raw(u) << ' ' << data.ratings.users.to_raw(e.neighbor)
            << ' ' << e.strength << '\n';
      }
    }
    std::cout << "graph exported to " << export_path << '\n';
  }
}

void cmd_train(const RunConfig& cfg) {
  cfg.validate();
  Pipeline p = build_pipeline(cfg);
  const int n_users = p.data.ratings.users.size();
  const int n_items = p.data.ratings.items.size();

  auto result = gdsrec::trainer::fit(p.art, n_users, n_items, cfg.dims(),
                                     cfg.train_config(), &std::cout);

  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);
  const auto params = std::as_const(result.params).all();
  gdsrec::diff::save_parameters((out_dir / kParamsFile).string(), params);

  std::ofstream metrics(out_dir / kMetricsFile);
  metrics << "epoch,train_loss,val_metric,seconds\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& row = result.history[i];
    metrics << (i + 1) << ',' << row.train_loss << ',' << row.val_metric << ','
            << row.seconds << '\n';
  }

  std::ofstream effective(out_dir / kEffectiveConfigFile);
  effective << cfg.to_key_values();

  json manifest;
  manifest["format"] = 1;
  manifest["config"] = config_to_json(cfg);
  manifest["num_users"] = n_users;
  manifest["num_items"] = n_items;
  manifest["diff_levels"] = cfg.scale().levels();
  manifest["best_epoch"] = result.best_epoch;
  manifest["epochs_run"] = result.history.size();

  if (!p.test.empty()) {
    const auto report =
        gdsrec::eval::evaluate(result.params, p.art.stats, p.art.tables, p.art.graph,
                               p.test, cfg.task_enum(), cfg.rank_threshold);
    std::cout << gdsrec::eval::to_key_values(report) << gdsrec::eval::to_summary(report)
              << '\n';
    json metrics_json;
    metrics_json["mae"] = report.mae;
    metrics_json["rmse"] = report.rmse;
    if (report.auc) metrics_json["auc"] = *report.auc;
    metrics_json["n_examples"] = report.n_examples;
    manifest["test_metrics"] = metrics_json;
  }

  std::ofstream mf(out_dir / kManifestFile);
  mf << manifest.dump(2) << '\n';
  std::cout << "run artifacts written to " << out_dir.string() << '\n';
}

// Rebuilds the training pipeline recorded in a run directory's manifest and
// loads the checkpoint into freshly shaped parameters.
struct RestoredRun {
  RunConfig cfg;
  Pipeline pipeline;
  gdsrec::model::ModelParams params;
};

RestoredRun restore_run(const fs::path& run_dir,
                        const std::vector<std::pair<std::string, std::string>>& overrides) {
  const json manifest = read_manifest(run_dir);
  RestoredRun run;
  run.cfg = config_from_json(manifest.at("config"));
  for (const auto& [key, value] : overrides) run.cfg.set(key, value);
  run.cfg.validate();
  run.pipeline = build_pipeline(run.cfg);

  const int n_users = run.pipeline.data.ratings.users.size();
  const int n_items = run.pipeline.data.ratings.items.size();
  if (n_users != manifest.at("num_users").get<int>() ||
      n_items != manifest.at("num_items").get<int>()) {
    throw gdsrec::DataError("data files do not match the manifest entity counts");
  }
  run.params = gdsrec::model::init_params(run.cfg.dims(), n_users, n_items, run.cfg.seed);
  gdsrec::diff::load_parameters((run_dir / kParamsFile).string(),
                                std::span<gdsrec::diff::Parameter* const>(run.params.all()));
  return run;
}

void cmd_evaluate(const fs::path& run_dir,
                  const std::vector<std::pair<std::string, std::string>>& overrides) {
  RestoredRun run = restore_run(run_dir, overrides);
  if (run.pipeline.test.empty()) throw gdsrec::DataError("held-out split is empty");
  const auto report = gdsrec::eval::evaluate(
      run.params, run.pipeline.art.stats, run.pipeline.art.tables, run.pipeline.art.graph,
      run.pipeline.test, run.cfg.task_enum(), run.cfg.rank_threshold);
  std::cout << gdsrec::eval::to_key_values(report) << gdsrec::eval::to_summary(report)
            << '\n';
}

void cmd_predict(const fs::path& run_dir, std::int64_t raw_user, std::int64_t raw_item,
                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  RestoredRun run = restore_run(run_dir, overrides);
  const auto& remap_users = run.pipeline.data.ratings.users;
  const auto& remap_items = run.pipeline.data.ratings.items;
  const int user = remap_users.find(raw_user);
  const int item = remap_items.find(raw_item);
  if (user < 0) std::cerr << "warning: unknown user " << raw_user << ", treating as cold\n";
  if (item < 0) std::cerr << "warning: unknown item " << raw_item << ", treating as cold\n";

  const auto& art = run.pipeline.art;
  gdsrec::model::NeighborSample sample;
  if (user >= 0) {
    for (const auto& e : art.tables.items_of(user)) {
      sample.items_of_user.push_back(gdsrec::model::InteractionRef{e.item, e.diff_index});
    }
    for (const auto& w : gdsrec::lambda_weights(art.graph, user)) {
      sample.social.push_back(gdsrec::model::SocialRef{w.neighbor, w.lambda});
      auto& items = sample.social_items.emplace_back();
      for (const auto& e : art.tables.items_of(w.neighbor)) {
        items.push_back(gdsrec::model::InteractionRef{e.item, e.diff_index});
      }
    }
  }
  if (item >= 0) {
    for (const auto& e : art.tables.users_of(item)) {
      sample.users_of_item.push_back(gdsrec::model::InteractionRef{e.user, e.diff_index});
    }
  }

  gdsrec::diff::Tape tape;
  const auto rhat = gdsrec::model::predict_rating(tape, run.params, art.stats, user, item,
                                                  sample);
  const double prediction = tape.scalar(rhat);
  std::cout << "rhat=" << prediction << '\n';
  if (run.cfg.task_enum() == gdsrec::eval::Task::ranking) {
    std::cout << "probability=" << gdsrec::eval::sigmoid(prediction) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GDSRec: decentralized graph collaborative filtering for social recommendation"};
  app.require_subcommand(1);

  // Every config key doubles as a --key override on the pipeline subcommands.
  std::map<std::string, std::string> holders;
  std::string config_path;
  const auto add_config_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    for (const auto& key : RunConfig::keys()) {
      sub->add_option("--" + key, holders[key]);
    }
  };
  const auto gather_config = [&](CLI::App* sub) {
    RunConfig cfg;
    if (sub->count("--config") > 0) cfg = gdsrec::config::load_config_file(config_path);
    for (const auto& key : RunConfig::keys()) {
      if (sub->count("--" + key) > 0) cfg.set(key, holders.at(key));
    }
    return cfg;
  };
  const auto gather_overrides = [&](CLI::App* sub) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& key : RunConfig::keys()) {
      if (sub->count("--" + key) > 0) overrides.emplace_back(key, holders.at(key));
    }
    return overrides;
  };

  auto* stats = app.add_subcommand("stats", "dataset and social-graph statistics");
  std::string export_path;
  add_config_options(stats);
  stats->add_option("--export-graph", export_path, "write `user neighbor strength` lines");
  stats->callback([&] { cmd_stats(gather_config(stats), export_path); });

  auto* train = app.add_subcommand("train", "train a model and write run artifacts");
  add_config_options(train);
  train->callback([&] { cmd_train(gather_config(train)); });

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a run on its held-out split");
  std::string run_dir_eval;
  add_config_options(evaluate);
  evaluate->add_option("--run", run_dir_eval, "run directory with manifest and checkpoint")
      ->required();
  evaluate->callback([&] { cmd_evaluate(run_dir_eval, gather_overrides(evaluate)); });

  auto* predict = app.add_subcommand("predict", "predict one (user, item) rating");
  std::string run_dir_pred;
  std::int64_t raw_user = 0, raw_item = 0;
  add_config_options(predict);
  predict->add_option("--run", run_dir_pred, "run directory")->required();
  predict->add_option("--user", raw_user, "raw user id")->required();
  predict->add_option("--item", raw_item, "raw item id")->required();
  predict->callback(
      [&] { cmd_predict(run_dir_pred, raw_user, raw_item, gather_overrides(predict)); });

  auto* synth = app.add_subcommand("synth", "generate planted-community synthetic data");
  gdsrec::synth::SynthConfig synth_cfg;
  std::string synth_out = "synth";
  std::uint64_t synth_seed = 0;
  synth->add_option("--users", synth_cfg.num_users);
  synth->add_option("--items", synth_cfg.num_items);
  synth->add_option("--ratings", synth_cfg.num_ratings);
  synth->add_option("--trust", synth_cfg.num_trust);
  synth->add_option("--communities", synth_cfg.num_communities);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--r_min", synth_cfg.scale.r_min);
  synth->add_option("--r_max", synth_cfg.scale.r_max);
  synth->add_option("--out", synth_out, "output directory");
  synth->callback([&] {
    synth_cfg.seed = synth_seed;
    const auto data = gdsrec::synth::generate(synth_cfg);
    gdsrec::synth::write_files(data, synth_out);
    std::cout << "wrote " << data.ratings.size() << " ratings and " << data.trust.size()
              << " trust pairs to " << synth_out << '\n';
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const gdsrec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const gdsrec::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const gdsrec::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}

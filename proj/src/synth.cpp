#include "gdsrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_set>

#include "gdsrec/errors.hpp"

namespace gdsrec::synth {

namespace {

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  if (config.num_users <= 0 || config.num_items <= 0 || config.num_ratings <= 0) {
    throw ConfigError("synthetic counts must be positive");
  }
  if (config.num_communities <= 0) throw ConfigError("need at least one community");
  const std::int64_t max_pairs =
      static_cast<std::int64_t>(config.num_users) * config.num_items;
  if (config.num_ratings > max_pairs) {
    throw ConfigError("more ratings requested than distinct (user, item) pairs");
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> user_bias_dist(0.0, 0.7);
  std::normal_distribution<double> item_bias_dist(0.0, 0.7);
  std::normal_distribution<double> affinity_dist(0.0, 1.0);
  std::normal_distribution<double> noise_dist(0.0, 0.25);

  SynthData data;
  data.community.resize(config.num_users);
  for (int u = 0; u < config.num_users; ++u) data.community[u] = u % config.num_communities;

  std::vector<double> user_bias(config.num_users), item_bias(config.num_items);
  for (auto& b : user_bias) b = user_bias_dist(rng);
  for (auto& b : item_bias) b = item_bias_dist(rng);
  std::vector<std::vector<double>> affinity(config.num_communities,
                                            std::vector<double>(config.num_items));
  for (auto& row : affinity) {
    for (auto& a : row) a = affinity_dist(rng);
  }

  const double base = 0.5 * (config.scale.r_min + config.scale.r_max);
  std::uniform_int_distribution<int> user_dist(0, config.num_users - 1);
  std::uniform_int_distribution<int> item_dist(0, config.num_items - 1);
  std::unordered_set<std::uint64_t> seen_pairs;
  data.ratings.reserve(config.num_ratings);
  while (data.ratings.size() < static_cast<std::size_t>(config.num_ratings)) {
    const int u = user_dist(rng);
    const int v = item_dist(rng);
    if (!seen_pairs.insert(pair_key(u, v)).second) continue;
    const double raw = base + user_bias[u] + item_bias[v] +
                       affinity[data.community[u]][v] + noise_dist(rng);
    const double rating =
        std::clamp(std::round(raw), config.scale.r_min, config.scale.r_max);
    data.ratings.push_back(RatingRecord{u, v, rating});
  }

  // Count available same-community directed pairs before sampling trust.
  std::vector<int> community_size(config.num_communities, 0);
  for (int c : data.community) ++community_size[c];
  std::int64_t available = 0;
  for (int n : community_size) available += static_cast<std::int64_t>(n) * (n - 1);
  if (config.num_trust > available) {
    throw ConfigError("more trust pairs requested than same-community pairs exist");
  }

  std::unordered_set<std::uint64_t> seen_trust;
  data.trust.reserve(config.num_trust);
  while (data.trust.size() < static_cast<std::size_t>(config.num_trust)) {
    const int a = user_dist(rng);
    const int b = user_dist(rng);
    if (a == b || data.community[a] != data.community[b]) continue;
    if (!seen_trust.insert(pair_key(a, b)).second) continue;
    data.trust.push_back(TrustPair{a, b});
  }
  return data;
}

void write_files(const SynthData& data, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto ratings_path = std::filesystem::path(out_dir) / "ratings.txt";
  const auto trust_path = std::filesystem::path(out_dir) / "trust.txt";

  std::ofstream ratings(ratings_path);
  if (!ratings) throw DataError("cannot write " + ratings_path.string());
  for (const auto& r : data.ratings) {
    ratings << r.user << ' ' << r.item << ' ' << r.rating << '\n';
  }

  std::ofstream trust(trust_path);
  if (!trust) throw DataError("cannot write " + trust_path.string());
  for (const auto& t : data.trust) {
    trust << t.source << ' ' << t.target << '\n';
  }
}

}  // namespace gdsrec::synth

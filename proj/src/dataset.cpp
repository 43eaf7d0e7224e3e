#include "gdsrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "gdsrec/errors.hpp"

namespace gdsrec {

namespace {

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::uint64_t pair_key(int user, int item) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)) << 32) |
         static_cast<std::uint32_t>(item);
}

}  // namespace

int RatingScale::levels() const {
  return static_cast<int>(std::ceil(r_max - r_min)) + 1;
}

int IdRemap::intern(std::int64_t raw) {
  auto [it, inserted] = dense_of_.try_emplace(raw, static_cast<int>(raw_of_.size()));
  if (inserted) raw_of_.push_back(raw);
  return it->second;
}

int IdRemap::find(std::int64_t raw) const {
  auto it = dense_of_.find(raw);
  return it == dense_of_.end() ? -1 : it->second;
}

LoadedRatings load_ratings(const std::string& path, const RatingScale& scale) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ratings file: " + path);

  LoadedRatings out;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::int64_t raw_user = 0, raw_item = 0;
    double rating = 0.0;
    if (!(ls >> raw_user >> raw_item >> rating)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `user item rating`");
    }
    if (rating < scale.r_min || rating > scale.r_max) {
      throw DataError(path + ":" + std::to_string(line_no) + ": rating out of range [" +
                      std::to_string(scale.r_min) + ", " + std::to_string(scale.r_max) + "]");
    }
    RatingRecord rec;
    rec.user = out.users.intern(raw_user);
    rec.item = out.items.intern(raw_item);
    rec.rating = rating;
    if (!seen.insert(pair_key(rec.user, rec.item)).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate (user, item) pair");
    }
    out.records.push_back(rec);
  }
  return out;
}

LoadedTrust load_trust(const std::string& path, const IdRemap& users) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trust file: " + path);

  LoadedTrust out;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::int64_t raw_src = 0, raw_dst = 0;
    if (!(ls >> raw_src >> raw_dst)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `user user`");
    }
    if (raw_src == raw_dst) {
      ++out.dropped_self;
      continue;
    }
    int src = users.find(raw_src);
    int dst = users.find(raw_dst);
    if (src < 0 || dst < 0) {
      ++out.dropped_unknown;
      continue;
    }
    if (!seen.insert(pair_key(src, dst)).second) {
      ++out.dropped_duplicate;
      continue;
    }
    out.pairs.push_back(TrustPair{src, dst});
  }
  return out;
}

std::pair<std::vector<RatingRecord>, std::vector<RatingRecord>> split(
    const std::vector<RatingRecord>& ratings, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  if (ratings.size() < 2) throw DataError("need at least 2 ratings to split");

  std::vector<std::size_t> order(ratings.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(ratings.size())));
  std::vector<RatingRecord> test, train;
  test.reserve(n_test);
  train.reserve(ratings.size() - n_test);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_test ? test : train).push_back(ratings[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

Statistics compute_statistics(const std::vector<RatingRecord>& train) {
  if (train.empty()) throw DataError("cannot compute statistics of an empty training set");

  // Canonical order makes the sums independent of the input permutation.
  std::vector<RatingRecord> sorted(train);
  std::sort(sorted.begin(), sorted.end(), [](const RatingRecord& a, const RatingRecord& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });

  std::unordered_map<int, double> user_sum, item_sum;
  std::unordered_map<int, int> user_cnt, item_cnt;
  double total = 0.0;
  for (const auto& r : sorted) {
    user_sum[r.user] += r.rating;
    ++user_cnt[r.user];
    total += r.rating;
  }
  std::sort(sorted.begin(), sorted.end(), [](const RatingRecord& a, const RatingRecord& b) {
    return a.item != b.item ? a.item < b.item : a.user < b.user;
  });
  for (const auto& r : sorted) {
    item_sum[r.item] += r.rating;
    ++item_cnt[r.item];
  }

  std::unordered_map<int, double> user_mean, item_mean;
  user_mean.reserve(user_sum.size());
  item_mean.reserve(item_sum.size());
  for (const auto& [u, s] : user_sum) user_mean[u] = s / user_cnt[u];
  for (const auto& [v, s] : item_sum) item_mean[v] = s / item_cnt[v];
  const double global = total / static_cast<double>(sorted.size());
  return Statistics(std::move(user_mean), std::move(item_mean), global);
}

double Statistics::user_mean(int user) const {
  auto it = user_mean_.find(user);
  return it == user_mean_.end() ? global_mean_ : it->second;
}

double Statistics::item_mean(int item) const {
  auto it = item_mean_.find(item);
  return it == item_mean_.end() ? global_mean_ : it->second;
}

namespace {

// ceil with a snap guard so means that are integers up to rounding noise do
// not spill into the next difference bucket.
int diff_index(double rating, double mean, int levels) {
  const double diff = std::abs(rating - mean);
  int idx = static_cast<int>(std::ceil(diff - 1e-9));
  return std::clamp(idx, 0, levels - 1);
}

}  // namespace

int user_diff_index(double rating, double item_mean, int levels) {
  return diff_index(rating, item_mean, levels);
}

int item_diff_index(double rating, double user_mean, int levels) {
  return diff_index(rating, user_mean, levels);
}

InteractionTables build_interaction_tables(const std::vector<RatingRecord>& train,
                                           const Statistics& stats, int num_users,
                                           int num_items, int levels) {
  InteractionTables tables;
  tables.by_user.resize(num_users);
  tables.by_item.resize(num_items);
  for (const auto& r : train) {
    const int user_side = user_diff_index(r.rating, stats.item_mean(r.item), levels);
    const int item_side = item_diff_index(r.rating, stats.user_mean(r.user), levels);
    tables.by_user[r.user].push_back(UserSideEntry{r.item, user_side, r.rating});
    tables.by_item[r.item].push_back(ItemSideEntry{r.user, item_side, r.rating});
  }
  return tables;
}

}  // namespace gdsrec

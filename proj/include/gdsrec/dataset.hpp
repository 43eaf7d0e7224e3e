#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdsrec {

// One observed rating. Ids are dense and 0-based after remapping.
struct RatingRecord {
  int user = 0;
  int item = 0;
  double rating = 0.0;
};

// Directed social edge between two users (dense ids).
struct TrustPair {
  int source = 0;
  int target = 0;
};

// Bounds of the rating scale, e.g. (1, 5).
struct RatingScale {
  double r_min = 1.0;
  double r_max = 5.0;

  // Number of distinct discretized rating-difference values.
  int levels() const;
};

// Maps raw file ids to dense 0-based ids and back.
class IdRemap {
 public:
  // Returns the dense id for `raw`, assigning the next one on first sight.
  int intern(std::int64_t raw);
  // Returns the dense id or -1 when the raw id was never seen.
  int find(std::int64_t raw) const;
  std::int64_t to_raw(int dense) const { return raw_of_.at(dense); }
  int size() const { return static_cast<int>(raw_of_.size()); }

 private:
  std::unordered_map<std::int64_t, int> dense_of_;
  std::vector<std::int64_t> raw_of_;
};

struct LoadedRatings {
  std::vector<RatingRecord> records;
  IdRemap users;
  IdRemap items;
};

struct LoadedTrust {
  std::vector<TrustPair> pairs;
  int dropped_unknown = 0;
  int dropped_self = 0;
  int dropped_duplicate = 0;
};

// A full dataset: ratings plus social edges over dense id spaces.
struct Dataset {
  std::vector<RatingRecord> ratings;
  std::vector<TrustPair> trust;
  int num_users = 0;
  int num_items = 0;
  RatingScale scale;
};

// Per-user / per-item training means with a global fallback for cold entities.
class Statistics {
 public:
  Statistics() = default;
  Statistics(std::unordered_map<int, double> user_mean,
             std::unordered_map<int, double> item_mean, double global_mean)
      : user_mean_(std::move(user_mean)),
        item_mean_(std::move(item_mean)),
        global_mean_(global_mean) {}

  double user_mean(int user) const;
  double item_mean(int item) const;
  double global_mean() const { return global_mean_; }
  bool has_user(int user) const { return user_mean_.count(user) > 0; }
  bool has_item(int item) const { return item_mean_.count(item) > 0; }

 private:
  std::unordered_map<int, double> user_mean_;
  std::unordered_map<int, double> item_mean_;
  double global_mean_ = 0.0;
};

// One interaction seen from the user side: item, discretized |r - E(v)|, raw r.
struct UserSideEntry {
  int item = 0;
  int diff_index = 0;
  double rating = 0.0;
};

// One interaction seen from the item side: user, discretized |r - E(u)|, raw r.
struct ItemSideEntry {
  int user = 0;
  int diff_index = 0;
  double rating = 0.0;
};

// Per-entity interaction lists over the training ratings.
struct InteractionTables {
  std::vector<std::vector<UserSideEntry>> by_user;
  std::vector<std::vector<ItemSideEntry>> by_item;

  const std::vector<UserSideEntry>& items_of(int user) const { return by_user.at(user); }
  const std::vector<ItemSideEntry>& users_of(int item) const { return by_item.at(item); }
};

// Parses `<user> <item> <rating>` lines. `#` lines and blank lines are skipped.
// Raw ids are interned in first-seen order. Throws DataError on malformed
// lines, out-of-scale ratings, and duplicate (user, item) pairs.
LoadedRatings load_ratings(const std::string& path, const RatingScale& scale);

// Parses `<user> <user>` lines against an existing user remap. Pairs naming
// unknown users, self-loops, and duplicates are dropped and counted.
LoadedTrust load_trust(const std::string& path, const IdRemap& users);

// Deterministic uniform holdout: |test| = round(test_fraction * n).
std::pair<std::vector<RatingRecord>, std::vector<RatingRecord>> split(
    const std::vector<RatingRecord>& ratings, double test_fraction,
    std::uint64_t seed);

// Arithmetic means of the training ratings. Accumulation runs in canonical
// (user, item) order so the result is independent of input permutation.
Statistics compute_statistics(const std::vector<RatingRecord>& train);

// ceil(|r - item_mean|) clamped to [0, levels-1].
int user_diff_index(double rating, double item_mean, int levels);

// ceil(|r - user_mean|) clamped to [0, levels-1].
int item_diff_index(double rating, double user_mean, int levels);

InteractionTables build_interaction_tables(const std::vector<RatingRecord>& train,
                                           const Statistics& stats, int num_users,
                                           int num_items, int levels);

}  // namespace gdsrec

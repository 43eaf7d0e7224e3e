#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdsrec/dataset.hpp"

namespace gdsrec::synth {

struct SynthConfig {
  int num_users = 200;
  int num_items = 100;
  int num_ratings = 2000;
  int num_trust = 600;
  int num_communities = 4;
  RatingScale scale;
  std::uint64_t seed = 0;
};

// Ratings drawn from a planted model: global base + user bias + item bias +
// community-item affinity + noise, rounded to the integer grid and clamped to
// the scale. Trust edges connect users of the same community only, so social
// neighbors genuinely share the community signal.
struct SynthData {
  std::vector<RatingRecord> ratings;  // ids double as raw file ids
  std::vector<TrustPair> trust;
  std::vector<int> community;  // per user
};

SynthData generate(const SynthConfig& config);

// Writes `ratings.txt` and `trust.txt` under out_dir in the loader's format.
void write_files(const SynthData& data, const std::string& out_dir);

}  // namespace gdsrec::synth

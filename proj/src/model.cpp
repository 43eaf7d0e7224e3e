#include "gdsrec/model.hpp"

#include <cmath>
#include <random>

#include "gdsrec/errors.hpp"

namespace gdsrec::model {

using diff::Mat;
using diff::Vec;

namespace {

Mat normal_table(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Mat glorot_uniform(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

AffinePair make_affine(std::mt19937_64& rng, const std::string& name, Eigen::Index out,
                       Eigen::Index in) {
  return AffinePair{Parameter(name + ".W", glorot_uniform(rng, out, in)),
                    Parameter(name + ".b", Mat::Zero(out, 1))};
}

Mlp make_mlp(std::mt19937_64& rng, const std::string& name, Eigen::Index in,
             Eigen::Index hidden, Eigen::Index out) {
  return Mlp{make_affine(rng, name + ".l1", hidden, in),
             make_affine(rng, name + ".l2", out, hidden)};
}

AttentionNet make_attention(std::mt19937_64& rng, const std::string& name, Eigen::Index in,
                            Eigen::Index hidden) {
  return AttentionNet{Parameter(name + ".W1", glorot_uniform(rng, hidden, in)),
                      Parameter(name + ".b1", Mat::Zero(hidden, 1)),
                      Parameter(name + ".w2", glorot_uniform(rng, 1, hidden)),
                      Parameter(name + ".b2", Mat::Zero(1, 1))};
}

ValueRef mlp_apply(Tape& tape, Mlp& mlp, ValueRef x) {
  return tape.affine(mlp.l2.W, tape.relu(tape.affine(mlp.l1.W, x, mlp.l1.b)), mlp.l2.b);
}

// Attention-aggregate encoded interactions against the anchor embedding,
// then affine + tanh. Empty lists aggregate to zero.
ValueRef aggregate_offset(Tape& tape, AttentionNet& attn, AffinePair& agg,
                          const std::vector<ValueRef>& encoded, ValueRef anchor,
                          Eigen::Index latent) {
  ValueRef aggregated;
  if (encoded.empty()) {
    aggregated = tape.constant(Vec::Zero(latent));
  } else {
    const auto weights = attention_weights(tape, attn, encoded, anchor);
    aggregated = diff::weighted_sum(tape, weights, encoded);
  }
  return tape.tanh(tape.affine(agg.W, aggregated, agg.b));
}

}  // namespace

std::vector<Parameter*> ModelParams::all() {
  return {
      &user_emb,      &item_emb,      &user_diff_emb, &item_diff_emb,
      &user_mlp.l1.W, &user_mlp.l1.b, &user_mlp.l2.W, &user_mlp.l2.b,
      &item_mlp.l1.W, &item_mlp.l1.b, &item_mlp.l2.W, &item_mlp.l2.b,
      &user_attn.W1,  &user_attn.b1,  &user_attn.w2,  &user_attn.b2,
      &item_attn.W1,  &item_attn.b1,  &item_attn.w2,  &item_attn.b2,
      &user_agg.W,    &user_agg.b,    &item_agg.W,    &item_agg.b,
      &head_l1.W,     &head_l1.b,     &head_l2.W,     &head_l2.b,
      &head_w,
  };
}

std::vector<const Parameter*> ModelParams::all() const {
  auto mutable_all = const_cast<ModelParams*>(this)->all();
  return {mutable_all.begin(), mutable_all.end()};
}

ModelParams init_params(const ModelDims& dims, int num_users, int num_items,
                        std::uint64_t seed) {
  if (dims.latent <= 0 || dims.diff_levels <= 0 || dims.attn_hidden <= 0 ||
      dims.mlp_hidden <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (num_users <= 0 || num_items <= 0) {
    throw ConfigError("entity counts must be positive");
  }
  const Eigen::Index d = dims.latent;
  std::mt19937_64 rng(seed);

  ModelParams p;
  p.user_emb = Parameter("user_emb", normal_table(rng, num_users, d, 0.1));
  p.item_emb = Parameter("item_emb", normal_table(rng, num_items, d, 0.1));
  p.user_diff_emb = Parameter("user_diff_emb", normal_table(rng, dims.diff_levels, d, 0.1));
  p.item_diff_emb = Parameter("item_diff_emb", normal_table(rng, dims.diff_levels, d, 0.1));
  p.user_mlp = make_mlp(rng, "user_mlp", 2 * d, dims.mlp_hidden, d);
  p.item_mlp = make_mlp(rng, "item_mlp", 2 * d, dims.mlp_hidden, d);
  p.user_attn = make_attention(rng, "user_attn", 2 * d, dims.attn_hidden);
  p.item_attn = make_attention(rng, "item_attn", 2 * d, dims.attn_hidden);
  p.user_agg = make_affine(rng, "user_agg", d, d);
  p.item_agg = make_affine(rng, "item_agg", d, d);
  p.head_l1 = make_affine(rng, "head_l1", d, 2 * d);
  p.head_l2 = make_affine(rng, "head_l2", d, d);
  p.head_w = Parameter("head_w", glorot_uniform(rng, 1, d));
  return p;
}

ValueRef encode_user_interaction(Tape& tape, ModelParams& params, int item, int diff_index) {
  const ValueRef q = tape.embedding(params.item_emb, item);
  const ValueRef s = tape.embedding(params.user_diff_emb, diff_index);
  return mlp_apply(tape, params.user_mlp, tape.concat(q, s));
}

ValueRef encode_item_interaction(Tape& tape, ModelParams& params, int user, int diff_index) {
  const ValueRef p = tape.embedding(params.user_emb, user);
  const ValueRef s = tape.embedding(params.item_diff_emb, diff_index);
  return mlp_apply(tape, params.item_mlp, tape.concat(p, s));
}

std::vector<ValueRef> attention_weights(Tape& tape, AttentionNet& net,
                                        const std::vector<ValueRef>& encoded,
                                        ValueRef anchor) {
  if (encoded.empty()) throw InternalError("attention over an empty interaction list");
  std::vector<ValueRef> scores;
  scores.reserve(encoded.size());
  for (ValueRef x : encoded) {
    const ValueRef hidden = tape.relu(tape.affine(net.W1, tape.concat(x, anchor), net.b1));
    scores.push_back(tape.affine(net.w2, hidden, net.b2));
  }
  return diff::softmax_over_set(tape, scores);
}

ValueRef user_offset(Tape& tape, ModelParams& params, int user,
                     const std::vector<InteractionRef>& items) {
  std::vector<ValueRef> encoded;
  encoded.reserve(items.size());
  for (const auto& it : items) {
    encoded.push_back(encode_user_interaction(tape, params, it.id, it.diff));
  }
  ValueRef anchor;
  if (!encoded.empty()) anchor = tape.embedding(params.user_emb, user);
  return aggregate_offset(tape, params.user_attn, params.user_agg, encoded, anchor,
                          params.user_emb.value.cols());
}

ValueRef item_offset(Tape& tape, ModelParams& params, int item,
                     const std::vector<InteractionRef>& users) {
  std::vector<ValueRef> encoded;
  encoded.reserve(users.size());
  for (const auto& it : users) {
    encoded.push_back(encode_item_interaction(tape, params, it.id, it.diff));
  }
  ValueRef anchor;
  if (!encoded.empty()) anchor = tape.embedding(params.item_emb, item);
  return aggregate_offset(tape, params.item_attn, params.item_agg, encoded, anchor,
                          params.item_emb.value.cols());
}

ValueRef preference_rating(Tape& tape, ModelParams& params, ValueRef h_u, ValueRef h_v) {
  const ValueRef z1 = tape.tanh(tape.affine(params.head_l1.W, tape.concat(h_u, h_v),
                                            params.head_l1.b));
  const ValueRef z2 = tape.tanh(tape.affine(params.head_l2.W, z1, params.head_l2.b));
  return tape.matvec(params.head_w, z2);
}

std::optional<ValueRef> social_preference_term(Tape& tape, ModelParams& params,
                                               const NeighborSample& sample, ValueRef h_v) {
  if (sample.social.empty()) return std::nullopt;
  if (sample.social.size() != sample.social_items.size()) {
    throw InternalError("social neighbor list and item lists are misaligned");
  }
  std::vector<ValueRef> terms;
  terms.reserve(sample.social.size());
  for (std::size_t k = 0; k < sample.social.size(); ++k) {
    const ValueRef h_k = user_offset(tape, params, sample.social[k].user,
                                     sample.social_items[k]);
    const ValueRef rp_k = preference_rating(tape, params, h_k, h_v);
    terms.push_back(tape.scale(rp_k, sample.social[k].lambda));
  }
  return tape.sum(terms);
}

ValueRef predict_rating(Tape& tape, ModelParams& params, const Statistics& stats,
                        int user, int item, const NeighborSample& sample) {
  const ValueRef h_u = user_offset(tape, params, user, sample.items_of_user);
  const ValueRef h_v = item_offset(tape, params, item, sample.users_of_item);
  const ValueRef rp = preference_rating(tape, params, h_u, h_v);

  ValueRef f = rp;
  if (const auto social = social_preference_term(tape, params, sample, h_v)) {
    f = tape.scale(tape.sum({rp, *social}), 0.5);
  }
  const double benchmark = 0.5 * (stats.user_mean(user) + stats.item_mean(item));
  return tape.add_const(f, benchmark);
}

ValueRef predict_ranking_score(Tape& tape, ModelParams& params, const Statistics& stats,
                               int user, int item, const NeighborSample& sample) {
  return tape.sigmoid(predict_rating(tape, params, stats, user, item, sample));
}

NeighborSample full_neighbor_sample(const InteractionTables& tables,
                                    const RelationshipGraph& graph, int user, int item) {
  NeighborSample sample;
  for (const auto& e : tables.items_of(user)) {
    sample.items_of_user.push_back(InteractionRef{e.item, e.diff_index});
  }
  for (const auto& e : tables.users_of(item)) {
    sample.users_of_item.push_back(InteractionRef{e.user, e.diff_index});
  }
  for (const auto& w : lambda_weights(graph, user)) {
    sample.social.push_back(SocialRef{w.neighbor, w.lambda});
    auto& items = sample.social_items.emplace_back();
    for (const auto& e : tables.items_of(w.neighbor)) {
      items.push_back(InteractionRef{e.item, e.diff_index});
    }
  }
  return sample;
}

}  // namespace gdsrec::model

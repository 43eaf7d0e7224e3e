#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gdsrec/dataset.hpp"
#include "gdsrec/diff/tape.hpp"
#include "gdsrec/social_graph.hpp"

namespace gdsrec::model {

using diff::Parameter;
using diff::Tape;
using diff::ValueRef;

struct ModelDims {
  int latent = 64;       // D
  int diff_levels = 5;   // rows of the difference-embedding tables
  int attn_hidden = 64;
  int mlp_hidden = 64;
};

// y = W x + b
struct AffinePair {
  Parameter W;
  Parameter b;
};

// Two affine layers with a ReLU between them.
struct Mlp {
  AffinePair l1;
  AffinePair l2;
};

// Two-layer scoring net: w2^T ReLU(W1 [x (+) anchor] + b1) + b2.
// w2 is stored as a 1 x hidden matrix and b2 as a 1 x 1 matrix so the score
// comes out as a size-1 vector.
struct AttentionNet {
  Parameter W1;
  Parameter b1;
  Parameter w2;
  Parameter b2;
};

// Every trainable tensor of the model. The pointer list returned by all()
// fixes the canonical parameter order used for initialization, checkpoints,
// and optimizer traversal.
struct ModelParams {
  Parameter user_emb;       // p_u, [N x D]
  Parameter item_emb;       // q_v, [M x D]
  Parameter user_diff_emb;  // user-side difference table, [S x D]
  Parameter item_diff_emb;  // item-side difference table, [S x D]
  Mlp user_mlp;             // interaction encoder on the user side
  Mlp item_mlp;             // interaction encoder on the item side
  AttentionNet user_attn;
  AttentionNet item_attn;
  AffinePair user_agg;      // post-aggregation affine before tanh
  AffinePair item_agg;
  AffinePair head_l1;       // [D x 2D] on [h_u (+) h_v]
  AffinePair head_l2;       // [D x D]
  Parameter head_w;         // final projection, [1 x D]

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
};

// Everything a single prediction consumes besides the parameters. Training
// fills these via node dropout; evaluation uses the full lists. lambda is
// already renormalized over the listed social neighbors.
struct InteractionRef {
  int id = 0;    // item id on the user side, user id on the item side
  int diff = 0;  // discretized rating difference
};

struct SocialRef {
  int user = 0;
  double lambda = 0.0;
};

struct NeighborSample {
  std::vector<InteractionRef> items_of_user;
  std::vector<InteractionRef> users_of_item;
  std::vector<SocialRef> social;
  // items_of_user of each social neighbor, aligned with `social`.
  std::vector<std::vector<InteractionRef>> social_items;
};

// Tables ~ Normal(0, 0.1^2), affine weights Glorot-uniform, biases zero.
ModelParams init_params(const ModelDims& dims, int num_users, int num_items,
                        std::uint64_t seed);

// x_il = mlp(concat(item embedding, user-side difference embedding))
ValueRef encode_user_interaction(Tape& tape, ModelParams& params, int item, int diff_index);

// y_jk = mlp(concat(user embedding, item-side difference embedding))
ValueRef encode_item_interaction(Tape& tape, ModelParams& params, int user, int diff_index);

// Softmax-normalized scores of each encoded interaction against the anchor.
std::vector<ValueRef> attention_weights(Tape& tape, AttentionNet& net,
                                        const std::vector<ValueRef>& encoded,
                                        ValueRef anchor);

// h_u: attention-aggregated item interactions through the user-side affine
// and tanh. An empty interaction list aggregates to zero, so h_u = tanh(b).
ValueRef user_offset(Tape& tape, ModelParams& params, int user,
                     const std::vector<InteractionRef>& items);

// h_v, mirrored on the item side.
ValueRef item_offset(Tape& tape, ModelParams& params, int item,
                     const std::vector<InteractionRef>& users);

// r^p = w^T tanh(W2 tanh(W1 [h_u (+) h_v] + b1) + b2)
ValueRef preference_rating(Tape& tape, ModelParams& params, ValueRef h_u, ValueRef h_v);

// sum_k lambda_k r^p_{k,j} over the sampled social neighbors; each neighbor's
// offset is computed the way user_offset does. Empty neighbor list -> absent.
std::optional<ValueRef> social_preference_term(Tape& tape, ModelParams& params,
                                               const NeighborSample& sample, ValueRef h_v);

// rhat = (E(u) + E(v)) / 2 + f, where f blends the user's own preference
// rating with the social term when neighbors exist.
ValueRef predict_rating(Tape& tape, ModelParams& params, const Statistics& stats,
                        int user, int item, const NeighborSample& sample);

// sigmoid(rhat)
ValueRef predict_ranking_score(Tape& tape, ModelParams& params, const Statistics& stats,
                               int user, int item, const NeighborSample& sample);

// Untruncated sample: all interactions of `user` and `item` plus the full
// social neighbor list with normalized strengths. Deterministic.
NeighborSample full_neighbor_sample(const InteractionTables& tables,
                                    const RelationshipGraph& graph, int user, int item);

}  // namespace gdsrec::model

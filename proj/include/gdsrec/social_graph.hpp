#pragma once

#include <unordered_map>
#include <vector>

#include "gdsrec/dataset.hpp"

namespace gdsrec {

// One social neighbor with its explicit connection strength.
struct SocialEdge {
  int neighbor = 0;
  int strength = 1;  // T >= 1
};

// Directed neighbor lists with precomputed strengths. Edges follow the trust
// pairs as given; strengths come from training ratings only.
struct RelationshipGraph {
  std::vector<std::vector<SocialEdge>> neighbors;
  double delta = 1.0;

  const std::vector<SocialEdge>& edges_of(int user) const { return neighbors.at(user); }
};

// Normalized influence weights over one user's neighbor list.
struct LambdaWeight {
  int neighbor = 0;
  double lambda = 0.0;
};

// 1 + number of co-rated items on which the two rating maps agree within delta.
int relationship_coefficient(const std::unordered_map<int, double>& ratings_i,
                             const std::unordered_map<int, double>& ratings_j,
                             double delta);

RelationshipGraph build_graph(const InteractionTables& tables,
                              const std::vector<TrustPair>& trust, double delta,
                              int num_users);

// Strengths normalized to sum to 1; empty for isolated users.
std::vector<LambdaWeight> lambda_weights(const RelationshipGraph& graph, int user);

}  // namespace gdsrec

#include "gdsrec/social_graph.hpp"

#include <cmath>

namespace gdsrec {

int relationship_coefficient(const std::unordered_map<int, double>& ratings_i,
                             const std::unordered_map<int, double>& ratings_j,
                             double delta) {
  const auto& small = ratings_i.size() <= ratings_j.size() ? ratings_i : ratings_j;
  const auto& large = ratings_i.size() <= ratings_j.size() ? ratings_j : ratings_i;
  int agreements = 0;
  for (const auto& [item, r] : small) {
    auto it = large.find(item);
    if (it != large.end() && std::abs(r - it->second) <= delta) ++agreements;
  }
  return 1 + agreements;
}

RelationshipGraph build_graph(const InteractionTables& tables,
                              const std::vector<TrustPair>& trust, double delta,
                              int num_users) {
  std::vector<std::unordered_map<int, double>> rating_maps(num_users);
  for (int u = 0; u < num_users; ++u) {
    for (const auto& e : tables.by_user[u]) rating_maps[u].emplace(e.item, e.rating);
  }

  RelationshipGraph graph;
  graph.delta = delta;
  graph.neighbors.resize(num_users);
  for (const auto& pair : trust) {
    const int t = relationship_coefficient(rating_maps[pair.source],
                                           rating_maps[pair.target], delta);
    graph.neighbors[pair.source].push_back(SocialEdge{pair.target, t});
  }
  return graph;
}

std::vector<LambdaWeight> lambda_weights(const RelationshipGraph& graph, int user) {
  const auto& edges = graph.edges_of(user);
  std::vector<LambdaWeight> weights;
  weights.reserve(edges.size());
  double total = 0.0;
  for (const auto& e : edges) total += static_cast<double>(e.strength);
  for (const auto& e : edges) {
    weights.push_back(LambdaWeight{e.neighbor, static_cast<double>(e.strength) / total});
  }
  return weights;
}

}  // namespace gdsrec

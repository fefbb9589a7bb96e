#pragma once

#include "flock/environment.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace flock {

/// Undirected communication graph on n agents (symmetric, no self loops).
class Graph {
public:
  Graph() = default;
  explicit Graph(std::size_t n);
  /// Throws std::invalid_argument on out-of-range or self-loop edges.
  static Graph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);
  static Graph complete(std::size_t n);
  /// Row-major n*n adjacency; throws std::invalid_argument unless symmetric
  /// with an empty diagonal.
  static Graph from_adjacency(std::size_t n, std::vector<unsigned char> adjacency);

  std::size_t size() const { return n_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  void connect(std::size_t i, std::size_t j);

  /// Neighbors of i in increasing index order.
  std::vector<std::size_t> neighbors(std::size_t i) const;
  /// Edges (i, j) with i < j, lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

private:
  std::size_t n_{0};
  std::vector<unsigned char> adj_;
};

struct LeaderAssignment {
  std::size_t leader{0};
  std::vector<std::size_t> followers;

  bool is_leader(std::size_t i) const { return i == leader; }
};

/// Agent with the strongest initial signal leads; ties go to the lowest index.
LeaderAssignment select_leader(std::span<const Vec2> initial_positions, const ScalarField& field);

/// Edge (i, j) iff ||grad_j - grad_i|| < r.
Graph proximity_edges(std::span<const Vec2> gradients, double r);

/// Gradient-difference distance between two agents.
double gradient_distance(const Vec2& grad_i, const Vec2& grad_j);

bool is_connected(const Graph& g);

/// Neighbor set used by follower i's flocking law (may contain the leader).
/// Throws std::invalid_argument when i is the leader.
std::vector<std::size_t> follower_neighbors(const Graph& g, std::size_t i,
                                            const LeaderAssignment& assignment);

}  // namespace flock

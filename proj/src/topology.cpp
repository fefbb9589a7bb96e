#include "flock/topology.hpp"

#include <queue>
#include <stdexcept>

namespace flock {

Graph::Graph(std::size_t n) : n_(n), adj_(n * n, 0) {}

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  Graph g(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw std::invalid_argument("graph: edge index out of range");
    }
    if (i == j) {
      throw std::invalid_argument("graph: self loop");
    }
    g.connect(i, j);
  }
  return g;
}

Graph Graph::complete(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g.connect(i, j);
    }
  }
  return g;
}

Graph Graph::from_adjacency(std::size_t n, std::vector<unsigned char> adjacency) {
  if (adjacency.size() != n * n) {
    throw std::invalid_argument("graph: adjacency size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i * n + i] != 0) {
      throw std::invalid_argument("graph: self loop");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((adjacency[i * n + j] != 0) != (adjacency[j * n + i] != 0)) {
        throw std::invalid_argument("graph: adjacency not symmetric");
      }
    }
  }
  Graph g;
  g.n_ = n;
  g.adj_ = std::move(adjacency);
  return g;
}

void Graph::connect(std::size_t i, std::size_t j) {
  adj_[i * n_ + j] = 1;
  adj_[j * n_ + i] = 1;
}

std::vector<std::size_t> Graph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (adjacent(i, j)) {
      out.push_back(j);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (adjacent(i, j)) {
        out.emplace_back(i, j);
      }
    }
  }
  return out;
}

LeaderAssignment select_leader(std::span<const Vec2> initial_positions, const ScalarField& field) {
  if (initial_positions.empty()) {
    throw std::invalid_argument("select_leader: no agents");
  }
  LeaderAssignment out;
  double best = field.eval(initial_positions[0]);
  for (std::size_t i = 1; i < initial_positions.size(); ++i) {
    const double j = field.eval(initial_positions[i]);
    if (j > best) {
      best = j;
      out.leader = i;
    }
  }
  for (std::size_t i = 0; i < initial_positions.size(); ++i) {
    if (i != out.leader) {
      out.followers.push_back(i);
    }
  }
  return out;
}

double gradient_distance(const Vec2& grad_i, const Vec2& grad_j) { return (grad_j - grad_i).norm(); }

Graph proximity_edges(std::span<const Vec2> gradients, double r) {
  Graph g(gradients.size());
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    for (std::size_t j = i + 1; j < gradients.size(); ++j) {
      if (gradient_distance(gradients[i], gradients[j]) < r) {
        g.connect(i, j);
      }
    }
  }
  return g;
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.size();
  if (n <= 1) {
    return true;
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j] && g.adjacent(i, j)) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

std::vector<std::size_t> follower_neighbors(const Graph& g, std::size_t i, const LeaderAssignment& assignment) {
  if (assignment.is_leader(i)) {
    throw std::invalid_argument("follower_neighbors: agent is the leader");
  }
  return g.neighbors(i);
}

}  // namespace flock

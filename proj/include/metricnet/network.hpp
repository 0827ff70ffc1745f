#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metricnet/error.hpp"

namespace metricnet {

enum class BoundaryCondition { kirchhoff, dirichlet };

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Node {
  int id = 0;
  BoundaryCondition bc = BoundaryCondition::kirchhoff;
  std::optional<Point2> position;
};

/// An edge is the interval [0, length]; x = 0 sits at `tail`, x = length at `head`.
struct Edge {
  int id = 0;
  int tail = 0;
  int head = 0;
  double length = 1.0;
  std::optional<double> weight;  // carried through I/O, ignored by solvers
};

enum class EdgeEnd { tail, head };

/// One end of an edge attached to a node. A loop contributes two incidences
/// to the same node.
struct Incidence {
  std::size_t edge = 0;  // index into MetricNetwork::edges()
  EdgeEnd end = EdgeEnd::tail;
};

class MetricNetwork {
 public:
  MetricNetwork() = default;

  MetricNetwork(std::vector<Node> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    index();
    validate();
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::size_t node_index(int id) const {
    auto it = node_lookup_.find(id);
    require(it != node_lookup_.end(), ErrorKind::invalid_parameter,
            "unknown node id " + std::to_string(id));
    return it->second;
  }

  std::size_t edge_index(int id) const {
    auto it = edge_lookup_.find(id);
    require(it != edge_lookup_.end(), ErrorKind::invalid_parameter,
            "unknown edge id " + std::to_string(id));
    return it->second;
  }

  std::size_t tail_index(std::size_t edge) const { return tail_[edge]; }
  std::size_t head_index(std::size_t edge) const { return head_[edge]; }

  /// Incidences of a node ordered by edge id, tail end before head end.
  const std::vector<Incidence>& incidences(std::size_t node) const {
    return incidences_[node];
  }

  std::size_t degree(std::size_t node) const { return incidences_[node].size(); }

  bool all_kirchhoff() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) {
      return n.bc == BoundaryCondition::kirchhoff;
    });
  }

  double total_length() const {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.length;
    return sum;
  }

  /// Copy with the condition of one node replaced.
  MetricNetwork with_condition(int node_id, BoundaryCondition bc) const {
    auto nodes = nodes_;
    nodes[node_index(node_id)].bc = bc;
    return MetricNetwork(std::move(nodes), edges_);
  }

  MetricNetwork with_all_conditions(BoundaryCondition bc) const {
    auto nodes = nodes_;
    for (auto& n : nodes) n.bc = bc;
    return MetricNetwork(std::move(nodes), edges_);
  }

 private:
  void index() {
    node_lookup_.clear();
    edge_lookup_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      require(node_lookup_.emplace(nodes_[i].id, i).second, ErrorKind::invalid_network,
              "duplicate node id " + std::to_string(nodes_[i].id));
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      require(edge_lookup_.emplace(edges_[i].id, i).second, ErrorKind::invalid_network,
              "duplicate edge id " + std::to_string(edges_[i].id));
    }
  }

  void validate() {
    require(!nodes_.empty(), ErrorKind::invalid_network, "network has no nodes");
    require(!edges_.empty(), ErrorKind::invalid_network, "network has no edges");

    tail_.resize(edges_.size());
    head_.resize(edges_.size());
    incidences_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      require(std::isfinite(e.length) && e.length > 0.0, ErrorKind::invalid_network,
              "edge " + std::to_string(e.id) + " must have finite positive length");
      if (e.weight) {
        require(std::isfinite(*e.weight) && *e.weight > 0.0, ErrorKind::invalid_network,
                "edge " + std::to_string(e.id) + " weight must be positive");
      }
      auto t = node_lookup_.find(e.tail);
      auto h = node_lookup_.find(e.head);
      require(t != node_lookup_.end() && h != node_lookup_.end(), ErrorKind::invalid_network,
              "edge " + std::to_string(e.id) + " references a missing node");
      tail_[i] = t->second;
      head_[i] = h->second;
      incidences_[t->second].push_back({i, EdgeEnd::tail});
      incidences_[h->second].push_back({i, EdgeEnd::head});
    }
    for (auto& list : incidences_) {
      std::sort(list.begin(), list.end(), [this](const Incidence& a, const Incidence& b) {
        if (edges_[a.edge].id != edges_[b.edge].id) return edges_[a.edge].id < edges_[b.edge].id;
        return a.end == EdgeEnd::tail && b.end == EdgeEnd::head;
      });
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      require(!incidences_[i].empty(), ErrorKind::invalid_network,
              "node " + std::to_string(nodes_[i].id) + " is isolated");
    }

    // connectivity
    std::vector<char> seen(nodes_.size(), 0);
    std::queue<std::size_t> pending;
    pending.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!pending.empty()) {
      auto u = pending.front();
      pending.pop();
      for (const auto& inc : incidences_[u]) {
        auto v = inc.end == EdgeEnd::tail ? head_[inc.edge] : tail_[inc.edge];
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          pending.push(v);
        }
      }
    }
    require(reached == nodes_.size(), ErrorKind::invalid_network, "network is not connected");
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<int, std::size_t> node_lookup_;
  std::unordered_map<int, std::size_t> edge_lookup_;
  std::vector<std::size_t> tail_;
  std::vector<std::size_t> head_;
  std::vector<std::vector<Incidence>> incidences_;
};

inline double total_length(const MetricNetwork& net) { return net.total_length(); }

}  // namespace metricnet

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "metricnet/error.hpp"
#include "metricnet/network.hpp"

namespace metricnet {

/// Two nodes joined by one edge (tail id 0, head id 1).
inline MetricNetwork build_interval(double length,
                                    BoundaryCondition bc = BoundaryCondition::kirchhoff) {
  require(std::isfinite(length) && length > 0.0, ErrorKind::invalid_parameter,
          "interval length must be positive");
  std::vector<Node> nodes{{0, bc, Point2{0.0, 0.0}}, {1, bc, Point2{length, 0.0}}};
  std::vector<Edge> edges{{0, 0, 1, length, std::nullopt}};
  return MetricNetwork(std::move(nodes), std::move(edges));
}

/// Star with hub id 0 and leaves 1..num_edges. Edge i runs from leaf i+1
/// (x = 0) to the hub (x = length).
inline MetricNetwork build_star(int num_edges, double length) {
  require(num_edges >= 1, ErrorKind::invalid_parameter, "star needs at least one edge");
  require(std::isfinite(length) && length > 0.0, ErrorKind::invalid_parameter,
          "star edge length must be positive");
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  nodes.push_back({0, BoundaryCondition::kirchhoff, Point2{0.0, 0.0}});
  for (int i = 0; i < num_edges; ++i) {
    double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / num_edges;
    nodes.push_back({i + 1, BoundaryCondition::kirchhoff,
                     Point2{length * std::cos(angle), length * std::sin(angle)}});
    edges.push_back({i, i + 1, 0, length, std::nullopt});
  }
  return MetricNetwork(std::move(nodes), std::move(edges));
}

/// Honeycomb patch of `rows` x `cols` hexagons with unit edges, laid out as a
/// brick wall: row r holds `cols` bricks starting at column (r mod 2), each
/// brick two lattice columns wide. Node count 2(rows+1)(cols+1) - 2, edge
/// count nodes + rows*cols - 1.
inline MetricNetwork build_hexagonal_lattice(int rows, int cols) {
  require(rows >= 1 && cols >= 1, ErrorKind::invalid_parameter,
          "hexagonal lattice needs at least one row and one column");

  std::map<std::pair<int, int>, int> node_ids;  // (column, line) -> id
  auto node_at = [&](int i, int j) {
    auto [it, inserted] = node_ids.emplace(std::make_pair(i, j), 0);
    if (inserted) it->second = static_cast<int>(node_ids.size()) - 1;
    return it->second;
  };
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<Edge> edges;
  auto add_edge = [&](int a, int b) {
    auto key = std::minmax(a, b);
    if (edge_ids.count(key)) return;
    int id = static_cast<int>(edges.size());
    edge_ids.emplace(key, id);
    edges.push_back({id, key.first, key.second, 1.0, std::nullopt});
  };

  for (int r = 0; r < rows; ++r) {
    for (int b = 0; b < cols; ++b) {
      int x0 = (r % 2) + 2 * b;
      int bl = node_at(x0, r), bm = node_at(x0 + 1, r), br = node_at(x0 + 2, r);
      int tl = node_at(x0, r + 1), tm = node_at(x0 + 1, r + 1), tr = node_at(x0 + 2, r + 1);
      add_edge(bl, bm);
      add_edge(bm, br);
      add_edge(tl, tm);
      add_edge(tm, tr);
      add_edge(bl, tl);
      add_edge(br, tr);
    }
  }

  std::vector<Node> nodes(node_ids.size());
  const double half_width = std::sqrt(3.0) / 2.0;
  for (const auto& [key, id] : node_ids) {
    auto [i, j] = key;
    double lift = ((i + j) % 2 == 0) ? 0.5 : 0.0;
    nodes[id] = {id, BoundaryCondition::kirchhoff, Point2{half_width * i, 1.5 * j + lift}};
  }
  return MetricNetwork(std::move(nodes), std::move(edges));
}

namespace detail {

inline double unit_uniform(std::mt19937_64& gen) {
  // 53 random mantissa bits; reproducible across standard libraries
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Random-line network: `num_needles` segments of `needle_length` with
/// uniformly random centers in the unit square and uniformly random
/// orientations. Intersections become nodes, needle pieces between
/// consecutive intersections become edges, dangling ends are dropped and the
/// largest connected component is returned.
inline MetricNetwork build_random_line_network(int num_needles, double needle_length,
                                               std::uint64_t seed) {
  require(num_needles >= 2, ErrorKind::invalid_parameter, "need at least two needles");
  require(std::isfinite(needle_length) && needle_length > 0.0, ErrorKind::invalid_parameter,
          "needle length must be positive");

  struct Needle {
    Point2 start;
    Point2 dir;  // unit
  };
  std::mt19937_64 gen(seed);
  std::vector<Needle> needles;
  for (int i = 0; i < num_needles; ++i) {
    double cx = detail::unit_uniform(gen);
    double cy = detail::unit_uniform(gen);
    double theta = std::numbers::pi * detail::unit_uniform(gen);
    Point2 d{std::cos(theta), std::sin(theta)};
    needles.push_back({{cx - 0.5 * needle_length * d.x, cy - 0.5 * needle_length * d.y}, d});
  }

  // per needle: (parameter along needle in [0, length], node index)
  std::vector<std::vector<std::pair<double, int>>> hits(needles.size());
  std::vector<Point2> points;
  for (std::size_t a = 0; a < needles.size(); ++a) {
    for (std::size_t b = a + 1; b < needles.size(); ++b) {
      const auto& p = needles[a];
      const auto& q = needles[b];
      double denom = p.dir.x * q.dir.y - p.dir.y * q.dir.x;
      if (std::abs(denom) < 1e-14) continue;
      double dx = q.start.x - p.start.x;
      double dy = q.start.y - p.start.y;
      double s = (dx * q.dir.y - dy * q.dir.x) / denom;
      double t = (dx * p.dir.y - dy * p.dir.x) / denom;
      if (s < 0.0 || s > needle_length || t < 0.0 || t > needle_length) continue;
      int id = static_cast<int>(points.size());
      points.push_back({p.start.x + s * p.dir.x, p.start.y + s * p.dir.y});
      hits[a].push_back({s, id});
      hits[b].push_back({t, id});
    }
  }
  require(!points.empty(), ErrorKind::empty_network, "needles do not intersect");

  struct Piece {
    int tail, head;
    double length;
  };
  std::vector<Piece> pieces;
  for (auto& list : hits) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i) {
      double len = list[i].first - list[i - 1].first;
      if (len <= 0.0) continue;
      pieces.push_back({list[i - 1].second, list[i].second, len});
    }
  }
  require(!pieces.empty(), ErrorKind::empty_network, "needles form no edges");

  // largest component by node count, ties broken by lowest member id
  std::vector<int> parent(points.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& p : pieces) parent[find(p.tail)] = find(p.head);
  std::vector<int> used(points.size(), 0);
  for (const auto& p : pieces) used[p.tail] = used[p.head] = 1;
  std::map<int, int> component_size;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (used[i]) ++component_size[find(static_cast<int>(i))];
  int best = -1, best_size = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!used[i]) continue;
    int root = find(static_cast<int>(i));
    if (component_size[root] > best_size) {
      best = root;
      best_size = component_size[root];
    }
  }

  std::vector<int> renumber(points.size(), -1);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!used[i] || find(static_cast<int>(i)) != best) continue;
    renumber[i] = static_cast<int>(nodes.size());
    nodes.push_back({renumber[i], BoundaryCondition::kirchhoff, points[i]});
  }
  std::vector<Edge> edges;
  for (const auto& p : pieces) {
    if (renumber[p.tail] < 0) continue;
    int id = static_cast<int>(edges.size());
    edges.push_back({id, renumber[p.tail], renumber[p.head], p.length, std::nullopt});
  }
  return MetricNetwork(std::move(nodes), std::move(edges));
}

/// Insert a Kirchhoff node of degree two into an edge at `fraction` of its
/// length. The original edge keeps its id and tail; the new piece gets the
/// next free edge id.
inline MetricNetwork split_edge(const MetricNetwork& net, int edge_id, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::invalid_parameter,
          "split fraction must lie in (0, 1)");
  auto nodes = net.nodes();
  auto edges = net.edges();
  auto& e = edges[net.edge_index(edge_id)];
  int new_node = 0, new_edge = 0;
  for (const auto& n : nodes) new_node = std::max(new_node, n.id + 1);
  for (const auto& x : edges) new_edge = std::max(new_edge, x.id + 1);

  std::optional<Point2> where;
  const auto& t = nodes[net.node_index(e.tail)].position;
  const auto& h = nodes[net.node_index(e.head)].position;
  if (t && h) where = Point2{t->x + fraction * (h->x - t->x), t->y + fraction * (h->y - t->y)};
  nodes.push_back({new_node, BoundaryCondition::kirchhoff, where});

  Edge rest{new_edge, new_node, e.head, (1.0 - fraction) * e.length, e.weight};
  e.head = new_node;
  e.length *= fraction;
  edges.push_back(rest);
  return MetricNetwork(std::move(nodes), std::move(edges));
}

}  // namespace metricnet

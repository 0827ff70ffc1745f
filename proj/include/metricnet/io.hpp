#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "metricnet/error.hpp"
#include "metricnet/fd.hpp"
#include "metricnet/network.hpp"
#include "metricnet/network_function.hpp"
#include "metricnet/spectral.hpp"

namespace metricnet {

using json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---- network JSON ---------------------------------------------------------

inline json network_to_json(const MetricNetwork& net) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : net.nodes()) {
    json j{{"id", n.id}, {"bc", n.bc == BoundaryCondition::kirchhoff ? "kirchhoff" : "dirichlet"}};
    if (n.position) {
      j["x"] = n.position->x;
      j["y"] = n.position->y;
    }
    nodes.push_back(std::move(j));
  }
  for (const auto& e : net.edges()) {
    json j{{"id", e.id}, {"tail", e.tail}, {"head", e.head}, {"length", e.length}};
    if (e.weight) j["weight"] = *e.weight;
    edges.push_back(std::move(j));
  }
  return json{{"nodes", nodes}, {"edges", edges}};
}

inline MetricNetwork network_from_json(const json& j) {
  try {
    require(j.is_object() && j.contains("nodes") && j.contains("edges"), ErrorKind::io,
            "network JSON needs \"nodes\" and \"edges\" arrays");
    std::vector<Node> nodes;
    for (const auto& n : j.at("nodes")) {
      Node node;
      node.id = n.at("id").get<int>();
      auto bc = n.value("bc", std::string("kirchhoff"));
      if (bc == "kirchhoff") node.bc = BoundaryCondition::kirchhoff;
      else if (bc == "dirichlet") node.bc = BoundaryCondition::dirichlet;
      else fail(ErrorKind::io, "node " + std::to_string(node.id) + " has unknown bc \"" + bc + "\"");
      if (n.contains("x") != n.contains("y"))
        fail(ErrorKind::io, "node " + std::to_string(node.id) + " needs both x and y or neither");
      if (n.contains("x")) node.position = Point2{n.at("x").get<double>(), n.at("y").get<double>()};
      nodes.push_back(node);
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      Edge edge;
      edge.id = e.at("id").get<int>();
      edge.tail = e.at("tail").get<int>();
      edge.head = e.at("head").get<int>();
      edge.length = e.at("length").get<double>();
      if (e.contains("weight")) edge.weight = e.at("weight").get<double>();
      edges.push_back(edge);
    }
    return MetricNetwork(std::move(nodes), std::move(edges));
  } catch (const json::exception& ex) {
    fail(ErrorKind::io, std::string("malformed network JSON: ") + ex.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    fail(ErrorKind::io, path + ": " + ex.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write to " + path + " failed");
}

inline MetricNetwork load_network(const std::string& path) { return network_from_json(read_json_file(path)); }

inline void save_network(const std::string& path, const MetricNetwork& net) {
  write_text_file(path, network_to_json(net).dump(2) + "\n");
}

// ---- spectrum JSON --------------------------------------------------------

namespace detail {

inline json modes_to_json(const MetricNetwork& net, const std::vector<NetworkFunction>& modes) {
  json out = json::array();
  for (const auto& f : modes) {
    json mode = json::array();
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
      const auto& s = f[i].sinusoid();
      mode.push_back({{"edge", f[i].edge_id}, {"A", s.a}, {"B", s.b}});
    }
    out.push_back(std::move(mode));
  }
  return out;
}

}  // namespace detail

/// The zero mode, when present, is stored as the first entry with k = 0.
inline json spectrum_to_json(const MetricNetwork& net, const Spectrum& spec) {
  json out = json::array();
  if (spec.includes_zero_mode)
    out.push_back({{"k", 0.0}, {"multiplicity", 1}, {"modes", detail::modes_to_json(net, {spec.zero_mode})}});
  for (const auto& e : spec.entries)
    out.push_back({{"k", e.k}, {"multiplicity", e.multiplicity()}, {"modes", detail::modes_to_json(net, e.modes)}});
  return out;
}

inline Spectrum spectrum_from_json(const json& j, const MetricNetwork& net) {
  try {
    require(j.is_array(), ErrorKind::io, "spectrum JSON must be an array");
    Spectrum spec;
    for (const auto& entry : j) {
      double k = entry.at("k").get<double>();
      std::vector<NetworkFunction> modes;
      std::vector<Eigen::VectorXd> coefficients;
      for (const auto& m : entry.at("modes")) {
        require(m.size() == net.num_edges(), ErrorKind::io, "mode does not cover every edge");
        std::vector<Sinusoid> parts(net.num_edges());
        Eigen::VectorXd x(2 * static_cast<Eigen::Index>(net.num_edges()));
        std::vector<char> seen(net.num_edges(), 0);
        for (const auto& c : m) {
          std::size_t i = net.edge_index(c.at("edge").get<int>());
          require(!seen[i], ErrorKind::io, "mode lists an edge twice");
          seen[i] = 1;
          parts[i] = {c.at("A").get<double>(), c.at("B").get<double>(), k};
          x[static_cast<Eigen::Index>(2 * i)] = parts[i].a;
          x[static_cast<Eigen::Index>(2 * i + 1)] = parts[i].b;
        }
        modes.push_back(NetworkFunction::from_sinusoids(net, parts));
        coefficients.push_back(x);
      }
      require(entry.at("multiplicity").get<std::size_t>() == modes.size(), ErrorKind::io,
              "multiplicity does not match the number of modes");
      if (k == 0.0) {
        require(modes.size() == 1 && !spec.includes_zero_mode, ErrorKind::io, "malformed zero-mode entry");
        spec.includes_zero_mode = true;
        spec.zero_mode = modes.front();
        continue;
      }
      require(k > 0.0, ErrorKind::io, "negative wavenumber in spectrum");
      require(spec.entries.empty() || spec.entries.back().k < k, ErrorKind::io,
              "spectrum entries must be strictly ascending in k");
      SpectrumEntry e;
      e.k = k;
      e.modes = std::move(modes);
      e.coefficients = std::move(coefficients);
      spec.entries.push_back(std::move(e));
      spec.k_max = k;
    }
    return spec;
  } catch (const json::exception& ex) {
    fail(ErrorKind::io, std::string("malformed spectrum JSON: ") + ex.what());
  }
}

// ---- CSV ------------------------------------------------------------------

namespace detail {

/// Value of f at node u: volume-weighted mean of the incident edge ends.
inline double node_value(const MetricNetwork& net, const NetworkFunction& f, std::size_t u) {
  if (net.nodes()[u].bc == BoundaryCondition::dirichlet) return 0.0;
  double num = 0.0, den = 0.0;
  for (const auto& inc : net.incidences(u)) {
    const auto& part = f[inc.edge];
    double w = part.is_sampled() ? part.step() : 1.0;
    num += w * part(inc.end == EdgeEnd::tail ? 0.0 : part.length);
    den += w;
  }
  return num / den;
}

inline void write_rows(std::ostream& os, const MetricNetwork& net, const NetworkFunction& f, const std::string& t) {
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    const auto& p = f[i];
    const auto& v = p.samples().values;
    double h = p.step();
    for (std::size_t j = 1; j + 1 < v.size(); ++j)
      os << p.edge_id << ',' << format_double(static_cast<double>(j) * h) << t << ',' << format_double(v[j]) << '\n';
  }
  for (std::size_t u = 0; u < net.num_nodes(); ++u)
    os << -1 << ',' << net.nodes()[u].id << t << ',' << format_double(node_value(net, f, u)) << '\n';
}

}  // namespace detail

/// Static solution: "edge_id,x,value". Interior grid points are listed per
/// edge; every node appears once as "-1,<node id>,<value>".
inline void write_solution_csv(std::ostream& os, const MetricNetwork& net, const NetworkFunction& f) {
  for (const auto& p : f.parts)
    require(p.is_sampled(), ErrorKind::incompatible_operands, "solution export needs sampled functions");
  os << "edge_id,x,value\n";
  detail::write_rows(os, net, f, "");
}

/// Time series: "edge_id,x,t,value", same node convention.
inline void write_time_series_csv(std::ostream& os, const MetricNetwork& net, const TimeSeries& ts) {
  os << "edge_id,x,t,value\n";
  for (const auto& s : ts.snapshots)
    detail::write_rows(os, net, from_grid_vector(net, ts.layout, s.values), "," + format_double(s.t));
}

/// Reads a source in the static solution CSV layout back into a sampled
/// network function. Every edge needs a uniform grid of at least one
/// interior point.
inline NetworkFunction read_solution_csv(std::istream& in, const MetricNetwork& net) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "edge_id,x,value", ErrorKind::io, "expected header edge_id,x,value, got " + line);
  std::vector<std::vector<std::pair<double, double>>> interior(net.num_edges());
  std::map<int, double> node_values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      fail(ErrorKind::io, "CSV line " + std::to_string(lineno) + " needs three columns");
    try {
      int edge = std::stoi(a);
      double x = std::stod(b), v = std::stod(c);
      if (edge == -1) node_values[static_cast<int>(x)] = v;
      else interior[net.edge_index(edge)].emplace_back(x, v);
    } catch (const std::logic_error&) {
      fail(ErrorKind::io, "CSV line " + std::to_string(lineno) + " is not numeric");
    }
  }
  NetworkFunction f;
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    auto& pts = interior[i];
    const auto& e = net.edges()[i];
    require(!pts.empty(), ErrorKind::io, "no samples for edge " + std::to_string(e.id));
    std::sort(pts.begin(), pts.end());
    std::size_t n = pts.size() + 1;
    double h = e.length / static_cast<double>(n);
    Samples s;
    s.values.resize(n + 1);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      require(std::abs(pts[j].first - static_cast<double>(j + 1) * h) <= 1e-9 * e.length, ErrorKind::io,
              "samples on edge " + std::to_string(e.id) + " are not on a uniform grid");
      s.values[j + 1] = pts[j].second;
    }
    auto end_value = [&](std::size_t node) {
      const auto& nd = net.nodes()[node];
      if (nd.bc == BoundaryCondition::dirichlet) return 0.0;
      auto it = node_values.find(nd.id);
      require(it != node_values.end(), ErrorKind::io, "missing value for node " + std::to_string(nd.id));
      return it->second;
    };
    s.values.front() = end_value(net.tail_index(i));
    s.values.back() = end_value(net.head_index(i));
    f.parts.push_back({e.id, e.length, std::move(s)});
  }
  return f;
}

inline NetworkFunction load_solution_csv(const std::string& path, const MetricNetwork& net) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path);
  return read_solution_csv(in, net);
}

/// "k,counted,estimate,lower,upper", one row per k.
inline void write_weyl_csv(std::ostream& os, const Spectrum& spec, const MetricNetwork& net,
                           const std::vector<double>& ks) {
  os << "k,counted,estimate,lower,upper\n";
  for (double k : ks) {
    auto r = weyl_check(spec, net, k);
    os << format_double(k) << ',' << r.counted << ',' << format_double(r.estimate) << ',' << format_double(r.lower)
       << ',' << format_double(r.upper) << '\n';
  }
}

}  // namespace metricnet

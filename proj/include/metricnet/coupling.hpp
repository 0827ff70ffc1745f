#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "metricnet/error.hpp"
#include "metricnet/linalg.hpp"
#include "metricnet/network.hpp"

namespace metricnet {

enum class RowKind { continuity, condition };

struct RowLabel {
  int node_id = 0;
  RowKind kind = RowKind::continuity;
};

/// T(k) acting on X = (A_1, B_1, ..., A_M, B_M). Derivative rows are divided
/// by k.
struct CouplingMatrix {
  double k = 0.0;
  SparseMatrix entries;
  std::vector<RowLabel> row_labels;
};

namespace detail {

struct EndRow {
  double a = 0.0;
  double b = 0.0;
};

/// Coefficients of (A, B) giving the edge value at one end.
inline EndRow end_value(EdgeEnd end, double k, double length) {
  if (end == EdgeEnd::tail) return {0.0, 1.0};
  return {std::sin(k * length), std::cos(k * length)};
}

/// Coefficients of (A, B) giving the derivative into the edge, divided by k.
inline EndRow end_derivative(EdgeEnd end, double k, double length) {
  if (end == EdgeEnd::tail) return {1.0, 0.0};
  return {-std::cos(k * length), std::sin(k * length)};
}

}  // namespace detail

inline CouplingMatrix assemble_coupling_matrix(const MetricNetwork& net, double k) {
  require(std::isfinite(k) && k > 0.0, ErrorKind::invalid_parameter,
          "coupling matrix needs k > 0");
  const auto m = static_cast<Eigen::Index>(net.num_edges());
  CouplingMatrix out;
  out.k = k;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(8 * m));
  Eigen::Index row = 0;

  auto put = [&](Eigen::Index r, std::size_t edge, detail::EndRow c, double sign) {
    auto col = static_cast<Eigen::Index>(2 * edge);
    if (c.a != 0.0) triplets.emplace_back(r, col, sign * c.a);
    if (c.b != 0.0) triplets.emplace_back(r, col + 1, sign * c.b);
  };

  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    const auto& node = net.nodes()[u];
    const auto& inc = net.incidences(u);
    if (node.bc == BoundaryCondition::dirichlet) {
      for (const auto& i : inc) {
        put(row, i.edge, detail::end_value(i.end, k, net.edges()[i.edge].length), 1.0);
        out.row_labels.push_back({node.id, RowKind::condition});
        ++row;
      }
      continue;
    }
    const auto& ref = inc.front();
    auto ref_value = detail::end_value(ref.end, k, net.edges()[ref.edge].length);
    for (std::size_t j = 1; j < inc.size(); ++j) {
      put(row, ref.edge, ref_value, 1.0);
      put(row, inc[j].edge, detail::end_value(inc[j].end, k, net.edges()[inc[j].edge].length), -1.0);
      out.row_labels.push_back({node.id, RowKind::continuity});
      ++row;
    }
    for (const auto& i : inc)
      put(row, i.edge, detail::end_derivative(i.end, k, net.edges()[i.edge].length), 1.0);
    out.row_labels.push_back({node.id, RowKind::condition});
    ++row;
  }

  out.entries.resize(row, 2 * m);
  out.entries.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

inline SingularValueSummary coupling_singular_values(const MetricNetwork& net, double k,
                                                     Eigen::Index dense_limit = 64) {
  return singular_value_summary(assemble_coupling_matrix(net, k).entries, dense_limit);
}

/// σ_min / σ_max of T(k), i.e. 1/κ. Zero means numerically singular.
inline double inverse_condition_number(const MetricNetwork& net, double k,
                                       Eigen::Index dense_limit = 64) {
  auto s = coupling_singular_values(net, k, dense_limit);
  require(s.sigma_max > 0.0, ErrorKind::degenerate_matrix, "coupling matrix is all zero");
  return s.sigma_min / s.sigma_max;
}

/// Σ_i sin(kℓ_i) Π_{j≠i} cos(kℓ_j), the pole-free form of
/// Σ_i tan(kℓ_i) Π_i cos(kℓ_i) for a star with the given edge lengths.
inline double star_secular_determinant(double k, std::span<const double> lengths) {
  require(k > 0.0, ErrorKind::invalid_parameter, "secular determinant needs k > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    double term = std::sin(k * lengths[i]);
    for (std::size_t j = 0; j < lengths.size(); ++j)
      if (j != i) term *= std::cos(k * lengths[j]);
    sum += term;
  }
  return sum;
}

/// Coordinate-format dump: one "row col value" line per stored entry.
inline void write_coordinate_text(std::ostream& os, const CouplingMatrix& t) {
  os << "# k " << t.k << " rows " << t.entries.rows() << " cols " << t.entries.cols() << '\n';
  os.precision(17);
  for (int c = 0; c < t.entries.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(t.entries, c); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace metricnet

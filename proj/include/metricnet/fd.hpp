#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "metricnet/error.hpp"
#include "metricnet/linalg.hpp"
#include "metricnet/network.hpp"
#include "metricnet/network_function.hpp"

namespace metricnet {

/// Global unknown numbering: Kirchhoff node values first (in node order),
/// then the N_i - 1 interior points of each edge (in edge order). Dirichlet
/// node values are pinned to zero and have no unknown.
struct GridLayout {
  std::vector<int> intervals;               // N_i
  std::vector<double> step;                 // h_i = ℓ_i / N_i
  std::vector<Eigen::Index> node_unknown;   // -1 for Dirichlet nodes
  std::vector<Eigen::Index> edge_offset;    // unknown of x_{i,1}
  std::vector<std::size_t> edge_tail, edge_head;
  Eigen::Index node_unknowns = 0;
  Eigen::Index size = 0;
  Eigen::VectorXd volumes;                  // cell volumes: Σh/2 at nodes, h inside edges

  /// Unknown holding grid point j (0..N_i) of edge i, or -1 if pinned.
  Eigen::Index point_index(std::size_t edge, int j) const {
    if (j == 0) return node_unknown[edge_tail[edge]];
    if (j == intervals[edge]) return node_unknown[edge_head[edge]];
    return edge_offset[edge] + j - 1;
  }
};

inline GridLayout make_layout(const MetricNetwork& net, std::span<const int> n_per_edge) {
  require(n_per_edge.size() == net.num_edges(), ErrorKind::invalid_parameter,
          "need one grid size per edge");
  GridLayout g;
  g.node_unknown.assign(net.num_nodes(), -1);
  for (std::size_t u = 0; u < net.num_nodes(); ++u)
    if (net.nodes()[u].bc == BoundaryCondition::kirchhoff) g.node_unknown[u] = g.node_unknowns++;
  Eigen::Index next = g.node_unknowns;
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    int n = n_per_edge[i];
    require(n >= 2, ErrorKind::invalid_parameter, "every edge needs at least two grid intervals");
    g.intervals.push_back(n);
    g.step.push_back(net.edges()[i].length / n);
    g.edge_offset.push_back(next);
    g.edge_tail.push_back(net.tail_index(i));
    g.edge_head.push_back(net.head_index(i));
    next += n - 1;
  }
  g.size = next;
  g.volumes = Eigen::VectorXd::Zero(g.size);
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    double h = g.step[i];
    g.volumes.segment(g.edge_offset[i], g.intervals[i] - 1).setConstant(h);
    for (auto node : {g.edge_tail[i], g.edge_head[i]})
      if (g.node_unknown[node] >= 0) g.volumes[g.node_unknown[node]] += 0.5 * h;
  }
  return g;
}

inline GridLayout make_layout(const MetricNetwork& net, int n_per_edge) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return make_layout(net, n);
}

using RowMajorMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discretized generalized Laplacian Δ̃_h over a GridLayout.
struct DiscreteOperator {
  GridLayout layout;
  RowMajorMatrix matrix;
};

namespace detail {

/// Calls visit(neighbor_unknown, weight) for each term w (f_nb - f_0) of the
/// Kirchhoff row of node u; weight = 2 / (h_i Σh).
template <class Visit>
void kirchhoff_row(const MetricNetwork& net, const GridLayout& g, std::size_t u, Visit&& visit) {
  const auto& inc = net.incidences(u);
  double total = 0.0;
  for (const auto& i : inc) total += g.step[i.edge];
  for (const auto& i : inc) {
    int j = (i.end == EdgeEnd::tail) ? 1 : g.intervals[i.edge] - 1;
    visit(i.edge, i.end, g.point_index(i.edge, j), 2.0 / (g.step[i.edge] * total));
  }
}

}  // namespace detail

inline DiscreteOperator build_generalized_laplacian(const MetricNetwork& net, std::span<const int> n_per_edge) {
  DiscreteOperator op{make_layout(net, n_per_edge), {}};
  const auto& g = op.layout;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * g.size));
  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    Eigen::Index row = g.node_unknown[u];
    if (row < 0) continue;
    detail::kirchhoff_row(net, g, u, [&](std::size_t, EdgeEnd, Eigen::Index nb, double w) {
      t.emplace_back(row, nb, w);
      t.emplace_back(row, row, -w);
    });
  }
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    double c = 1.0 / (g.step[i] * g.step[i]);
    for (int j = 1; j < g.intervals[i]; ++j) {
      Eigen::Index row = g.point_index(i, j);
      t.emplace_back(row, row, -2.0 * c);
      for (int nb : {j - 1, j + 1}) {
        Eigen::Index col = g.point_index(i, nb);
        if (col >= 0) t.emplace_back(row, col, c);
      }
    }
  }
  op.matrix.resize(g.size, g.size);
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

inline DiscreteOperator build_generalized_laplacian(const MetricNetwork& net, int n_per_edge) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return build_generalized_laplacian(net, n);
}

/// Δ̃_h x without assembling the matrix.
inline Eigen::VectorXd apply_laplacian(const MetricNetwork& net, const GridLayout& g, const Eigen::VectorXd& x) {
  require(x.size() == g.size, ErrorKind::incompatible_operands, "vector does not match the grid layout");
  Eigen::VectorXd y(g.size);
  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    Eigen::Index row = g.node_unknown[u];
    if (row < 0) continue;
    double s = 0.0;
    detail::kirchhoff_row(net, g, u, [&](std::size_t, EdgeEnd, Eigen::Index nb, double w) {
      s += w * (x[nb] - x[row]);
    });
    y[row] = s;
  }
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    double c = 1.0 / (g.step[i] * g.step[i]);
    int n = g.intervals[i];
    Eigen::Index t0 = g.point_index(i, 0), tn = g.point_index(i, n);
    double left = t0 >= 0 ? x[t0] : 0.0;
    double right = tn >= 0 ? x[tn] : 0.0;
    Eigen::Index off = g.edge_offset[i];
    for (int j = 1; j < n; ++j) {
      Eigen::Index row = off + j - 1;
      double a = j == 1 ? left : x[row - 1];
      double b = j == n - 1 ? right : x[row + 1];
      y[row] = c * (a - 2.0 * x[row] + b);
    }
  }
  return y;
}

/// Grid values of a network function. Node unknowns take the volume-weighted
/// average of the incident edge ends, which is their common value whenever
/// the function is continuous.
inline Eigen::VectorXd to_grid_vector(const MetricNetwork& net, const GridLayout& g, const NetworkFunction& f) {
  require(f.size() == net.num_edges(), ErrorKind::incompatible_operands, "function does not cover the network");
  auto s = f.sampled(g.intervals);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size);
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    const auto& v = s[i].samples().values;
    int n = g.intervals[i];
    for (int j = 1; j < n; ++j) x[g.point_index(i, j)] = v[static_cast<std::size_t>(j)];
  }
  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    Eigen::Index row = g.node_unknown[u];
    if (row < 0) continue;
    double num = 0.0, den = 0.0;
    for (const auto& inc : net.incidences(u)) {
      const auto& v = s[inc.edge].samples().values;
      double end = inc.end == EdgeEnd::tail ? v.front() : v.back();
      num += g.step[inc.edge] * end;
      den += g.step[inc.edge];
    }
    x[row] = num / den;
  }
  return x;
}

/// Sampled network function from grid values; pinned nodes read as zero.
inline NetworkFunction from_grid_vector(const MetricNetwork& net, const GridLayout& g, const Eigen::VectorXd& x) {
  require(x.size() == g.size, ErrorKind::incompatible_operands, "vector does not match the grid layout");
  NetworkFunction f;
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    int n = g.intervals[i];
    Samples s;
    s.values.resize(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
      Eigen::Index k = g.point_index(i, j);
      s.values[static_cast<std::size_t>(j)] = k >= 0 ? x[k] : 0.0;
    }
    f.parts.push_back({net.edges()[i].id, net.edges()[i].length, std::move(s)});
  }
  return f;
}

/// Volume-weighted inner product ⟨x, y⟩_h.
inline double grid_inner_product(const GridLayout& g, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return (g.volumes.array() * x.array() * y.array()).sum();
}

namespace detail {

/// ⟨1, x⟩_h accumulated in extended precision. On millions of cells the
/// ordinary sum loses enough digits to spoil the singular Poisson solve.
inline double grid_total(const GridLayout& g, const Eigen::VectorXd& x) {
  long double sum = 0.0L;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += static_cast<long double>(g.volumes[i]) * x[i];
  return static_cast<double>(sum);
}

/// Removes the constant component: x -= ⟨1, x⟩_h / ⟨1, 1⟩_h, twice.
inline void remove_mean(const GridLayout& g, Eigen::VectorXd& x) {
  double volume = grid_total(g, Eigen::VectorXd::Ones(g.size));
  for (int pass = 0; pass < 2; ++pass) x.array() -= grid_total(g, x) / volume;
}

}  // namespace detail

/// Direct solver for (c0 I + c1 Δ̃_h) x = r. Interior points are eliminated
/// edge by edge with tridiagonal solves, leaving a sparse system over node
/// unknowns. With `pin_first_node` the first node unknown is fixed to zero,
/// which selects one solution of the singular all-Kirchhoff Poisson problem.
class CondensedSolver {
 public:
  CondensedSolver(const MetricNetwork& net, GridLayout layout, double c0, double c1, bool pin_first_node = false)
      : net_(&net), g_(std::move(layout)), c0_(c0), c1_(c1), pinned_(pin_first_node && g_.node_unknowns > 0) {
    edge_block_.resize(net.num_edges());
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
      auto key = std::make_pair(g_.intervals[i], g_.step[i]);
      auto it = block_index_.find(key);
      if (it == block_index_.end()) {
        it = block_index_.emplace(key, blocks_.size()).first;
        blocks_.push_back(make_block(g_.intervals[i] - 1, g_.step[i]));
      }
      edge_block_[i] = it->second;
    }
    factor_nodes();
  }

  const GridLayout& layout() const { return g_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    require(r.size() == g_.size, ErrorKind::incompatible_operands, "right-hand side does not match the grid layout");
    Eigen::VectorXd x(g_.size);
    std::vector<double> work;
    for (std::size_t i = 0; i < net_->num_edges(); ++i) {
      const auto& b = blocks_[edge_block_[i]];
      Eigen::Index off = g_.edge_offset[i];
      thomas(b, r.data() + off, x.data() + off, work);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(g_.node_unknowns);
    if (g_.node_unknowns > 0) {
      Eigen::VectorXd rhs = r.head(g_.node_unknowns);
      for (std::size_t u = 0; u < net_->num_nodes(); ++u) {
        Eigen::Index row = g_.node_unknown[u];
        if (row < 0) continue;
        detail::kirchhoff_row(*net_, g_, u, [&](std::size_t, EdgeEnd, Eigen::Index nb, double w) {
          rhs[row] -= c1_ * w * x[nb];
        });
      }
      if (pinned_) rhs[0] = 0.0;
      y = lu_.solve(rhs);
      require(lu_.info() == Eigen::Success, ErrorKind::numerical_failure, "node system solve failed");
    }
    x.head(g_.node_unknowns) = y;
    for (std::size_t i = 0; i < net_->num_edges(); ++i) {
      const auto& b = blocks_[edge_block_[i]];
      Eigen::Index t = g_.node_unknown[g_.edge_tail[i]], h = g_.node_unknown[g_.edge_head[i]];
      double xt = t >= 0 ? y[t] : 0.0, xh = h >= 0 ? y[h] : 0.0;
      if (xt == 0.0 && xh == 0.0) continue;
      Eigen::Index off = g_.edge_offset[i];
      auto m = static_cast<Eigen::Index>(b.q.size());
      for (Eigen::Index j = 0; j < m; ++j)
        x[off + j] += xt * b.q[static_cast<std::size_t>(j)] + xh * b.q[static_cast<std::size_t>(m - 1 - j)];
    }
    return x;
  }

 private:
  struct Block {
    double diag = 0.0, off = 0.0;
    std::vector<double> cprime, inv_denom;
    std::vector<double> q;  // interior response to a unit tail value
  };

  Block make_block(int m, double h) const {
    Block b;
    b.diag = c0_ - 2.0 * c1_ / (h * h);
    b.off = c1_ / (h * h);
    b.cprime.resize(static_cast<std::size_t>(m));
    b.inv_denom.resize(static_cast<std::size_t>(m));
    double denom = b.diag;
    for (int j = 0; j < m; ++j) {
      if (j > 0) denom = b.diag - b.off * b.cprime[static_cast<std::size_t>(j - 1)];
      require(denom != 0.0 && std::isfinite(denom), ErrorKind::numerical_failure,
              "singular tridiagonal block in edge elimination");
      b.inv_denom[static_cast<std::size_t>(j)] = 1.0 / denom;
      b.cprime[static_cast<std::size_t>(j)] = b.off / denom;
    }
    std::vector<double> unit(static_cast<std::size_t>(m), 0.0), work;
    unit[0] = -b.off;
    b.q.resize(static_cast<std::size_t>(m));
    thomas(b, unit.data(), b.q.data(), work);
    return b;
  }

  static void thomas(const Block& b, const double* r, double* x, std::vector<double>& work) {
    std::size_t m = b.cprime.size();
    work.resize(m);
    work[0] = r[0] * b.inv_denom[0];
    for (std::size_t j = 1; j < m; ++j) work[j] = (r[j] - b.off * work[j - 1]) * b.inv_denom[j];
    x[m - 1] = work[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) x[j] = work[j] - b.cprime[j] * x[j + 1];
  }

  void factor_nodes() {
    if (g_.node_unknowns == 0) return;
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t u = 0; u < net_->num_nodes(); ++u) {
      Eigen::Index row = g_.node_unknown[u];
      if (row < 0) continue;
      if (pinned_ && row == 0) {
        t.emplace_back(0, 0, 1.0);
        continue;
      }
      t.emplace_back(row, row, c0_);
      detail::kirchhoff_row(*net_, g_, u, [&](std::size_t edge, EdgeEnd end, Eigen::Index, double w) {
        // x_nb = p_nb + x_tail q_tail(nb) + x_head q_head(nb)
        const auto& q = blocks_[edge_block_[edge]].q;
        double near = q.front(), far = q.back();
        Eigen::Index tail = g_.node_unknown[g_.edge_tail[edge]];
        Eigen::Index head = g_.node_unknown[g_.edge_head[edge]];
        double coef_tail = end == EdgeEnd::tail ? near : far;
        double coef_head = end == EdgeEnd::tail ? far : near;
        t.emplace_back(row, row, -c1_ * w);
        if (tail >= 0) t.emplace_back(row, tail, c1_ * w * coef_tail);
        if (head >= 0) t.emplace_back(row, head, c1_ * w * coef_head);
      });
    }
    SparseMatrix s(g_.node_unknowns, g_.node_unknowns);
    s.setFromTriplets(t.begin(), t.end());
    lu_.analyzePattern(s);
    lu_.factorize(s);
    require(lu_.info() == Eigen::Success, ErrorKind::numerical_failure,
            "node system is singular; a pure-Kirchhoff Poisson problem needs pinning");
  }

  const MetricNetwork* net_;
  GridLayout g_;
  double c0_, c1_;
  bool pinned_;
  std::vector<Block> blocks_;
  std::map<std::pair<int, double>, std::size_t> block_index_;
  std::vector<std::size_t> edge_block_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

struct PoissonFdResult {
  GridLayout layout;
  Eigen::VectorXd values;   // φ on the grid
  double compatibility = 0.0;  // ⟨1, ρ⟩_h, removed before solving
  double residual = 0.0;       // ‖Δ̃_h φ - ρ‖_∞ with the compatible ρ
  double rho_norm = 0.0;       // ‖ρ‖_∞
};

/// Δ̃_h φ = ρ. On all-Kirchhoff networks the solution is the zero-mean one.
inline PoissonFdResult solve_poisson_fd(const MetricNetwork& net, const NetworkFunction& rho,
                                        std::span<const int> n_per_edge) {
  PoissonFdResult out;
  out.layout = make_layout(net, n_per_edge);
  const auto& g = out.layout;
  Eigen::VectorXd r = to_grid_vector(net, g, rho);
  bool singular = net.all_kirchhoff();
  if (singular) {
    out.compatibility = detail::grid_total(g, r);
    if (!(std::abs(out.compatibility) < 1e-8)) {
      std::ostringstream msg;
      msg << "source is incompatible with the constant mode: |<1, rho>_h| = " << std::abs(out.compatibility);
      fail(ErrorKind::incompatible_source, msg.str());
    }
    detail::remove_mean(g, r);
  }
  CondensedSolver solver(net, g, 0.0, 1.0, singular);
  out.values = solver.solve(r);
  out.rho_norm = r.cwiseAbs().maxCoeff();
  // Iterative refinement recovers digits lost to the 1/h² scaling. With a
  // pinned node its row collects the rounding of every other row, so the
  // residual stalls and wanders; keep the best iterate.
  Eigen::VectorXd best = out.values;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 6; ++pass) {
    Eigen::VectorXd defect = r - apply_laplacian(net, g, out.values);
    double res = defect.cwiseAbs().maxCoeff();
    if (res < best_residual) {
      best_residual = res;
      best = out.values;
    } else if (pass > 1) {
      break;
    }
    if (res <= 1e-12 * out.rho_norm) break;
    out.values += solver.solve(defect);
  }
  out.values = std::move(best);
  if (singular) detail::remove_mean(g, out.values);
  out.residual = (apply_laplacian(net, g, out.values) - r).cwiseAbs().maxCoeff();
  if (!(out.residual <= 1e-10 * std::max(out.rho_norm, 1e-300))) {
    std::ostringstream msg;
    msg << "Poisson residual " << out.residual << " exceeds 1e-10 * ||rho||";
    fail(ErrorKind::numerical_failure, msg.str());
  }
  return out;
}

inline PoissonFdResult solve_poisson_fd(const MetricNetwork& net, const NetworkFunction& rho, int n_per_edge) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return solve_poisson_fd(net, rho, n);
}

struct GridError {
  double mse = 0.0;
  double max_abs = 0.0;
  std::size_t points = 0;
};

/// Error of grid values against exact(edge_index, x), over every unknown
/// (each Kirchhoff node once, evaluated at its first incident edge end).
inline GridError grid_error(const MetricNetwork& net, const GridLayout& g, const Eigen::VectorXd& values,
                            const std::function<double(std::size_t, double)>& exact) {
  require(values.size() == g.size, ErrorKind::incompatible_operands, "vector does not match the grid layout");
  GridError e;
  auto add = [&](double d) {
    e.mse += d * d;
    e.max_abs = std::max(e.max_abs, std::abs(d));
    ++e.points;
  };
  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    Eigen::Index row = g.node_unknown[u];
    if (row < 0) continue;
    const auto& inc = net.incidences(u).front();
    double x = inc.end == EdgeEnd::tail ? 0.0 : net.edges()[inc.edge].length;
    add(values[row] - exact(inc.edge, x));
  }
  for (std::size_t i = 0; i < net.num_edges(); ++i)
    for (int j = 1; j < g.intervals[i]; ++j)
      add(values[g.point_index(i, j)] - exact(i, j * g.step[i]));
  if (e.points > 0) e.mse /= static_cast<double>(e.points);
  return e;
}

struct TimeStepping {
  double t_end = 1.0;
  double dt = 1e-3;
  int stride = 1;  // keep every stride-th step (the final state is always kept)
};

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd values;
};

struct TimeSeries {
  GridLayout layout;
  double dt = 0.0;  // step actually used: t_end divided by a whole number of steps
  std::vector<Snapshot> snapshots;
};

/// Called after every step with the time and the new state.
using StepObserver = std::function<void(double, const Eigen::VectorXd&)>;

namespace detail {

inline long step_count(const TimeStepping& ts) {
  require(std::isfinite(ts.dt) && ts.dt > 0.0, ErrorKind::invalid_parameter, "time step must be positive");
  require(std::isfinite(ts.t_end) && ts.t_end >= 0.0, ErrorKind::invalid_parameter, "end time must be non-negative");
  require(ts.stride >= 1, ErrorKind::invalid_parameter, "snapshot stride must be at least 1");
  return std::max(0L, std::lround(ts.t_end / ts.dt));
}

}  // namespace detail

/// ∂φ/∂t = Δ̃_h φ - ρ by Crank–Nicolson.
inline TimeSeries solve_heat_fd(const MetricNetwork& net, const NetworkFunction& phi0, const NetworkFunction& rho,
                                const TimeStepping& ts, std::span<const int> n_per_edge,
                                const StepObserver& observer = {}) {
  long steps = detail::step_count(ts);
  TimeSeries out;
  out.layout = make_layout(net, n_per_edge);
  const auto& g = out.layout;
  out.dt = steps > 0 ? ts.t_end / static_cast<double>(steps) : ts.dt;
  double dt = out.dt;
  Eigen::VectorXd phi = to_grid_vector(net, g, phi0);
  Eigen::VectorXd source = dt * to_grid_vector(net, g, rho);
  out.snapshots.push_back({0.0, phi});
  CondensedSolver implicit(net, g, 1.0, -0.5 * dt);
  for (long n = 1; n <= steps; ++n) {
    Eigen::VectorXd rhs = phi + 0.5 * dt * apply_laplacian(net, g, phi) - source;
    phi = implicit.solve(rhs);
    double t = static_cast<double>(n) * dt;
    if (observer) observer(t, phi);
    if (n % ts.stride == 0 || n == steps) out.snapshots.push_back({t, phi});
  }
  return out;
}

inline TimeSeries solve_heat_fd(const MetricNetwork& net, const NetworkFunction& phi0, const NetworkFunction& rho,
                                const TimeStepping& ts, int n_per_edge, const StepObserver& observer = {}) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return solve_heat_fd(net, phi0, rho, ts, n, observer);
}

/// Largest eigenvalue of -Δ̃_h, through the volume-symmetrized matrix.
inline double laplacian_spectral_radius(const DiscreteOperator& op) {
  Eigen::VectorXd s = op.layout.volumes.cwiseSqrt();
  Eigen::VectorXd inv = s.cwiseInverse();
  return detail::lanczos_largest(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd y = inv.cwiseProduct(x);
        return -s.cwiseProduct(op.matrix * y);
      },
      op.layout.size, 1e-8);
}

struct WaveOptions {
  double cfl_safety = 0.5;            // dt ≤ cfl_safety · min h
  bool check_spectral_radius = false;  // also require dt² ρ(-Δ̃_h) ≤ 3.8
};

/// E = ½‖(φⁿ⁺¹ - φⁿ)/dt‖² + ½⟨-Δ̃_h φ̄, φ̄⟩ with φ̄ the midpoint, in the
/// volume-weighted inner product.
inline double discrete_wave_energy(const DiscreteOperator& op, const Eigen::VectorXd& current,
                                   const Eigen::VectorXd& next, double dt) {
  const auto& g = op.layout;
  Eigen::VectorXd v = (next - current) / dt;
  Eigen::VectorXd mid = 0.5 * (next + current);
  Eigen::VectorXd lap = op.matrix * mid;
  return 0.5 * grid_inner_product(g, v, v) - 0.5 * grid_inner_product(g, lap, mid);
}

/// ∂²φ/∂t² = Δ̃_h φ by leapfrog.
inline TimeSeries solve_wave_fd(const MetricNetwork& net, const NetworkFunction& phi0, const NetworkFunction& phidot0,
                                const TimeStepping& ts, std::span<const int> n_per_edge,
                                const WaveOptions& opts = {}, const StepObserver& observer = {}) {
  long steps = detail::step_count(ts);
  auto op = build_generalized_laplacian(net, n_per_edge);
  const auto& g = op.layout;
  TimeSeries out;
  out.layout = g;
  out.dt = steps > 0 ? ts.t_end / static_cast<double>(steps) : ts.dt;
  double dt = out.dt;
  double h_min = *std::min_element(g.step.begin(), g.step.end());
  if (dt > opts.cfl_safety * h_min) {
    std::ostringstream msg;
    msg << "time step " << dt << " violates the CFL limit " << opts.cfl_safety << " * min h = " << opts.cfl_safety * h_min;
    fail(ErrorKind::stability, msg.str());
  }
  if (opts.check_spectral_radius) {
    double rho = laplacian_spectral_radius(op);
    if (dt * dt * rho > 4.0 * 0.95) {
      std::ostringstream msg;
      msg << "time step " << dt << " gives dt^2 * rho(-Laplacian) = " << dt * dt * rho << " > 3.8";
      fail(ErrorKind::stability, msg.str());
    }
  }

  Eigen::VectorXd prev = to_grid_vector(net, g, phi0);
  Eigen::VectorXd vel = to_grid_vector(net, g, phidot0);
  out.snapshots.push_back({0.0, prev});
  if (steps == 0) return out;
  Eigen::VectorXd cur = prev + dt * vel + 0.5 * dt * dt * (op.matrix * prev);
  if (observer) observer(dt, cur);
  if (1 % ts.stride == 0 || steps == 1) out.snapshots.push_back({dt, cur});
  for (long n = 2; n <= steps; ++n) {
    Eigen::VectorXd next = 2.0 * cur - prev + dt * dt * (op.matrix * cur);
    prev = std::move(cur);
    cur = std::move(next);
    double t = static_cast<double>(n) * dt;
    if (observer) observer(t, cur);
    if (n % ts.stride == 0 || n == steps) out.snapshots.push_back({t, cur});
  }
  return out;
}

inline TimeSeries solve_wave_fd(const MetricNetwork& net, const NetworkFunction& phi0, const NetworkFunction& phidot0,
                                const TimeStepping& ts, int n_per_edge, const WaveOptions& opts = {},
                                const StepObserver& observer = {}) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return solve_wave_fd(net, phi0, phidot0, ts, n, opts, observer);
}

/// Smallest `count` eigenvalues of -Δ̃_h in ascending order (approximations
/// of k_m²). Dense symmetric solve up to `dense_limit` unknowns, shift-invert
/// subspace iteration beyond.
inline std::vector<double> fd_eigenvalues(const DiscreteOperator& op, std::size_t count,
                                          Eigen::Index dense_limit = 3000) {
  const auto n = op.layout.size;
  require(count >= 1 && static_cast<Eigen::Index>(count) <= n, ErrorKind::invalid_parameter,
          "eigenvalue count must lie between 1 and the operator dimension");
  Eigen::VectorXd s = op.layout.volumes.cwiseSqrt();
  Eigen::VectorXd inv = s.cwiseInverse();
  // S = D^{1/2} (-Δ̃_h) D^{-1/2}, symmetric positive semidefinite
  SparseMatrix sym = SparseMatrix(-(s.asDiagonal() * SparseMatrix(op.matrix) * inv.asDiagonal()));
  sym = SparseMatrix(0.5 * (sym + SparseMatrix(sym.transpose())));
  std::vector<double> out;
  if (n <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(sym), Eigen::EigenvaluesOnly};
    require(eig.info() == Eigen::Success, ErrorKind::numerical_failure, "dense eigensolver did not converge");
    for (std::size_t i = 0; i < count; ++i) out.push_back(eig.eigenvalues()[static_cast<Eigen::Index>(i)]);
    return out;
  }

  SparseMatrix shifted = sym;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += 1.0;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  require(ldlt.info() == Eigen::Success, ErrorKind::numerical_failure, "shift-invert factorization failed");
  Eigen::Index block = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(count) + 10);
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = std::sin(0.3 + 1.7 * static_cast<double>(i) + 0.9 * static_cast<double>(j * (i + 1)));
  for (int iter = 0; iter < 2000; ++iter) {
    x = ldlt.solve(x);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Eigen::MatrixXd sx = sym * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(x.transpose() * sx);
    x = x * ritz.eigenvectors();
    sx = sx * ritz.eigenvectors();
    bool done = true;
    for (std::size_t i = 0; i < count; ++i) {
      auto c = static_cast<Eigen::Index>(i);
      double lambda = ritz.eigenvalues()[c];
      double res = (sx.col(c) - lambda * x.col(c)).norm();
      if (res > 1e-10 * std::max(1.0, std::abs(lambda))) done = false;
    }
    if (done) {
      for (std::size_t i = 0; i < count; ++i) out.push_back(ritz.eigenvalues()[static_cast<Eigen::Index>(i)]);
      return out;
    }
  }
  fail(ErrorKind::numerical_failure, "shift-invert eigenvalue iteration did not converge");
}

}  // namespace metricnet

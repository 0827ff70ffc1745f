#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "metricnet/coupling.hpp"
#include "metricnet/error.hpp"
#include "metricnet/linalg.hpp"
#include "metricnet/minimize.hpp"
#include "metricnet/network.hpp"
#include "metricnet/network_function.hpp"

namespace metricnet {

/// Tunables of the wavenumber search.
struct SpectralConfig {
  double k_max = 100.0;            // scan upper bound
  int n_grid = 2000;               // equidistant scan points on [0, k_max]
  double cutoff = 1e-2;            // candidate threshold on 1/κ
  double bracket_halfwidth = 0.1;  // refinement bounds k0 ± Δk
  int round_precision = 8;         // digits used to merge duplicate roots
  double rank_tol = 1e-8;          // nullspace threshold relative to σ_max
  double convergence_tol = 1e-14;  // absolute tolerance of the minimizer
  unsigned threads = 1;
  Eigen::Index dense_svd_limit = 64;
  // Refine only candidates that are local minima of the scan. Neighbouring
  // candidates usually converge to the same root, so this saves most of the
  // refinement work on large networks.
  bool local_minima_only = false;

  void validate() const {
    require(std::isfinite(k_max) && k_max > 0.0, ErrorKind::invalid_parameter, "k_max must be positive");
    require(n_grid >= 2, ErrorKind::invalid_parameter, "scan grid needs at least two points");
    require(cutoff > 0.0 && cutoff < 1.0, ErrorKind::invalid_parameter, "cutoff must lie in (0, 1)");
    require(bracket_halfwidth > 0.0, ErrorKind::invalid_parameter, "bracket half-width must be positive");
    require(round_precision >= 1 && round_precision <= 15, ErrorKind::invalid_parameter,
            "rounding precision must be between 1 and 15 digits");
    require(rank_tol > 0.0 && rank_tol < 1.0, ErrorKind::invalid_parameter, "rank_tol must lie in (0, 1)");
    require(convergence_tol > 0.0, ErrorKind::invalid_parameter, "convergence tolerance must be positive");
  }
};

struct SpectrumEntry {
  double k = 0.0;
  double inverse_condition = 0.0;             // 1/κ(T(k)) at the accepted k
  std::vector<NetworkFunction> modes;         // coefficient form, L²-orthonormal
  std::vector<Eigen::VectorXd> coefficients;  // (A_1, B_1, ..., A_M, B_M) per mode

  std::size_t multiplicity() const { return modes.size(); }
};

struct Spectrum {
  std::vector<SpectrumEntry> entries;  // ascending in k, zero mode excluded
  bool includes_zero_mode = false;
  NetworkFunction zero_mode;           // constant 1/√L when all nodes are Kirchhoff
  double k_max = 0.0;
  std::vector<std::string> warnings;

  std::size_t mode_count() const {
    std::size_t n = includes_zero_mode ? 1 : 0;
    for (const auto& e : entries) n += e.multiplicity();
    return n;
  }
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline NetworkFunction mode_from_coefficients(const MetricNetwork& net, double k,
                                              const Eigen::VectorXd& x) {
  std::vector<Sinusoid> parts(net.num_edges());
  for (std::size_t i = 0; i < net.num_edges(); ++i)
    parts[i] = {x[static_cast<Eigen::Index>(2 * i)], x[static_cast<Eigen::Index>(2 * i + 1)], k};
  return NetworkFunction::from_sinusoids(net, parts);
}

/// Modified Gram-Schmidt (two passes) under the network L² inner product.
inline std::vector<Eigen::VectorXd> orthonormalize(const MetricNetwork& net, double k,
                                                   std::vector<Eigen::VectorXd> basis) {
  auto dot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return inner_product(mode_from_coefficients(net, k, x), mode_from_coefficients(net, k, y));
  };
  std::vector<Eigen::VectorXd> out;
  for (auto& v : basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out) v -= dot(q, v) * q;
    double n = std::sqrt(std::max(dot(v, v), 0.0));
    require(n > 0.0, ErrorKind::internal_inconsistency,
            "nullspace vector has zero L2 norm at k = " + std::to_string(k));
    out.push_back(v / n);
  }
  return out;
}

/// Make the first clearly nonzero coefficient positive.
inline void fix_sign(Eigen::VectorXd& x) {
  double scale = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-8 * scale) {
      if (x[i] < 0.0) x = -x;
      return;
    }
  }
}

}  // namespace detail

/// The constant eigenfunction 1/√L (k = 0), valid for all-Kirchhoff networks.
inline NetworkFunction zero_mode(const MetricNetwork& net) {
  return NetworkFunction::uniform(net, Sinusoid{0.0, 1.0 / std::sqrt(net.total_length()), 0.0});
}

/// Orthonormal eigenmodes at one characteristic wavenumber.
inline SpectrumEntry extract_modes(const MetricNetwork& net, double k, const SpectralConfig& cfg) {
  auto t = assemble_coupling_matrix(net, k);
  Eigen::MatrixXd kernel = nullspace(t.entries, cfg.rank_tol, cfg.dense_svd_limit);
  require(kernel.cols() > 0, ErrorKind::internal_inconsistency,
          "empty nullspace at accepted wavenumber k = " + std::to_string(k));
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 0; j < kernel.cols(); ++j) basis.emplace_back(kernel.col(j));
  basis = detail::orthonormalize(net, k, std::move(basis));

  SpectrumEntry entry;
  entry.k = k;
  for (auto& x : basis) {
    detail::fix_sign(x);
    entry.modes.push_back(detail::mode_from_coefficients(net, k, x));
    entry.coefficients.push_back(std::move(x));
  }
  return entry;
}

/// Grid scan of 1/κ(T(k)), bounded refinement of every candidate, merge of
/// duplicates, nullspace extraction and L² orthonormalization.
inline Spectrum compute_spectrum(const MetricNetwork& net, const SpectralConfig& cfg) {
  cfg.validate();
  auto inv_cond = [&](double k) { return inverse_condition_number(net, k, cfg.dense_svd_limit); };

  // n_grid equidistant points on [0, k_max]; k = 0 itself is skipped since
  // the zero mode is added analytically
  std::vector<double> grid(static_cast<std::size_t>(cfg.n_grid - 1));
  std::vector<double> scan(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    grid[j] = cfg.k_max * static_cast<double>(j + 1) / static_cast<double>(cfg.n_grid - 1);
  detail::parallel_for(grid.size(), cfg.threads, [&](std::size_t j) { scan[j] = inv_cond(grid[j]); });

  std::vector<double> candidates;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(scan[j] < cfg.cutoff)) continue;
    if (cfg.local_minima_only && ((j > 0 && scan[j - 1] < scan[j]) || (j + 1 < grid.size() && scan[j + 1] < scan[j])))
      continue;
    candidates.push_back(grid[j]);
  }

  // T(k) becomes singular as k -> 0 because sin(kℓ) -> 0, so refinement
  // near zero can slide towards it. No positive characteristic wavenumber
  // lies below π/(2L) (an interval with one Dirichlet end is extremal), so
  // minima under half of that are dropped.
  const double k_floor = std::numbers::pi / (4.0 * net.total_length());
  std::vector<MinimizeResult> refined(candidates.size());
  detail::parallel_for(candidates.size(), cfg.threads, [&](std::size_t c) {
    double lo = std::max(candidates[c] - cfg.bracket_halfwidth, 0.5 * k_floor);
    double hi = candidates[c] + cfg.bracket_halfwidth;
    if (hi <= lo) {
      refined[c] = {0.0, 0.0, 0, false};  // whole bracket below the floor
      return;
    }
    refined[c] = minimize_bounded(inv_cond, lo, hi, cfg.convergence_tol);
  });

  Spectrum spec;
  spec.k_max = cfg.k_max;
  std::vector<std::pair<double, double>> roots;  // (k, 1/κ)
  for (std::size_t c = 0; c < refined.size(); ++c) {
    const auto& r = refined[c];
    if (r.value >= cfg.cutoff) {
      std::ostringstream msg;
      msg << "candidate k0 = " << candidates[c] << " discarded: minimum 1/kappa = " << r.value;
      spec.warnings.push_back(msg.str());
      continue;
    }
    if (r.x < k_floor || r.x > cfg.k_max) continue;
    if (r.value >= cfg.rank_tol) {
      // a shallow local minimum (near crossing of two branches), not a root
      std::ostringstream msg;
      msg << "candidate k0 = " << candidates[c] << " discarded: local minimum 1/kappa = " << r.value
          << " at k = " << r.x << " is above the rank tolerance";
      spec.warnings.push_back(msg.str());
      continue;
    }
    roots.emplace_back(r.x, r.value);
  }
  std::sort(roots.begin(), roots.end());

  // merge roots that agree to round_precision digits, keeping the sharpest
  const double scale = std::pow(10.0, cfg.round_precision);
  std::vector<std::pair<double, double>> distinct;
  for (const auto& r : roots) {
    if (!distinct.empty()) {
      auto& last = distinct.back();
      bool same_key = std::round(last.first * scale) == std::round(r.first * scale);
      if (same_key || r.first - last.first <= 1.0 / scale) {
        if (r.second < last.second) last = r;
        continue;
      }
    }
    distinct.push_back(r);
  }

  spec.entries.resize(distinct.size());
  detail::parallel_for(distinct.size(), cfg.threads, [&](std::size_t i) {
    spec.entries[i] = extract_modes(net, distinct[i].first, cfg);
    spec.entries[i].inverse_condition = distinct[i].second;
  });

  if (net.all_kirchhoff()) {
    spec.includes_zero_mode = true;
    spec.zero_mode = zero_mode(net);
  }
  return spec;
}

/// Number of eigenmodes with wavenumber ≤ k, counting the zero mode.
inline std::size_t counting_function(const Spectrum& spec, double k) {
  std::size_t n = (spec.includes_zero_mode && k >= 0.0) ? 1 : 0;
  for (const auto& e : spec.entries) {
    if (e.k > k) break;
    n += e.multiplicity();
  }
  return n;
}

struct WeylReport {
  double k = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t counted = 0;
  bool within_bounds = false;
};

/// Compare the counting function to Lk/π and its bounds [Lk/π - M, Lk/π + N].
inline WeylReport weyl_check(const Spectrum& spec, const MetricNetwork& net, double k) {
  WeylReport r;
  r.k = k;
  r.estimate = net.total_length() * k / std::numbers::pi;
  r.lower = r.estimate - static_cast<double>(net.num_edges());
  r.upper = r.estimate + static_cast<double>(net.num_nodes());
  r.counted = counting_function(spec, k);
  auto c = static_cast<double>(r.counted);
  r.within_bounds = r.lower <= c && c <= r.upper;
  return r;
}

struct SpectralExpansion {
  double zero_mode_overlap = 0.0;   // b_01
  std::vector<double> wavenumbers;  // one per mode
  std::vector<double> amplitudes;   // a_mn = -b_mn / k_m²
};

inline SpectralExpansion spectral_poisson_coefficients(const Spectrum& spec, const NetworkFunction& rho) {
  SpectralExpansion out;
  if (spec.includes_zero_mode) {
    out.zero_mode_overlap = inner_product(spec.zero_mode, rho);
    if (!(std::abs(out.zero_mode_overlap) < 1e-8)) {
      std::ostringstream msg;
      msg << "source is incompatible with the zero mode: |b_01| = " << std::abs(out.zero_mode_overlap);
      fail(ErrorKind::incompatible_source, msg.str());
    }
  }
  for (const auto& e : spec.entries) {
    for (const auto& f : e.modes) {
      out.wavenumbers.push_back(e.k);
      out.amplitudes.push_back(-inner_product(f, rho) / (e.k * e.k));
    }
  }
  return out;
}

/// φ = Σ a_mn f^{mn} sampled on `n_per_edge` intervals per edge.
inline NetworkFunction solve_poisson_spectral(const MetricNetwork& net, const Spectrum& spec,
                                              const NetworkFunction& rho, std::span<const int> n_per_edge) {
  require(rho.size() == net.num_edges(), ErrorKind::incompatible_operands,
          "source does not cover the network");
  require(n_per_edge.size() == net.num_edges(), ErrorKind::incompatible_operands,
          "need one grid size per edge");
  auto expansion = spectral_poisson_coefficients(spec, rho);

  double largest = 0.0;
  for (double a : expansion.amplitudes) largest = std::max(largest, std::abs(a));
  std::size_t mode = 0;
  std::vector<std::size_t> kept;
  for (const auto& e : spec.entries) {
    for (std::size_t n = 0; n < e.modes.size(); ++n, ++mode) {
      // terms below 1e-15 of the largest amplitude cannot change the sum
      if (std::abs(expansion.amplitudes[mode]) > 1e-15 * largest) kept.push_back(mode);
    }
  }

  std::vector<const NetworkFunction*> modes;
  for (const auto& e : spec.entries)
    for (const auto& f : e.modes) modes.push_back(&f);

  NetworkFunction phi;
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    const auto& edge = net.edges()[i];
    int n = n_per_edge[i];
    require(n >= 1, ErrorKind::invalid_parameter, "grid needs at least one interval");
    Samples s;
    s.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
    double h = edge.length / n;
    for (std::size_t m : kept) {
      const auto& sh = (*modes[m])[i].sinusoid();
      double a = expansion.amplitudes[m];
      for (int j = 0; j <= n; ++j) s.values[static_cast<std::size_t>(j)] += a * sh(j * h);
    }
    phi.parts.push_back({edge.id, edge.length, std::move(s)});
  }
  return phi;
}

inline NetworkFunction solve_poisson_spectral(const MetricNetwork& net, const Spectrum& spec,
                                              const NetworkFunction& rho, int n_per_edge) {
  std::vector<int> n(net.num_edges(), n_per_edge);
  return solve_poisson_spectral(net, spec, rho, n);
}

}  // namespace metricnet

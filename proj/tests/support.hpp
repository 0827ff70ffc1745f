#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "metricnet/metricnet.hpp"

namespace testing_support {

inline constexpr double pi = std::numbers::pi;

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Sine of the largest principal angle between the column spans of a and b.
inline double subspace_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
  Eigen::MatrixXd ua = qa.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd ub = qb.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::MatrixXd resid = ub - ua * (ua.transpose() * ub);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid);
  return svd.singularValues()(0);
}

/// Closed-form eigenmodes of the equal-length star as coefficient vectors
/// (A_1, B_1, ..., A_M, B_M): every mode is B_i cos(kx) with the leaf at x = 0.
/// Odd m: B sums to zero (dimension M - 1). Even m: all B equal.
inline Eigen::MatrixXd star_mode_basis(int num_edges, int m) {
  auto M = static_cast<Eigen::Index>(num_edges);
  if (m % 2 == 0) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * M, 1);
    for (Eigen::Index i = 0; i < M; ++i) v(2 * i + 1, 0) = 1.0;
    return v;
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * M, M - 1);
  for (Eigen::Index j = 0; j + 1 < M; ++j) {
    v(1, j) = 1.0;
    v(2 * (j + 1) + 1, j) = -1.0;
  }
  return v;
}

/// Wavenumbers πm/(2ℓ) in (0, k_max] with multiplicity M-1 (odd m) or 1 (even m).
inline std::vector<double> star_wavenumbers(int num_edges, double length, double k_max) {
  std::vector<double> out;
  for (int m = 1; pi * m / (2.0 * length) <= k_max; ++m) {
    int mult = (m % 2) ? num_edges - 1 : 1;
    for (int c = 0; c < mult; ++c) out.push_back(pi * m / (2.0 * length));
  }
  return out;
}

/// Star with the hub at the head of every edge and arbitrary edge lengths.
inline metricnet::MetricNetwork star_with_lengths(const std::vector<double>& lengths) {
  using namespace metricnet;
  std::vector<Node> nodes{{0, BoundaryCondition::kirchhoff, std::nullopt}};
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    int leaf = static_cast<int>(i) + 1;
    nodes.push_back({leaf, BoundaryCondition::kirchhoff, std::nullopt});
    edges.push_back({static_cast<int>(i), leaf, 0, lengths[i], std::nullopt});
  }
  return MetricNetwork(std::move(nodes), std::move(edges));
}

/// Unit-length edges carrying ρ = cos(2πx); φ = -cos(2πx)/(4π²) is the
/// zero-mean Poisson solution on any network of unit edges.
inline double unit_poisson_exact(double x) { return -std::cos(2.0 * pi * x) / (4.0 * pi * pi); }

/// Sampled scalar coefficients A, B of a mode set as columns.
inline Eigen::MatrixXd coefficient_matrix(const std::vector<Eigen::VectorXd>& cs) {
  Eigen::MatrixXd out(cs.front().size(), static_cast<Eigen::Index>(cs.size()));
  for (std::size_t j = 0; j < cs.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = cs[j];
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("metricnet-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace testing_support

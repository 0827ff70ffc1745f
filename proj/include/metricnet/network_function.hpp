#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "metricnet/error.hpp"
#include "metricnet/network.hpp"

namespace metricnet {

/// A sin(k x) + B cos(k x) on one edge.
struct Sinusoid {
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;

  double operator()(double x) const { return a * std::sin(k * x) + b * std::cos(k * x); }
};

/// Values at x_j = j h, j = 0..N, with h = length / N.
struct Samples {
  std::vector<double> values;

  std::size_t intervals() const { return values.empty() ? 0 : values.size() - 1; }
};

struct EdgeFunction {
  int edge_id = 0;
  double length = 1.0;
  std::variant<Sinusoid, Samples> repr;

  bool is_sampled() const { return std::holds_alternative<Samples>(repr); }
  const Sinusoid& sinusoid() const { return std::get<Sinusoid>(repr); }
  const Samples& samples() const { return std::get<Samples>(repr); }

  double step() const { return length / static_cast<double>(samples().intervals()); }

  /// Evaluate anywhere in [0, length]; sampled functions interpolate linearly.
  double operator()(double x) const {
    if (!is_sampled()) return sinusoid()(x);
    const auto& v = samples().values;
    double h = step();
    double pos = std::clamp(x / h, 0.0, static_cast<double>(v.size() - 1));
    auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= v.size()) return v.back();
    double w = pos - static_cast<double>(j);
    return (1.0 - w) * v[j] + w * v[j + 1];
  }
};

/// One function per edge, in the network's edge order.
struct NetworkFunction {
  std::vector<EdgeFunction> parts;

  std::size_t size() const { return parts.size(); }
  const EdgeFunction& operator[](std::size_t i) const { return parts[i]; }
  EdgeFunction& operator[](std::size_t i) { return parts[i]; }

  static NetworkFunction from_sinusoids(const MetricNetwork& net, std::span<const Sinusoid> s) {
    require(s.size() == net.num_edges(), ErrorKind::incompatible_operands,
            "need one sinusoid per edge");
    NetworkFunction f;
    for (std::size_t i = 0; i < net.num_edges(); ++i)
      f.parts.push_back({net.edges()[i].id, net.edges()[i].length, s[i]});
    return f;
  }

  /// Same sinusoid shape on every edge.
  static NetworkFunction uniform(const MetricNetwork& net, Sinusoid s) {
    std::vector<Sinusoid> all(net.num_edges(), s);
    return from_sinusoids(net, all);
  }

  /// Sample `fn(edge_index, x)` on a uniform grid of `n` intervals per edge.
  static NetworkFunction sample(const MetricNetwork& net, std::span<const int> n,
                                const std::function<double(std::size_t, double)>& fn) {
    require(n.size() == net.num_edges(), ErrorKind::incompatible_operands,
            "need one grid size per edge");
    NetworkFunction f;
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
      require(n[i] >= 1, ErrorKind::invalid_parameter, "grid needs at least one interval");
      const auto& e = net.edges()[i];
      Samples s;
      s.values.resize(static_cast<std::size_t>(n[i]) + 1);
      double h = e.length / n[i];
      for (int j = 0; j <= n[i]; ++j) s.values[j] = fn(i, j * h);
      f.parts.push_back({e.id, e.length, std::move(s)});
    }
    return f;
  }

  static NetworkFunction sample(const MetricNetwork& net, int n,
                                const std::function<double(std::size_t, double)>& fn) {
    std::vector<int> all(net.num_edges(), n);
    return sample(net, all, fn);
  }

  /// Resample every edge (coefficient or sampled form) onto `n` intervals.
  NetworkFunction sampled(std::span<const int> n) const {
    require(n.size() == parts.size(), ErrorKind::incompatible_operands,
            "need one grid size per edge");
    NetworkFunction out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& p = parts[i];
      if (p.is_sampled() && p.samples().intervals() == static_cast<std::size_t>(n[i])) {
        out.parts.push_back(p);
        continue;
      }
      Samples s;
      s.values.resize(static_cast<std::size_t>(n[i]) + 1);
      double h = p.length / n[i];
      for (int j = 0; j <= n[i]; ++j) s.values[j] = p(j * h);
      out.parts.push_back({p.edge_id, p.length, std::move(s)});
    }
    return out;
  }
};

namespace detail {

/// ∫_0^l cos(w x) dx, stable for small w.
inline double integral_cos(double w, double l) {
  double z = w * l;
  if (std::abs(z) < 1e-8) return l * (1.0 - z * z / 6.0);
  return std::sin(z) / w;
}

/// ∫_0^l sin(w x) dx, stable for small w.
inline double integral_sin(double w, double l) {
  double z = w * l;
  if (std::abs(z) < 1e-8) return l * z / 2.0;
  double s = std::sin(z / 2.0);
  return 2.0 * s * s / w;
}

inline double integrate_product(const Sinusoid& f, const Sinusoid& g, double l) {
  double dm = f.k - g.k;
  double sp = f.k + g.k;
  double cc_minus = integral_cos(dm, l), cc_plus = integral_cos(sp, l);
  double ss_minus = integral_sin(dm, l), ss_plus = integral_sin(sp, l);
  // sin a sin b = (cos(a-b) - cos(a+b)) / 2, etc.
  double sin_sin = 0.5 * (cc_minus - cc_plus);
  double cos_cos = 0.5 * (cc_minus + cc_plus);
  double sin_cos = 0.5 * (ss_plus + ss_minus);   // sin(f.k x) cos(g.k x)
  double cos_sin = 0.5 * (ss_plus - ss_minus);   // cos(f.k x) sin(g.k x)
  return f.a * g.a * sin_sin + f.b * g.b * cos_cos + f.a * g.b * sin_cos + f.b * g.a * cos_sin;
}

}  // namespace detail

/// Composite Simpson on a uniform grid; an odd panel count closes with the
/// 3/8 rule over the last three panels.
inline double simpson(std::span<const double> y, double h) {
  std::size_t n = y.size() == 0 ? 0 : y.size() - 1;
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (y[0] + y[1]);
  std::size_t even = (n % 2 == 0) ? n : n - 3;
  double sum = 0.0;
  if (even > 0) {
    double s = y[0] + y[even];
    for (std::size_t j = 1; j < even; ++j) s += (j % 2 ? 4.0 : 2.0) * y[j];
    sum = s * h / 3.0;
  }
  if (even != n) {
    sum += 3.0 * h / 8.0 * (y[n - 3] + 3.0 * y[n - 2] + 3.0 * y[n - 1] + y[n]);
  }
  return sum;
}

/// ⟨f, g⟩ on one edge.
inline double inner_product(const EdgeFunction& f, const EdgeFunction& g) {
  require(f.edge_id == g.edge_id && f.length == g.length, ErrorKind::incompatible_operands,
          "edge functions live on different edges");
  if (!f.is_sampled() && !g.is_sampled())
    return detail::integrate_product(f.sinusoid(), g.sinusoid(), f.length);

  std::size_t n = 0;
  if (f.is_sampled() && g.is_sampled()) {
    require(f.samples().intervals() == g.samples().intervals(), ErrorKind::incompatible_operands,
            "sampled functions use different grids on edge " + std::to_string(f.edge_id));
    n = f.samples().intervals();
  } else {
    n = f.is_sampled() ? f.samples().intervals() : g.samples().intervals();
  }
  double h = f.length / static_cast<double>(n);
  std::vector<double> prod(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    double fv = f.is_sampled() ? f.samples().values[j] : f.sinusoid()(j * h);
    double gv = g.is_sampled() ? g.samples().values[j] : g.sinusoid()(j * h);
    prod[j] = fv * gv;
  }
  return simpson(prod, h);
}

/// L² inner product over the whole network.
inline double inner_product(const NetworkFunction& f, const NetworkFunction& g) {
  require(f.size() == g.size(), ErrorKind::incompatible_operands,
          "functions cover different edge sets");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += inner_product(f[i], g[i]);
  return sum;
}

inline double norm(const NetworkFunction& f) { return std::sqrt(inner_product(f, f)); }

}  // namespace metricnet

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "metricnet/error.hpp"

namespace metricnet {

using Partition = std::vector<int>;  // parts in non-increasing order

/// All partitions of n, lexicographically descending ((n) first, (1^n) last).
inline std::vector<Partition> partitions(int n) {
  require(n >= 0, ErrorKind::invalid_parameter, "cannot partition a negative number");
  std::vector<Partition> out;
  Partition cur;
  std::function<void(int, int)> rec = [&](int rest, int largest) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int p = std::min(rest, largest); p >= 1; --p) {
      cur.push_back(p);
      rec(rest - p, p);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

inline std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Irreducible character χ^λ on the class of cycle type μ by the
/// Murnaghan–Nakayama rule, removing rim hooks on the beta-set of λ.
inline int murnaghan_nakayama(const Partition& lambda, const Partition& mu) {
  int n = std::accumulate(lambda.begin(), lambda.end(), 0);
  require(n == std::accumulate(mu.begin(), mu.end(), 0), ErrorKind::invalid_parameter,
          "partitions of different size");
  auto len = static_cast<int>(lambda.size());
  std::vector<int> beta(lambda.size());
  for (int i = 0; i < len; ++i) beta[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)] + (len - 1 - i);

  std::function<int(std::vector<int>&, std::size_t)> rec = [&](std::vector<int>& b, std::size_t part) -> int {
    if (part == mu.size()) return 1;
    int r = mu[part];
    int total = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      int from = b[i], to = from - r;
      if (to < 0 || std::find(b.begin(), b.end(), to) != b.end()) continue;
      int crossed = 0;
      for (int v : b)
        if (v > to && v < from) ++crossed;
      b[i] = to;
      total += (crossed % 2 ? -1 : 1) * rec(b, part + 1);
      b[i] = from;
    }
    return total;
  };
  return rec(beta, 0);
}

struct ConjugacyClass {
  Partition cycle_type;
  std::int64_t size = 0;
  std::string representative;  // cycle notation on 1..n, "()" for the identity
};

struct Irrep {
  std::string name;
  Partition shape;
  int dimension = 0;
  std::vector<int> characters;  // one per class, in table class order
};

struct CharacterTable {
  int n = 0;
  std::vector<ConjugacyClass> classes;
  std::vector<Irrep> irreps;

  std::int64_t group_order() const { return factorial(n); }
};

namespace detail {

inline void check_degree(int n) {
  require(n >= 2 && n <= 8, ErrorKind::invalid_parameter, "symmetric groups are supported for 2 <= n <= 8");
}

inline std::string cycle_notation(const Partition& mu) {
  std::string s;
  int next = 1;
  for (int len : mu) {
    if (len == 1) break;
    s += '(';
    for (int j = 0; j < len; ++j) {
      if (j) s += ',';
      s += std::to_string(next++);
    }
    s += ')';
  }
  return s.empty() ? "()" : s;
}

inline std::string shape_name(const Partition& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + "]";
}

}  // namespace detail

/// n!/Π j^{m_j} m_j!
inline std::int64_t class_size(const Partition& mu) {
  int n = std::accumulate(mu.begin(), mu.end(), 0);
  std::int64_t denom = 1;
  for (std::size_t i = 0; i < mu.size();) {
    std::size_t j = i;
    while (j < mu.size() && mu[j] == mu[i]) ++j;
    auto m = static_cast<int>(j - i);
    for (int r = 0; r < m; ++r) denom *= mu[i];
    denom *= factorial(m);
    i = j;
  }
  return factorial(n) / denom;
}

/// Classes ordered by n - (number of cycles), then by longest cycle
/// descending: for n = 4 this gives (1⁴), (2,1²), (3,1), (2²), (4). Irreps
/// list trivial, sign, then the remaining shapes lexicographically descending.
inline CharacterTable character_table(int n) {
  detail::check_degree(n);
  CharacterTable t;
  t.n = n;
  auto shapes = partitions(n);

  auto types = shapes;
  std::stable_sort(types.begin(), types.end(), [n](const Partition& a, const Partition& b) {
    auto ra = n - static_cast<int>(a.size()), rb = n - static_cast<int>(b.size());
    if (ra != rb) return ra < rb;
    return a.front() > b.front();
  });
  for (const auto& mu : types) t.classes.push_back({mu, class_size(mu), detail::cycle_notation(mu)});

  std::vector<Partition> order;
  order.push_back(shapes.front());
  order.push_back(shapes.back());
  for (std::size_t i = 1; i + 1 < shapes.size(); ++i) order.push_back(shapes[i]);
  for (const auto& lambda : order) {
    Irrep ir;
    ir.shape = lambda;
    if (lambda.size() == 1) ir.name = "trivial";
    else if (lambda.front() == 1) ir.name = "sign";
    else if (lambda.size() == 2 && lambda[1] == 1) ir.name = "standard";
    else ir.name = detail::shape_name(lambda);
    for (const auto& c : t.classes) ir.characters.push_back(murnaghan_nakayama(lambda, c.cycle_type));
    ir.dimension = ir.characters.front();
    t.irreps.push_back(std::move(ir));
  }
  return t;
}

/// Character of the natural permutation representation: fixed points per class.
inline std::vector<int> permutation_character(const CharacterTable& t) {
  std::vector<int> chi;
  for (const auto& c : t.classes)
    chi.push_back(static_cast<int>(std::count(c.cycle_type.begin(), c.cycle_type.end(), 1)));
  return chi;
}

inline std::vector<int> permutation_character(int n) { return permutation_character(character_table(n)); }

struct RepDecomposition {
  std::vector<int> coefficients;      // c_α per irrep, in table order
  std::vector<int> source_character;  // χ per class
  int dimension = 0;                  // Σ c_α d_α
};

/// c_α = (1/n!) Σ_β n_β χ_β χ^{(α)}_β, in exact integer arithmetic.
inline RepDecomposition decompose(const std::vector<int>& character, const CharacterTable& t) {
  require(character.size() == t.classes.size(), ErrorKind::incompatible_operands,
          "character has " + std::to_string(character.size()) + " entries, table has " +
              std::to_string(t.classes.size()) + " classes");
  RepDecomposition d;
  d.source_character = character;
  for (const auto& ir : t.irreps) {
    std::int64_t sum = 0;
    for (std::size_t b = 0; b < t.classes.size(); ++b)
      sum += t.classes[b].size * character[b] * ir.characters[b];
    if (sum % t.group_order() != 0 || sum < 0)
      fail(ErrorKind::invalid_character, "input is not a character: multiplicity of " + ir.name + " is " +
                                             std::to_string(static_cast<double>(sum) / static_cast<double>(t.group_order())));
    d.coefficients.push_back(static_cast<int>(sum / t.group_order()));
    d.dimension += d.coefficients.back() * ir.dimension;
  }
  require(d.dimension == character.front(), ErrorKind::invalid_character,
          "decomposition dimension does not match the character at the identity");
  return d;
}

/// Irrep dimensions in the edge-permutation representation of an M-edge
/// star, one entry per copy, ascending.
inline std::vector<int> predict_star_degeneracies(int num_edges) {
  auto t = character_table(num_edges);
  auto d = decompose(permutation_character(t), t);
  std::vector<int> out;
  for (std::size_t a = 0; a < t.irreps.size(); ++a)
    for (int c = 0; c < d.coefficients[a]; ++c) out.push_back(t.irreps[a].dimension);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace metricnet

#include <gtest/gtest.h>

#include "support.hpp"

using namespace metricnet;
using testing_support::pi;

namespace {

SpectralConfig config(double k_max, int n_grid) {
  SpectralConfig cfg;
  cfg.k_max = k_max;
  cfg.n_grid = n_grid;
  return cfg;
}

std::vector<double> flat_wavenumbers(const Spectrum& spec) {
  std::vector<double> ks;
  for (const auto& e : spec.entries)
    for (std::size_t n = 0; n < e.multiplicity(); ++n) ks.push_back(e.k);
  return ks;
}

double l2_distance(const NetworkFunction& f, const NetworkFunction& g) {
  double ff = inner_product(f, f), gg = inner_product(g, g), fg = inner_product(f, g);
  return std::sqrt(std::max(0.0, ff + gg - 2.0 * fg));
}

/// Roots of the star secular function by sign changes and bisection.
std::vector<double> secular_roots(const std::vector<double>& lengths, double k_max) {
  std::vector<double> roots;
  double step = 1e-3;
  auto f = [&](double k) { return star_secular_determinant(k, lengths); };
  for (double a = step; a + step <= k_max; a += step) {
    double lo = a, hi = a + step;
    if (f(lo) * f(hi) > 0.0) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      double mid = 0.5 * (lo + hi);
      (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

}  // namespace

TEST(Spectral, KirchhoffIntervalClosedForm) {
  auto net = build_interval(1.0);
  auto spec = compute_spectrum(net, config(64.0, 8000));
  ASSERT_TRUE(spec.includes_zero_mode);
  ASSERT_GE(spec.entries.size(), 20u);
  for (int m = 1; m <= 20; ++m) {
    const auto& e = spec.entries[m - 1];
    EXPECT_NEAR(e.k, pi * m, 1e-8);
    ASSERT_EQ(e.multiplicity(), 1u);
    auto exact = NetworkFunction::uniform(net, Sinusoid{0.0, std::sqrt(2.0), pi * m});
    double sign = inner_product(e.modes[0], exact) < 0 ? -1.0 : 1.0;
    auto flipped = e.modes[0];
    std::get<Sinusoid>(flipped[0].repr).a *= sign;
    std::get<Sinusoid>(flipped[0].repr).b *= sign;
    EXPECT_LT(l2_distance(flipped, exact), 1e-6);
  }
}

TEST(Spectral, DirichletIntervalClosedForm) {
  auto net = build_interval(1.0, BoundaryCondition::dirichlet);
  auto spec = compute_spectrum(net, config(64.0, 8000));
  EXPECT_FALSE(spec.includes_zero_mode);
  ASSERT_GE(spec.entries.size(), 20u);
  for (int m = 1; m <= 20; ++m) {
    const auto& e = spec.entries[m - 1];
    EXPECT_NEAR(e.k, pi * m, 1e-8);
    auto exact = NetworkFunction::uniform(net, Sinusoid{std::sqrt(2.0), 0.0, pi * m});
    EXPECT_NEAR(std::abs(inner_product(e.modes[0], exact)), 1.0, 1e-10);
  }
}

TEST(Spectral, IntervalLengthScalesWavenumbers) {
  auto spec = compute_spectrum(build_interval(2.0), config(10.0, 400));
  ASSERT_EQ(spec.entries.size(), 6u);
  for (int m = 1; m <= 6; ++m) EXPECT_NEAR(spec.entries[m - 1].k, pi * m / 2.0, 1e-8);
  EXPECT_NEAR(spec.zero_mode[0].sinusoid().b, 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Spectral, StarWavenumbersAndMultiplicities) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(20.0, 400));
  auto expected = testing_support::star_wavenumbers(3, 1.0, 20.0);
  auto got = flat_wavenumbers(spec);
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-8);
  for (std::size_t m = 1; m <= spec.entries.size(); ++m)
    EXPECT_EQ(spec.entries[m - 1].multiplicity(), m % 2 ? 2u : 1u);
}

TEST(Spectral, StarModesSpanAnalyticSubspace) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(20.0, 400));
  for (std::size_t m = 1; m <= spec.entries.size(); ++m) {
    auto computed = testing_support::coefficient_matrix(spec.entries[m - 1].coefficients);
    auto analytic = testing_support::star_mode_basis(3, static_cast<int>(m));
    ASSERT_EQ(computed.cols(), analytic.cols());
    EXPECT_LT(testing_support::subspace_gap(analytic, computed), 1e-6) << "m = " << m;
  }
}

TEST(Spectral, ModesAreOrthonormalAndInTheKernel) {
  for (const auto& net : {build_star(4, 1.0), build_hexagonal_lattice(1, 2), build_random_line_network(6, 1.0, 29)}) {
    auto spec = compute_spectrum(net, config(15.0, 800));
    std::vector<NetworkFunction> all;
    if (spec.includes_zero_mode) all.push_back(spec.zero_mode);
    for (const auto& e : spec.entries) {
      auto t = Eigen::MatrixXd(assemble_coupling_matrix(net, e.k).entries);
      for (const auto& x : e.coefficients) EXPECT_LT((t * x).norm() / x.norm(), 1e-6);
      for (const auto& f : e.modes) all.push_back(f);
    }
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a; b < all.size(); ++b)
        EXPECT_NEAR(inner_product(all[a], all[b]), a == b ? 1.0 : 0.0, 1e-8) << a << ", " << b;
  }
}

TEST(Spectral, UnequalStarMatchesSecularRoots) {
  std::vector<double> lengths{0.71, 1.33, 2.17, 0.45};
  auto net = testing_support::star_with_lengths(lengths);
  auto spec = compute_spectrum(net, config(15.0, 3000));
  auto expected = secular_roots(lengths, 15.0);
  auto got = flat_wavenumbers(spec);
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-8);
}

TEST(Spectral, SplittingAnEdgeKeepsTheSpectrum) {
  auto net = build_star(3, 1.0);
  auto base = flat_wavenumbers(compute_spectrum(net, config(20.0, 400)));
  for (double fraction : {0.3, 0.5}) {
    auto split = flat_wavenumbers(compute_spectrum(split_edge(net, 2, fraction), config(20.0, 400)));
    ASSERT_EQ(split.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(split[i], base[i], 1e-8);
  }
}

TEST(Spectral, ThreadsDoNotChangeTheResult) {
  auto net = build_hexagonal_lattice(1, 2);
  auto cfg = config(12.0, 600);
  auto serial = compute_spectrum(net, cfg);
  cfg.threads = 3;
  auto parallel = compute_spectrum(net, cfg);
  ASSERT_EQ(serial.entries.size(), parallel.entries.size());
  for (std::size_t i = 0; i < serial.entries.size(); ++i) {
    EXPECT_EQ(serial.entries[i].k, parallel.entries[i].k);
    EXPECT_EQ(serial.entries[i].multiplicity(), parallel.entries[i].multiplicity());
  }
}

TEST(Spectral, LocalMinimaOptionFindsTheSameRoots) {
  auto net = build_hexagonal_lattice(1, 2);
  auto cfg = config(12.0, 600);
  auto all = flat_wavenumbers(compute_spectrum(net, cfg));
  cfg.local_minima_only = true;
  auto minima = flat_wavenumbers(compute_spectrum(net, cfg));
  ASSERT_EQ(all.size(), minima.size());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(all[i], minima[i], 1e-8);
}

TEST(Spectral, ConfigValidation) {
  auto net = build_interval(1.0);
  auto bad = [&](auto mutate) {
    SpectralConfig cfg;
    mutate(cfg);
    try {
      compute_spectrum(net, cfg);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::invalid_parameter;
    }
    return false;
  };
  EXPECT_TRUE(bad([](SpectralConfig& c) { c.k_max = -1.0; }));
  EXPECT_TRUE(bad([](SpectralConfig& c) { c.n_grid = 1; }));
  EXPECT_TRUE(bad([](SpectralConfig& c) { c.cutoff = 2.0; }));
  EXPECT_TRUE(bad([](SpectralConfig& c) { c.round_precision = 0; }));
}

TEST(Weyl, StarCountAtTen) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(20.0, 400));
  // oracle: πm/2 ≤ 10 for m = 1..6, multiplicities 2,1,2,1,2,1, plus the zero mode
  std::size_t oracle = 1;
  for (double k : testing_support::star_wavenumbers(3, 1.0, 10.0)) oracle += k <= 10.0;
  auto r = weyl_check(spec, net, 10.0);
  EXPECT_EQ(oracle, 10u);
  EXPECT_EQ(r.counted, oracle);
  EXPECT_NEAR(r.estimate, 30.0 / pi, 1e-12);
  EXPECT_NEAR(r.lower, 30.0 / pi - 3.0, 1e-12);
  EXPECT_NEAR(r.upper, 30.0 / pi + 4.0, 1e-12);
  EXPECT_TRUE(r.within_bounds);
}

TEST(Weyl, CountAtZeroIsTheZeroMode) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(5.0, 200));
  EXPECT_EQ(counting_function(spec, 0.0), 1u);
  EXPECT_TRUE(weyl_check(spec, net, 0.0).within_bounds);
}

TEST(Weyl, BoundsHoldAcrossNetworks) {
  for (const auto& net : {build_star(5, 1.0), build_hexagonal_lattice(1, 2), build_random_line_network(6, 1.0, 29)}) {
    auto spec = compute_spectrum(net, config(15.0, 800));
    for (double k = 0.0; k <= 15.0; k += 0.01) EXPECT_TRUE(weyl_check(spec, net, k).within_bounds) << k;
  }
}

TEST(SpectralPoisson, StarCosineSource) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(20.0, 400));
  auto rho = NetworkFunction::uniform(net, Sinusoid{0.0, 1.0, 2.0 * pi});
  auto phi = solve_poisson_spectral(net, spec, rho, 100);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = phi[i].samples().values;
    for (std::size_t j = 0; j < v.size(); ++j)
      EXPECT_NEAR(v[j], testing_support::unit_poisson_exact(static_cast<double>(j) * 0.01), 1e-12);
  }
}

TEST(SpectralPoisson, EigenmodeSourceGivesScaledMode) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(20.0, 400));
  // even m = 2 mode, k = π: all edges carry the same cosine
  auto f = NetworkFunction::uniform(net, Sinusoid{0.0, std::sqrt(2.0 / 3.0), pi});
  auto phi = solve_poisson_spectral(net, spec, f, 50);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = phi[i].samples().values;
    for (std::size_t j = 0; j < v.size(); ++j)
      EXPECT_NEAR(v[j], -f[i](static_cast<double>(j) / 50.0) / (pi * pi), 1e-12);
  }
}

TEST(SpectralPoisson, ZeroSourceGivesZero) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(10.0, 200));
  auto phi = solve_poisson_spectral(net, spec, NetworkFunction::uniform(net, Sinusoid{}), 10);
  for (const auto& p : phi.parts)
    for (double v : p.samples().values) EXPECT_EQ(v, 0.0);
}

TEST(SpectralPoisson, IncompatibleSourceIsRejected) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(10.0, 200));
  auto constant = NetworkFunction::uniform(net, Sinusoid{0.0, 1.0, 0.0});
  try {
    solve_poisson_spectral(net, spec, constant, 10);
    FAIL() << "expected incompatible_source";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incompatible_source);
    EXPECT_NE(std::string(e.what()).find("b_01"), std::string::npos);
  }
}

TEST(SpectralIo, JsonRoundTrip) {
  auto net = build_star(3, 1.0);
  auto spec = compute_spectrum(net, config(10.0, 200));
  auto back = spectrum_from_json(spectrum_to_json(net, spec), net);
  EXPECT_EQ(back.includes_zero_mode, spec.includes_zero_mode);
  ASSERT_EQ(back.entries.size(), spec.entries.size());
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].k, spec.entries[i].k);
    ASSERT_EQ(back.entries[i].multiplicity(), spec.entries[i].multiplicity());
    for (std::size_t n = 0; n < spec.entries[i].multiplicity(); ++n)
      EXPECT_EQ(back.entries[i].coefficients[n], spec.entries[i].coefficients[n]);
  }
}

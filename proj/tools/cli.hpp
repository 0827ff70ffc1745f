#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "metricnet/metricnet.hpp"

namespace metricnet::cli {

// Exit codes. Library failures map one-to-one from ErrorKind.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_unexpected = 70;

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return 3;
    case ErrorKind::invalid_parameter: return 10;
    case ErrorKind::invalid_network: return 11;
    case ErrorKind::empty_network: return 12;
    case ErrorKind::incompatible_operands: return 13;
    case ErrorKind::degenerate_matrix: return 14;
    case ErrorKind::internal_inconsistency: return 15;
    case ErrorKind::incompatible_source: return 16;
    case ErrorKind::numerical_failure: return 17;
    case ErrorKind::stability: return 18;
    case ErrorKind::invalid_character: return 19;
  }
  return exit_unexpected;
}

inline const char* exit_code_help =
    "Exit codes:\n"
    "  0  success\n"
    "  2  bad command line\n"
    "  3  file could not be read, parsed or written\n"
    "  10 invalid parameter        11 invalid network\n"
    "  12 empty network            13 incompatible operands\n"
    "  14 degenerate matrix        15 internal inconsistency\n"
    "  16 incompatible source      17 numerical failure\n"
    "  18 stability (CFL) error    19 invalid character\n"
    "  70 unexpected internal error\n";

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point start) {
  return std::chrono::duration<double>(clock::now() - start).count();
}

/// Writes to the -o path, or to `out` when no path was given.
inline void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty()) out << text;
  else write_text_file(path, text);
}

inline void write_timing(const std::string& path, const json& j) {
  if (!path.empty()) write_text_file(path + ".timing.json", j.dump(2) + "\n");
}

/// Named source or sampled CSV file, multiplied by `scale`.
inline NetworkFunction make_source(const std::string& name, const MetricNetwork& net, double scale) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (name == "zero") return NetworkFunction::uniform(net, Sinusoid{0.0, 0.0, 0.0});
  if (name == "cos2pi") return NetworkFunction::uniform(net, Sinusoid{0.0, scale, two_pi});
  if (name == "cos2pi-scaled") {
    std::vector<Sinusoid> parts;
    for (const auto& e : net.edges()) parts.push_back({0.0, scale / (e.length * e.length), two_pi / e.length});
    return NetworkFunction::from_sinusoids(net, parts);
  }
  auto f = load_solution_csv(name, net);
  for (auto& p : f.parts)
    for (auto& v : std::get<Samples>(p.repr).values) v *= scale;
  return f;
}

struct SpectrumFlags {
  double k_max = 100.0;
  int grid = 2000;
  double cutoff = 1e-2;
  double bracket = 0.1;
  double rank_tol = 1e-8;
  double tol = 1e-14;
  bool local_minima = false;

  void add(CLI::App* app) {
    app->add_option("--k-max", k_max, "Scan upper bound")->capture_default_str();
    app->add_option("--grid", grid, "Equidistant scan points on [0, k-max]")->capture_default_str();
    app->add_option("--cutoff", cutoff, "Candidate threshold on 1/kappa")->capture_default_str();
    app->add_option("--bracket", bracket, "Refinement half-width")->capture_default_str();
    app->add_option("--rank-tol", rank_tol, "Nullspace threshold relative to sigma_max")->capture_default_str();
    app->add_option("--tol", tol, "Absolute tolerance of the minimizer")->capture_default_str();
    app->add_flag("--local-minima", local_minima, "Refine only local minima of the scan");
  }

  SpectralConfig config(int precision, unsigned threads) const {
    SpectralConfig c;
    c.k_max = k_max;
    c.n_grid = grid;
    c.cutoff = cutoff;
    c.bracket_halfwidth = bracket;
    c.round_precision = precision;
    c.rank_tol = rank_tol;
    c.convergence_tol = tol;
    c.threads = threads;
    c.local_minima_only = local_minima;
    return c;
  }
};

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      fail(ErrorKind::invalid_parameter, "not a number: " + item);
    }
  }
  return out;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Spectra and linear PDEs on metric networks"};
  app.footer(exit_code_help);
  app.fallthrough();  // global flags are accepted after the subcommand too
  app.require_subcommand(1);

  std::string out_path;
  std::uint64_t seed = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  int precision = 8;
  app.add_option("-o,--out", out_path, "Output file (stdout when omitted)");
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads for the spectral scan")->check(CLI::PositiveNumber);
  app.add_option("--precision", precision, "Digits used to merge duplicate wavenumbers")->capture_default_str();

  std::function<void()> action;

  // net
  auto* net_cmd = app.add_subcommand("net", "Generate a network as JSON");
  net_cmd->require_subcommand(1);
  double length = 1.0;
  bool dirichlet = false;
  auto* net_interval = net_cmd->add_subcommand("interval", "Single edge");
  net_interval->add_option("--length", length)->capture_default_str();
  net_interval->add_flag("--dirichlet", dirichlet, "Dirichlet conditions at both ends");
  net_interval->callback([&] {
    action = [&] {
      auto net = build_interval(length, dirichlet ? BoundaryCondition::dirichlet : BoundaryCondition::kirchhoff);
      detail::emit(out_path, out, network_to_json(net).dump(2) + "\n");
    };
  });
  int star_edges = 3;
  auto* net_star = net_cmd->add_subcommand("star", "Star with equal edges");
  net_star->add_option("--edges", star_edges)->capture_default_str();
  net_star->add_option("--length", length)->capture_default_str();
  net_star->callback([&] {
    action = [&] { detail::emit(out_path, out, network_to_json(build_star(star_edges, length)).dump(2) + "\n"); };
  });
  int rows = 5, cols = 12;
  auto* net_hex = net_cmd->add_subcommand("hex", "Hexagonal lattice of rows x cols hexagons");
  net_hex->add_option("--rows", rows)->capture_default_str();
  net_hex->add_option("--cols", cols)->capture_default_str();
  net_hex->callback([&] {
    action = [&] { detail::emit(out_path, out, network_to_json(build_hexagonal_lattice(rows, cols)).dump(2) + "\n"); };
  });
  int needles = 6;
  double needle_length = 1.0;
  auto* net_rl = net_cmd->add_subcommand("random-line", "Random needles in the unit square");
  net_rl->add_option("--needles", needles)->capture_default_str();
  net_rl->add_option("--needle-length", needle_length)->capture_default_str();
  net_rl->callback([&] {
    action = [&] {
      detail::emit(out_path, out, network_to_json(build_random_line_network(needles, needle_length, seed)).dump(2) + "\n");
    };
  });

  // spectrum
  std::string input;
  detail::SpectrumFlags sflags;
  auto* spec_cmd = app.add_subcommand("spectrum", "Characteristic wavenumbers and eigenmodes");
  spec_cmd->add_option("-i,--input", input, "Network JSON")->required();
  sflags.add(spec_cmd);
  spec_cmd->callback([&] {
    action = [&] {
      auto net = load_network(input);
      auto start = detail::clock::now();
      auto spec = compute_spectrum(net, sflags.config(precision, threads));
      double elapsed = detail::seconds_since(start);
      for (const auto& w : spec.warnings) err << "warning: " << w << '\n';
      detail::emit(out_path, out, spectrum_to_json(net, spec).dump(2) + "\n");
      detail::write_timing(out_path, {{"command", "spectrum"}, {"seconds", elapsed},
                                      {"wavenumbers", spec.entries.size()}, {"modes", spec.mode_count()}});
    };
  });

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Poisson, heat or wave equation");
  solve_cmd->require_subcommand(1);
  std::string method = "fd", rho_name = "zero", phi0_name = "zero", phidot0_name = "zero", spectrum_path;
  double rho_scale = 1.0, phi0_scale = 1.0, phidot0_scale = 1.0, t_end = 1.0, dt = 1e-3;
  int n_per_edge = 1000, stride = 100;
  bool check_radius = false;
  auto add_common = [&](CLI::App* c) {
    c->add_option("-i,--input", input, "Network JSON")->required();
    c->add_option("--method", method, "fd or spectral")->check(CLI::IsMember({"fd", "spectral"}))->capture_default_str();
    c->add_option("--n-per-edge", n_per_edge, "Grid intervals per edge")->capture_default_str();
  };
  auto add_time = [&](CLI::App* c) {
    c->add_option("--t-end", t_end)->capture_default_str();
    c->add_option("--dt", dt)->capture_default_str();
    c->add_option("--stride", stride, "Keep every stride-th step")->capture_default_str();
  };
  const std::string source_help = "zero, cos2pi, cos2pi-scaled or a CSV file in the solution layout";

  auto* poisson = solve_cmd->add_subcommand("poisson", "Laplacian(phi) = rho");
  add_common(poisson);
  poisson->add_option("--rho", rho_name, source_help)->capture_default_str();
  poisson->add_option("--rho-scale", rho_scale)->capture_default_str();
  poisson->add_option("--spectrum", spectrum_path, "Cached spectrum JSON (spectral method)");
  sflags.add(poisson);
  poisson->callback([&] {
    action = [&] {
      auto net = load_network(input);
      auto rho = detail::make_source(rho_name, net, rho_scale);
      std::ostringstream text;
      json timing{{"command", "solve poisson"}, {"method", method}, {"n_per_edge", n_per_edge},
                  {"nodes", net.num_nodes()}, {"edges", net.num_edges()}};
      auto start = detail::clock::now();
      if (method == "fd") {
        auto r = solve_poisson_fd(net, rho, n_per_edge);
        timing["seconds"] = detail::seconds_since(start);
        timing["unknowns"] = r.layout.size;
        timing["residual"] = r.residual;
        write_solution_csv(text, net, from_grid_vector(net, r.layout, r.values));
      } else {
        Spectrum spec = spectrum_path.empty() ? compute_spectrum(net, sflags.config(precision, threads))
                                              : spectrum_from_json(read_json_file(spectrum_path), net);
        for (const auto& w : spec.warnings) err << "warning: " << w << '\n';
        auto phi = solve_poisson_spectral(net, spec, rho, n_per_edge);
        timing["seconds"] = detail::seconds_since(start);
        timing["modes"] = spec.mode_count();
        write_solution_csv(text, net, phi);
      }
      detail::emit(out_path, out, text.str());
      detail::write_timing(out_path, timing);
    };
  });

  auto time_action = [&](bool wave) {
    auto net = load_network(input);
    require(method == "fd", ErrorKind::invalid_parameter,
            "time-dependent problems are solved with finite differences only");
    TimeStepping ts{t_end, dt, stride};
    auto start = detail::clock::now();
    TimeSeries series;
    if (wave) {
      WaveOptions opts;
      opts.check_spectral_radius = check_radius;
      series = solve_wave_fd(net, detail::make_source(phi0_name, net, phi0_scale),
                             detail::make_source(phidot0_name, net, phidot0_scale), ts, n_per_edge, opts);
    } else {
      series = solve_heat_fd(net, detail::make_source(phi0_name, net, phi0_scale),
                             detail::make_source(rho_name, net, rho_scale), ts, n_per_edge);
    }
    double elapsed = detail::seconds_since(start);
    std::ostringstream text;
    write_time_series_csv(text, net, series);
    detail::emit(out_path, out, text.str());
    detail::write_timing(out_path, {{"command", wave ? "solve wave" : "solve heat"}, {"method", "fd"},
                                    {"seconds", elapsed}, {"dt", series.dt},
                                    {"snapshots", series.snapshots.size()}, {"unknowns", series.layout.size}});
  };

  auto* heat = solve_cmd->add_subcommand("heat", "d(phi)/dt = Laplacian(phi) - rho, Crank-Nicolson");
  add_common(heat);
  add_time(heat);
  heat->add_option("--rho", rho_name, source_help)->capture_default_str();
  heat->add_option("--rho-scale", rho_scale)->capture_default_str();
  heat->add_option("--phi0", phi0_name, source_help)->capture_default_str();
  heat->add_option("--phi0-scale", phi0_scale)->capture_default_str();
  heat->callback([&] { action = [&] { time_action(false); }; });

  auto* wave = solve_cmd->add_subcommand("wave", "d2(phi)/dt2 = Laplacian(phi), leapfrog");
  add_common(wave);
  add_time(wave);
  wave->add_option("--phi0", phi0_name, source_help)->capture_default_str();
  wave->add_option("--phi0-scale", phi0_scale)->capture_default_str();
  wave->add_option("--phidot0", phidot0_name, source_help)->capture_default_str();
  wave->add_option("--phidot0-scale", phidot0_scale)->capture_default_str();
  wave->add_flag("--check-radius", check_radius, "Also bound dt^2 times the spectral radius");
  wave->callback([&] { action = [&] { time_action(true); }; });

  // weyl
  double weyl_k_max = 100.0;
  int weyl_points = 1001;
  auto* weyl = app.add_subcommand("weyl", "Counting function against the Weyl estimate and bounds");
  weyl->add_option("-i,--input", input, "Network JSON")->required();
  weyl->add_option("--spectrum", spectrum_path, "Spectrum JSON")->required();
  weyl->add_option("--k-max", weyl_k_max)->capture_default_str();
  weyl->add_option("--points", weyl_points, "Equidistant k values on [0, k-max]")->capture_default_str();
  weyl->callback([&] {
    action = [&] {
      auto net = load_network(input);
      auto spec = spectrum_from_json(read_json_file(spectrum_path), net);
      require(weyl_points >= 2, ErrorKind::invalid_parameter, "need at least two points");
      std::vector<double> ks;
      for (int j = 0; j < weyl_points; ++j) ks.push_back(weyl_k_max * j / (weyl_points - 1));
      std::ostringstream text;
      write_weyl_csv(text, spec, net, ks);
      detail::emit(out_path, out, text.str());
    };
  });

  // symmetry
  auto* sym = app.add_subcommand("symmetry", "Symmetric-group character tables and decompositions");
  sym->require_subcommand(1);
  int degree = 3;
  bool as_json = false;
  std::string character_text;
  auto* sym_table = sym->add_subcommand("table", "Character table of S_n");
  sym_table->add_option("-n", degree)->capture_default_str();
  sym_table->add_flag("--json", as_json);
  sym_table->callback([&] {
    action = [&] {
      auto t = character_table(degree);
      std::ostringstream text;
      if (as_json) {
        json j{{"n", t.n}, {"classes", json::array()}, {"irreps", json::array()}};
        for (const auto& c : t.classes)
          j["classes"].push_back({{"cycle_type", c.cycle_type}, {"size", c.size}, {"representative", c.representative}});
        for (const auto& ir : t.irreps)
          j["irreps"].push_back({{"name", ir.name}, {"shape", ir.shape}, {"dimension", ir.dimension},
                                 {"characters", ir.characters}});
        text << j.dump(2) << '\n';
      } else {
        text << std::left;
        text.width(12);
        text << "class";
        for (const auto& c : t.classes) {
          text.width(12);
          text << c.representative;
        }
        text << '\n';
        text.width(12);
        text << "size";
        for (const auto& c : t.classes) {
          text.width(12);
          text << c.size;
        }
        text << '\n';
        for (const auto& ir : t.irreps) {
          text.width(12);
          text << ir.name;
          for (int x : ir.characters) {
            text.width(12);
            text << x;
          }
          text << '\n';
        }
      }
      detail::emit(out_path, out, text.str());
    };
  });
  auto* sym_dec = sym->add_subcommand("decompose", "Decompose a character (default: permutation character)");
  sym_dec->add_option("-n", degree)->capture_default_str();
  sym_dec->add_option("--character", character_text, "Comma-separated values per class");
  sym_dec->add_flag("--json", as_json);
  sym_dec->callback([&] {
    action = [&] {
      auto t = character_table(degree);
      std::vector<int> chi;
      if (character_text.empty()) chi = permutation_character(t);
      else
        for (double v : detail::parse_list(character_text)) chi.push_back(static_cast<int>(std::lround(v)));
      auto d = decompose(chi, t);
      std::ostringstream text;
      if (as_json) {
        json j{{"n", t.n}, {"character", d.source_character}, {"dimension", d.dimension}, {"coefficients", json::object()}};
        for (std::size_t a = 0; a < t.irreps.size(); ++a) j["coefficients"][t.irreps[a].name] = d.coefficients[a];
        text << j.dump(2) << '\n';
      } else {
        for (std::size_t a = 0; a < t.irreps.size(); ++a)
          text << t.irreps[a].name << " (dim " << t.irreps[a].dimension << "): " << d.coefficients[a] << '\n';
      }
      detail::emit(out_path, out, text.str());
    };
  });
  auto* sym_star = sym->add_subcommand("star-degeneracies", "Predicted eigenmode degeneracies of an M-edge star");
  sym_star->add_option("--edges", star_edges)->capture_default_str();
  sym_star->callback([&] {
    action = [&] {
      std::ostringstream text;
      auto d = predict_star_degeneracies(star_edges);
      for (std::size_t i = 0; i < d.size(); ++i) text << (i ? " " : "") << d[i];
      text << '\n';
      detail::emit(out_path, out, text.str());
    };
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  std::string bench_cols = "8,16,32,64,128,256,512";
  int bench_rows = 5;
  auto* scaling = bench->add_subcommand("poisson-scaling", "FD Poisson on growing hexagonal lattices");
  scaling->add_option("--rows", bench_rows)->capture_default_str();
  scaling->add_option("--cols", bench_cols, "Comma-separated column counts")->capture_default_str();
  scaling->add_option("--n-per-edge", n_per_edge)->capture_default_str();
  scaling->callback([&] {
    action = [&] {
      std::ostringstream text;
      text << "rows,cols,nodes,edges,unknowns,seconds,mse,residual\n";
      bool ok = true;
      std::string worst;
      for (double c : detail::parse_list(bench_cols)) {
        auto net = build_hexagonal_lattice(bench_rows, static_cast<int>(c));
        auto rho = NetworkFunction::uniform(net, Sinusoid{0.0, 1.0, 2.0 * std::numbers::pi});
        auto start = detail::clock::now();
        auto r = solve_poisson_fd(net, rho, n_per_edge);
        double elapsed = detail::seconds_since(start);
        auto e = grid_error(net, r.layout, r.values, [](std::size_t, double x) {
          return -std::cos(2.0 * std::numbers::pi * x) / (4.0 * std::numbers::pi * std::numbers::pi);
        });
        text << bench_rows << ',' << static_cast<int>(c) << ',' << net.num_nodes() << ',' << net.num_edges() << ','
             << r.layout.size << ',' << format_double(elapsed) << ',' << format_double(e.mse) << ','
             << format_double(r.residual) << '\n';
        err << "lattice " << net.num_nodes() << "x" << net.num_edges() << ": " << elapsed << " s, mse " << e.mse << '\n';
        if (!(e.mse < 1e-12)) {
          ok = false;
          worst = "mse " + format_double(e.mse) + " at (N, M) = (" + std::to_string(net.num_nodes()) + ", " +
                  std::to_string(net.num_edges()) + ")";
        }
      }
      detail::emit(out_path, out, text.str());
      require(ok, ErrorKind::numerical_failure, "Poisson accuracy bound 1e-12 violated: " + worst);
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    require(precision >= 1 && precision <= 15, ErrorKind::invalid_parameter, "--precision must be 1..15");
    if (action) action();
    return exit_ok;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_unexpected;
  }
}

}  // namespace metricnet::cli

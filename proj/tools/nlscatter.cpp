// nlscatter: command-line front end for nonlinear point-interaction scattering.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "nlscatter/sweep.hpp"

namespace ns = nlscatter;

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<double> k_min, k_max, amp, tol, window_max;
  std::optional<int> k_count, grid_n, workers;
  std::string side;
  bool verify = false;
  bool print_config = false;
  std::string out_csv, out_json, out_plot;
};

void add_common(CLI::App* app, Common& c, bool k_grid) {
  app->add_option("--config", c.config_path, "JSON sweep configuration");
  app->add_option("--preset", c.preset, "built-in parameter set (see `nlscatter presets`)");
  if (k_grid) {
    app->add_option("--k-min", c.k_min, "smallest wavenumber");
    app->add_option("--k-max", c.k_max, "largest wavenumber");
    app->add_option("--k-count", c.k_count, "number of K samples");
  }
  app->add_option("--amp", c.amp, "incident amplitude |A|");
  app->add_option("--side", c.side, "incidence side: l, r or both");
  app->add_option("--tol", c.tol, "residual tolerance for accepted roots");
  app->add_option("--window-max", c.window_max, "upper end of the |N| scan window");
  app->add_option("--grid-n", c.grid_n, "scan grid points");
  app->add_option("--workers", c.workers, "parallel sweep workers (0: all cores)");
  app->add_flag("--verify", c.verify, "cross-check each point against the Jost route");
  app->add_flag("--print-config", c.print_config, "print the resolved configuration to stderr");
  app->add_option("--out-csv", c.out_csv, "CSV output path");
  app->add_option("--out-json", c.out_json, "JSON output path");
  app->add_option("--out-plot", c.out_plot, "plot output path (.svg, or .gp/.plt script)");
}

ns::SweepConfig resolve(const Common& c) {
  if (c.config_path.empty() == c.preset.empty())
    throw ns::ConfigError("arguments", "give exactly one of --config or --preset");
  ns::SweepConfig cfg;
  if (!c.preset.empty()) {
    auto p = ns::preset(c.preset);
    if (!p) throw ns::ConfigError("--preset", "unknown preset '" + c.preset + "'");
    cfg = std::move(*p);
  } else {
    cfg = ns::load_config(c.config_path);
  }
  if (c.k_min) cfg.k_grid.min = *c.k_min;
  if (c.k_max) cfg.k_grid.max = *c.k_max;
  if (c.k_count) cfg.k_grid.count = *c.k_count;
  if (c.amp) cfg.absA = *c.amp;
  if (!c.side.empty()) {
    if (c.side == "l") cfg.side = ns::SideSelector::left;
    else if (c.side == "r") cfg.side = ns::SideSelector::right;
    else if (c.side == "both") cfg.side = ns::SideSelector::both;
    else throw ns::ConfigError("--side", "expected l, r or both");
  }
  if (c.tol) cfg.solver.tol = *c.tol;
  if (c.window_max) cfg.solver.window_max = *c.window_max;
  if (c.grid_n) cfg.solver.grid_n = *c.grid_n;
  if (c.workers) cfg.workers = *c.workers;
  if (c.verify) cfg.verify = true;
  if (!c.out_csv.empty()) cfg.outputs.csv = c.out_csv;
  if (!c.out_json.empty()) cfg.outputs.json = c.out_json;
  if (!c.out_plot.empty()) cfg.outputs.plot = c.out_plot;
  // Re-validate after overrides.
  auto doc = ns::config_to_json(cfg);
  if (c.print_config) std::cerr << doc.dump(2) << "\n";
  return ns::parse_config(doc);
}

std::string fmt(double v) { return ns::format_double(v); }

int write_or_print(const std::string& text, const std::optional<std::string>& path) {
  if (!path) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + *path + "' for writing");
  out << text;
  return 0;
}

int cmd_sweep(ns::SweepConfig cfg, bool single_point, double k) {
  if (single_point) {
    cfg.k_grid = {k, k, 1, false};
  }
  const auto result = ns::run_sweep(cfg);
  const bool to_stdout = !cfg.outputs.csv;
  ns::emit_outputs(result.rows, cfg);
  if (to_stdout) std::cout << ns::rows_to_csv(result.rows);
  if (result.failed_points > 0)
    std::cerr << result.failed_points << " of " << result.points << " point(s) failed\n";
  return result.points > 0 && result.failed_points == result.points ? 2 : 0;
}

int cmd_detect_singularity(const ns::SweepConfig& cfg, bool reversed, double n_min, double n_max,
                           int scan_k, int scan_n) {
  ns::DetectorOptions opt;
  opt.k_grid = scan_k;
  opt.n_grid = scan_n;
  std::string out = "side,k_star,n_star,I_minus,I_plus,defect\n";
  for (const auto side : ns::sides_of(cfg.side)) {
    const ns::Range kr{cfg.k_grid.min, cfg.k_grid.max}, nr{n_min, n_max};
    const auto reps = reversed ? ns::detect_time_reversed_ss(cfg.interaction, side, kr, nr, opt)
                               : ns::detect_spectral_singularity(cfg.interaction, side, kr, nr, opt);
    for (const auto& r : reps)
      out += std::string(ns::to_string(side)) + ',' + fmt(r.k_star) + ',' + fmt(r.n_star) + ',' +
             fmt(r.I_minus) + ',' + fmt(r.I_plus) + ',' + fmt(r.defect) + '\n';
  }
  return write_or_print(out, cfg.outputs.csv);
}

int cmd_reflectionless(const ns::SweepConfig& cfg, double k, double a_min, double a_max) {
  std::string out = "side,absA,n,re_R,im_R,re_T,im_T,residual\n";
  for (const auto side : ns::sides_of(cfg.side)) {
    const auto rep = ns::find_reflectionless(cfg.interaction, side, ns::WaveNumber(k), {a_min, a_max});
    if (rep.every_amplitude) {
      std::cerr << ns::to_string(side) << ": reflectionless at every amplitude\n";
      continue;
    }
    for (const auto& h : rep.hits)
      out += std::string(ns::to_string(side)) + ',' + fmt(h.absA) + ',' + fmt(h.branch.n) + ',' +
             fmt(h.branch.R.real()) + ',' + fmt(h.branch.R.imag()) + ',' +
             fmt(h.branch.T.real()) + ',' + fmt(h.branch.T.imag()) + ',' +
             fmt(h.branch.residual) + '\n';
  }
  return write_or_print(out, cfg.outputs.csv);
}

int cmd_invisible(const ns::SweepConfig& cfg, double k) {
  ns::SolveOptions opt;
  opt.scan = ns::solve_options(cfg.solver).scan;
  std::string out = "side,n,abs_R,abs_T_minus_1,invisible\n";
  for (const auto side : ns::sides_of(cfg.side)) {
    const auto reps = ns::check_transparency(cfg.interaction, ns::WaveNumber(k),
                                             ns::Incidence(side, cfg.absA), opt, cfg.solver.tol);
    for (const auto& r : reps)
      out += std::string(ns::to_string(side)) + ',' + fmt(r.branch.n) + ',' + fmt(r.reflection) +
             ',' + fmt(r.transparency_defect) + ',' + (r.invisible ? "1" : "0") + '\n';
  }
  return write_or_print(out, cfg.outputs.csv);
}

int cmd_nonreciprocity(const ns::SweepConfig& cfg) {
  std::vector<ns::WaveNumber> ks;
  for (double k : cfg.k_grid.values()) ks.emplace_back(k);
  const auto rows =
      ns::nonreciprocity_scan(cfg.interaction, ks, cfg.absA, ns::solve_options(cfg.solver));
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : "|") + fmt(x);
    return s;
  };
  std::string out = "k,left_absT2,right_absT2,gap,structural_mismatch\n";
  double worst = 0.0;
  for (const auto& r : rows) {
    out += fmt(r.k) + ',' + join(r.left_T2) + ',' + join(r.right_T2) + ',' + fmt(r.gap) + ',' +
           (r.structural_mismatch ? "1" : "0") + '\n';
    worst = std::max(worst, r.gap);
  }
  std::cerr << "max gap " << fmt(worst) << "\n";
  return write_or_print(out, cfg.outputs.csv);
}

int cmd_compose_check(const ns::SweepConfig& cfg, double k, double tol, int grid) {
  const auto& sites = cfg.interaction.sites();
  if (!cfg.interaction.is_delta_chain() || sites.size() != 2)
    throw ns::ConfigError("/interaction", "compose-check needs a chain with exactly two sites");
  const ns::WaveNumber kk(k);
  const auto composed =
      ns::compose(ns::delta_transfer(sites[1], kk), ns::delta_transfer(sites[0], kk));
  double worst = 0.0, worst_scaled = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double t = grid > 1 ? static_cast<double>(i) / (grid - 1) : 0.5;
      const double u = grid > 1 ? static_cast<double>(j) / (grid - 1) : 0.5;
      const ns::cplx A = std::polar(0.1 + 2.9 * t, 2.0 * std::numbers::pi * u);
      const ns::cplx B = std::polar(0.1 + 1.9 * u, 2.0 * std::numbers::pi * t + 0.3);
      const auto closed = ns::double_delta_matrix(sites[0], sites[1], kk, A, B);
      const double d = (composed(A, B) - closed).cwiseAbs().maxCoeff();
      worst = std::max(worst, d);
      worst_scaled = std::max(worst_scaled, d / std::max(1.0, closed.cwiseAbs().maxCoeff()));
    }
  std::cout << "max_entry_difference," << fmt(worst) << "\n";
  std::cout << "max_scaled_difference," << fmt(worst_scaled) << "\n";
  return worst_scaled < tol ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering by nonlinear point interactions"};
  app.require_subcommand(1);

  Common c;
  double k = 1.0;

  auto* solve = app.add_subcommand("solve", "all branches at a single K");
  add_common(solve, c, false);
  solve->add_option("--k", k, "wavenumber")->required();

  auto* sweep = app.add_subcommand("sweep", "branches over a K grid");
  add_common(sweep, c, true);

  auto* detect = app.add_subcommand("detect", "locate spectral phenomena");
  detect->require_subcommand(1);
  double n_min = 1e-3, n_max = 10.0, a_min = 0.0, a_max = 5.0;
  int scan_k = 200, scan_n = 20;
  auto* ss = detect->add_subcommand("ss", "spectral singularities");
  auto* trss = detect->add_subcommand("trss", "time-reversed spectral singularities");
  for (auto* sub : {ss, trss}) {
    add_common(sub, c, true);
    sub->add_option("--n-min", n_min, "smallest emitted |N|");
    sub->add_option("--n-max", n_max, "largest emitted |N|");
    sub->add_option("--scan-k", scan_k, "K samples of the detector grid");
    sub->add_option("--scan-n", scan_n, "|N| samples of the detector grid");
  }
  auto* refl = detect->add_subcommand("reflectionless", "amplitudes with R = 0");
  add_common(refl, c, false);
  refl->add_option("--k", k, "wavenumber")->required();
  refl->add_option("--amp-min", a_min, "smallest |A|");
  refl->add_option("--amp-max", a_max, "largest |A|");
  auto* invis = detect->add_subcommand("invisible", "transparency and invisibility at one point");
  add_common(invis, c, false);
  invis->add_option("--k", k, "wavenumber")->required();

  auto* nonrec = app.add_subcommand("nonreciprocity", "left versus right |T|^2 over a K grid");
  add_common(nonrec, c, true);

  auto* cc = app.add_subcommand("compose-check", "composed single-site maps versus two-site form");
  add_common(cc, c, false);
  double cc_tol = 1e-12;
  int cc_grid = 20;
  cc->add_option("--k", k, "wavenumber");
  cc->add_option("--max-diff", cc_tol, "largest accepted entry difference relative to the matrix scale");
  cc->add_option("--arg-grid", cc_grid, "argument grid per dimension");

  auto* presets = app.add_subcommand("presets", "list or export the built-in parameter sets");
  std::string dump_dir;
  presets->add_option("--dump", dump_dir, "write each preset as DIR/<name>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*presets) {
      for (const auto& name : ns::preset_names()) {
        if (dump_dir.empty()) {
          std::cout << name << "\n";
          continue;
        }
        std::filesystem::create_directories(dump_dir);
        std::ofstream out(std::filesystem::path(dump_dir) / (name + ".json"));
        out << ns::config_to_json(*ns::preset(name)).dump(2) << "\n";
      }
      return 0;
    }
    const auto cfg = resolve(c);
    if (*solve) return cmd_sweep(cfg, true, k);
    if (*sweep) return cmd_sweep(cfg, false, 0.0);
    if (*ss) return cmd_detect_singularity(cfg, false, n_min, n_max, scan_k, scan_n);
    if (*trss) return cmd_detect_singularity(cfg, true, n_min, n_max, scan_k, scan_n);
    if (*refl) return cmd_reflectionless(cfg, k, a_min, a_max);
    if (*invis) return cmd_invisible(cfg, k);
    if (*nonrec) return cmd_nonreciprocity(cfg);
    if (*cc) return cmd_compose_check(cfg, k, cc_tol, cc_grid);
  } catch (const ns::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

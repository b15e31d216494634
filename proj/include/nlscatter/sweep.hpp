#pragma once

// Sweep configuration, orchestration and output for the command-line tool.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "nlscatter/core.hpp"
#include "nlscatter/phenomena.hpp"
#include "nlscatter/xfer.hpp"

namespace nlscatter {

/// Configuration problem; `where` is a JSON pointer or "line L, column C".
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string where, const std::string& message)
      : ValidationError(where, message), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct KGrid {
  double min = 0.05;
  double max = 15.0;
  int count = 2000;
  bool log_spacing = false;

  std::vector<double> values() const;
};

struct SolverSettings {
  std::optional<double> window_max;
  int grid_n = 2000;
  double tol = 1e-10;  // residual acceptance
};

struct OutputPaths {
  std::optional<std::string> csv;
  std::optional<std::string> json;
  std::optional<std::string> plot;  // .svg, or .gp / .plt for a gnuplot script
};

struct SweepConfig {
  std::string name;
  nlohmann::json interaction_json;  // echoed as given, with defaults filled
  Interaction interaction = Interaction::free();
  SideSelector side = SideSelector::both;
  double absA = 1.0;
  KGrid k_grid;
  SolverSettings solver;
  OutputPaths outputs;
  bool verify = false;
  int workers = 0;  // 0: hardware concurrency
};

SweepConfig parse_config(const nlohmann::json& doc);
SweepConfig parse_config_text(const std::string& text);
SweepConfig load_config(const std::string& path);
nlohmann::json config_to_json(const SweepConfig& cfg);

Interaction parse_interaction(const nlohmann::json& j, const std::string& where = "/interaction");

std::vector<std::string> preset_names();
/// Built-in parameter sets; nullopt for an unknown name.
std::optional<SweepConfig> preset(const std::string& name);

struct SweepRow {
  double k = 0.0;
  Side side = Side::left;
  int branch = -1;  // -1: no branch at this point
  double n = 0.0;
  cplx R{};
  cplx T{};
  double absT2 = 0.0;
  double residual = 0.0;
  std::vector<std::string> flags;

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int points = 0;
  int failed_points = 0;  // solver threw at this (K, side)
};

TransferSolveOptions solve_options(const SolverSettings& s);

/// Nearest-n matching of branch ids between consecutive K samples.
/// `n_per_k[i]` lists the branch moduli at the i-th K; returns matching ids.
std::vector<std::vector<int>> continue_branches(const std::vector<std::vector<double>>& n_per_k);

SweepResult run_sweep(const SweepConfig& cfg);

inline constexpr const char* kCsvHeader =
    "k,side,branch,n,re_R,im_R,re_T,im_T,absT2,residual,flags";

std::string format_double(double v);
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_csv(const std::string& text);
nlohmann::json rows_to_json(const std::vector<SweepRow>& rows, const SweepConfig& cfg);
std::string rows_to_svg(const std::vector<SweepRow>& rows, const std::string& title);
std::string rows_to_gnuplot(const std::vector<SweepRow>& rows, const std::string& title);

/// Writes every configured output; throws std::runtime_error on I/O failure.
void emit_outputs(const std::vector<SweepRow>& rows, const SweepConfig& cfg);

}  // namespace nlscatter

#pragma once

// Detectors for spectral singularities and their time reverse, one-sided
// reflectionlessness, transparency and invisibility, and nonreciprocal
// transmission, in both the Jost-function and transfer-matrix languages.

#include <vector>

#include "nlscatter/core.hpp"
#include "nlscatter/jost.hpp"
#include "nlscatter/xfer.hpp"

namespace nlscatter {

struct Range {
  double lo;
  double hi;
};

struct SingularityReport {
  double k_star = 0.0;
  double n_star = 0.0;   // emitted |N|
  double I_minus = 0.0;  // intensity reaching x -> -inf
  double I_plus = 0.0;   // intensity reaching x -> +inf
  Side side = Side::left;
  double defect = 0.0;   // |G+|/(2Kn) (left) or |F-|/(2Kn) (right)
};

enum class PhenomenonKind {
  reflectionless,
  transparent,
  invisible,
  nonreciprocal,
  spectral_singularity,
  time_reversed_ss
};

enum class SideSelector { left, right, both };

struct PhenomenonQuery {
  PhenomenonKind kind = PhenomenonKind::spectral_singularity;
  SideSelector side = SideSelector::both;
};

std::vector<Side> sides_of(SideSelector selector);

struct DetectorOptions {
  int k_grid = 200;
  int n_grid = 20;
  int n_scan = 2000;  // amplitude scan for reflectionless points
  double tol = 1e-10;
  IntegratorOptions integrator;
};

/// Table-1 style conditions, normalised by 2 K n.
struct JostConditions {
  double singularity;     // |G+^l| or |F-^r|
  double reflectionless;  // |G-^l| or |F+^r|
  double transparency;    // |F+^l - e^{i(b-a)K} G+^l| or |G-^r - e^{i(b-a)K} F-^r|
};

/// Table-2 style conditions on M^l = M(A, A R) or M^r = M(0, N).
struct TransferConditions {
  double singularity;     // |M22|
  double reflectionless;  // |M21^l| or |M12^r|
  double transparency;    // |M22^l - det M^l| or |M22^r - 1|
};

JostConditions jost_conditions(const Interaction& interaction, WaveNumber k, Side side, double n,
                               const IntegratorOptions& options = {});
TransferConditions transfer_conditions(const TransferMap& m, Side side, double n);

std::vector<SingularityReport> detect_spectral_singularity(const Interaction& interaction,
                                                           Side side, Range k_range,
                                                           Range n_range,
                                                           const DetectorOptions& options = {});

/// Spectral singularities of the interaction with every coupling negated.
std::vector<SingularityReport> detect_time_reversed_ss(const Interaction& interaction, Side side,
                                                       Range k_range, Range n_range,
                                                       const DetectorOptions& options = {});

struct ReflectionlessHit {
  double absA;
  Branch branch;
};

struct ReflectionlessReport {
  bool every_amplitude = false;  // condition holds identically (e.g. f = 0)
  std::vector<ReflectionlessHit> hits;
};

ReflectionlessReport find_reflectionless(const Interaction& interaction, Side side, WaveNumber k,
                                         Range a_range, const DetectorOptions& options = {});

struct TransparencyReport {
  Branch branch;
  double transparency_defect;  // |T - 1|
  double reflection;           // |R|
  bool invisible;
};

std::vector<TransparencyReport> check_transparency(const Interaction& interaction, WaveNumber k,
                                                   const Incidence& incidence,
                                                   const SolveOptions& options = {},
                                                   double tol = 1e-10);

struct NonreciprocityRow {
  double k = 0.0;
  std::vector<double> left_T2;
  std::vector<double> right_T2;
  double gap = 0.0;  // max | |T^l|^2 - |T^r|^2 | over matched branches
  bool structural_mismatch = false;
};

/// Pairs sorted |T|^2 lists by nearest value; returns the largest difference
/// and whether the counts differ.
std::pair<double, bool> match_transmission(std::vector<double> left, std::vector<double> right);

std::vector<NonreciprocityRow> nonreciprocity_scan(const Interaction& interaction,
                                                   const std::vector<WaveNumber>& k_grid,
                                                   double absA,
                                                   const TransferSolveOptions& options = {});

}  // namespace nlscatter

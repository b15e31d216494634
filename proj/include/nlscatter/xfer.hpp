#pragma once

// Nonlinear transfer matrices. A map sends the plane-wave coefficients
// (A-, B-) left of the support to a 2x2 matrix M(A-, B-) with
//   (A+, B+)^T = M(A-, B-) (A-, B-)^T.
// Matrices are stored row-major as ((M11, M12), (M21, M22)).

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "nlscatter/core.hpp"
#include "nlscatter/jost.hpp"
#include "nlscatter/selfconsist.hpp"

namespace nlscatter {

using Matrix2 = Eigen::Matrix2cd;

struct Coefficients {
  cplx A{};
  cplx B{};
};

struct GaugeTransform;

enum class TransferKind { identity, closed_form_delta, closed_form_double_delta, composed, numeric };

std::string_view to_string(TransferKind kind) noexcept;

class TransferMap {
 public:
  using Eval = std::function<Matrix2(cplx, cplx)>;
  /// Coefficients left of the support given those on the right.
  using PullBack = std::function<Coefficients(Coefficients)>;
  /// Left coefficients of the left-incidence field whose transmitted part is n e^{iKx}.
  using LeftSeed = std::function<Coefficients(double)>;

  TransferMap(WaveNumber k, TransferKind kind, Support support, Eval eval);

  static TransferMap identity(WaveNumber k, Support support = {0.0, 0.0});

  Matrix2 operator()(cplx A_minus, cplx B_minus) const { return eval_(A_minus, B_minus); }

  WaveNumber k() const noexcept { return k_; }
  TransferKind kind() const noexcept { return kind_; }
  Support support() const noexcept { return support_; }
  bool gauge_perturbed() const noexcept { return perturbed_; }
  /// det M = 1 identically (canonical gauge); false after a gauge perturbation.
  bool unimodular() const noexcept { return !perturbed_; }

  const std::optional<PullBack>& pull_back() const noexcept { return pull_back_; }
  const std::optional<LeftSeed>& left_seed() const noexcept { return left_seed_; }

  /// Scan hints for the self-consistency search.
  double coupling_scale() const noexcept { return coupling_scale_; }
  bool negative_powers() const noexcept { return negative_powers_; }
  bool linear() const noexcept { return linear_; }

  TransferMap& with_pull_back(PullBack p);
  TransferMap& with_left_seed(LeftSeed s);
  TransferMap& with_scan_hints(double coupling_scale, bool negative_powers, bool linear);

 private:
  friend TransferMap gauge_perturb(const TransferMap&, const GaugeTransform&);

  WaveNumber k_;
  TransferKind kind_;
  Support support_;
  Eval eval_;
  std::optional<PullBack> pull_back_;
  std::optional<LeftSeed> left_seed_;
  double coupling_scale_ = 0.0;
  bool negative_powers_ = false;
  bool linear_ = false;
  bool perturbed_ = false;
};

Coefficients apply_transfer(const TransferMap& m, cplx A_minus, cplx B_minus);

TransferMap delta_transfer(const DeltaSite& site, WaveNumber k);

/// Raised when the supports of composed maps are not ordered left to right.
class SupportOverlapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// m2 ∘ m1 for m1 supported entirely to the left of m2.
TransferMap compose(const TransferMap& m2, const TransferMap& m1);

Matrix2 double_delta_matrix(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k,
                            cplx A_minus, cplx B_minus);
TransferMap double_delta_transfer(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k);

struct GaugeTransform {
  std::function<cplx(cplx, cplx)> f1;
  std::function<cplx(cplx, cplx)> f2;
};

/// M + dM with dM = [[f1 B-, -f1 A-], [f2 B-, -f2 A-]]; dM annihilates (A-, B-).
TransferMap gauge_perturb(const TransferMap& m, const GaugeTransform& g);

/// Integration defaults tight enough for 1e-12 agreement with closed forms.
IntegratorOptions numeric_transfer_defaults();

/// M(A-, B-) from integrating the field across the support together with the
/// two fundamental solutions of the potential frozen along that field.
TransferMap numeric_transfer(const Interaction& interaction, WaveNumber k,
                             const IntegratorOptions& options = numeric_transfer_defaults());

/// Closed form for one or two sites, composed chain for more, numeric for
/// smooth interactions.
TransferMap transfer_map(const Interaction& interaction, WaveNumber k);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-11;
  int max_iter = 200;
  int phase_starts = 8;
};

struct TransferSolveOptions {
  ScanOptions scan;
  FixedPointOptions fixed_point;
};

BranchSet rt_from_transfer(const TransferMap& m, const Incidence& incidence,
                           const TransferSolveOptions& options = {});
BranchSet rt_from_transfer(const Interaction& interaction, WaveNumber k, const Incidence& incidence,
                           const TransferSolveOptions& options = {});

/// Entries M^l = M(A, A R) (left) or M^r = M(0, N) (right) for the field whose
/// transmitted amplitude has modulus n.
Matrix2 side_matrix(const TransferMap& m, Side side, double n);

}  // namespace nlscatter

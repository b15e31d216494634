#pragma once

// Domain types for one-dimensional scattering by finite-range interactions
// of the form F(x, psi) = v(x, |psi|) psi, in units where the wave equation
// reads -psi'' + F(x, psi) = K^2 psi.

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace nlscatter {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Raised when user-supplied data violates a type invariant. `field()` names
/// the offending field, e.g. "sites[1].c" or "f.nu".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Evaluation outside the domain of a nonlinearity (negative power at m = 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class WaveNumber {
 public:
  explicit WaveNumber(double k);
  double value() const noexcept { return k_; }

 private:
  double k_;
};

enum class Side { left, right };

std::string_view to_string(Side side) noexcept;
Side parse_side(std::string_view text);

/// f(m) for a non-negative field modulus m.
class NonlinearityFn {
 public:
  struct Zero {
    bool operator==(const Zero&) const = default;
  };
  struct Constant {
    cplx z;
    bool operator==(const Constant&) const = default;
  };
  struct PowerLaw {
    cplx z;
    double nu;
    bool operator==(const PowerLaw&) const = default;
  };
  struct Polynomial {
    std::vector<cplx> coefficients;
    std::vector<double> powers;
    bool operator==(const Polynomial&) const = default;
  };
  using Variant = std::variant<Zero, Constant, PowerLaw, Polynomial>;

  NonlinearityFn() = default;

  static NonlinearityFn zero() { return {}; }
  static NonlinearityFn constant(cplx z);
  static NonlinearityFn power_law(cplx z, double nu);
  static NonlinearityFn kerr(cplx z) { return power_law(z, 2.0); }
  static NonlinearityFn polynomial(std::vector<cplx> coefficients,
                                   std::vector<double> powers);

  cplx operator()(double m) const;

  const Variant& variant() const noexcept { return v_; }

  /// True when f does not depend on m, i.e. the interaction is linear.
  bool is_linear() const noexcept;
  bool has_negative_power() const noexcept;
  /// Sum of coupling magnitudes; sets the scan scale for root searches.
  double coupling_scale() const noexcept;
  NonlinearityFn negated() const;
  std::string describe() const;

  bool operator==(const NonlinearityFn&) const = default;

 private:
  explicit NonlinearityFn(Variant v) : v_(std::move(v)) {}
  Variant v_{Zero{}};
};

cplx eval_nonlinearity(const NonlinearityFn& f, double m);

struct DeltaSite {
  double c = 0.0;
  NonlinearityFn f;
  bool operator==(const DeltaSite&) const = default;
};

/// v(x, m); must vanish outside [a, b].
using ModulusPotential = std::function<cplx(double x, double m)>;

struct DeltaChain {
  std::vector<DeltaSite> sites;
};

struct SmoothModulus {
  double a = 0.0;
  double b = 0.0;
  ModulusPotential v;
  bool linear = false;           // v independent of m
  double coupling_scale = 1.0;   // typical |v|, used for scan windows
};

struct Support {
  double a;
  double b;
  bool operator==(const Support&) const = default;
};

// Unvalidated input, as produced by configuration readers.
struct RawNonlinearity {
  std::string kind = "zero";  // zero | constant | power_law | kerr | polynomial
  cplx z{};
  double nu = 0.0;
  std::vector<cplx> coefficients;
  std::vector<double> powers;
};

struct RawSite {
  double c = 0.0;
  RawNonlinearity f;
};

struct RawInteraction {
  std::string kind = "delta_chain";  // delta_chain | smooth_modulus
  std::vector<RawSite> sites;
  double a = 0.0;
  double b = 0.0;
  ModulusPotential v;
  bool linear = false;
  double coupling_scale = 1.0;
};

class Interaction;
Interaction validate_interaction(const RawInteraction& raw);

/// A validated finite-range interaction: either a chain of nonlinear
/// delta sites with strictly increasing positions, or a smooth
/// modulus-dependent potential supported on [a, b].
class Interaction {
 public:
  using Variant = std::variant<DeltaChain, SmoothModulus>;

  static Interaction free();
  static Interaction single_delta(double c, NonlinearityFn f);
  static Interaction double_delta(DeltaSite s1, DeltaSite s2);
  static Interaction delta_chain(std::vector<DeltaSite> sites);
  static Interaction smooth(double a, double b, ModulusPotential v,
                            bool linear = false, double coupling_scale = 1.0);

  const Variant& variant() const noexcept { return v_; }
  bool is_delta_chain() const noexcept;
  /// Sites in ascending order of position; empty for smooth interactions.
  const std::vector<DeltaSite>& sites() const;
  const SmoothModulus* smooth_part() const noexcept;

  bool is_linear() const noexcept;
  bool has_negative_power() const noexcept;
  double coupling_scale() const noexcept;
  /// Same geometry with every coupling f replaced by -f.
  Interaction negated() const;
  RawInteraction to_raw() const;

  friend Interaction validate_interaction(const RawInteraction& raw);

 private:
  explicit Interaction(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

Support support_interval(const Interaction& interaction);

struct Incidence {
  Side side = Side::left;
  cplx amplitude{1.0, 0.0};

  Incidence() = default;
  Incidence(Side s, cplx a);
  double magnitude() const noexcept { return std::abs(amplitude); }
};

/// One self-consistent solution; n = |N| = |A T|.
struct Branch {
  double n = 0.0;
  cplx R{};
  cplx T{};
  double residual = 0.0;
  bool tangent = false;   // double-root (fold) detected by the scanner
  bool singular = false;  // vanishing denominator at this branch
};

struct SolveDiagnostics {
  double x_min = 0.0;
  double x_max = 0.0;
  int grid_points = 0;
  bool window_exhausted = false;
  std::vector<std::string> notes;
};

struct BranchSet {
  std::vector<Branch> branches;  // ascending n
  WaveNumber k{1.0};
  Incidence incidence;
  SolveDiagnostics diagnostics;
};

}  // namespace nlscatter

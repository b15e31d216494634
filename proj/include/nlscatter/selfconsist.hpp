#pragma once

// Scalar self-consistency equations for |N| and the root scanner that
// enumerates every positive solution (all multistable branches).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlscatter/core.hpp"

namespace nlscatter {

/// x -> residual(x), oriented so that residual(0) = -|A| and a positive value
/// at the top of the scan window means every crossing has been enclosed.
struct ResidualFn {
  std::function<double(double)> eval;
  std::string tag;  // originating equation, e.g. "single_delta", "double_delta"
  Side side = Side::left;
  std::string params;

  double operator()(double x) const { return eval(x); }
};

ResidualFn single_delta_residual(const NonlinearityFn& f, WaveNumber k, double absA);
/// Same equation written as x^2 |1 + i f(x)/2K|^2 - |A|^2.
double single_delta_residual_factored(const NonlinearityFn& f, WaveNumber k, double absA,
                                      double x);

/// All positive solutions x of |z'|^2 x^6 - 2 Im(z') x^4 + x^2 - |A|^2 = 0 with
/// z' = z/2K, from the closed-form cubic in u = x^2. Ascending.
std::vector<double> kerr_roots(cplx z, WaveNumber k, double absA);

/// Raised when a cubic that is expected to have a single positive root has three.
class NonUniqueRootError : public std::runtime_error {
 public:
  NonUniqueRootError(const std::string& message, std::vector<double> roots)
      : std::runtime_error(message), roots_(std::move(roots)) {}
  const std::vector<double>& roots() const noexcept { return roots_; }

 private:
  std::vector<double> roots_;
};

/// The positive root of the Kerr cubic. Throws NonUniqueRootError when the
/// cubic has three positive roots; that happens only for gain couplings with
/// Im z' > sqrt(3) |Re z'| and small enough |A|.
double kerr_root(cplx z, WaveNumber k, double absA);

/// Couplings entering the two-site master equation at trial |N| = x.
struct DoubleDeltaCouplings {
  cplx g1;
  cplx g2;
  cplx w;  // exp(2i (c2 - c1) K)
};

DoubleDeltaCouplings double_delta_couplings(const DeltaSite& s1, const DeltaSite& s2,
                                            WaveNumber k, Side side, double x);

/// x |(1-w) g1 g2 + g1 + g2 + 1| - |A| with side-dependent g-functions.
ResidualFn double_delta_residual(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k,
                                 Side side, double absA);

/// Closed master equation for one- and two-site chains; empty otherwise.
std::optional<ResidualFn> master_residual(const Interaction& interaction, WaveNumber k,
                                          Side side, double absA);

struct ScanWindow {
  double x_min = 0.0;
  double x_max = 10.0;
  /// Uniform grid on [x_min, x_core]; geometric grid on [x_core, x_max].
  /// Unset means a single uniform grid.
  std::optional<double> x_core;
};

struct RootReport {
  std::vector<double> roots;
  std::vector<double> residuals;
  std::vector<bool> tangent;
  ScanWindow window;
  int grid_points = 0;
  bool window_exhausted = false;
  int rejected = 0;  // sign changes whose refined residual missed the tolerance
  bool extended_below = false;  // a root was bracketed below x_min
};

struct ScanOptions {
  std::optional<double> window_max;
  int grid_n = 2000;
  double tol = 1e-14;           // relative bracket width for bisection
  double residual_tol = 1e-10;  // accepted |residual| at a root
  /// Without an explicit window_max, an exhausted window is grown fourfold
  /// up to this many times.
  int max_extensions = 10;
};

inline constexpr double kMinScanX = 1e-9;

ScanWindow default_window(double coupling_scale, bool negative_powers, WaveNumber k,
                          double absA, std::optional<double> window_max = std::nullopt);
ScanWindow default_window(const Interaction& interaction, WaveNumber k, double absA,
                          std::optional<double> window_max = std::nullopt);

RootReport enumerate_roots(const ResidualFn& residual, const ScanWindow& window, int grid_n,
                           double tol, double residual_tol = 1e-10);

/// enumerate_roots on the default window, extended while the residual is
/// still negative at its top (unless options.window_max is set).
RootReport scan_roots(const ResidualFn& residual, const ScanWindow& window,
                      const ScanOptions& options);

/// x -> -x. Sites are mirrored and re-sorted; smooth support [a,b] -> [-b,-a].
Interaction parity_reflect(const Interaction& interaction);

}  // namespace nlscatter

#pragma once

// Jost-function route: integrate the scattering solution across the support
// from its outgoing side, read off the boundary combinations psi' +- iK psi,
// and close the loop on |N| with the root scanner.

#include <stdexcept>
#include <string>

#include "nlscatter/core.hpp"
#include "nlscatter/selfconsist.hpp"

namespace nlscatter {

struct FieldState {
  double x = 0.0;
  cplx psi{};
  cplx dpsi{};
};

enum class Direction { forward, backward };

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  /// Smallest accepted step, relative to the length of the interval.
  double min_step = 1e-12;
  long max_steps = 2'000'000;
  /// Integrate the free segments between delta sites numerically instead of
  /// using the exact plane-wave propagator.
  bool integrate_free_segments = false;
};

/// Step-size underflow or step budget exhaustion during integration.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& message, double position)
      : std::runtime_error(message + " at x=" + std::to_string(position)), position_(position) {}
  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// Carries `seed` across the support. Forward: seed is the left-limit state at
/// x = a, result is the right-limit state at x = b. Backward: the reverse.
FieldState propagate(const Interaction& interaction, WaveNumber k, const FieldState& seed,
                     Direction direction, const IntegratorOptions& options = {});

/// Jost functions F± = psi'(b) ± iK psi(b), G± = psi'(a) ± iK psi(a).
struct JostData {
  cplx Fp{}, Fm{}, Gp{}, Gm{};
  Side side = Side::left;
  double n = 0.0;
};

JostData jost_solve(const Interaction& interaction, WaveNumber k, Side side, double n,
                    const IntegratorOptions& options = {});

struct JostAmplitudes {
  cplx A{};
  cplx R{};
  cplx T{};
  bool singular = false;  // |G+| (left) or |F-| (right) below 1e-12 * 2 K n
  double defect = 0.0;    // |G+| / (2 K n) or |F-| / (2 K n)
};

JostAmplitudes amplitudes_from_jost(const JostData& jost, WaveNumber k, double a, double b);

/// |A| produced by the Jost solution seeded with |N| = n.
double amplitude_map(const Interaction& interaction, WaveNumber k, Side side, double n,
                     const IntegratorOptions& options = {});

struct SolveOptions {
  ScanOptions scan;
  IntegratorOptions integrator;
};

BranchSet solve_scattering(const Interaction& interaction, WaveNumber k,
                           const Incidence& incidence, const SolveOptions& options = {});

}  // namespace nlscatter

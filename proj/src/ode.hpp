#pragma once

// Adaptive integration of psi'' = (V(x) - K^2) psi for one or more solutions
// sharing a potential V that may depend on the first component's modulus.

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "nlscatter/jost.hpp"

namespace nlscatter::detail {

template <std::size_t N>
using OdeState = std::array<cplx, N>;

/// Integrates from x0 to x1 (either order). Layout of y: pairs (u_j, u_j');
/// the potential is evaluated as potential(x, y[0]).
template <std::size_t N, class Potential>
void integrate_segment(double x0, double x1, OdeState<N>& y, double k, Potential&& potential,
                       const IntegratorOptions& options) {
  namespace odeint = boost::numeric::odeint;
  static_assert(N % 2 == 0);
  const double length = std::abs(x1 - x0);
  if (length == 0.0) return;
  const double sigma = x1 > x0 ? 1.0 : -1.0;
  const double k2 = k * k;

  auto rhs = [&](const OdeState<N>& s, OdeState<N>& ds, double t) {
    const double x = x0 + sigma * t;
    const cplx v = potential(x, s[0]) - k2;
    for (std::size_t j = 0; j < N; j += 2) {
      ds[j] = sigma * s[j + 1];
      ds[j + 1] = sigma * v * s[j];
    }
  };

  auto stepper = odeint::make_controlled(options.atol, options.rtol,
                                         odeint::runge_kutta_fehlberg78<OdeState<N>>());
  double t = 0.0;
  double dt = std::min(length, 0.05 / std::max(k, 1.0));
  const double dt_min = options.min_step * length;
  long steps = 0;
  while (t < length) {
    if (t + dt > length) dt = length - t;
    const auto result = stepper.try_step(rhs, y, t, dt);
    if (result == odeint::fail) {
      if (dt < dt_min) throw IntegrationError("step size underflow", x0 + sigma * t);
    } else if (t >= length - 1e-15 * length) {
      break;
    }
    if (++steps > options.max_steps) throw IntegrationError("step budget exhausted", x0 + sigma * t);
  }
}

}  // namespace nlscatter::detail

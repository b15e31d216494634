#include "nlscatter/jost.hpp"

#include <algorithm>
#include <cmath>

#include "ode.hpp"

namespace nlscatter {

namespace {

void free_step(FieldState& s, double to, double k) {
  const double d = to - s.x;
  if (d == 0.0) return;
  const double c = std::cos(k * d);
  const double sn = std::sin(k * d);
  const cplx psi = s.psi * c + s.dpsi * (sn / k);
  const cplx dpsi = -k * s.psi * sn + s.dpsi * c;
  s = {to, psi, dpsi};
}

void integrated_free_step(FieldState& s, double to, double k, const IntegratorOptions& options) {
  detail::OdeState<2> y{s.psi, s.dpsi};
  detail::integrate_segment<2>(s.x, to, y, k, [](double, cplx) { return cplx{}; }, options);
  s = {to, y[0], y[1]};
}

}  // namespace

FieldState propagate(const Interaction& interaction, WaveNumber k, const FieldState& seed,
                     Direction direction, const IntegratorOptions& options) {
  const auto [a, b] = support_interval(interaction);
  const double from = direction == Direction::forward ? a : b;
  const double to = direction == Direction::forward ? b : a;
  if (std::abs(seed.x - from) > 1e-9 * std::max(1.0, std::abs(from)))
    throw ValidationError("seed.x", "seed must sit at the " +
                                        std::string(direction == Direction::forward ? "left"
                                                                                    : "right") +
                                        " support endpoint");
  const double kk = k.value();

  if (const auto* smooth = interaction.smooth_part()) {
    detail::OdeState<2> y{seed.psi, seed.dpsi};
    const auto& v = smooth->v;
    detail::integrate_segment<2>(
        from, to, y, kk, [&v](double x, cplx psi) { return v(x, std::abs(psi)); }, options);
    return {to, y[0], y[1]};
  }

  FieldState s{from, seed.psi, seed.dpsi};
  const auto& sites = interaction.sites();
  auto cross = [&](const DeltaSite& site, double sign) {
    if (options.integrate_free_segments)
      integrated_free_step(s, site.c, kk, options);
    else
      free_step(s, site.c, kk);
    s.dpsi += sign * site.f(std::abs(s.psi)) * s.psi;
  };
  if (direction == Direction::forward) {
    for (const auto& site : sites) cross(site, 1.0);
  } else {
    for (auto it = sites.rbegin(); it != sites.rend(); ++it) cross(*it, -1.0);
  }
  s.x = to;
  return s;
}

JostData jost_solve(const Interaction& interaction, WaveNumber k, Side side, double n,
                    const IntegratorOptions& options) {
  if (!(n >= 0.0)) throw ValidationError("n", "seed modulus must be non-negative");
  const auto [a, b] = support_interval(interaction);
  const double kk = k.value();
  JostData j;
  j.side = side;
  j.n = n;
  if (side == Side::left) {
    const cplx e = std::exp(kI * b * kk);
    const FieldState seed{b, n * e, kI * kk * n * e};
    const auto s = propagate(interaction, k, seed, Direction::backward, options);
    j.Fp = 2.0 * kI * kk * n * e;
    j.Fm = 0.0;
    j.Gp = s.dpsi + kI * kk * s.psi;
    j.Gm = s.dpsi - kI * kk * s.psi;
  } else {
    const cplx e = std::exp(-kI * a * kk);
    const FieldState seed{a, n * e, -kI * kk * n * e};
    const auto s = propagate(interaction, k, seed, Direction::forward, options);
    j.Gp = 0.0;
    j.Gm = -2.0 * kI * kk * n * e;
    j.Fp = s.dpsi + kI * kk * s.psi;
    j.Fm = s.dpsi - kI * kk * s.psi;
  }
  return j;
}

JostAmplitudes amplitudes_from_jost(const JostData& j, WaveNumber k, double a, double b) {
  const double kk = k.value();
  const double scale = 2.0 * kk * j.n;
  JostAmplitudes out;
  if (j.side == Side::left) {
    out.A = j.Gp / (2.0 * kI * kk * std::exp(kI * a * kk));
    out.R = -std::exp(2.0 * kI * a * kk) * j.Gm / j.Gp;
    out.T = std::exp(kI * (a - b) * kk) * j.Fp / j.Gp;
    out.defect = scale > 0.0 ? std::abs(j.Gp) / scale : 0.0;
    out.singular = std::abs(j.Gp) < 1e-12 * scale;
  } else {
    out.A = -j.Fm / (2.0 * kI * kk * std::exp(-kI * b * kk));
    out.R = -std::exp(-2.0 * kI * b * kk) * j.Fp / j.Fm;
    out.T = std::exp(kI * (a - b) * kk) * j.Gm / j.Fm;
    out.defect = scale > 0.0 ? std::abs(j.Fm) / scale : 0.0;
    out.singular = std::abs(j.Fm) < 1e-12 * scale;
  }
  return out;
}

double amplitude_map(const Interaction& interaction, WaveNumber k, Side side, double n,
                     const IntegratorOptions& options) {
  const auto j = jost_solve(interaction, k, side, n, options);
  const cplx denom = side == Side::left ? j.Gp : j.Fm;
  return std::abs(denom) / (2.0 * k.value());
}

BranchSet solve_scattering(const Interaction& interaction, WaveNumber k,
                           const Incidence& incidence, const SolveOptions& options) {
  BranchSet out;
  out.k = k;
  out.incidence = incidence;
  const double absA = incidence.magnitude();
  const Side side = incidence.side;
  if (absA == 0.0) {
    out.diagnostics.notes.push_back(
        "zero incident amplitude: no scattering branch (use the spectral-singularity detector)");
    return out;
  }
  const auto [a, b] = support_interval(interaction);
  const auto master = master_residual(interaction, k, side, absA);

  ResidualFn route;
  route.tag = "jost_amplitude_map";
  route.side = side;
  route.eval = [&](double x) {
    return amplitude_map(interaction, k, side, x, options.integrator) - absA;
  };

  auto make_branch = [&](double n, bool tangent) {
    const auto j = jost_solve(interaction, k, side, n, options.integrator);
    const auto amp = amplitudes_from_jost(j, k, a, b);
    Branch br;
    br.n = n;
    br.R = amp.R;
    br.T = amp.T;
    br.tangent = tangent;
    br.singular = amp.singular;
    br.residual = std::abs(master ? (*master)(n) : std::abs(amp.A) - absA);
    return br;
  };

  if (interaction.is_linear()) {
    // |A| is proportional to n; one branch.
    const double slope = amplitude_map(interaction, k, side, 1.0, options.integrator);
    out.diagnostics.grid_points = 1;
    if (!(slope > 1e-12)) {
      out.diagnostics.notes.push_back("linear interaction at a spectral singularity");
      return out;
    }
    out.branches.push_back(make_branch(absA / slope, false));
    out.diagnostics.x_max = absA / slope;
    return out;
  }

  const auto window = default_window(interaction, k, absA, options.scan.window_max);
  const auto report =
      scan_roots(route, window, options.scan);
  for (std::size_t i = 0; i < report.roots.size(); ++i)
    out.branches.push_back(make_branch(report.roots[i], report.tangent[i]));
  out.diagnostics.x_min = window.x_min;
  out.diagnostics.x_max = report.window.x_max;
  out.diagnostics.grid_points = report.grid_points;
  out.diagnostics.window_exhausted = report.window_exhausted;
  if (report.window_exhausted)
    out.diagnostics.notes.push_back("residual still negative at window top; roots may lie beyond");
  if (report.rejected > 0)
    out.diagnostics.notes.push_back(std::to_string(report.rejected) +
                                    " sign change(s) rejected: residual above tolerance");
  return out;
}

}  // namespace nlscatter

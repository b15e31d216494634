#include "nlscatter/xfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ode.hpp"

namespace nlscatter {

namespace {

// M for a single site at c with coupling g = i f(x) / 2K.
Matrix2 site_matrix(cplx g, cplx e2) {
  Matrix2 m;
  m << 1.0 - g, -g / e2, g * e2, 1.0 + g;
  return m;
}

cplx site_coupling(const DeltaSite& site, double k, cplx e2, cplx A, cplx B) {
  return kI / (2.0 * k) * site.f(std::abs(e2 * A + B));
}

// Coefficients left of a site from those right of it. |psi(c)| is the same on
// both sides, so g is computable from either.
Coefficients site_pull_back(const DeltaSite& site, double k, cplx e2, Coefficients plus) {
  const cplx g = site_coupling(site, k, e2, plus.A, plus.B);
  return {(1.0 + g) * plus.A + g / e2 * plus.B, -g * e2 * plus.A + (1.0 - g) * plus.B};
}

Matrix2 double_delta_entries(cplx g1, cplx g2, cplx w, cplx e21) {
  const cplx wc = std::conj(w);
  Matrix2 m;
  m(0, 0) = 1.0 - g1 - g2 + (1.0 - wc) * g1 * g2;
  m(0, 1) = (-g1 - wc * g2 + (1.0 - wc) * g1 * g2) / e21;
  m(1, 0) = e21 * (g1 + w * g2 + (1.0 - w) * g1 * g2);
  m(1, 1) = 1.0 + g1 + g2 + (1.0 - w) * g1 * g2;
  return m;
}

Coefficients decompose(double x, cplx u, cplx du, double k) {
  const cplx e = std::exp(kI * k * x);
  return {(du + kI * k * u) / (2.0 * kI * k) / e, -(du - kI * k * u) / (2.0 * kI * k) * e};
}

bool cfinite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Branch branch_from_matrix(const Matrix2& m, Side side, double n, bool unimodular) {
  Branch br;
  br.n = n;
  const cplx m22 = m(1, 1);
  br.singular = std::abs(m22) < 1e-12;
  if (side == Side::right) {
    br.R = m(0, 1) / m22;
    br.T = 1.0 / m22;
  } else {
    br.R = -m(1, 0) / m22;
    br.T = (unimodular ? cplx{1.0} : m.determinant()) / m22;
  }
  return br;
}

void fill_diagnostics(BranchSet& out, const ScanWindow& w, const RootReport& report) {
  out.diagnostics.x_min = w.x_min;
  out.diagnostics.x_max = w.x_max;
  out.diagnostics.grid_points = report.grid_points;
  out.diagnostics.window_exhausted = report.window_exhausted;
  if (report.window_exhausted)
    out.diagnostics.notes.push_back("residual still negative at window top; roots may lie beyond");
  if (report.rejected > 0)
    out.diagnostics.notes.push_back(std::to_string(report.rejected) +
                                    " sign change(s) rejected: residual above tolerance");
}

// Left incidence without an analytic reduction: damped iteration
// R <- (1-λ) R + λ (-M21/M22)(A, A R) from several starting phases.
BranchSet left_fixed_point(const TransferMap& m, const Incidence& incidence,
                           const FixedPointOptions& fp) {
  BranchSet out;
  out.k = m.k();
  out.incidence = incidence;
  const double A = incidence.magnitude();
  std::vector<cplx> starts{0.0};
  for (double r : {0.5, 0.95})
    for (int j = 0; j < fp.phase_starts; ++j)
      starts.push_back(std::polar(r, 2.0 * std::numbers::pi * j / fp.phase_starts));

  int diverged = 0;
  for (const cplx start : starts) {
    cplx R = start;
    bool converged = false;
    double step = 0.0;
    for (int it = 0; it < fp.max_iter; ++it) {
      Matrix2 M;
      try {
        M = m(A, A * R);
      } catch (const DomainError&) {
        break;
      }
      const cplx target = -M(1, 0) / M(1, 1);
      if (!cfinite(target)) break;
      const cplx next = (1.0 - fp.damping) * R + fp.damping * target;
      step = std::abs(next - R);
      R = next;
      if (step < fp.tol * std::max(1.0, std::abs(R))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      ++diverged;
      continue;
    }
    const Matrix2 M = m(A, A * R);
    Branch br = branch_from_matrix(M, Side::left, 0.0, m.unimodular());
    br.n = A * std::abs(br.T);
    br.residual = std::abs(br.R - R);
    const bool duplicate = std::any_of(out.branches.begin(), out.branches.end(),
                                       [&](const Branch& b) { return std::abs(b.R - br.R) < 1e-8; });
    if (!duplicate) out.branches.push_back(br);
  }
  std::sort(out.branches.begin(), out.branches.end(),
            [](const Branch& l, const Branch& r) { return l.n < r.n; });
  out.diagnostics.grid_points = static_cast<int>(starts.size());
  out.diagnostics.notes.push_back("left incidence by damped fixed-point iteration (best effort)");
  if (diverged > 0)
    out.diagnostics.notes.push_back(std::to_string(diverged) + " of " +
                                    std::to_string(starts.size()) + " starts did not converge");
  return out;
}

}  // namespace

std::string_view to_string(TransferKind kind) noexcept {
  switch (kind) {
    case TransferKind::identity: return "identity";
    case TransferKind::closed_form_delta: return "closed_form_delta";
    case TransferKind::closed_form_double_delta: return "closed_form_double_delta";
    case TransferKind::composed: return "composed";
    case TransferKind::numeric: return "numeric";
  }
  return "?";
}

TransferMap::TransferMap(WaveNumber k, TransferKind kind, Support support, Eval eval)
    : k_(k), kind_(kind), support_(support), eval_(std::move(eval)) {}

TransferMap TransferMap::identity(WaveNumber k, Support support) {
  TransferMap m(k, TransferKind::identity, support,
                [](cplx, cplx) -> Matrix2 { return Matrix2::Identity(); });
  m.with_pull_back([](Coefficients c) { return c; });
  m.with_left_seed([](double n) { return Coefficients{n, 0.0}; });
  m.with_scan_hints(0.0, false, true);
  return m;
}

TransferMap& TransferMap::with_pull_back(PullBack p) {
  pull_back_ = std::move(p);
  return *this;
}

TransferMap& TransferMap::with_left_seed(LeftSeed s) {
  left_seed_ = std::move(s);
  return *this;
}

TransferMap& TransferMap::with_scan_hints(double coupling_scale, bool negative_powers, bool linear) {
  coupling_scale_ = coupling_scale;
  negative_powers_ = negative_powers;
  linear_ = linear;
  return *this;
}

Coefficients apply_transfer(const TransferMap& m, cplx A_minus, cplx B_minus) {
  const Matrix2 M = m(A_minus, B_minus);
  return {M(0, 0) * A_minus + M(0, 1) * B_minus, M(1, 0) * A_minus + M(1, 1) * B_minus};
}

TransferMap delta_transfer(const DeltaSite& site, WaveNumber k) {
  const double kk = k.value();
  const cplx e2 = std::exp(2.0 * kI * site.c * kk);
  TransferMap m(k, TransferKind::closed_form_delta, {site.c, site.c},
                [site, kk, e2](cplx A, cplx B) {
                  return site_matrix(site_coupling(site, kk, e2, A, B), e2);
                });
  m.with_pull_back([site, kk, e2](Coefficients c) { return site_pull_back(site, kk, e2, c); });
  m.with_left_seed([site, kk, e2](double n) { return site_pull_back(site, kk, e2, {n, 0.0}); });
  m.with_scan_hints(site.f.coupling_scale(), site.f.has_negative_power(), site.f.is_linear());
  return m;
}

TransferMap compose(const TransferMap& m2, const TransferMap& m1) {
  const bool id1 = m1.kind() == TransferKind::identity;
  const bool id2 = m2.kind() == TransferKind::identity;
  if (!id1 && !id2 && m1.support().b > m2.support().a)
    throw SupportOverlapError("compose: first map's support [" + std::to_string(m1.support().a) +
                              ", " + std::to_string(m1.support().b) +
                              "] must lie left of the second's [" +
                              std::to_string(m2.support().a) + ", " +
                              std::to_string(m2.support().b) + "]");
  const Support support = id1 ? m2.support() : id2 ? m1.support()
                                                   : Support{m1.support().a, m2.support().b};
  TransferMap out(m1.k(), TransferKind::composed, support, [m1, m2](cplx A, cplx B) -> Matrix2 {
    const Matrix2 M1 = m1(A, B);
    const cplx A0 = M1(0, 0) * A + M1(0, 1) * B;
    const cplx B0 = M1(1, 0) * A + M1(1, 1) * B;
    return m2(A0, B0) * M1;
  });
  if (m1.pull_back() && m2.pull_back()) {
    const auto p1 = *m1.pull_back();
    const auto p2 = *m2.pull_back();
    out.with_pull_back([p1, p2](Coefficients c) { return p1(p2(c)); });
  }
  if (m1.pull_back() && m2.left_seed()) {
    const auto p1 = *m1.pull_back();
    const auto s2 = *m2.left_seed();
    out.with_left_seed([p1, s2](double n) { return p1(s2(n)); });
  }
  out.with_scan_hints(m1.coupling_scale() + m2.coupling_scale(),
                      m1.negative_powers() || m2.negative_powers(), m1.linear() && m2.linear());
  return out;
}

Matrix2 double_delta_matrix(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k, cplx A_minus,
                            cplx B_minus) {
  if (!(s1.c < s2.c)) throw ValidationError("sites", "double delta requires c1 < c2");
  const double kk = k.value();
  const cplx e21 = std::exp(2.0 * kI * s1.c * kk);
  const cplx e22 = std::exp(2.0 * kI * s2.c * kk);
  const cplx w = std::exp(2.0 * kI * (s2.c - s1.c) * kk);
  const cplx pre = kI / (2.0 * kk);
  const cplx g1 = pre * s1.f(std::abs(e21 * A_minus + B_minus));
  const cplx A0 = (1.0 - g1) * A_minus - g1 / e21 * B_minus;
  const cplx B0 = e21 * g1 * A_minus + (1.0 + g1) * B_minus;
  const cplx g2 = pre * s2.f(std::abs(e22 * A0 + B0));
  return double_delta_entries(g1, g2, w, e21);
}

TransferMap double_delta_transfer(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k) {
  if (!(s1.c < s2.c)) throw ValidationError("sites", "double delta requires c1 < c2");
  const double kk = k.value();
  const cplx e21 = std::exp(2.0 * kI * s1.c * kk);
  const cplx e22 = std::exp(2.0 * kI * s2.c * kk);
  TransferMap m(k, TransferKind::closed_form_double_delta, {s1.c, s2.c},
                [s1, s2, k](cplx A, cplx B) { return double_delta_matrix(s1, s2, k, A, B); });
  m.with_pull_back([s1, s2, kk, e21, e22](Coefficients c) {
    return site_pull_back(s1, kk, e21, site_pull_back(s2, kk, e22, c));
  });
  // Left reduction: g2 = g2(|N|), g1 = g1(|N|), then (A-, B-) = M^{-1} (N, 0).
  m.with_left_seed([s1, s2, k, e21](double n) {
    const auto g = double_delta_couplings(s1, s2, k, Side::left, n);
    const Matrix2 M = double_delta_entries(g.g1, g.g2, g.w, e21);
    return Coefficients{n * M(1, 1), -n * M(1, 0)};
  });
  m.with_scan_hints(s1.f.coupling_scale() + s2.f.coupling_scale(),
                    s1.f.has_negative_power() || s2.f.has_negative_power(),
                    s1.f.is_linear() && s2.f.is_linear());
  return m;
}

TransferMap gauge_perturb(const TransferMap& m, const GaugeTransform& g) {
  TransferMap out = m;
  const auto base = m.eval_;
  const auto f1 = g.f1;
  const auto f2 = g.f2;
  out.eval_ = [base, f1, f2](cplx A, cplx B) -> Matrix2 {
    Matrix2 M = base(A, B);
    const cplx a1 = f1 ? f1(A, B) : cplx{};
    const cplx a2 = f2 ? f2(A, B) : cplx{};
    M(0, 0) += a1 * B;
    M(0, 1) -= a1 * A;
    M(1, 0) += a2 * B;
    M(1, 1) -= a2 * A;
    return M;
  };
  out.perturbed_ = true;
  return out;
}

IntegratorOptions numeric_transfer_defaults() {
  IntegratorOptions o;
  o.rtol = 1e-15;
  o.atol = 1e-17;
  o.integrate_free_segments = true;
  return o;
}

TransferMap numeric_transfer(const Interaction& interaction, WaveNumber k,
                             const IntegratorOptions& options) {
  const Support s = support_interval(interaction);
  const double kk = k.value();
  auto eval = [interaction, s, kk, options](cplx A, cplx B) -> Matrix2 {
    const cplx ep = std::exp(kI * kk * s.a);
    const cplx em = 1.0 / ep;
    // (psi, psi', u1, u1', u2, u2'); u1 = e^{iKx}, u2 = e^{-iKx} left of the support.
    detail::OdeState<6> y{A * ep + B * em, kI * kk * (A * ep - B * em),
                          ep, kI * kk * ep, em, -kI * kk * em};
    if (const auto* smooth = interaction.smooth_part()) {
      const auto& v = smooth->v;
      detail::integrate_segment<6>(
          s.a, s.b, y, kk, [&v](double x, cplx psi) { return v(x, std::abs(psi)); }, options);
    } else {
      double x = s.a;
      for (const auto& site : interaction.sites()) {
        if (options.integrate_free_segments) {
          detail::integrate_segment<6>(x, site.c, y, kk, [](double, cplx) { return cplx{}; },
                                       options);
        } else {
          const double d = site.c - x;
          const double c = std::cos(kk * d), sn = std::sin(kk * d);
          for (std::size_t j = 0; j < 6; j += 2) {
            const cplx u = y[j] * c + y[j + 1] * (sn / kk);
            y[j + 1] = -kk * y[j] * sn + y[j + 1] * c;
            y[j] = u;
          }
        }
        x = site.c;
        const cplx fc = site.f(std::abs(y[0]));
        for (std::size_t j = 0; j < 6; j += 2) y[j + 1] += fc * y[j];
      }
    }
    const auto c1 = decompose(s.b, y[2], y[3], kk);
    const auto c2 = decompose(s.b, y[4], y[5], kk);
    Matrix2 M;
    M << c1.A, c2.A, c1.B, c2.B;
    return M;
  };
  TransferMap m(k, TransferKind::numeric, s, std::move(eval));
  bool linear = interaction.is_linear();
  m.with_scan_hints(interaction.coupling_scale(), interaction.has_negative_power(), linear);
  return m;
}

TransferMap transfer_map(const Interaction& interaction, WaveNumber k) {
  if (!interaction.is_delta_chain()) return numeric_transfer(interaction, k);
  const auto& sites = interaction.sites();
  if (sites.empty()) return TransferMap::identity(k);
  if (sites.size() == 1) return delta_transfer(sites[0], k);
  if (sites.size() == 2) return double_delta_transfer(sites[0], sites[1], k);
  TransferMap m = delta_transfer(sites[0], k);
  for (std::size_t i = 1; i < sites.size(); ++i) m = compose(delta_transfer(sites[i], k), m);
  return m;
}

Matrix2 side_matrix(const TransferMap& m, Side side, double n) {
  if (side == Side::right) return m(0.0, n);
  if (!m.left_seed())
    throw std::logic_error("side_matrix: left incidence needs a map with a left reduction");
  const auto c = (*m.left_seed())(n);
  return m(c.A, c.B);
}

BranchSet rt_from_transfer(const TransferMap& m, const Incidence& incidence,
                           const TransferSolveOptions& options) {
  const double absA = incidence.magnitude();
  const Side side = incidence.side;
  BranchSet out;
  out.k = m.k();
  out.incidence = incidence;
  if (absA == 0.0) {
    out.diagnostics.notes.push_back(
        "zero incident amplitude: no scattering branch (use the spectral-singularity detector)");
    return out;
  }
  if (side == Side::left && !m.left_seed()) return left_fixed_point(m, incidence, options.fixed_point);

  // Right: |A| = |N| |M22(0, N)|. Left: the reduction gives (A-, B-) for
  // transmitted modulus n, so |A| = |A-|, R = B-/A- and T = n/A-.
  auto inverse_t = [&](double x) {
    if (side == Side::right) return std::abs(m(0.0, x)(1, 1));
    return std::abs((*m.left_seed())(x).A) / x;
  };
  ResidualFn route;
  route.tag = side == Side::right ? "transfer_m22" : "transfer_left_reduction";
  route.side = side;
  route.eval = [&](double x) { return x * inverse_t(x) - absA; };

  auto make_branch = [&](double n, bool tangent) {
    Branch br;
    if (side == Side::right) {
      br = branch_from_matrix(m(0.0, n), side, n, m.unimodular());
    } else {
      const auto c = (*m.left_seed())(n);
      br.n = n;
      br.R = c.B / c.A;
      br.T = n / c.A;
      br.singular = std::abs(c.A) < 1e-12 * n;
    }
    br.tangent = tangent;
    br.residual = std::abs(route(n));
    return br;
  };

  if (m.linear()) {
    const double slope = inverse_t(1.0);
    out.diagnostics.grid_points = 1;
    if (!(slope > 1e-12)) {
      out.diagnostics.notes.push_back("linear interaction at a spectral singularity");
      return out;
    }
    out.branches.push_back(make_branch(absA / slope, false));
    out.diagnostics.x_max = absA / slope;
    return out;
  }

  const auto window = default_window(m.coupling_scale(), m.negative_powers(), m.k(), absA,
                                     options.scan.window_max);
  const auto report = scan_roots(route, window, options.scan);
  for (std::size_t i = 0; i < report.roots.size(); ++i)
    out.branches.push_back(make_branch(report.roots[i], report.tangent[i]));
  fill_diagnostics(out, report.window, report);
  return out;
}

BranchSet rt_from_transfer(const Interaction& interaction, WaveNumber k, const Incidence& incidence,
                           const TransferSolveOptions& options) {
  auto out = rt_from_transfer(transfer_map(interaction, k), incidence, options);
  if (const auto master = master_residual(interaction, k, incidence.side, incidence.magnitude()))
    for (auto& br : out.branches) br.residual = std::abs((*master)(br.n));
  return out;
}

}  // namespace nlscatter

#include "nlscatter/phenomena.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace nlscatter {

namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

// Gauss-Newton on a complex function of D real unknowns (two real equations).
// The minimum-norm step handles rank-deficient Jacobians, which occur on
// curves of zeros and in the n-independent linear case.
template <int D, class F>
std::pair<Vec<D>, double> gauss_newton(F&& f, Vec<D> x, const Vec<D>& lower) {
  auto safe = [&](const Vec<D>& p) -> cplx {
    try {
      const cplx v = f(p);
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) return v;
    } catch (const DomainError&) {
    } catch (const ValidationError&) {
    }
    return {kHuge, 0.0};
  };
  cplx r = safe(x);
  for (int it = 0; it < 60 && std::abs(r) > 1e-16; ++it) {
    Eigen::Matrix<double, 2, D> J;
    for (int j = 0; j < D; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
      Vec<D> xp = x, xm = x;
      xp(j) += h;
      xm(j) = std::max(lower(j), xm(j) - h);
      const cplx d = (safe(xp) - safe(xm)) / (xp(j) - xm(j));
      J(0, j) = d.real();
      J(1, j) = d.imag();
    }
    const Vec<2> rv(r.real(), r.imag());
    // Columns at finite-difference noise level count as zero.
    Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 2, D>> cod;
    cod.setThreshold(1e-6);
    cod.compute(J);
    const Vec<D> step = -cod.solve(rv);
    if (!step.allFinite()) break;
    bool improved = false;
    for (double t = 1.0; t > 1e-8; t *= 0.5) {
      Vec<D> xn = (x + t * step).cwiseMax(lower);
      const cplx rn = safe(xn);
      if (std::abs(rn) < std::abs(r)) {
        x = xn;
        r = rn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {x, std::abs(r)};
}

// Complex singularity defect G+^l/(2Kn) or F-^r/(2Kn).
cplx singular_defect(const Interaction& i, double k, Side side, double n,
                     const IntegratorOptions& opt) {
  const auto j = jost_solve(i, WaveNumber(k), side, n, opt);
  return (side == Side::left ? j.Gp : j.Fm) / (2.0 * k * n);
}

SingularityReport make_report(const Interaction& i, double k, double n, Side side,
                              const IntegratorOptions& opt) {
  const auto j = jost_solve(i, WaveNumber(k), side, n, opt);
  SingularityReport rep;
  rep.k_star = k;
  rep.n_star = n;
  rep.side = side;
  const double four_k2 = 4.0 * k * k;
  if (side == Side::left) {
    rep.defect = std::abs(j.Gp) / (2.0 * k * n);
    rep.I_minus = std::norm(j.Gm) / four_k2;
    rep.I_plus = n * n;
  } else {
    rep.defect = std::abs(j.Fm) / (2.0 * k * n);
    rep.I_minus = n * n;
    rep.I_plus = std::norm(j.Fp) / four_k2;
  }
  return rep;
}

std::vector<double> linspace(Range r, int count) {
  std::vector<double> out;
  if (count <= 1 || r.hi == r.lo) return {r.lo};
  for (int i = 0; i < count; ++i) out.push_back(r.lo + (r.hi - r.lo) * i / (count - 1));
  return out;
}

bool in_range(double v, Range r) {
  const double slack = 1e-12 * std::max(1.0, std::abs(r.hi));
  return v >= r.lo - slack && v <= r.hi + slack;
}

void check_ranges(Range k_range, Range n_range) {
  if (!(k_range.lo > 0.0) || !(k_range.hi >= k_range.lo))
    throw ValidationError("k_range", "need 0 < k_min <= k_max");
  if (!(n_range.lo > 0.0) || !(n_range.hi >= n_range.lo))
    throw ValidationError("n_range", "need 0 < n_min <= n_max");
}

// Single site: 2K + i f(n) = 0, i.e. Re f(n) = 0 and K = Im f(n)/2 > 0.
std::vector<SingularityReport> single_site_singularities(const Interaction& i, Side side,
                                                         Range k_range, Range n_range,
                                                         const DetectorOptions& opt) {
  const auto& f = i.sites().front().f;
  const auto ns = linspace(n_range, opt.n_grid);
  std::vector<double> candidates;
  auto re = [&](double n) { return f(n).real(); };
  auto flat = [&](double n) { return std::abs(re(n)) <= opt.tol * std::max(1.0, std::abs(f(n))); };
  for (std::size_t j = 0; j < ns.size(); ++j) {
    if (flat(ns[j])) {
      candidates.push_back(ns[j]);
      continue;
    }
    if (j + 1 < ns.size() && !flat(ns[j + 1]) && (re(ns[j]) < 0.0) != (re(ns[j + 1]) < 0.0)) {
      double lo = ns[j], hi = ns[j + 1];
      const bool lo_neg = re(lo) < 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((re(mid) < 0.0) == lo_neg ? lo : hi) = mid;
      }
      candidates.push_back(std::abs(re(lo)) < std::abs(re(hi)) ? lo : hi);
    }
  }
  std::vector<SingularityReport> out;
  for (double n : candidates) {
    const double k = 0.5 * f(n).imag();
    if (!(k > 0.0) || !in_range(k, k_range)) continue;
    auto rep = make_report(i, k, n, side, opt.integrator);
    if (rep.defect < opt.tol) out.push_back(rep);
  }
  return out;
}

std::vector<SingularityReport> scanned_singularities(const Interaction& i, Side side,
                                                     Range k_range, Range n_range,
                                                     const DetectorOptions& opt) {
  const auto ks = linspace(k_range, opt.k_grid);
  const auto ns = linspace(n_range, opt.n_grid);
  const int nk = static_cast<int>(ks.size()), nn = static_cast<int>(ns.size());
  std::vector<double> d(static_cast<std::size_t>(nk * nn), kHuge);
  auto at = [&](int a, int b) -> double& { return d[static_cast<std::size_t>(a * nn + b)]; };
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nn; ++b) {
      try {
        at(a, b) = std::abs(singular_defect(i, ks[a], side, ns[b], opt.integrator));
      } catch (const DomainError&) {
      }
    }
  struct Seed {
    double d;
    int a, b;
  };
  std::vector<Seed> seeds;
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nn; ++b) {
      const double v = at(a, b);
      if (v == kHuge) continue;
      bool minimum = true;
      for (int da = -1; da <= 1 && minimum; ++da)
        for (int db = -1; db <= 1; ++db) {
          const int aa = a + da, bb = b + db;
          if ((da || db) && aa >= 0 && aa < nk && bb >= 0 && bb < nn && at(aa, bb) < v) {
            minimum = false;
            break;
          }
        }
      if (minimum) seeds.push_back({v, a, b});
    }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& l, const Seed& r) { return l.d < r.d; });
  if (seeds.size() > 400) seeds.resize(400);

  std::vector<SingularityReport> out;
  const Vec<2> lower(1e-12, 1e-12);
  for (const auto& s : seeds) {
    auto fn = [&](const Vec<2>& p) { return singular_defect(i, p(0), side, p(1), opt.integrator); };
    const auto [p, res] = gauss_newton<2>(fn, Vec<2>(ks[s.a], ns[s.b]), lower);
    if (!(res < opt.tol) || !in_range(p(0), k_range) || !in_range(p(1), n_range)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const SingularityReport& r) {
      return std::abs(r.k_star - p(0)) < 1e-7 * std::max(1.0, p(0)) &&
             std::abs(r.n_star - p(1)) < 1e-7 * std::max(1.0, p(1));
    });
    if (!dup) out.push_back(make_report(i, p(0), p(1), side, opt.integrator));
  }
  return out;
}

}  // namespace

std::vector<Side> sides_of(SideSelector selector) {
  switch (selector) {
    case SideSelector::left: return {Side::left};
    case SideSelector::right: return {Side::right};
    case SideSelector::both: return {Side::left, Side::right};
  }
  return {};
}

JostConditions jost_conditions(const Interaction& interaction, WaveNumber k, Side side, double n,
                               const IntegratorOptions& options) {
  const auto j = jost_solve(interaction, k, side, n, options);
  const auto [a, b] = support_interval(interaction);
  const double kk = k.value();
  const double scale = 2.0 * kk * n;
  const cplx phase = std::exp(kI * (b - a) * kk);
  if (side == Side::left)
    return {std::abs(j.Gp) / scale, std::abs(j.Gm) / scale, std::abs(j.Fp - phase * j.Gp) / scale};
  return {std::abs(j.Fm) / scale, std::abs(j.Fp) / scale, std::abs(j.Gm - phase * j.Fm) / scale};
}

TransferConditions transfer_conditions(const TransferMap& m, Side side, double n) {
  const Matrix2 M = side_matrix(m, side, n);
  if (side == Side::left)
    return {std::abs(M(1, 1)), std::abs(M(1, 0)), std::abs(M(1, 1) - M.determinant())};
  return {std::abs(M(1, 1)), std::abs(M(0, 1)), std::abs(M(1, 1) - 1.0)};
}

std::vector<SingularityReport> detect_spectral_singularity(const Interaction& interaction,
                                                           Side side, Range k_range,
                                                           Range n_range,
                                                           const DetectorOptions& options) {
  check_ranges(k_range, n_range);
  std::vector<SingularityReport> out;
  if (interaction.is_delta_chain() && interaction.sites().empty()) return out;
  if (interaction.is_delta_chain() && interaction.sites().size() == 1)
    out = single_site_singularities(interaction, side, k_range, n_range, options);
  else
    out = scanned_singularities(interaction, side, k_range, n_range, options);
  std::sort(out.begin(), out.end(), [](const SingularityReport& l, const SingularityReport& r) {
    return l.k_star != r.k_star ? l.k_star < r.k_star : l.n_star < r.n_star;
  });
  return out;
}

std::vector<SingularityReport> detect_time_reversed_ss(const Interaction& interaction, Side side,
                                                       Range k_range, Range n_range,
                                                       const DetectorOptions& options) {
  return detect_spectral_singularity(interaction.negated(), side, k_range, n_range, options);
}

ReflectionlessReport find_reflectionless(const Interaction& interaction, Side side, WaveNumber k,
                                         Range a_range, const DetectorOptions& options) {
  if (!(a_range.lo >= 0.0) || !(a_range.hi >= a_range.lo) || !(a_range.hi > 0.0))
    throw ValidationError("a_range", "need 0 <= a_min <= a_max, a_max > 0");
  ReflectionlessReport report;
  const double kk = k.value();
  auto defect = [&](double n) -> cplx {
    const auto j = jost_solve(interaction, k, side, n, options.integrator);
    return (side == Side::left ? j.Gm : j.Fp) / (2.0 * kk * n);
  };
  const auto window = default_window(interaction, k, a_range.hi);
  const double lo = std::max(window.x_min, kMinScanX);
  std::vector<double> ns;
  for (int j = 0; j < options.n_scan; ++j)
    ns.push_back(lo + (window.x_max - lo) * j / (options.n_scan - 1));
  std::vector<double> ds(ns.size(), kHuge);
  for (std::size_t j = 0; j < ns.size(); ++j) {
    try {
      ds[j] = std::abs(defect(ns[j]));
    } catch (const DomainError&) {
    }
  }
  if (std::all_of(ds.begin(), ds.end(), [&](double v) { return v < options.tol; })) {
    report.every_amplitude = true;
    return report;
  }
  const auto [a, b] = support_interval(interaction);
  std::vector<double> roots;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    const bool left_ok = j == 0 || ds[j] <= ds[j - 1];
    const bool right_ok = j + 1 == ns.size() || ds[j] <= ds[j + 1];
    if (!left_ok || !right_ok || ds[j] == kHuge) continue;
    auto fn = [&](const Vec<1>& p) { return defect(p(0)); };
    const auto [p, res] = gauss_newton<1>(fn, Vec<1>(ns[j]), Vec<1>(lo));
    if (!(res < options.tol)) continue;
    const double n = p(0);
    if (std::any_of(roots.begin(), roots.end(),
                    [&](double r) { return std::abs(r - n) < 1e-9 * std::max(1.0, n); }))
      continue;
    roots.push_back(n);
    const auto jd = jost_solve(interaction, k, side, n, options.integrator);
    const auto amp = amplitudes_from_jost(jd, k, a, b);
    const double absA = std::abs(amp.A);
    if (!in_range(absA, a_range)) continue;
    Branch br;
    br.n = n;
    br.R = amp.R;
    br.T = amp.T;
    br.singular = amp.singular;
    if (const auto master = master_residual(interaction, k, side, absA))
      br.residual = std::abs((*master)(n));
    report.hits.push_back({absA, br});
  }
  std::sort(report.hits.begin(), report.hits.end(),
            [](const ReflectionlessHit& l, const ReflectionlessHit& r) { return l.absA < r.absA; });
  return report;
}

std::vector<TransparencyReport> check_transparency(const Interaction& interaction, WaveNumber k,
                                                   const Incidence& incidence,
                                                   const SolveOptions& options, double tol) {
  const auto set = solve_scattering(interaction, k, incidence, options);
  std::vector<TransparencyReport> out;
  for (const auto& br : set.branches) {
    const double t_defect = std::abs(br.T - 1.0);
    const double r_abs = std::abs(br.R);
    out.push_back({br, t_defect, r_abs, t_defect < tol && r_abs < tol});
  }
  return out;
}

std::pair<double, bool> match_transmission(std::vector<double> left, std::vector<double> right) {
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  const bool mismatch = left.size() != right.size();
  if (!mismatch) {
    double gap = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) gap = std::max(gap, std::abs(left[i] - right[i]));
    return {gap, false};
  }
  auto& small = left.size() < right.size() ? left : right;
  auto large = left.size() < right.size() ? right : left;
  double gap = 0.0;
  for (double v : small) {
    auto best = std::min_element(large.begin(), large.end(), [v](double p, double q) {
      return std::abs(p - v) < std::abs(q - v);
    });
    gap = std::max(gap, std::abs(*best - v));
    large.erase(best);
  }
  return {gap, true};
}

std::vector<NonreciprocityRow> nonreciprocity_scan(const Interaction& interaction,
                                                   const std::vector<WaveNumber>& k_grid,
                                                   double absA,
                                                   const TransferSolveOptions& options) {
  if (!(absA > 0.0)) throw ValidationError("absA", "incident amplitude must be positive");
  std::vector<NonreciprocityRow> rows;
  for (const auto& k : k_grid) {
    NonreciprocityRow row;
    row.k = k.value();
    for (const Side side : {Side::left, Side::right}) {
      const auto set = rt_from_transfer(interaction, k, Incidence(side, absA), options);
      auto& dst = side == Side::left ? row.left_T2 : row.right_T2;
      for (const auto& br : set.branches) dst.push_back(std::norm(br.T));
    }
    std::tie(row.gap, row.structural_mismatch) = match_transmission(row.left_T2, row.right_T2);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nlscatter

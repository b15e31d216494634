#include "nlscatter/selfconsist.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nlscatter {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_eval(const ResidualFn& r, double x) {
  try {
    return r(x);
  } catch (const DomainError&) {
    return kNaN;
  }
}

struct Candidate {
  double x;
  double residual;
  bool tangent;
};

double bisect(const ResidualFn& r, double lo, double hi, double rlo, double tol) {
  double best = lo;
  double best_r = std::abs(rlo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double rm = r(mid);
    if (std::abs(rm) < best_r) {
      best = mid;
      best_r = std::abs(rm);
    }
    if (rm == 0.0) return mid;
    if ((rm < 0.0) == (rlo < 0.0)) {
      lo = mid;
      rlo = rm;
    } else {
      hi = mid;
    }
    if (hi - lo <= tol * std::abs(mid)) break;
  }
  const double rh = std::abs(r(hi));
  if (rh < best_r) best = hi;
  const double rl = std::abs(r(lo));
  if (rl < std::min(best_r, rh)) best = lo;
  return best;
}

std::vector<double> build_grid(const ScanWindow& w, int grid_n) {
  std::vector<double> xs;
  const bool two_zone = w.x_core && *w.x_core > w.x_min && *w.x_core < w.x_max;
  const double top = two_zone ? *w.x_core : w.x_max;
  xs.reserve(static_cast<std::size_t>(grid_n) * 3 / 2 + 1);
  for (int i = 0; i < grid_n; ++i)
    xs.push_back(w.x_min + (top - w.x_min) * static_cast<double>(i) / (grid_n - 1));
  if (two_zone) {
    const int tail = std::max(2, grid_n / 2);
    const double ratio = std::log(w.x_max / top);
    for (int i = 1; i <= tail; ++i) xs.push_back(top * std::exp(ratio * i / tail));
    xs.back() = w.x_max;
  }
  return xs;
}

// Real roots of a u^3 + b u^2 + c u + d, each polished by Newton on the
// original polynomial.
std::vector<double> real_cubic_roots(double a, double b, double c, double d) {
  const double p = (3.0 * a * c - b * b) / (3.0 * a * a);
  const double q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
  const double shift = -b / (3.0 * a);
  std::vector<double> roots;
  const double disc = -(4.0 * p * p * p + 27.0 * q * q);
  if (disc > 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int j = 0; j < 3; ++j)
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * j / 3.0) + shift);
  } else {
    const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + shift);
  }
  for (auto& u : roots) {
    for (int it = 0; it < 8; ++it) {
      const double f = ((a * u + b) * u + c) * u + d;
      const double df = (3.0 * a * u + 2.0 * b) * u + c;
      if (df == 0.0) break;
      const double step = f / df;
      u -= step;
      if (std::abs(step) <= 1e-16 * std::abs(u)) break;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::string describe_site(const DeltaSite& s) {
  std::ostringstream os;
  os << "c=" << s.c << " f=" << s.f.describe();
  return os.str();
}

}  // namespace

ResidualFn single_delta_residual(const NonlinearityFn& f, WaveNumber k, double absA) {
  const double two_k = 2.0 * k.value();
  ResidualFn r;
  r.tag = "single_delta";
  r.params = "f=" + f.describe() + " K=" + std::to_string(k.value()) +
             " |A|=" + std::to_string(absA);
  r.eval = [f, two_k, absA](double x) {
    const cplx fh = f(x) / two_k;
    const double x2 = x * x;
    return x2 * std::norm(fh) - 2.0 * x2 * fh.imag() + x2 - absA * absA;
  };
  return r;
}

double single_delta_residual_factored(const NonlinearityFn& f, WaveNumber k, double absA,
                                      double x) {
  const cplx fh = f(x) / (2.0 * k.value());
  return x * x * std::norm(1.0 + kI * fh) - absA * absA;
}

std::vector<double> kerr_roots(cplx z, WaveNumber k, double absA) {
  if (z == cplx{}) throw ValidationError("z", "Kerr coupling must be nonzero");
  if (!(absA >= 0.0)) throw ValidationError("absA", "must be non-negative");
  if (absA == 0.0) return {0.0};
  const cplx zh = z / (2.0 * k.value());
  const auto us = real_cubic_roots(std::norm(zh), -2.0 * zh.imag(), 1.0, -absA * absA);
  std::vector<double> xs;
  for (double u : us) {
    if (!(u > 0.0)) continue;
    const double x = std::sqrt(u);
    if (!xs.empty() && std::abs(x - xs.back()) <= 1e-12 * std::max(1.0, x)) continue;
    xs.push_back(x);
  }
  return xs;
}

double kerr_root(cplx z, WaveNumber k, double absA) {
  auto xs = kerr_roots(z, k, absA);
  if (xs.size() != 1) {
    std::ostringstream os;
    os << "Kerr cubic has " << xs.size() << " positive roots for z=" << z
       << " K=" << k.value() << " |A|=" << absA;
    throw NonUniqueRootError(os.str(), std::move(xs));
  }
  return xs.front();
}

DoubleDeltaCouplings double_delta_couplings(const DeltaSite& s1, const DeltaSite& s2,
                                            WaveNumber k, Side side, double x) {
  const double kk = k.value();
  const cplx w = std::exp(2.0 * kI * (s2.c - s1.c) * kk);
  const cplx pre = kI / (2.0 * kk);
  DoubleDeltaCouplings g{{}, {}, w};
  if (side == Side::left) {
    g.g2 = pre * s2.f(x);
    g.g1 = pre * s1.f(x * std::abs((1.0 - w) * g.g2 + 1.0));
  } else {
    g.g1 = pre * s1.f(x);
    g.g2 = pre * s2.f(x * std::abs((1.0 - w) * g.g1 + 1.0));
  }
  return g;
}

ResidualFn double_delta_residual(const DeltaSite& s1, const DeltaSite& s2, WaveNumber k,
                                 Side side, double absA) {
  if (!(s1.c < s2.c)) throw ValidationError("sites", "double delta requires c1 < c2");
  ResidualFn r;
  r.tag = "double_delta";
  r.side = side;
  r.params = describe_site(s1) + "; " + describe_site(s2) + " K=" + std::to_string(k.value()) +
             " |A|=" + std::to_string(absA);
  r.eval = [s1, s2, k, side, absA](double x) {
    const auto g = double_delta_couplings(s1, s2, k, side, x);
    return x * std::abs((1.0 - g.w) * g.g1 * g.g2 + g.g1 + g.g2 + 1.0) - absA;
  };
  return r;
}

std::optional<ResidualFn> master_residual(const Interaction& interaction, WaveNumber k,
                                          Side side, double absA) {
  if (!interaction.is_delta_chain()) return std::nullopt;
  const auto& sites = interaction.sites();
  if (sites.empty()) return single_delta_residual(NonlinearityFn::zero(), k, absA);
  if (sites.size() == 1) {
    auto r = single_delta_residual(sites[0].f, k, absA);
    r.side = side;
    return r;
  }
  if (sites.size() == 2) return double_delta_residual(sites[0], sites[1], k, side, absA);
  return std::nullopt;
}

ScanWindow default_window(double coupling_scale, bool negative_powers, WaveNumber k,
                          double absA, std::optional<double> window_max) {
  ScanWindow w;
  w.x_min = negative_powers ? kMinScanX : 0.0;
  const double base = absA > 0.0 ? absA : 1.0;
  const double s = coupling_scale / (2.0 * k.value());
  const double core = 10.0 * base;
  w.x_max = window_max ? *window_max : std::max(core, core * (1.0 + s) * (1.0 + s));
  if (w.x_max > core) w.x_core = core;
  return w;
}

ScanWindow default_window(const Interaction& interaction, WaveNumber k, double absA,
                          std::optional<double> window_max) {
  return default_window(interaction.coupling_scale(), interaction.has_negative_power(), k, absA,
                        window_max);
}

RootReport enumerate_roots(const ResidualFn& residual, const ScanWindow& window, int grid_n,
                           double tol, double residual_tol) {
  if (grid_n < 2) throw ValidationError("grid_n", "need at least two grid points");
  if (!(window.x_max > window.x_min) || window.x_min < 0.0)
    throw ValidationError("window", "scan window must satisfy 0 <= x_min < x_max");

  RootReport report;
  report.window = window;
  const auto xs = build_grid(window, grid_n);
  report.grid_points = static_cast<int>(xs.size());
  std::vector<double> rs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) rs[i] = safe_eval(residual, xs[i]);

  std::vector<Candidate> found;
  auto accept = [&](double x, bool tangent) {
    const double r = safe_eval(residual, x);
    if (std::isfinite(r) && std::abs(r) <= residual_tol)
      found.push_back({x, r, tangent});
    else
      ++report.rejected;
  };

  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (rs[i] == 0.0) accept(xs[i], false);
    if (i + 1 == xs.size()) break;
    const double r0 = rs[i];
    const double r1 = rs[i + 1];
    if (!std::isfinite(r0) || !std::isfinite(r1)) continue;
    if (r0 != 0.0 && r1 != 0.0 && (r0 < 0.0) != (r1 < 0.0))
      accept(bisect(residual, xs[i], xs[i + 1], r0, tol), false);
  }

  // Residual already positive at a nonzero window floor (negative powers):
  // the first crossing lies below it. Descend by decades to bracket it.
  if (window.x_min > 0.0 && std::isfinite(rs[0]) && rs[0] > 0.0) {
    double hi = xs[0];
    for (double lo = hi / 10.0; lo > 1e-300; hi = lo, lo /= 10.0) {
      const double rlo = safe_eval(residual, lo);
      if (!std::isfinite(rlo)) break;
      if (rlo <= 0.0) {
        accept(rlo == 0.0 ? lo : bisect(residual, lo, hi, rlo, tol), false);
        report.extended_below = true;
        break;
      }
    }
  }

  // Local minima of |r| without a sign change: either a fold (double root)
  // or a pair of roots closer together than the grid spacing.
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double rm = rs[i - 1], r0 = rs[i], rp = rs[i + 1];
    if (!std::isfinite(rm) || !std::isfinite(r0) || !std::isfinite(rp)) continue;
    // An exact zero on the grid takes the sign of its neighbours.
    const double ref = r0 != 0.0 ? r0 : rm;
    if (ref == 0.0 || rp == 0.0) continue;
    const bool same_sign = (rm < 0.0) == (ref < 0.0) && (rp < 0.0) == (ref < 0.0);
    if (!same_sign || !(std::abs(r0) < std::abs(rm)) || !(std::abs(r0) <= std::abs(rp)))
      continue;
    const double sign = ref < 0.0 ? -1.0 : 1.0;
    auto signed_r = [&](double x) {
      const double v = safe_eval(residual, x);
      return std::isfinite(v) ? sign * v : std::numeric_limits<double>::max();
    };
    const auto [xstar, vstar] = boost::math::tools::brent_find_minima(
        signed_r, xs[i - 1], xs[i + 1], std::numeric_limits<double>::digits / 2);
    if (vstar < 0.0) {
      const double rstar = sign * vstar;
      accept(bisect(residual, xs[i - 1], xstar, rm, tol), false);
      accept(bisect(residual, xstar, xs[i + 1], rstar, tol), false);
    } else if (vstar <= residual_tol) {
      found.push_back({xstar, sign * vstar, true});
    }
  }

  std::sort(found.begin(), found.end(),
            [](const Candidate& l, const Candidate& r) { return l.x < r.x; });
  for (const auto& c : found) {
    if (!report.roots.empty() &&
        std::abs(c.x - report.roots.back()) <= 1e-9 * c.x) {
      if (std::abs(c.residual) < std::abs(report.residuals.back())) {
        report.roots.back() = c.x;
        report.residuals.back() = c.residual;
      }
      report.tangent.back() = report.tangent.back() || c.tangent;
      continue;
    }
    report.roots.push_back(c.x);
    report.residuals.push_back(c.residual);
    report.tangent.push_back(c.tangent);
  }
  report.window_exhausted = std::isfinite(rs.back()) && rs.back() < 0.0;
  return report;
}

RootReport scan_roots(const ResidualFn& residual, const ScanWindow& window,
                      const ScanOptions& options) {
  auto report = enumerate_roots(residual, window, options.grid_n, options.tol, options.residual_tol);
  if (options.window_max) return report;
  for (int e = 0; e < options.max_extensions && report.window_exhausted; ++e) {
    const ScanWindow ext{report.window.x_max, 4.0 * report.window.x_max, std::nullopt};
    const auto more =
        enumerate_roots(residual, ext, options.grid_n, options.tol, options.residual_tol);
    for (std::size_t i = 0; i < more.roots.size(); ++i) {
      if (!report.roots.empty() &&
          std::abs(more.roots[i] - report.roots.back()) <= 1e-9 * more.roots[i])
        continue;
      report.roots.push_back(more.roots[i]);
      report.residuals.push_back(more.residuals[i]);
      report.tangent.push_back(more.tangent[i]);
    }
    report.rejected += more.rejected;
    report.grid_points += more.grid_points;
    report.window.x_max = ext.x_max;
    report.window_exhausted = more.window_exhausted;
  }
  return report;
}

Interaction parity_reflect(const Interaction& interaction) {
  if (const auto* s = interaction.smooth_part()) {
    auto v = s->v;
    return Interaction::smooth(
        -s->b, -s->a, [v](double x, double m) { return v(-x, m); }, s->linear,
        s->coupling_scale);
  }
  std::vector<DeltaSite> mirrored;
  for (const auto& site : interaction.sites()) mirrored.push_back({-site.c, site.f});
  return Interaction::delta_chain(std::move(mirrored));
}

}  // namespace nlscatter

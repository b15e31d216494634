#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlscatter/phenomena.hpp"

using namespace nlscatter;

namespace {

Interaction single(NonlinearityFn f, double c = 0.0) { return Interaction::single_delta(c, std::move(f)); }

Interaction fig3(double nu) {
  return Interaction::double_delta({-0.5, NonlinearityFn::power_law({1, -1}, nu)},
                                   {0.5, NonlinearityFn::power_law({1, 1}, nu)});
}

const NonlinearityFn& invisible_f() {
  static const auto f = NonlinearityFn::polynomial({{-1, 0}, {1, 0}}, {0.0, 2.0});
  return f;
}

}  // namespace

TEST_CASE("constant gain 2i has a spectral singularity at K = 1") {
  for (auto side : {Side::left, Side::right}) {
    const auto reps =
        detect_spectral_singularity(single(NonlinearityFn::constant({0, 2})), side, {0.1, 5}, {0.5, 3});
    REQUIRE_FALSE(reps.empty());
    for (const auto& r : reps) {
      CHECK(r.k_star == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.defect < 1e-10);
      CHECK(r.I_minus == doctest::Approx(r.n_star * r.n_star).epsilon(1e-12));
      CHECK(r.I_plus == doctest::Approx(r.n_star * r.n_star).epsilon(1e-12));
      CHECK(r.side == side);
    }
  }
}

TEST_CASE("kerr gain singularities lie on n^2 = 2K") {
  const auto inter = single(NonlinearityFn::kerr(kI), 0.3);
  DetectorOptions o;
  o.n_grid = 20;
  const auto reps = detect_spectral_singularity(inter, Side::left, {0.05, 20}, {0.5, 5}, o);
  REQUIRE(reps.size() == 20);
  for (const auto& r : reps) {
    CHECK(r.n_star * r.n_star == doctest::Approx(2.0 * r.k_star).epsilon(1e-12));
    const auto j = jost_solve(inter, WaveNumber(r.k_star), Side::left, r.n_star);
    const auto amp = amplitudes_from_jost(j, WaveNumber(r.k_star), 0.3, 0.3);
    CHECK(amp.singular);
    CHECK(r.I_minus == doctest::Approx(r.I_plus).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < reps.size(); ++i) CHECK(reps[i - 1].k_star <= reps[i].k_star);
}

TEST_CASE("real couplings have no spectral singularity") {
  for (const auto& f : {NonlinearityFn::constant(2.0), NonlinearityFn::kerr(-1.5),
                        NonlinearityFn::power_law(3.0, -0.5)}) {
    CHECK(detect_spectral_singularity(single(f), Side::left, {0.05, 10}, {1e-3, 10}).empty());
    CHECK(detect_time_reversed_ss(single(f), Side::right, {0.05, 10}, {1e-3, 10}).empty());
  }
}

TEST_CASE("time-reversed singularities") {
  const auto reps =
      detect_time_reversed_ss(single(NonlinearityFn::constant({0, -2})), Side::left, {0.1, 5}, {1, 2});
  REQUIRE_FALSE(reps.empty());
  CHECK(reps.front().k_star == doctest::Approx(1.0));

  const auto plus = detect_spectral_singularity(single(NonlinearityFn::kerr(kI)), Side::right,
                                                {0.1, 10}, {0.5, 3});
  const auto minus = detect_time_reversed_ss(single(NonlinearityFn::kerr(-kI)), Side::right,
                                             {0.1, 10}, {0.5, 3});
  REQUIRE(plus.size() == minus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    CHECK(plus[i].k_star == doctest::Approx(minus[i].k_star).epsilon(1e-14));
    CHECK(plus[i].n_star == doctest::Approx(minus[i].n_star).epsilon(1e-14));
  }
}

TEST_CASE("two-site singularities found by scanning") {
  // Linear pair z = i pi: M22 = 1 + 2g + (1 - w) g^2 with g = -pi/2K vanishes at K = pi.
  const auto inter = Interaction::double_delta({-0.5, NonlinearityFn::constant({0, std::numbers::pi})},
                                               {0.5, NonlinearityFn::constant({0, std::numbers::pi})});
  DetectorOptions o;
  o.k_grid = 200;
  o.n_grid = 4;
  const auto reps = detect_spectral_singularity(inter, Side::left, {0.05, 5}, {0.5, 2}, o);
  REQUIRE_FALSE(reps.empty());
  for (const auto& r : reps) {
    CHECK(r.k_star == doctest::Approx(std::numbers::pi).epsilon(1e-10));
    CHECK(r.defect < 1e-10);
    const auto m = transfer_map(inter, WaveNumber(r.k_star));
    CHECK(std::abs(side_matrix(m, Side::left, r.n_star)(1, 1)) < 1e-9);
  }
  const auto kerr = Interaction::double_delta({-0.5, NonlinearityFn::kerr(kI)},
                                              {0.5, NonlinearityFn::kerr(kI)});
  const auto kreps = detect_spectral_singularity(kerr, Side::right, {0.2, 4}, {0.3, 3}, o);
  REQUIRE_FALSE(kreps.empty());
  for (const auto& r : kreps) {
    CHECK(r.n_star * r.n_star == doctest::Approx(r.k_star).epsilon(1e-8));
    const auto j = jost_solve(kerr, WaveNumber(r.k_star), Side::right, r.n_star);
    CHECK(amplitudes_from_jost(j, WaveNumber(r.k_star), -0.5, 0.5).singular);
  }
}

TEST_CASE("reflectionless points") {
  const auto rep = find_reflectionless(single(invisible_f()), Side::left, WaveNumber(1.0), {0.1, 3});
  CHECK_FALSE(rep.every_amplitude);
  REQUIRE(rep.hits.size() == 1);
  CHECK(rep.hits[0].absA == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rep.hits[0].branch.R) < 1e-12);
  const auto j = jost_solve(single(invisible_f()), WaveNumber(1.0), Side::left, rep.hits[0].branch.n);
  CHECK(std::abs(j.Gm) < 1e-10);

  CHECK(find_reflectionless(single(NonlinearityFn::constant({1, 1})), Side::right, WaveNumber(1.3),
                            {0.1, 3})
            .hits.empty());
  CHECK(find_reflectionless(Interaction::free(), Side::left, WaveNumber(2.0), {0.1, 3}).every_amplitude);
  CHECK_THROWS_AS(
      find_reflectionless(Interaction::free(), Side::left, WaveNumber(2.0), {3, 1}), ValidationError);
}

TEST_CASE("reflectionless hits satisfy the jost condition") {
  // f(x) = x - 2 vanishes at x = 2.
  const auto f = NonlinearityFn::polynomial({{-2, 0}, {1, 0}}, {0.0, 1.0});
  for (auto side : {Side::left, Side::right}) {
    const auto rep = find_reflectionless(single(f, 0.4), side, WaveNumber(0.8), {0.5, 4});
    REQUIRE_FALSE(rep.hits.empty());
    for (const auto& h : rep.hits) {
      const auto j = jost_solve(single(f, 0.4), WaveNumber(0.8), side, h.branch.n);
      const cplx c = side == Side::left ? j.Gm : j.Fp;
      CHECK(std::abs(c) / (1.6 * h.branch.n) < 1e-10);
      CHECK(h.absA >= 0.5);
      CHECK(h.absA <= 4.0);
    }
  }
}

TEST_CASE("transparency checks") {
  const auto free = check_transparency(Interaction::free(), WaveNumber(1.0), {Side::left, 1.0});
  REQUIRE(free.size() == 1);
  CHECK(free[0].transparency_defect < 1e-15);
  CHECK(free[0].invisible);

  for (auto side : {Side::left, Side::right}) {
    const auto inv = check_transparency(single(invisible_f()), WaveNumber(1.0), {side, 1.0});
    bool found = false;
    for (const auto& t : inv)
      if (t.invisible) {
        found = true;
        CHECK(t.transparency_defect < 1e-12);
        CHECK(t.reflection < 1e-12);
      }
    CHECK(found);
  }

  const auto one = check_transparency(single(NonlinearityFn::constant(1.0)), WaveNumber(0.5),
                                      {Side::left, 1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].transparency_defect == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_FALSE(one[0].invisible);
}

TEST_CASE("jost and transfer conditions agree") {
  const std::vector<Interaction> cases = {
      single(NonlinearityFn::constant({0, 2})), single(invisible_f(), 0.2), fig3(2.0), fig3(1.0),
      Interaction::double_delta({-0.5, NonlinearityFn::kerr({-0.5, -1})},
                                {0.5, NonlinearityFn::power_law({1, 2}, 1.0)})};
  const double tol = 1e-10;
  for (const auto& inter : cases)
    for (double kv : {0.5, 1.0, 2.0, 4.0})
      for (double n : {0.5, 1.0, 1.5})
        for (auto side : {Side::left, Side::right}) {
          const WaveNumber k(kv);
          const auto jc = jost_conditions(inter, k, side, n);
          const auto tc = transfer_conditions(transfer_map(inter, k), side, n);
          CHECK((jc.singularity < tol) == (tc.singularity < tol));
          CHECK((jc.reflectionless < tol) == (tc.reflectionless < tol));
          CHECK((jc.transparency < tol) == (tc.transparency < tol));
        }
  const auto jc = jost_conditions(single(NonlinearityFn::constant({0, 2})), WaveNumber(1.0), Side::left, 1.0);
  CHECK(jc.singularity < 1e-15);
  const auto ic = jost_conditions(single(invisible_f(), 0.2), WaveNumber(1.0), Side::right, 1.0);
  CHECK(ic.reflectionless < 1e-15);
  CHECK(ic.transparency < 1e-15);
}

TEST_CASE("match_transmission") {
  const auto [gap, mismatch] = match_transmission({1.0, 2.0}, {2.5, 0.9});
  CHECK(gap == doctest::Approx(0.5));
  CHECK_FALSE(mismatch);
  const auto [g2, m2] = match_transmission({1.0, 2.0, 3.0}, {2.9});
  CHECK(g2 == doctest::Approx(0.1));
  CHECK(m2);
  CHECK(match_transmission({}, {}).first == 0.0);
}

TEST_CASE("nonreciprocity scans") {
  std::vector<WaveNumber> ks;
  for (double k = 0.1; k <= 15.0; k += 0.1) ks.emplace_back(k);
  for (const auto& row : nonreciprocity_scan(single(NonlinearityFn::kerr({1, -2}), 0.7), ks, 1.0)) {
    CHECK(row.gap < 1e-12);
    CHECK_FALSE(row.structural_mismatch);
  }
  const auto lin = Interaction::double_delta({-0.5, NonlinearityFn::constant({1, -1})},
                                             {0.5, NonlinearityFn::constant({0.3, 2})});
  for (const auto& row : nonreciprocity_scan(lin, ks, 1.0)) CHECK(row.gap < 1e-12);

  double worst = 0.0;
  for (const auto& row : nonreciprocity_scan(fig3(2.0), ks, 1.0)) worst = std::max(worst, row.gap);
  CHECK(worst > 1e-3);
  double flat = 0.0;
  for (const auto& row : nonreciprocity_scan(fig3(0.0), ks, 1.0)) flat = std::max(flat, row.gap);
  CHECK(flat < 1e-12);
}

TEST_CASE("sides_of") {
  CHECK(sides_of(SideSelector::both) == std::vector<Side>{Side::left, Side::right});
  CHECK(sides_of(SideSelector::right) == std::vector<Side>{Side::right});
}

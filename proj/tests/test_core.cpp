#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlscatter/core.hpp"

using namespace nlscatter;

namespace {

RawInteraction two_sites(double c1, double c2) {
  RawInteraction raw;
  raw.sites.push_back({c1, {"power_law", {0, 1}, 2.0, {}, {}}});
  raw.sites.push_back({c2, {"constant", {1, 0}, 0.0, {}, {}}});
  return raw;
}

}  // namespace

TEST_CASE("eval_nonlinearity examples") {
  CHECK(eval_nonlinearity(NonlinearityFn::zero(), 3.7) == cplx(0, 0));
  CHECK(eval_nonlinearity(NonlinearityFn::power_law(2.0, 2.0), 1.0) == cplx(2, 0));
  const auto v = eval_nonlinearity(NonlinearityFn::power_law(kI, -0.5), 4.0);
  CHECK(v.real() == doctest::Approx(0.0));
  CHECK(v.imag() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_nonlinearity(NonlinearityFn::constant({1, -2}), 9.0) == cplx(1, -2));
  const auto p = NonlinearityFn::polynomial({{-1, 0}, {1, 0}}, {0.0, 2.0});
  CHECK(std::abs(p(1.0)) == 0.0);
  CHECK(p(2.0).real() == doctest::Approx(3.0));
}

TEST_CASE("negative power at zero modulus is a domain error") {
  const auto f = NonlinearityFn::power_law(kI, -0.5);
  CHECK_THROWS_AS(f(0.0), DomainError);
  CHECK(f.has_negative_power());
  CHECK_FALSE(NonlinearityFn::kerr(kI).has_negative_power());
  CHECK_THROWS_AS(NonlinearityFn::kerr(1.0)(-1.0), DomainError);
}

TEST_CASE("nonlinearity construction is validated") {
  CHECK_THROWS_AS(NonlinearityFn::power_law(1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(NonlinearityFn::power_law(0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(NonlinearityFn::polynomial({1.0, 1.0}, {2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(NonlinearityFn::polynomial({1.0}, {1.0, 2.0}), ValidationError);
  try {
    NonlinearityFn::power_law(1.0, -1.0);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("ν must exceed −1") != std::string::npos);
  }
}

TEST_CASE("linearity classification") {
  CHECK(NonlinearityFn::zero().is_linear());
  CHECK(NonlinearityFn::constant(2.0).is_linear());
  CHECK(NonlinearityFn::power_law(2.0, 0.0).is_linear());
  CHECK_FALSE(NonlinearityFn::kerr(2.0).is_linear());
  CHECK(NonlinearityFn::kerr({1, 2}).negated() == NonlinearityFn::kerr({-1, -2}));
}

TEST_CASE("power law with zero exponent equals constant") {
  const cplx z{0.3, -1.7};
  const auto pl = NonlinearityFn::power_law(z, 0.0);
  const auto c = NonlinearityFn::constant(z);
  for (double m = 0.01; m < 20; m *= 1.37) CHECK(pl(m) == c(m));
}

TEST_CASE("nonlinearities are continuous on their domain") {
  const std::vector<NonlinearityFn> fs = {
      NonlinearityFn::constant({1, 1}), NonlinearityFn::power_law(kI, -0.7),
      NonlinearityFn::power_law({1, -1}, 3.0),
      NonlinearityFn::polynomial({{1, 0}, {0, 2}, {-1, 0}}, {-0.5, 1.0, 2.5})};
  for (const auto& f : fs) {
    for (double m = 0.05; m < 5; m += 0.05) {
      const double h = 1e-7;
      const auto jump = std::abs(f(m + h) - f(m));
      const auto slope = std::abs(f(m + 1e-4) - f(m)) / 1e-4 + 1.0;
      CHECK(jump <= 10 * h * slope);
    }
  }
}

TEST_CASE("wave number and incidence invariants") {
  CHECK_THROWS_AS(WaveNumber(0.0), ValidationError);
  CHECK_THROWS_AS(WaveNumber(-1.0), ValidationError);
  CHECK_THROWS_AS(WaveNumber(std::nan("")), ValidationError);
  CHECK(WaveNumber(2.5).value() == 2.5);
  const Incidence inc(Side::right, {3, 4});
  CHECK(inc.magnitude() == 5.0);
  CHECK(parse_side("left") == Side::left);
  CHECK(parse_side("r") == Side::right);
  CHECK(to_string(Side::left) == "l");
  CHECK_THROWS_AS(parse_side("up"), ValidationError);
}

TEST_CASE("validation sorts sites") {
  const auto i = validate_interaction(two_sites(0.5, -0.5));
  REQUIRE(i.sites().size() == 2);
  CHECK(i.sites()[0].c == -0.5);
  CHECK(i.sites()[1].c == 0.5);
  CHECK(i.sites()[0].f == NonlinearityFn::constant(1.0));
  CHECK(i.sites()[1].f == NonlinearityFn::kerr(kI));
}

TEST_CASE("validation rejects bad input") {
  try {
    validate_interaction(two_sites(0.0, 0.0));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("duplicate site position") != std::string::npos);
    CHECK(e.field() == "sites");
  }
  CHECK_THROWS_AS(validate_interaction(two_sites(0.0, INFINITY)), ValidationError);

  auto raw = two_sites(-1, 1);
  raw.sites[0].f.nu = -1.0;
  try {
    validate_interaction(raw);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "sites[0].f.nu");
    CHECK(std::string(e.what()).find("ν must exceed −1") != std::string::npos);
  }

  raw = two_sites(-1, 1);
  raw.sites[1].f.kind = "phase_dependent";
  CHECK_THROWS_AS(validate_interaction(raw), ValidationError);

  RawInteraction smooth;
  smooth.kind = "smooth_modulus";
  smooth.a = 1.0;
  smooth.b = 1.0;
  smooth.v = [](double, double) { return cplx{}; };
  CHECK_THROWS_AS(validate_interaction(smooth), ValidationError);
  smooth.b = 2.0;
  smooth.v = nullptr;
  CHECK_THROWS_AS(validate_interaction(smooth), ValidationError);
}

TEST_CASE("validation is idempotent") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 50; ++t) {
    RawInteraction raw;
    for (int s = 0; s < 4; ++s)
      raw.sites.push_back({u(rng), {"power_law", {u(rng), u(rng)}, std::abs(u(rng)), {}, {}}});
    const auto once = validate_interaction(raw);
    const auto twice = validate_interaction(once.to_raw());
    CHECK(once.sites() == twice.sites());
  }
}

TEST_CASE("support interval") {
  const auto pair = validate_interaction(two_sites(0.5, -0.5));
  CHECK(support_interval(pair) == Support{-0.5, 0.5});
  const auto one = Interaction::single_delta(2.0, NonlinearityFn::constant(1.0));
  CHECK(support_interval(one) == Support{2.0, 2.0});
  const auto sm = Interaction::smooth(-1, 3, [](double, double) { return cplx{1, 0}; }, true);
  CHECK(support_interval(sm) == Support{-1.0, 3.0});
  CHECK(sm.is_linear());
  CHECK_FALSE(sm.is_delta_chain());
}

TEST_CASE("negated interaction flips every coupling") {
  const auto i = Interaction::double_delta({-0.5, NonlinearityFn::kerr({1, -1})},
                                           {0.5, NonlinearityFn::constant({0, 2})});
  const auto n = i.negated();
  CHECK(n.sites()[0].f == NonlinearityFn::kerr({-1, 1}));
  CHECK(n.sites()[1].f == NonlinearityFn::constant({0, -2}));
  CHECK(n.sites()[1].c == 0.5);
}

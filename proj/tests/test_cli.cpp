#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlscatter/sweep.hpp"
#include "oracle.hpp"

using namespace nlscatter;
using nlohmann::json;

namespace {

SweepConfig small(SweepConfig cfg, double kmin, double kmax, int count) {
  cfg.k_grid.min = kmin;
  cfg.k_grid.max = kmax;
  cfg.k_grid.count = count;
  return cfg;
}

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSingleConfig = R"({
  "name": "single",
  "interaction": {"type": "delta_chain",
                  "sites": [{"c": 0.0, "f": {"kind": "constant", "z": [1, 0]}}]},
  "side": "l",
  "amplitude": 1.0,
  "k_grid": {"min": 0.5, "max": 0.5, "count": 1}
})";

}  // namespace

TEST_CASE("built-in presets") {
  const auto names = preset_names();
  CHECK(names.size() == 13);
  const auto f2 = preset("fig2-nu2");
  REQUIRE(f2);
  const auto& s = f2->interaction.sites();
  REQUIRE(s.size() == 2);
  CHECK(s[0].c == -0.5);
  CHECK(s[1].c == 0.5);
  CHECK(s[0].f == NonlinearityFn::power_law(kI, 2.0));
  CHECK(s[1].f == NonlinearityFn::power_law(kI, 2.0));
  CHECK(f2->absA == 1.0);
  CHECK(f2->side == SideSelector::both);
  CHECK(f2->k_grid.min == 0.05);
  CHECK(f2->k_grid.max == 15.0);
  CHECK(f2->k_grid.count == 2000);

  const auto f3 = preset("fig3-nu1");
  REQUIRE(f3);
  CHECK(f3->interaction.sites()[0].f == NonlinearityFn::power_law({1, -1}, 1.0));
  CHECK(f3->interaction.sites()[1].f == NonlinearityFn::power_law({1, 1}, 1.0));

  const auto f4 = preset("fig4");
  REQUIRE(f4);
  const auto& p = f4->interaction.sites();
  const auto& z1 = std::get<NonlinearityFn::PowerLaw>(p[0].f.variant());
  const auto& z2 = std::get<NonlinearityFn::PowerLaw>(p[1].f.variant());
  CHECK(z2.z == -2.0 * z1.z);
  CHECK(z2.z == cplx(1, 2));
  CHECK(z1.nu == 2.0 * z2.nu);
  CHECK(z1.nu == 2.0);

  CHECK_FALSE(preset("fig9"));
  for (const auto& n : names) CHECK(preset(n)->name == n);
}

TEST_CASE("config parsing fills defaults and round-trips") {
  const auto cfg = parse_config_text(kSingleConfig);
  CHECK(cfg.name == "single");
  CHECK(cfg.side == SideSelector::left);
  CHECK(cfg.solver.grid_n == 2000);
  CHECK(cfg.solver.tol == 1e-10);
  CHECK_FALSE(cfg.verify);
  CHECK(cfg.interaction.sites()[0].f == NonlinearityFn::constant(1.0));
  const auto echoed = config_to_json(cfg);
  const auto again = parse_config(echoed);
  CHECK(config_to_json(again) == echoed);
  CHECK(again.interaction.sites() == cfg.interaction.sites());
}

TEST_CASE("config errors carry their location") {
  try {
    parse_config_text("{\n  \"name\": \"x\",\n  \"interaction\": {,}\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.where().rfind("line 3", 0) == 0);
  }

  auto doc = json::parse(kSingleConfig);
  doc["interaction"]["sites"][0]["f"] = {{"kind", "power_law"}, {"z", {1, 0}}, {"nu", -1.0}};
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.where() == "/interaction/sites/0/f/nu");
    CHECK(std::string(e.what()).find("ν must exceed −1") != std::string::npos);
  }

  doc = json::parse(kSingleConfig);
  doc["interaction"]["sites"].push_back({{"c", 0.0}, {"f", {{"kind", "zero"}}}});
  CHECK_THROWS_AS(parse_config(doc), ConfigError);

  doc = json::parse(kSingleConfig);
  doc["k_grid"]["min"] = 0.0;
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.where() == "/k_grid/min");
  }

  doc = json::parse(kSingleConfig);
  doc["k_grid"]["count"] = 0;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = json::parse(kSingleConfig);
  doc["side"] = "up";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = json::parse(kSingleConfig);
  doc["interaction"]["sites"][0]["f"]["z"] = "one";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = json::parse(kSingleConfig);
  doc["interaction"]["type"] = "lattice";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("smooth profiles from config") {
  auto doc = json::parse(kSingleConfig);
  doc["interaction"] = {{"type", "smooth"}, {"a", 0.0}, {"b", 1.0}, {"shape", "rect"},
                        {"f", {{"kind", "constant"}, {"z", {2.0, 0.0}}}}};
  const auto cfg = parse_config(doc);
  CHECK_FALSE(cfg.interaction.is_delta_chain());
  CHECK(support_interval(cfg.interaction) == Support{0.0, 1.0});
  CHECK(cfg.interaction.smooth_part()->v(0.5, 1.0) == cplx(2, 0));
  doc["interaction"]["shape"] = "triangle";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc["interaction"]["shape"] = "cos2";
  doc["interaction"]["f"] = {{"kind", "power_law"}, {"z", {1.0, 0.0}}, {"nu", -0.5}};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("k grids") {
  KGrid g{1.0, 3.0, 3, false};
  CHECK(g.values() == std::vector<double>{1.0, 2.0, 3.0});
  KGrid l{1.0, 100.0, 3, true};
  const auto v = l.values();
  CHECK(v[1] == doctest::Approx(10.0));
  CHECK(v.back() == 100.0);
  CHECK(KGrid{2.0, 5.0, 1, false}.values() == std::vector<double>{2.0});
}

TEST_CASE("sweep examples") {
  auto cfg = parse_config_text(kSingleConfig);
  const auto one = run_sweep(cfg);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].absT2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(one.rows[0].branch == 0);

  cfg.interaction = Interaction::free();
  cfg.side = SideSelector::both;
  cfg.k_grid = {0.1, 5.0, 20, false};
  const auto free = run_sweep(cfg);
  CHECK(free.rows.size() == 40);
  for (const auto& r : free.rows) {
    CHECK(std::abs(r.R) == 0.0);
    CHECK(std::abs(r.T - 1.0) < 1e-15);
  }
  for (std::size_t i = 1; i < free.rows.size(); ++i) {
    const auto& a = free.rows[i - 1];
    const auto& b = free.rows[i];
    CHECK((a.side < b.side || (a.side == b.side && a.k < b.k)));
  }
}

TEST_CASE("fig3 sweeps are nonreciprocal") {
  const auto res = run_sweep(small(*preset("fig3-nu2"), 0.1, 15, 60));
  double gap = 0.0;
  std::map<double, std::vector<double>> left, right;
  for (const auto& r : res.rows) (r.side == Side::left ? left : right)[r.k].push_back(r.absT2);
  for (const auto& [k, l] : left) gap = std::max(gap, match_transmission(l, right[k]).first);
  CHECK(gap > 1e-3);
}

TEST_CASE("absT2 and residual invariants") {
  const auto res = run_sweep(small(*preset("fig4"), 0.2, 10, 40));
  CHECK(res.failed_points == 0);
  for (const auto& r : res.rows) {
    if (r.branch < 0) continue;
    CHECK(r.absT2 == r.T.real() * r.T.real() + r.T.imag() * r.T.imag());
    CHECK(r.residual < 1e-10);
  }
}

TEST_CASE("verify mode agrees with the jost route") {
  for (const char* name : {"fig2-nu2", "fig2-nu-0.5", "fig3-nu3", "fig4"}) {
    auto cfg = small(*preset(name), 0.1, 12, 25);
    cfg.verify = true;
    const auto res = run_sweep(cfg);
    for (const auto& r : res.rows)
      for (const auto& f : r.flags) {
        CHECK(f != "verify_mismatch");
        CHECK(f != "verify_count_mismatch");
      }
  }
}

TEST_CASE("csv format") {
  CHECK(rows_to_csv({}) == std::string(kCsvHeader) + "\n");
  SweepRow row;
  row.k = 0.5;
  row.side = Side::right;
  row.branch = 2;
  row.n = 0.25;
  row.R = {0.5, -0.125};
  row.T = {1.0, 0.0};
  row.absT2 = 1.0;
  row.residual = 0.0;
  row.flags = {"tangent", "singular"};
  const auto csv = rows_to_csv({row});
  CHECK(csv == std::string(kCsvHeader) + "\n0.5,r,2,0.25,0.5,-0.125,1,0,1,0,tangent|singular\n");
  CHECK(parse_csv(csv) == std::vector<SweepRow>{row});
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("csv round trip is bit exact") {
  const auto rows = run_sweep(small(*preset("fig2-nu2"), 0.05, 15, 50)).rows;
  const auto back = parse_csv(rows_to_csv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].branch < 0) continue;
    CHECK(same_bits(back[i].k, rows[i].k));
    CHECK(same_bits(back[i].n, rows[i].n));
    CHECK(same_bits(back[i].R.real(), rows[i].R.real()));
    CHECK(same_bits(back[i].R.imag(), rows[i].R.imag()));
    CHECK(same_bits(back[i].T.real(), rows[i].T.real()));
    CHECK(same_bits(back[i].T.imag(), rows[i].T.imag()));
    CHECK(same_bits(back[i].absT2, rows[i].absT2));
    CHECK(same_bits(back[i].residual, rows[i].residual));
    CHECK(back[i] == rows[i]);
  }
}

TEST_CASE("sweeps are deterministic across worker counts") {
  auto cfg = small(*preset("fig3-nu1"), 0.1, 10, 30);
  cfg.workers = 1;
  const auto a = rows_to_csv(run_sweep(cfg).rows);
  cfg.workers = 3;
  const auto b = rows_to_csv(run_sweep(cfg).rows);
  CHECK(a == b);
  CHECK(a == rows_to_csv(run_sweep(cfg).rows));
}

TEST_CASE("branch continuation") {
  const auto ids = continue_branches({{1.0}, {1.1, 3.0}, {}, {3.1, 1.2}, {1.3}});
  CHECK(ids[0] == std::vector<int>{0});
  CHECK(ids[1] == std::vector<int>{0, 1});
  CHECK(ids[2].empty());
  CHECK(ids[3] == std::vector<int>{1, 0});
  CHECK(ids[4] == std::vector<int>{0});
  const auto fresh = continue_branches({{1.0}, {5.0, 1.0}});
  CHECK(fresh[1] == std::vector<int>{1, 0});
}

TEST_CASE("fig2-nu2 plot shows coexisting branches") {
  const auto cfg = small(*preset("fig2-nu2"), 4.5, 5.5, 11);
  const auto res = run_sweep(cfg);
  std::map<double, int> per_k;
  std::set<int> ids;
  for (const auto& r : res.rows)
    if (r.side == Side::left && r.branch >= 0) {
      ++per_k[r.k];
      ids.insert(r.branch);
    }
  // Independent count at K = 5: sign changes of |A(n)| - 1 from direct matching.
  const auto f = oracle::power(kI, 2.0);
  const std::vector<oracle::Site> sites{{-0.5, f}, {0.5, f}};
  const auto ref = oracle::dense_roots(
      [&](double n) { return oracle::incident(sites, 5.0, true, n) - 1.0; }, 1e-6, 10.0, 40000);
  CHECK(ref.size() == 3);
  CHECK(per_k[5.0] == static_cast<int>(ref.size()));
  CHECK(ids.size() >= 2);

  const auto svg = rows_to_svg(res.rows, cfg.name);
  CHECK(svg.rfind("<svg", 0) == 0);
  for (int id : ids) CHECK(svg.find("id=\"l-branch-" + std::to_string(id) + "\"") != std::string::npos);
  const auto gp = rows_to_gnuplot(res.rows, cfg.name);
  CHECK(gp.find("plot") != std::string::npos);
}

TEST_CASE("json output") {
  auto cfg = parse_config_text(kSingleConfig);
  SweepRow gap;
  gap.k = 1.0;
  gap.n = gap.absT2 = gap.residual = std::nan("");
  gap.R = gap.T = {std::nan(""), std::nan("")};
  gap.flags = {"no_branch"};
  const auto rows = run_sweep(cfg).rows;
  auto all = rows;
  all.push_back(gap);
  const auto j = rows_to_json(all, cfg);
  CHECK(j["schema"] == "nlscatter-sweep/1");
  CHECK(j["config"]["name"] == "single");
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["absT2"].get<double>() == doctest::Approx(0.5));
  CHECK(j["rows"][1]["n"].is_null());
  CHECK(j["rows"][1]["flags"][0] == "no_branch");
}

TEST_CASE("emit_outputs writes every artifact") {
  const auto dir = std::filesystem::temp_directory_path() / "nlscatter_test_outputs";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto cfg = parse_config_text(kSingleConfig);
  cfg.outputs.csv = (dir / "rows.csv").string();
  cfg.outputs.json = (dir / "rows.json").string();
  cfg.outputs.plot = (dir / "plot.svg").string();
  const auto rows = run_sweep(cfg).rows;
  emit_outputs(rows, cfg);
  CHECK(slurp(dir / "rows.csv") == rows_to_csv(rows));
  CHECK(json::parse(slurp(dir / "rows.json"))["rows"].size() == rows.size());
  CHECK(slurp(dir / "plot.svg").find("<svg") == 0);

  cfg.outputs.plot = (dir / "plot.gp").string();
  emit_outputs(rows, cfg);
  CHECK(slurp(dir / "plot.gp").find("plot") != std::string::npos);

  emit_outputs({}, cfg);
  CHECK(slurp(dir / "rows.csv") == std::string(kCsvHeader) + "\n");

  cfg.outputs.csv = (dir / "missing" / "rows.csv").string();
  CHECK_THROWS_AS(emit_outputs(rows, cfg), std::runtime_error);
  std::filesystem::remove_all(dir);
}

#include <map>

#include "nlscatter/sweep.hpp"

namespace nlscatter {

using nlohmann::json;

namespace {

json power_site(double c, cplx z, double nu) {
  return {{"c", c},
          {"f", {{"kind", "power_law"}, {"z", json::array({z.real(), z.imag()})}, {"nu", nu}}}};
}

json two_site_doc(const std::string& name, cplx z1, double nu1, cplx z2, double nu2) {
  return {{"name", name},
          {"interaction",
           {{"type", "delta_chain"},
            {"sites", json::array({power_site(-0.5, z1, nu1), power_site(0.5, z2, nu2)})}}},
          {"side", "both"},
          {"amplitude", 1.0},
          {"k_grid", {{"min", 0.05}, {"max", 15.0}, {"count", 2000}, {"spacing", "linear"}}}};
}

std::string nu_label(double nu) {
  std::string s = std::to_string(nu);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

const std::map<std::string, json>& table() {
  static const std::map<std::string, json> presets = [] {
    std::map<std::string, json> m;
    for (double nu : {-0.7, -0.5, 0.0, 1.0, 2.0, 3.0}) {
      const auto name = "fig2-nu" + nu_label(nu);
      m[name] = two_site_doc(name, {0.0, 1.0}, nu, {0.0, 1.0}, nu);
    }
    for (double nu : {-0.5, 0.0, 1.0, 2.0, 3.0, 4.0}) {
      const auto name = "fig3-nu" + nu_label(nu);
      m[name] = two_site_doc(name, {1.0, -1.0}, nu, {1.0, 1.0}, nu);
    }
    m["fig4"] = two_site_doc("fig4", {-0.5, -1.0}, 2.0, {1.0, 2.0}, 1.0);
    return m;
  }();
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, doc] : table()) out.push_back(name);
  return out;
}

std::optional<SweepConfig> preset(const std::string& name) {
  const auto& t = table();
  auto it = t.find(name);
  if (it == t.end()) return std::nullopt;
  return parse_config(it->second);
}

}  // namespace nlscatter

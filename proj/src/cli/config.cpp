#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nlscatter/sweep.hpp"

namespace nlscatter {

using nlohmann::json;

namespace {

// "sites[1].f.nu" -> "/sites/1/f/nu"
std::string field_to_pointer(const std::string& field) {
  std::string out = "/";
  for (char ch : field) {
    if (ch == '.' || ch == '[') {
      if (out.back() != '/') out += '/';
    } else if (ch != ']') {
      out += ch;
    }
  }
  if (out.size() > 1 && out.back() == '/') out.pop_back();
  return out;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + "/" + key, "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

cplx as_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where, "expected a complex number [re, im]");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, where + "/" + key);
}

RawNonlinearity parse_raw_f(const json& j, const std::string& where) {
  RawNonlinearity f;
  f.kind = as_string(require(j, "kind", where), where + "/kind");
  if (f.kind == "constant" || f.kind == "power_law" || f.kind == "kerr")
    f.z = as_complex(require(j, "z", where), where + "/z");
  if (f.kind == "power_law") f.nu = as_number(require(j, "nu", where), where + "/nu");
  if (f.kind == "polynomial") {
    const auto& cs = require(j, "coefficients", where);
    const auto& ps = require(j, "powers", where);
    if (!cs.is_array()) throw ConfigError(where + "/coefficients", "expected an array");
    if (!ps.is_array()) throw ConfigError(where + "/powers", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i)
      f.coefficients.push_back(as_complex(cs[i], where + "/coefficients/" + std::to_string(i)));
    for (std::size_t i = 0; i < ps.size(); ++i)
      f.powers.push_back(as_number(ps[i], where + "/powers/" + std::to_string(i)));
  }
  return f;
}

json nonlinearity_json(const NonlinearityFn& f) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, NonlinearityFn::Zero>) {
          return {{"kind", "zero"}};
        } else if constexpr (std::is_same_v<V, NonlinearityFn::Constant>) {
          return {{"kind", "constant"}, {"z", complex_json(v.z)}};
        } else if constexpr (std::is_same_v<V, NonlinearityFn::PowerLaw>) {
          return {{"kind", "power_law"}, {"z", complex_json(v.z)}, {"nu", v.nu}};
        } else {
          json cs = json::array();
          for (auto c : v.coefficients) cs.push_back(complex_json(c));
          return {{"kind", "polynomial"}, {"coefficients", cs}, {"powers", v.powers}};
        }
      },
      f.variant());
}

NonlinearityFn parse_f(const json& j, const std::string& where) {
  RawInteraction raw;
  raw.sites.push_back({0.0, parse_raw_f(j, where)});
  try {
    return validate_interaction(raw).sites().front().f;
  } catch (const ValidationError& e) {
    const std::string prefix = "sites[0].f";
    const auto& field = e.field();
    const auto tail = field.rfind(prefix, 0) == 0 ? field.substr(prefix.size()) : std::string{};
    throw ConfigError(where + (tail.empty() ? "" : field_to_pointer(tail)),
                      e.what() + field.size() + 2);
  }
}

ModulusPotential shaped(double a, double b, const std::string& shape, NonlinearityFn f) {
  if (shape == "rect")
    return [a, b, f](double x, double m) -> cplx { return x < a || x > b ? cplx{} : f(m); };
  const double mid = 0.5 * (a + b), width = b - a;
  return [a, b, f, mid, width](double x, double m) -> cplx {
    if (x < a || x > b) return {};
    const double c = std::cos(std::numbers::pi * (x - mid) / width);
    return c * c * f(m);
  };
}

struct ParsedInteraction {
  Interaction interaction;
  json normalized;
};

ParsedInteraction parse_interaction_impl(const json& j, const std::string& where) {
  const auto type = as_string(require(j, "type", where), where + "/type");
  if (type == "delta_chain") {
    const auto& sites = require(j, "sites", where);
    if (!sites.is_array()) throw ConfigError(where + "/sites", "expected an array");
    std::vector<DeltaSite> parsed;
    json norm_sites = json::array();
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const auto w = where + "/sites/" + std::to_string(i);
      const double c = as_number(require(sites[i], "c", w), w + "/c");
      auto f = parse_f(require(sites[i], "f", w), w + "/f");
      norm_sites.push_back({{"c", c}, {"f", nonlinearity_json(f)}});
      parsed.push_back({c, std::move(f)});
    }
    try {
      auto inter = Interaction::delta_chain(std::move(parsed));
      return {std::move(inter), {{"type", "delta_chain"}, {"sites", norm_sites}}};
    } catch (const ValidationError& e) {
      throw ConfigError(where + field_to_pointer(e.field()), e.what() + e.field().size() + 2);
    }
  }
  if (type == "smooth") {
    const double a = as_number(require(j, "a", where), where + "/a");
    const double b = as_number(require(j, "b", where), where + "/b");
    const auto shape = j.contains("shape") ? as_string(j["shape"], where + "/shape") : "rect";
    if (shape != "rect" && shape != "cos2")
      throw ConfigError(where + "/shape", "expected rect or cos2, got '" + shape + "'");
    auto f = parse_f(require(j, "f", where), where + "/f");
    if (f.has_negative_power())
      throw ConfigError(where + "/f", "negative powers are not supported on a smooth profile");
    json norm = {{"type", "smooth"}, {"a", a}, {"b", b}, {"shape", shape},
                 {"f", nonlinearity_json(f)}};
    try {
      auto inter = Interaction::smooth(a, b, shaped(a, b, shape, f), f.is_linear(),
                                       std::max(f.coupling_scale(), 1e-12));
      return {std::move(inter), std::move(norm)};
    } catch (const ValidationError& e) {
      throw ConfigError(where + field_to_pointer(e.field()), e.what() + e.field().size() + 2);
    }
  }
  throw ConfigError(where + "/type", "unknown interaction type '" + type +
                                         "' (expected delta_chain or smooth)");
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

SideSelector parse_selector(const std::string& s, const std::string& where) {
  if (s == "l" || s == "left") return SideSelector::left;
  if (s == "r" || s == "right") return SideSelector::right;
  if (s == "both") return SideSelector::both;
  throw ConfigError(where, "expected l, r or both, got '" + s + "'");
}

std::string selector_name(SideSelector s) {
  switch (s) {
    case SideSelector::left: return "l";
    case SideSelector::right: return "r";
    case SideSelector::both: return "both";
  }
  return "both";
}

}  // namespace

std::vector<double> KGrid::values() const {
  std::vector<double> out;
  if (count == 1) return {min};
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    out.push_back(log_spacing ? min * std::pow(max / min, t) : min + (max - min) * t);
  }
  out.back() = max;
  return out;
}

Interaction parse_interaction(const json& j, const std::string& where) {
  return parse_interaction_impl(j, where).interaction;
}

SweepConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("/", "config must be a JSON object");
  SweepConfig cfg;
  if (doc.contains("name")) cfg.name = as_string(doc["name"], "/name");
  auto parsed = parse_interaction_impl(require(doc, "interaction", ""), "/interaction");
  cfg.interaction = std::move(parsed.interaction);
  cfg.interaction_json = std::move(parsed.normalized);

  if (doc.contains("side")) cfg.side = parse_selector(as_string(doc["side"], "/side"), "/side");
  cfg.absA = number_or(doc, "amplitude", cfg.absA, "");
  if (!(cfg.absA >= 0.0) || !std::isfinite(cfg.absA))
    throw ConfigError("/amplitude", "incident amplitude must be finite and non-negative");

  if (doc.contains("k_grid")) {
    const auto& g = doc["k_grid"];
    if (!g.is_object()) throw ConfigError("/k_grid", "expected an object");
    cfg.k_grid.min = number_or(g, "min", cfg.k_grid.min, "/k_grid");
    cfg.k_grid.max = number_or(g, "max", cfg.k_grid.max, "/k_grid");
    if (g.contains("count")) cfg.k_grid.count = as_int(g["count"], "/k_grid/count");
    if (g.contains("spacing")) {
      const auto sp = as_string(g["spacing"], "/k_grid/spacing");
      if (sp != "linear" && sp != "log")
        throw ConfigError("/k_grid/spacing", "expected linear or log, got '" + sp + "'");
      cfg.k_grid.log_spacing = sp == "log";
    }
  }
  if (!(cfg.k_grid.min > 0.0)) throw ConfigError("/k_grid/min", "k min must be positive");
  if (!(cfg.k_grid.max >= cfg.k_grid.min))
    throw ConfigError("/k_grid/max", "k max must not be below k min");
  if (cfg.k_grid.count < 1) throw ConfigError("/k_grid/count", "count must be at least 1");

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    if (!s.is_object()) throw ConfigError("/solver", "expected an object");
    if (s.contains("window_max") && !s["window_max"].is_null())
      cfg.solver.window_max = as_number(s["window_max"], "/solver/window_max");
    if (s.contains("grid_n")) cfg.solver.grid_n = as_int(s["grid_n"], "/solver/grid_n");
    cfg.solver.tol = number_or(s, "tol", cfg.solver.tol, "/solver");
  }
  if (cfg.solver.window_max && !(*cfg.solver.window_max > 0.0))
    throw ConfigError("/solver/window_max", "window must be positive");
  if (cfg.solver.grid_n < 2) throw ConfigError("/solver/grid_n", "grid_n must be at least 2");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("/solver/tol", "tol must be positive");

  if (doc.contains("outputs")) {
    const auto& o = doc["outputs"];
    if (!o.is_object()) throw ConfigError("/outputs", "expected an object");
    for (auto [key, slot] : {std::pair{"csv", &cfg.outputs.csv}, std::pair{"json", &cfg.outputs.json},
                             std::pair{"plot", &cfg.outputs.plot}})
      if (o.contains(key) && !o[key].is_null())
        *slot = as_string(o[key], std::string("/outputs/") + key);
  }
  if (doc.contains("verify")) {
    if (!doc["verify"].is_boolean()) throw ConfigError("/verify", "expected a boolean");
    cfg.verify = doc["verify"].get<bool>();
  }
  if (doc.contains("workers")) cfg.workers = as_int(doc["workers"], "/workers");
  if (cfg.workers < 0) throw ConfigError("/workers", "workers must be non-negative");
  return cfg;
}

SweepConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_context(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  return parse_config(doc);
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.where(), e.what() + e.where().size() + 2);
  }
}

json config_to_json(const SweepConfig& cfg) {
  json out;
  if (!cfg.name.empty()) out["name"] = cfg.name;
  out["interaction"] = cfg.interaction_json;
  out["side"] = selector_name(cfg.side);
  out["amplitude"] = cfg.absA;
  out["k_grid"] = {{"min", cfg.k_grid.min},
                   {"max", cfg.k_grid.max},
                   {"count", cfg.k_grid.count},
                   {"spacing", cfg.k_grid.log_spacing ? "log" : "linear"}};
  out["solver"] = {{"window_max", cfg.solver.window_max ? json(*cfg.solver.window_max) : json()},
                   {"grid_n", cfg.solver.grid_n},
                   {"tol", cfg.solver.tol}};
  json outputs = json::object();
  if (cfg.outputs.csv) outputs["csv"] = *cfg.outputs.csv;
  if (cfg.outputs.json) outputs["json"] = *cfg.outputs.json;
  if (cfg.outputs.plot) outputs["plot"] = *cfg.outputs.plot;
  out["outputs"] = outputs;
  out["verify"] = cfg.verify;
  out["workers"] = cfg.workers;
  return out;
}

}  // namespace nlscatter

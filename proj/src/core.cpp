#include "nlscatter/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nlscatter {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string fmt_cplx(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
  return os.str();
}

void check_polynomial(const std::vector<cplx>& coefficients, const std::vector<double>& powers,
                      const std::string& field) {
  if (coefficients.size() != powers.size())
    throw ValidationError(field + ".powers", "coefficients and powers differ in length");
  if (coefficients.empty())
    throw ValidationError(field + ".coefficients", "polynomial needs at least one term");
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const auto idx = "[" + std::to_string(i) + "]";
    if (!finite(coefficients[i]))
      throw ValidationError(field + ".coefficients" + idx, "coefficient must be finite");
    if (!std::isfinite(powers[i]) || powers[i] <= -1.0)
      throw ValidationError(field + ".powers" + idx, "ν must exceed −1");
    if (i > 0 && !(powers[i] > powers[i - 1]))
      throw ValidationError(field + ".powers" + idx, "powers must be strictly increasing");
  }
}

NonlinearityFn build_nonlinearity(const RawNonlinearity& raw, const std::string& field) {
  const auto& kind = raw.kind;
  if (kind == "zero") return NonlinearityFn::zero();
  if (kind == "constant") {
    if (!finite(raw.z)) throw ValidationError(field + ".z", "coupling must be finite");
    return NonlinearityFn::constant(raw.z);
  }
  if (kind == "power_law" || kind == "kerr") {
    const double nu = kind == "kerr" ? 2.0 : raw.nu;
    if (!finite(raw.z)) throw ValidationError(field + ".z", "coupling must be finite");
    if (raw.z == cplx{}) throw ValidationError(field + ".z", "power-law coupling must be nonzero");
    if (!std::isfinite(nu) || nu <= -1.0)
      throw ValidationError(field + ".nu", "ν must exceed −1");
    return NonlinearityFn::power_law(raw.z, nu);
  }
  if (kind == "polynomial") {
    check_polynomial(raw.coefficients, raw.powers, field);
    return NonlinearityFn::polynomial(raw.coefficients, raw.powers);
  }
  throw ValidationError(field + ".kind",
                        "unsupported nonlinearity '" + kind +
                            "' (only modulus-dependent forms: zero, constant, power_law, "
                            "kerr, polynomial)");
}

RawNonlinearity to_raw(const NonlinearityFn& f) {
  RawNonlinearity raw;
  std::visit(overloaded{
                 [&](const NonlinearityFn::Zero&) { raw.kind = "zero"; },
                 [&](const NonlinearityFn::Constant& c) {
                   raw.kind = "constant";
                   raw.z = c.z;
                 },
                 [&](const NonlinearityFn::PowerLaw& p) {
                   raw.kind = "power_law";
                   raw.z = p.z;
                   raw.nu = p.nu;
                 },
                 [&](const NonlinearityFn::Polynomial& p) {
                   raw.kind = "polynomial";
                   raw.coefficients = p.coefficients;
                   raw.powers = p.powers;
                 },
             },
             f.variant());
  return raw;
}

}  // namespace

ValidationError::ValidationError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

WaveNumber::WaveNumber(double k) : k_(k) {
  if (!std::isfinite(k) || !(k > 0.0))
    throw ValidationError("k", "wavenumber must be real, finite and positive");
}

std::string_view to_string(Side side) noexcept { return side == Side::left ? "l" : "r"; }

Side parse_side(std::string_view text) {
  if (text == "l" || text == "left") return Side::left;
  if (text == "r" || text == "right") return Side::right;
  throw ValidationError("side", "expected l|r, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// NonlinearityFn

NonlinearityFn NonlinearityFn::constant(cplx z) { return NonlinearityFn(Constant{z}); }

NonlinearityFn NonlinearityFn::power_law(cplx z, double nu) {
  if (z == cplx{}) throw ValidationError("f.z", "power-law coupling must be nonzero");
  if (!std::isfinite(nu) || nu <= -1.0) throw ValidationError("f.nu", "ν must exceed −1");
  return NonlinearityFn(PowerLaw{z, nu});
}

NonlinearityFn NonlinearityFn::polynomial(std::vector<cplx> coefficients,
                                          std::vector<double> powers) {
  check_polynomial(coefficients, powers, "f");
  return NonlinearityFn(Polynomial{std::move(coefficients), std::move(powers)});
}

cplx NonlinearityFn::operator()(double m) const {
  if (!(m >= 0.0)) throw DomainError("nonlinearity evaluated at negative or NaN modulus");
  return std::visit(
      overloaded{
          [](const Zero&) { return cplx{}; },
          [](const Constant& c) { return c.z; },
          [m](const PowerLaw& p) {
            if (p.nu == 0.0) return p.z;
            if (m == 0.0) {
              if (p.nu < 0.0) throw DomainError("negative power evaluated at m = 0");
              return cplx{};
            }
            return p.z * std::pow(m, p.nu);
          },
          [m](const Polynomial& p) {
            cplx sum{};
            for (std::size_t i = 0; i < p.powers.size(); ++i) {
              const double nu = p.powers[i];
              if (nu == 0.0) {
                sum += p.coefficients[i];
              } else if (m == 0.0) {
                if (nu < 0.0) throw DomainError("negative power evaluated at m = 0");
              } else {
                sum += p.coefficients[i] * std::pow(m, nu);
              }
            }
            return sum;
          },
      },
      v_);
}

bool NonlinearityFn::is_linear() const noexcept {
  return std::visit(overloaded{
                        [](const Zero&) { return true; },
                        [](const Constant&) { return true; },
                        [](const PowerLaw& p) { return p.nu == 0.0; },
                        [](const Polynomial& p) {
                          return std::all_of(p.powers.begin(), p.powers.end(),
                                             [](double nu) { return nu == 0.0; });
                        },
                    },
                    v_);
}

bool NonlinearityFn::has_negative_power() const noexcept {
  return std::visit(overloaded{
                        [](const Zero&) { return false; },
                        [](const Constant&) { return false; },
                        [](const PowerLaw& p) { return p.nu < 0.0; },
                        [](const Polynomial& p) {
                          return !p.powers.empty() && p.powers.front() < 0.0;
                        },
                    },
                    v_);
}

double NonlinearityFn::coupling_scale() const noexcept {
  return std::visit(overloaded{
                        [](const Zero&) { return 0.0; },
                        [](const Constant& c) { return std::abs(c.z); },
                        [](const PowerLaw& p) { return std::abs(p.z); },
                        [](const Polynomial& p) {
                          double s = 0.0;
                          for (auto c : p.coefficients) s += std::abs(c);
                          return s;
                        },
                    },
                    v_);
}

NonlinearityFn NonlinearityFn::negated() const {
  return std::visit(overloaded{
                        [](const Zero& z) { return NonlinearityFn(z); },
                        [](const Constant& c) { return NonlinearityFn(Constant{-c.z}); },
                        [](const PowerLaw& p) { return NonlinearityFn(PowerLaw{-p.z, p.nu}); },
                        [](const Polynomial& p) {
                          Polynomial q = p;
                          for (auto& c : q.coefficients) c = -c;
                          return NonlinearityFn(std::move(q));
                        },
                    },
                    v_);
}

std::string NonlinearityFn::describe() const {
  return std::visit(overloaded{
                        [](const Zero&) { return std::string("0"); },
                        [](const Constant& c) { return fmt_cplx(c.z); },
                        [](const PowerLaw& p) {
                          std::ostringstream os;
                          os << fmt_cplx(p.z) << "*m^" << p.nu;
                          return os.str();
                        },
                        [](const Polynomial& p) {
                          std::ostringstream os;
                          for (std::size_t i = 0; i < p.powers.size(); ++i)
                            os << (i ? " + " : "") << fmt_cplx(p.coefficients[i]) << "*m^"
                               << p.powers[i];
                          return os.str();
                        },
                    },
                    v_);
}

cplx eval_nonlinearity(const NonlinearityFn& f, double m) { return f(m); }

// ---------------------------------------------------------------------------
// Interaction

Interaction validate_interaction(const RawInteraction& raw) {
  if (raw.kind == "delta_chain") {
    std::vector<DeltaSite> sites;
    sites.reserve(raw.sites.size());
    for (std::size_t i = 0; i < raw.sites.size(); ++i) {
      const auto field = "sites[" + std::to_string(i) + "]";
      if (!std::isfinite(raw.sites[i].c))
        throw ValidationError(field + ".c", "site position must be finite");
      sites.push_back({raw.sites[i].c, build_nonlinearity(raw.sites[i].f, field + ".f")});
    }
    std::stable_sort(sites.begin(), sites.end(),
                     [](const DeltaSite& l, const DeltaSite& r) { return l.c < r.c; });
    for (std::size_t i = 1; i < sites.size(); ++i)
      if (sites[i].c == sites[i - 1].c)
        throw ValidationError("sites", "duplicate site position " + std::to_string(sites[i].c));
    return Interaction(DeltaChain{std::move(sites)});
  }
  if (raw.kind == "smooth_modulus") {
    if (!std::isfinite(raw.a) || !std::isfinite(raw.b))
      throw ValidationError("a", "support endpoints must be finite");
    if (!(raw.a < raw.b)) throw ValidationError("b", "smooth support requires a < b");
    if (!raw.v) throw ValidationError("v", "smooth interaction needs a potential");
    if (!(raw.coupling_scale >= 0.0))
      throw ValidationError("coupling_scale", "must be non-negative");
    return Interaction(SmoothModulus{raw.a, raw.b, raw.v, raw.linear, raw.coupling_scale});
  }
  throw ValidationError("kind", "unknown interaction kind '" + raw.kind +
                                    "' (expected delta_chain or smooth_modulus)");
}

Interaction Interaction::free() { return Interaction(DeltaChain{}); }

Interaction Interaction::single_delta(double c, NonlinearityFn f) {
  return delta_chain({DeltaSite{c, std::move(f)}});
}

Interaction Interaction::double_delta(DeltaSite s1, DeltaSite s2) {
  return delta_chain({std::move(s1), std::move(s2)});
}

Interaction Interaction::delta_chain(std::vector<DeltaSite> sites) {
  RawInteraction raw;
  raw.kind = "delta_chain";
  for (const auto& s : sites) raw.sites.push_back({s.c, nlscatter::to_raw(s.f)});
  return validate_interaction(raw);
}

Interaction Interaction::smooth(double a, double b, ModulusPotential v, bool linear,
                                double coupling_scale) {
  RawInteraction raw;
  raw.kind = "smooth_modulus";
  raw.a = a;
  raw.b = b;
  raw.v = std::move(v);
  raw.linear = linear;
  raw.coupling_scale = coupling_scale;
  return validate_interaction(raw);
}

bool Interaction::is_delta_chain() const noexcept {
  return std::holds_alternative<DeltaChain>(v_);
}

const std::vector<DeltaSite>& Interaction::sites() const {
  static const std::vector<DeltaSite> none;
  if (const auto* chain = std::get_if<DeltaChain>(&v_)) return chain->sites;
  return none;
}

const SmoothModulus* Interaction::smooth_part() const noexcept {
  return std::get_if<SmoothModulus>(&v_);
}

bool Interaction::is_linear() const noexcept {
  if (const auto* s = smooth_part()) return s->linear;
  const auto& ss = sites();
  return std::all_of(ss.begin(), ss.end(), [](const DeltaSite& s) { return s.f.is_linear(); });
}

bool Interaction::has_negative_power() const noexcept {
  if (smooth_part()) return false;
  const auto& ss = sites();
  return std::any_of(ss.begin(), ss.end(),
                     [](const DeltaSite& s) { return s.f.has_negative_power(); });
}

double Interaction::coupling_scale() const noexcept {
  if (const auto* s = smooth_part()) return s->coupling_scale * (s->b - s->a);
  double total = 0.0;
  for (const auto& s : sites()) total += s.f.coupling_scale();
  return total;
}

Interaction Interaction::negated() const {
  if (const auto* s = smooth_part()) {
    auto v = s->v;
    return smooth(s->a, s->b, [v](double x, double m) { return -v(x, m); }, s->linear,
                  s->coupling_scale);
  }
  std::vector<DeltaSite> out;
  for (const auto& s : sites()) out.push_back({s.c, s.f.negated()});
  return Interaction(DeltaChain{std::move(out)});
}

RawInteraction Interaction::to_raw() const {
  RawInteraction raw;
  if (const auto* s = smooth_part()) {
    raw.kind = "smooth_modulus";
    raw.a = s->a;
    raw.b = s->b;
    raw.v = s->v;
    raw.linear = s->linear;
    raw.coupling_scale = s->coupling_scale;
    return raw;
  }
  raw.kind = "delta_chain";
  for (const auto& s : sites()) raw.sites.push_back({s.c, nlscatter::to_raw(s.f)});
  return raw;
}

Support support_interval(const Interaction& interaction) {
  if (const auto* s = interaction.smooth_part()) return {s->a, s->b};
  const auto& sites = interaction.sites();
  if (sites.empty()) return {0.0, 0.0};
  return {sites.front().c, sites.back().c};
}

Incidence::Incidence(Side s, cplx a) : side(s), amplitude(a) {
  if (!finite(a)) throw ValidationError("amplitude", "incident amplitude must be finite");
}

}  // namespace nlscatter

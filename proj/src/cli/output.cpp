#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlscatter/sweep.hpp"

namespace nlscatter {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) out += (out.empty() ? "" : "|") + f;
  return out;
}

struct Trace {
  Side side;
  int branch;
  std::vector<std::pair<std::size_t, const SweepRow*>> points;  // K index, row
};

std::vector<Trace> traces_of(const std::vector<SweepRow>& rows, std::vector<double>& ks) {
  std::set<double> kset;
  for (const auto& r : rows) kset.insert(r.k);
  ks.assign(kset.begin(), kset.end());
  std::map<std::pair<int, int>, Trace> by_id;
  for (const auto& r : rows) {
    if (r.branch < 0 || !std::isfinite(r.absT2)) continue;
    const auto key = std::pair{static_cast<int>(r.side), r.branch};
    auto& t = by_id.try_emplace(key, Trace{r.side, r.branch, {}}).first->second;
    const auto idx = static_cast<std::size_t>(std::lower_bound(ks.begin(), ks.end(), r.k) - ks.begin());
    t.points.emplace_back(idx, &r);
  }
  std::vector<Trace> out;
  for (auto& [key, t] : by_id) out.push_back(std::move(t));
  return out;
}

// Runs of consecutive K indices within a trace.
std::vector<std::vector<const SweepRow*>> segments(const Trace& t) {
  std::vector<std::vector<const SweepRow*>> out;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    if (i == 0 || t.points[i].first != t.points[i - 1].first + 1) out.emplace_back();
    out.back().push_back(t.points[i].second);
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string tick_label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::round(v * 1000) / 1000);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += format_double(r.k) + ',' + std::string(to_string(r.side)) + ',' +
           std::to_string(r.branch) + ',' + format_double(r.n) + ',' + format_double(r.R.real()) +
           ',' + format_double(r.R.imag()) + ',' + format_double(r.T.real()) + ',' +
           format_double(r.T.imag()) + ',' + format_double(r.absT2) + ',' +
           format_double(r.residual) + ',' + join_flags(r.flags) + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("csv: missing or unexpected header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 11 fields");
    SweepRow r;
    r.k = parse_double(f[0], lineno);
    r.side = parse_side(f[1]);
    r.branch = std::stoi(f[2]);
    r.n = parse_double(f[3], lineno);
    r.R = {parse_double(f[4], lineno), parse_double(f[5], lineno)};
    r.T = {parse_double(f[6], lineno), parse_double(f[7], lineno)};
    r.absT2 = parse_double(f[8], lineno);
    r.residual = parse_double(f[9], lineno);
    if (!f[10].empty()) r.flags = split(f[10], '|');
    rows.push_back(std::move(r));
  }
  return rows;
}

json rows_to_json(const std::vector<SweepRow>& rows, const SweepConfig& cfg) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"k", r.k},
                   {"side", std::string(to_string(r.side))},
                   {"branch", r.branch},
                   {"n", finite_or_null(r.n)},
                   {"R", json::array({finite_or_null(r.R.real()), finite_or_null(r.R.imag())})},
                   {"T", json::array({finite_or_null(r.T.real()), finite_or_null(r.T.imag())})},
                   {"absT2", finite_or_null(r.absT2)},
                   {"residual", finite_or_null(r.residual)},
                   {"flags", r.flags}});
  }
  return {{"schema", "nlscatter-sweep/1"}, {"config", config_to_json(cfg)}, {"rows", arr}};
}

std::string rows_to_svg(const std::vector<SweepRow>& rows, const std::string& title) {
  std::vector<double> ks;
  const auto traces = traces_of(rows, ks);
  const double W = 860, H = 520, left = 70, right = 190, top = 40, bottom = 55;
  const double pw = W - left - right, ph = H - top - bottom;
  double kmin = ks.empty() ? 0.0 : ks.front(), kmax = ks.empty() ? 1.0 : ks.back();
  if (kmax <= kmin) kmax = kmin + 1.0;
  double ymax = 0.0;
  for (const auto& t : traces)
    for (const auto& [i, r] : t.points) ymax = std::max(ymax, r->absT2);
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.05;
  auto px = [&](double k) { return left + pw * (k - kmin) / (kmax - kmin); };
  auto py = [&](double y) { return top + ph * (1.0 - y / ymax); };

  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double k = kmin + (kmax - kmin) * i / 5, y = ymax * i / 5;
    s << "<line x1=\"" << px(k) << "\" y1=\"" << top + ph << "\" x2=\"" << px(k) << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << px(k) << "\" y=\"" << top + ph + 19 << "\" text-anchor=\"middle\">"
      << tick_label(k) << "</text>\n";
    s << "<line x1=\"" << left - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << left << "\" y2=\""
      << py(y) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
      << tick_label(y) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">K</text>\n";
  s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">|T|²</text>\n";

  int legend_row = 0;
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& t = traces[ti];
    const char* color = kPalette[ti % std::size(kPalette)];
    const char* dash = t.side == Side::right ? " stroke-dasharray=\"6 3\"" : "";
    const std::string id = std::string(to_string(t.side)) + "-branch-" + std::to_string(t.branch);
    s << "<g id=\"" << id << "\" class=\"trace\">\n";
    for (const auto& seg : segments(t)) {
      if (seg.size() == 1) {
        s << "<circle cx=\"" << px(seg[0]->k) << "\" cy=\"" << py(seg[0]->absT2)
          << "\" r=\"1.6\" fill=\"" << color << "\"/>\n";
        continue;
      }
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\"" << dash
        << " points=\"";
      for (const auto* r : seg) s << px(r->k) << ',' << py(r->absT2) << ' ';
      s << "\"/>\n";
    }
    s << "</g>\n";
    if (legend_row < 24) {
      const double ly = top + 10 + 16 * legend_row++;
      s << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
      s << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << to_string(t.side)
        << ", branch " << t.branch << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string rows_to_gnuplot(const std::vector<SweepRow>& rows, const std::string& title) {
  std::vector<double> ks;
  const auto traces = traces_of(rows, ks);
  std::ostringstream s;
  s << "# gnuplot script: |T|^2 against K, one trace per side and branch\n";
  s << "set title \"" << title << "\"\nset xlabel \"K\"\nset ylabel \"|T|^2\"\nset key outside\n";
  for (const auto& t : traces) {
    s << "$" << to_string(t.side) << "_b" << t.branch << " << EOD\n";
    bool first = true;
    for (const auto& seg : segments(t)) {
      if (!first) s << "\n";
      first = false;
      for (const auto* r : seg) s << format_double(r->k) << ' ' << format_double(r->absT2) << '\n';
    }
    s << "EOD\n";
  }
  if (traces.empty()) {
    s << "set xrange [0:1]\nplot NaN notitle\n";
    return s.str();
  }
  s << "plot ";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    s << (i ? ", \\\n     " : "") << "$" << to_string(t.side) << "_b" << t.branch
      << " with lines dt " << (t.side == Side::left ? 1 : 2) << " title \"" << to_string(t.side)
      << ", branch " << t.branch << "\"";
  }
  s << "\n";
  return s.str();
}

void emit_outputs(const std::vector<SweepRow>& rows, const SweepConfig& cfg) {
  if (cfg.outputs.csv) write_file(*cfg.outputs.csv, rows_to_csv(rows));
  if (cfg.outputs.json) write_file(*cfg.outputs.json, rows_to_json(rows, cfg).dump(1) + "\n");
  if (cfg.outputs.plot) {
    const auto& p = *cfg.outputs.plot;
    const auto title = cfg.name.empty() ? std::string("|T|^2") : cfg.name;
    if (ends_with(p, ".gp") || ends_with(p, ".plt") || ends_with(p, ".gnuplot"))
      write_file(p, rows_to_gnuplot(rows, title));
    else
      write_file(p, rows_to_svg(rows, title));
  }
}

}  // namespace nlscatter

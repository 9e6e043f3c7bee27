#pragma once

// Writers for sweep tables: CSV (canonical), JSON and a standalone SVG plot.
//
// CSV columns: swept_var,value,S_db,E_N,nu_minus,lambda_min
// followed by mean_S_db,std_S_db for ensemble sweeps and by error when any
// row failed. Numbers use %.17g, so values parse back exactly.

#include "pulsecorr/harness/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pulsecorr::harness {

class OutputError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  std::string clean;
  for (char c : s) clean += (c == '\n' || c == '\r') ? ' ' : c;
  if (clean.find_first_of(",\"") == std::string::npos) return clean;
  std::string out = "\"";
  for (char c : clean) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string optional_number(const std::optional<double>& v) {
  return v ? format_double(*v) : format_double(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace detail

inline std::vector<std::string> csv_columns(const SweepTable& t) {
  std::vector<std::string> cols = {"swept_var", "value", "S_db", "E_N", "nu_minus", "lambda_min"};
  if (t.ensemble) {
    cols.emplace_back("mean_S_db");
    cols.emplace_back("std_S_db");
  }
  if (t.has_errors()) cols.emplace_back("error");
  return cols;
}

inline void write_csv(const SweepTable& t, std::ostream& out) {
  using detail::format_double;
  const auto cols = csv_columns(t);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  const bool errors = t.has_errors();
  for (const auto& r : t.rows) {
    out << detail::csv_field(t.variable) << ',' << format_double(r.value) << ',' << format_double(r.measures.s_db)
        << ',' << format_double(r.measures.e_n) << ',' << format_double(r.measures.nu_minus) << ','
        << format_double(r.measures.lambda_min);
    if (t.ensemble) out << ',' << detail::optional_number(r.mean_s_db) << ',' << detail::optional_number(r.std_s_db);
    if (errors) out << ',' << detail::csv_field(r.error);
    out << '\n';
  }
}

inline std::string to_csv(const SweepTable& t) {
  std::ostringstream ss;
  write_csv(t, ss);
  return ss.str();
}

inline nlohmann::ordered_json to_json(const SweepTable& t) {
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["name"] = t.name;
  j["swept_var"] = t.variable;
  j["scale"] = to_string(t.scale);
  j["targets"] = t.targets;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row;
    row["value"] = num(r.value);
    row["S_db"] = num(r.measures.s_db);
    row["E_N"] = num(r.measures.e_n);
    row["nu_minus"] = num(r.measures.nu_minus);
    row["lambda_min"] = num(r.measures.lambda_min);
    if (t.ensemble) {
      row["mean_S_db"] = r.mean_s_db ? num(*r.mean_s_db) : nullptr;
      row["std_S_db"] = r.std_s_db ? num(*r.std_s_db) : nullptr;
    }
    if (!r.ok()) row["error"] = r.error;
    j["rows"].push_back(std::move(row));
  }
  return j;
}

// ---------------------------------------------------------------- SVG

namespace detail {

inline double measure_value(const SweepRow& r, const std::string& name) {
  if (name == "S_db") return r.measures.s_db;
  if (name == "E_N") return r.measures.e_n;
  if (name == "nu_minus") return r.measures.nu_minus;
  return r.measures.lambda_min;
}

inline std::string fmt(double v, const char* spec = "%.4g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Roughly five round tick values covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

}  // namespace detail

/// Line plot of the table's target measures against the swept value.
inline std::string to_svg(const SweepTable& t) {
  using detail::fmt;
  constexpr double width = 720, height = 460, left = 70, right = 150, top = 30, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  const bool logx = t.scale == Scale::Log10;
  auto xt = [&](double v) { return logx ? std::log10(v) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : t.rows) {
    if (std::isfinite(xt(r.value))) {
      xmin = std::min(xmin, xt(r.value));
      xmax = std::max(xmax, xt(r.value));
    }
    for (const auto& name : t.targets) {
      const double y = detail::measure_value(r, name);
      if (std::isfinite(y)) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    if (r.mean_s_db && r.std_s_db && std::isfinite(*r.mean_s_db) && std::isfinite(*r.std_s_db)) {
      ymin = std::min(ymin, *r.mean_s_db - *r.std_s_db);
      ymax = std::max(ymax, *r.mean_s_db + *r.std_s_db);
    }
  }
  if (xmin > xmax) xmin = 0, xmax = 1;
  if (ymin > ymax) ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double v) { return left + (xt(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << t.name << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Axes.
  std::vector<double> xticks;
  if (logx) {
    for (double d = std::ceil(xmin - 1e-9); d <= xmax + 1e-9; d += 1.0) xticks.push_back(d);
  } else {
    xticks = detail::nice_ticks(xmin, xmax);
  }
  for (double tv : xticks) {
    const double x = left + (tv - xmin) / (xmax - xmin) * pw;
    s << "<line x1=\"" << fmt(x) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt(x) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt(x) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">"
      << (logx ? "1e" + fmt(tv, "%.0f") : fmt(tv)) << "</text>\n";
  }
  for (double tv : detail::nice_ticks(ymin, ymax)) {
    s << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt(py(tv)) << "\" x2=\"" << left << "\" y2=\"" << fmt(py(tv))
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(tv) + 4) << "\" text-anchor=\"end\">" << fmt(tv) << "</text>\n";
  }
  if (ymin < 0.0 && ymax > 0.0)
    s << "<line x1=\"" << left << "\" y1=\"" << fmt(py(0.0)) << "\" x2=\"" << left + pw << "\" y2=\"" << fmt(py(0.0))
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">" << t.variable
    << (logx ? " (log scale)" : "") << "</text>\n";

  // Curves; non-finite points break the line.
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t c = 0; c < t.targets.size(); ++c) {
    const char* color = colors[c % 4];
    std::vector<std::string> segments;
    std::string current;
    for (const auto& r : t.rows) {
      const double y = detail::measure_value(r, t.targets[c]);
      if (!std::isfinite(y) || !std::isfinite(xt(r.value))) {
        if (!current.empty()) segments.push_back(current);
        current.clear();
        continue;
      }
      current += fmt(px(r.value)) + "," + fmt(py(y)) + " ";
    }
    if (!current.empty()) segments.push_back(current);
    s << "<g class=\"curve\" data-measure=\"" << t.targets[c] << "\">\n";
    for (const auto& seg : segments)
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << seg << "\"/>\n";
    s << "</g>\n";
    const double ly = top + 15 + 18 * static_cast<double>(c);
    s << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    s << "<text x=\"" << left + pw + 45 << "\" y=\"" << ly + 4 << "\">" << t.targets[c] << "</text>\n";
  }

  // Ensemble spread of S_db.
  if (t.ensemble) {
    s << "<g class=\"error-bars\" stroke=\"black\">\n";
    for (const auto& r : t.rows) {
      if (!r.mean_s_db || !r.std_s_db || !std::isfinite(*r.mean_s_db) || !std::isfinite(*r.std_s_db)) continue;
      const double x = px(r.value);
      const double y0 = py(*r.mean_s_db - *r.std_s_db), y1 = py(*r.mean_s_db + *r.std_s_db);
      s << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(y1) << "\"/>\n";
      s << "<line x1=\"" << fmt(x - 3) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x + 3) << "\" y2=\"" << fmt(y0) << "\"/>\n";
      s << "<line x1=\"" << fmt(x - 3) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x + 3) << "\" y2=\"" << fmt(y1) << "\"/>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------- files

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw OutputError("write to '" + path.string() + "' failed");
}

/// Writes every table in the configured formats; returns the files written.
inline std::vector<std::filesystem::path> write_outputs(const std::vector<SweepTable>& tables, const OutputSpec& spec) {
  std::vector<std::filesystem::path> written;
  const std::filesystem::path dir(spec.dir);
  for (const auto& t : tables) {
    const std::string base = spec.stem + "_" + t.name;
    for (const auto& f : spec.formats) {
      const auto path = dir / (base + "." + f);
      write_text_file(path, f == "json" ? to_json(t).dump(2) + "\n" : to_csv(t));
      written.push_back(path);
    }
    if (spec.plot) {
      const auto path = dir / (base + ".svg");
      write_text_file(path, to_svg(t));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace pulsecorr::harness

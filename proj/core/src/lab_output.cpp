#include "fracvar/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

namespace fracvar::lab {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string tag(Provenance p) {
  switch (p) {
    case Provenance::Paper: return "[PAPER]";
    case Provenance::Trivial: return "[TRIVIAL]";
    case Provenance::Derived: return "[DERIVED]";
  }
  return "[DERIVED]";
}

void ConvergenceTable::add_row(ConvergenceRow row) {
  if (std::isnan(row.measured) || std::isnan(row.reference)) row.relative_error = std::numeric_limits<double>::quiet_NaN();
  else if (row.reference != 0.0) row.relative_error = std::abs(row.measured - row.reference) / std::abs(row.reference);
  else row.relative_error = std::abs(row.measured);
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "# experiment: " << t.experiment << '\n';
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
  for (const auto& r : t.references) os << "# reference " << r.name << " = " << num(r.value) << ' ' << tag(r.provenance) << ' ' << r.source << '\n';
  for (const auto& f : t.flags) os << "# flag: " << f << '\n';
  os << "# status: " << (t.passed ? "pass" : "fail") << '\n';
  os << "index,label";
  for (const auto& p : t.param_names) os << ',' << csv_field(p);
  os << ",measured,reference,relative_error\n";
  for (const auto& r : t.rows) {
    os << r.index << ',' << csv_field(r.label);
    for (std::size_t i = 0; i < t.param_names.size(); ++i) os << ',' << (i < r.params.size() ? num(r.params[i]) : std::string("nan"));
    os << ',' << num(r.measured) << ',' << num(r.reference) << ',' << num(r.relative_error) << '\n';
  }
}

void write_svg(std::ostream& os, const ConvergenceTable& t, const std::string& x_param) {
  const double W = 640, H = 420, left = 70, right = 150, top = 30, bottom = 50;
  const auto it = std::find(t.param_names.begin(), t.param_names.end(), x_param);
  const long xi = it == t.param_names.end() ? -1 : it - t.param_names.begin();
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& r : t.rows) {
    const double x = xi < 0 ? r.index : r.params[static_cast<std::size_t>(xi)];
    const double y = r.relative_error;
    if (!std::isfinite(x) || !std::isfinite(y) || y <= 0.0) continue;
    const double ly = std::log10(y);
    series[r.label].push_back({x, ly});
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, ly);
    ymax = std::max(ymax, ly);
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"18\">" << xml_escape(t.experiment) << "</text>\n";
  if (series.empty()) {
    os << "<text x=\"" << left << "\" y=\"" << H / 2 << "\">no finite positive errors to plot</text>\n</svg>\n";
    return;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double y = ymin; y <= ymax + 1e-9; y += 1.0)
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(y) << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\"/>"
       << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">1e" << num(y) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    os << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xml_escape(xi < 0 ? "index" : x_param) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2 << ")\" text-anchor=\"middle\">relative error</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int c = 0;
  for (const auto& [label, pts] : series) {
    const char* col = colors[c % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : pts) os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    const double ly = top + 16 + 18 * c;
    os << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 32 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << col
       << "\" stroke-width=\"2\"/><text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << xml_escape(label.empty() ? "series" : label) << "</text>\n";
    ++c;
  }
  os << "</svg>\n";
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ConvergenceTable VerificationReport::table() const {
  ConvergenceTable t;
  t.experiment = "verify";
  t.param_names = {"tolerance", "worst_seed", "passed"};
  int i = 0;
  for (const auto& c : checks) {
    ConvergenceRow r;
    r.index = i++;
    r.label = c.name;
    r.params = {c.tolerance, static_cast<double>(c.worst_seed), c.passed ? 1.0 : 0.0};
    r.measured = c.worst;
    r.reference = 0.0;
    t.add_row(r);
    if (!c.passed) t.flags.push_back(c.name + " failed (worst seed " + std::to_string(c.worst_seed) + "): " + c.detail);
  }
  t.passed = passed();
  return t;
}

}  // namespace fracvar::lab

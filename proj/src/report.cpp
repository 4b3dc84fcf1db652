#include "collage/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "collage/errors.hpp"

namespace collage {

namespace {

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = line.find(sep, start);
    out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

int family(const std::string& scheme) {
  if (scheme.starts_with("NO_REDUNDANCY")) return 0;
  if (scheme.starts_with("REPLICATION")) return 1;
  if (scheme.starts_with("COLLAGE")) return 2;
  return 3;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_report_csv(std::span<const SchemeReport> reports) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += r.scheme + "," + std::to_string(r.requests);
    for (double v : {r.mean, r.p50, r.p95, r.p99, r.p999, r.max, r.accuracy, r.frac_single,
                     r.frac_collage, r.frac_reissue, r.overhead})
      out += "," + fixed(v);
    out += '\n';
  }
  return out;
}

std::string format_report_table(std::span<const SchemeReport> reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %8s %9s %9s %9s %9s %9s %9s %8s %8s\n", "scheme", "N", "mean",
                "p50", "p95", "p99", "p99.9", "max", "acc", "overhead");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-16s %8zu %9.3f %9.3f %9.3f %9.3f %9.3f %9.3f %8.4f %8.4f\n",
                  r.scheme.c_str(), r.requests, r.mean, r.p50, r.p95, r.p99, r.p999, r.max, r.accuracy,
                  r.overhead);
    os << line;
  }
  return os.str();
}

std::vector<SchemeReport> parse_report_csv(std::string_view text) {
  std::vector<SchemeReport> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t at = pos;
    pos = end + 1;
    if (header) {
      if (line != kReportHeader) throw ParseError("report header does not match the expected schema", at);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw ParseError("report row must have 13 columns", at);
    SchemeReport r;
    r.scheme = std::string(f[0]);
    if (r.scheme.empty()) throw ParseError("report row has an empty scheme id", at);
    {
      const auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), r.requests);
      if (ec != std::errc{} || p != f[1].data() + f[1].size()) throw ParseError("bad N column", at);
    }
    std::array<double*, 11> dst{&r.mean, &r.p50, &r.p95, &r.p99, &r.p999, &r.max, &r.accuracy,
                                &r.frac_single, &r.frac_collage, &r.frac_reissue, &r.overhead};
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const std::string_view v = f[k + 2];
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), *dst[k]);
      if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(*dst[k]))
        throw ParseError("bad numeric value in column " + std::to_string(k + 3), at);
    }
    rows.push_back(std::move(r));
  }
  if (header) throw ParseError("report is empty", 0);
  return rows;
}

std::vector<SchemeReport> aggregate_reports(std::span<const SchemeReport> rows) {
  std::vector<SchemeReport> merged;
  std::vector<std::size_t> counts;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, fresh] = index.try_emplace(r.scheme, merged.size());
    if (fresh) {
      merged.push_back(r);
      counts.push_back(1);
      continue;
    }
    SchemeReport& m = merged[it->second];
    ++counts[it->second];
    m.requests += r.requests;
    m.mean += r.mean;
    m.p50 += r.p50;
    m.p95 += r.p95;
    m.p99 += r.p99;
    m.p999 += r.p999;
    m.max += r.max;
    m.accuracy += r.accuracy;
    m.frac_single += r.frac_single;
    m.frac_collage += r.frac_collage;
    m.frac_reissue += r.frac_reissue;
    m.overhead += r.overhead;
  }
  for (std::size_t k = 0; k < merged.size(); ++k) {
    const auto c = static_cast<double>(counts[k]);
    if (counts[k] == 1) continue;
    SchemeReport& m = merged[k];
    for (double* v : {&m.mean, &m.p50, &m.p95, &m.p99, &m.p999, &m.max, &m.accuracy, &m.frac_single,
                      &m.frac_collage, &m.frac_reissue, &m.overhead})
      *v /= c;
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const SchemeReport& a, const SchemeReport& b) { return family(a.scheme) < family(b.scheme); });
  return merged;
}

std::string render_report_svg(std::span<const SchemeReport> reports) {
  constexpr double kWidthPerGroup = 160.0;
  constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 70.0, kPlotH = 300.0;
  constexpr double kBarW = 28.0;
  constexpr std::array<const char*, 4> kLabels{"p50", "p95", "p99", "p99.9"};
  constexpr std::array<const char*, 4> kColors{"#9ecae1", "#6baed6", "#3182bd", "#08519c"};

  double top_value = 0.0;
  for (const auto& r : reports) top_value = std::max({top_value, r.p50, r.p95, r.p99, r.p999});
  if (!(top_value > 0.0)) top_value = 1.0;
  const double width = kLeft + kRight + kWidthPerGroup * static_cast<double>(std::max<std::size_t>(reports.size(), 1));
  const double height = kTop + kPlotH + kBottom;
  const double base_y = kTop + kPlotH;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
     << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "  <title>Latency percentiles by scheme</title>\n";
  os << "  <line x1=\"" << kLeft << "\" y1=\"" << base_y << "\" x2=\"" << fixed(width - kRight, 1)
     << "\" y2=\"" << base_y << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << base_y
     << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = top_value * tick / 4.0;
    const double y = base_y - kPlotH * tick / 4.0;
    os << "  <text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">" << fixed(v, 1)
       << "</text>\n";
  }
  os << "  <text class=\"axis-label\" x=\"16\" y=\"" << fixed(kTop + kPlotH / 2, 1)
     << "\" transform=\"rotate(-90 16 " << fixed(kTop + kPlotH / 2, 1)
     << ")\" text-anchor=\"middle\">latency (ms)</text>\n";
  os << "  <text class=\"axis-label\" x=\"" << fixed(kLeft + (width - kLeft - kRight) / 2, 1) << "\" y=\""
     << fixed(height - 12, 1) << "\" text-anchor=\"middle\">scheme</text>\n";

  for (std::size_t g = 0; g < reports.size(); ++g) {
    const SchemeReport& r = reports[g];
    const double gx = kLeft + kWidthPerGroup * static_cast<double>(g) + 18.0;
    os << "  <g class=\"scheme\" data-scheme=\"" << xml_escape(r.scheme) << "\">\n";
    const std::array<double, 4> vals{r.p50, r.p95, r.p99, r.p999};
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const double h = kPlotH * vals[k] / top_value;
      os << "    <rect x=\"" << fixed(gx + kBarW * static_cast<double>(k), 1) << "\" y=\""
         << fixed(base_y - h, 2) << "\" width=\"" << kBarW - 2 << "\" height=\"" << fixed(h, 2)
         << "\" fill=\"" << kColors[k] << "\"><title>" << kLabels[k] << " " << fixed(vals[k], 3)
         << " ms</title></rect>\n";
    }
    os << "    <text x=\"" << fixed(gx + 2 * kBarW, 1) << "\" y=\"" << fixed(base_y + 18, 1)
       << "\" text-anchor=\"middle\">" << xml_escape(r.scheme) << "</text>\n";
    os << "  </g>\n";
  }
  for (std::size_t k = 0; k < kLabels.size(); ++k) {
    const double lx = kLeft + 10 + 70.0 * static_cast<double>(k);
    os << "  <rect x=\"" << fixed(lx, 1) << "\" y=\"12\" width=\"10\" height=\"10\" fill=\"" << kColors[k]
       << "\"/><text x=\"" << fixed(lx + 14, 1) << "\" y=\"21\">" << kLabels[k] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace collage

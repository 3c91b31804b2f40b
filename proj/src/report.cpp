#include "boincx/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "boincx/io.hpp"

namespace boincx {

namespace {

template <class Key>
std::vector<std::string> distinct(const std::vector<ReportRow>& rows, Key key) {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), key(r)) == out.end()) out.push_back(key(r));
  return out;
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
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
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::vector<std::string> StudyReport::configs() const {
  return distinct(rows, [](const ReportRow& r) { return r.config; });
}

std::vector<std::string> StudyReport::scenarios() const {
  return distinct(rows, [](const ReportRow& r) { return r.scenario; });
}

std::vector<ReportRow> StudyReport::means() const {
  std::vector<ReportRow> out;
  for (const auto& cfg : configs()) {
    std::vector<OperatingCharacteristics> ocs;
    for (const auto& r : rows)
      if (r.config == cfg) ocs.push_back(r.oc);
    out.push_back({"Mean", cfg, mean_of(ocs)});
  }
  return out;
}

StudyReport report_from_matrix(const MatrixReport& matrix) {
  StudyReport report;
  for (const auto& r : matrix.rows) report.rows.push_back({r.scenario, r.config, r.oc});
  return report;
}

StudyReport report_from_json(const json& doc) {
  if (!doc.contains("records") || !doc.at("records").is_array())
    throw std::invalid_argument("results document has no 'records' array");
  StudyReport report;
  for (const auto& rec : doc.at("records"))
    report.rows.push_back({rec.at("scenario").get<std::string>(), rec.at("config").get<std::string>(),
                           oc_from_json(rec.at("oc"))});
  return report;
}

json results_to_json(const MatrixReport& matrix) {
  json records = json::array();
  for (const auto& r : matrix.rows)
    records.push_back({{"scenario", r.scenario},
                       {"config", r.config},
                       {"design", to_string(r.design)},
                       {"oc", to_json(r.oc)}});
  json means = json::array();
  for (const auto& r : matrix.means)
    means.push_back({{"config", r.config}, {"design", to_string(r.design)}, {"oc", to_json(r.oc)}});
  return {{"records", records}, {"means", means}};
}

RenderedTable render_table(const StudyReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("cannot render an empty report");
  const std::vector<std::string> header{"Scenario", "Config",     "PCS",      "PAS",
                                        "Over",     "PtsOverTox", "TotalDLT", "TotalN"};
  std::vector<std::vector<std::string>> body;
  const auto means = report.means();
  for (const auto& cfg : report.configs()) {
    auto emit = [&](const ReportRow& r) {
      body.push_back({r.scenario, r.config, fixed1(r.oc.pcs), fixed1(r.oc.pas), fixed1(r.oc.over_sel),
                      fixed1(r.oc.mean_pts_over_tox), fixed1(r.oc.mean_dlt), fixed1(r.oc.mean_n)});
    };
    for (const auto& r : report.rows)
      if (r.config == cfg) emit(r);
    for (const auto& m : means)
      if (m.config == cfg) emit(m);
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : body) width[c] = std::max(width[c], row[c].size());
  }
  auto text_line = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      line += c < 2 ? cells[c] + pad : pad + cells[c];
      if (c + 1 < cells.size()) line += "  ";
    }
    return line + "\n";
  };
  auto csv_line = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) line += (c ? "," : "") + csv_field(cells[c]);
    return line + "\n";
  };

  RenderedTable out;
  out.text = text_line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out.text += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  out.csv = csv_line(header);
  for (const auto& row : body) {
    out.text += text_line(row);
    out.csv += csv_line(row);
  }
  return out;
}

FigureMetric figure_metric_from_string(const std::string& name) {
  for (FigureMetric m : {FigureMetric::selection, FigureMetric::overdose, FigureMetric::sample_size,
                         FigureMetric::dlt})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown figure metric '" + name + "'");
}

std::string to_string(FigureMetric m) {
  switch (m) {
    case FigureMetric::selection: return "selection";
    case FigureMetric::overdose: return "overdose";
    case FigureMetric::sample_size: return "sample_size";
    case FigureMetric::dlt: return "dlt";
  }
  return "unknown";
}

std::string render_figure_svg(const StudyReport& report, FigureMetric metric) {
  if (report.rows.empty()) throw std::invalid_argument("cannot render an empty report");
  const auto configs = report.configs();
  auto clusters = report.scenarios();
  clusters.push_back("Mean");
  const auto means = report.means();

  auto lookup = [&](const std::string& scenario, const std::string& cfg) -> const OperatingCharacteristics* {
    const auto& pool = scenario == "Mean" ? means : report.rows;
    for (const auto& r : pool)
      if (r.scenario == scenario && r.config == cfg) return &r.oc;
    return nullptr;
  };
  auto primary = [&](const OperatingCharacteristics& oc) {
    switch (metric) {
      case FigureMetric::selection: return oc.pcs;
      case FigureMetric::overdose: return oc.over_sel;
      case FigureMetric::sample_size: return oc.mean_n;
      case FigureMetric::dlt: return oc.mean_dlt;
    }
    return 0.0;
  };
  const char* y_label = metric == FigureMetric::selection   ? "PCS (solid) / PAS (translucent), %"
                        : metric == FigureMetric::overdose  ? "Overly toxic selection, %"
                        : metric == FigureMetric::sample_size ? "Mean patients treated"
                                                              : "Mean DLTs";

  double y_max = 0.0;
  for (const auto& name : clusters)
    for (const auto& cfg : configs)
      if (const auto* oc = lookup(name, cfg))
        y_max = std::max({y_max, primary(*oc), metric == FigureMetric::selection ? oc->pas : 0.0});
  if (metric == FigureMetric::selection || metric == FigureMetric::overdose) y_max = 100.0;
  if (y_max <= 0.0) y_max = 1.0;

  const double bar_w = 12.0;
  const double gap = 14.0;
  const double cluster_w = bar_w * static_cast<double>(configs.size()) + gap;
  const double left = 60.0, top = 30.0, plot_h = 260.0, bottom = 70.0;
  const double plot_w = cluster_w * static_cast<double>(clusters.size());
  const double width = left + plot_w + 20.0;
  const double height = top + plot_h + bottom + 18.0 * static_cast<double>(configs.size());
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"18\">" << xml_escape(y_label) << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(v) << "\" y2=\""
        << y_of(v) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << v
        << "</text>\n";
  }
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const double x0 = left + cluster_w * static_cast<double>(k) + gap / 2.0;
    svg << "<g class=\"cluster\" data-scenario=\"" << xml_escape(clusters[k]) << "\">\n";
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto* oc = lookup(clusters[k], configs[c]);
      if (!oc) continue;
      const char* colour = kPalette[c % std::size(kPalette)];
      const double x = x0 + bar_w * static_cast<double>(c);
      if (metric == FigureMetric::selection)
        svg << "<rect x=\"" << x << "\" y=\"" << y_of(oc->pas) << "\" width=\"" << bar_w - 1
            << "\" height=\"" << top + plot_h - y_of(oc->pas) << "\" fill=\"" << colour
            << "\" fill-opacity=\"0.35\"/>\n";
      const double v = primary(*oc);
      svg << "<rect x=\"" << x << "\" y=\"" << y_of(v) << "\" width=\"" << bar_w - 1 << "\" height=\""
          << top + plot_h - y_of(v) << "\" fill=\"" << colour << "\"/>\n";
    }
    const double label_x = x0 + bar_w * static_cast<double>(configs.size()) / 2.0;
    std::string label = clusters[k];
    if (label.rfind("Scenario ", 0) == 0) label = label.substr(9);
    svg << "<text x=\"" << label_x << "\" y=\"" << top + plot_h + 14 << "\" text-anchor=\"middle\">"
        << xml_escape(label) << "</text>\n</g>\n";
  }
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const double y = top + plot_h + 40 + 18.0 * static_cast<double>(c);
    svg << "<rect x=\"" << left << "\" y=\"" << y - 10 << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[c % std::size(kPalette)] << "\"/>\n";
    svg << "<text x=\"" << left + 16 << "\" y=\"" << y << "\">" << xml_escape(configs[c]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_figure(const StudyReport& report, FigureMetric metric, const std::filesystem::path& out) {
  const std::string svg = render_figure_svg(report, metric);
  std::ofstream file(out);
  if (!file) throw std::runtime_error("cannot write " + out.string());
  file << svg;
}

}  // namespace boincx

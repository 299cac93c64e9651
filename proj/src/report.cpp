#include "specdesc/report.hpp"

#include "specdesc/io.hpp"

#include <cmath>
#include <cstdio>

namespace specdesc {

namespace {

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", i);
  return stem + "_" + buf + "." + ext;
}

std::string escape_xml(const std::string& s) {
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

std::string fmt(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// One framed panel with a polyline; x and y are mapped from [x0, x1] x [y0, y1].
struct Panel {
  Scalar left, top, width, height;
  Scalar x0, x1, y0, y1;
  std::string x_label, y_label, title;
};

std::string draw_panel(const Panel& p, const std::vector<std::pair<Scalar, Scalar>>& points, int clip_id) {
  auto px = [&](Scalar x) { return p.left + (x - p.x0) / (p.x1 - p.x0) * p.width; };
  auto py = [&](Scalar y) { return p.top + p.height - (y - p.y0) / (p.y1 - p.y0) * p.height; };
  std::string svg;
  const std::string id = "clip" + std::to_string(clip_id);
  svg += "<clipPath id=\"" + id + "\"><rect x=\"" + fmt(p.left) + "\" y=\"" + fmt(p.top) + "\" width=\"" +
         fmt(p.width) + "\" height=\"" + fmt(p.height) + "\"/></clipPath>\n";
  svg += "<rect x=\"" + fmt(p.left) + "\" y=\"" + fmt(p.top) + "\" width=\"" + fmt(p.width) + "\" height=\"" +
         fmt(p.height) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const Scalar fx = p.x0 + (p.x1 - p.x0) * k / 4, fy = p.y0 + (p.y1 - p.y0) * k / 4;
    svg += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(p.top + p.height + 14) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + io::format_double(std::round(fx * 1e4) / 1e4) + "</text>\n";
    svg += "<text x=\"" + fmt(p.left - 4) + "\" y=\"" + fmt(py(fy) + 3) +
           "\" font-size=\"10\" text-anchor=\"end\">" + io::format_double(std::round(fy * 1e4) / 1e4) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(p.left + p.width / 2) + "\" y=\"" + fmt(p.top + p.height + 30) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(p.x_label) + "</text>\n";
  svg += "<text x=\"" + fmt(p.left - 36) + "\" y=\"" + fmt(p.top + p.height / 2) +
         "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 " + fmt(p.left - 36) + " " +
         fmt(p.top + p.height / 2) + ")\">" + escape_xml(p.y_label) + "</text>\n";
  svg += "<text x=\"" + fmt(p.left + p.width / 2) + "\" y=\"" + fmt(p.top - 6) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape_xml(p.title) + "</text>\n";
  svg += "<polyline clip-path=\"url(#" + id + ")\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : points) svg += fmt(px(x)) + "," + fmt(py(y)) + " ";
  svg += "\"/>\n";
  return svg;
}

std::string svg_document(Scalar width, Scalar height, const std::string& body) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         body + "</svg>\n";
}

}  // namespace

std::array<float, 4> colormap(Scalar value) {
  static const float stops[5][3] = {{0.23f, 0.30f, 0.75f}, {0.55f, 0.69f, 1.0f}, {0.87f, 0.87f, 0.87f},
                                    {0.96f, 0.60f, 0.48f}, {0.71f, 0.02f, 0.15f}};
  const Scalar v = std::clamp(std::isfinite(value) ? value : 0.0, 0.0, 1.0) * 4;
  const int i = std::min(3, static_cast<int>(v));
  const auto t = static_cast<float>(v - i);
  std::array<float, 4> c{};
  for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)] = stops[i][k] + t * (stops[i + 1][k] - stops[i][k]);
  c[3] = 1.0f;
  return c;
}

std::string table_to_csv(const ReportTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

std::vector<std::string> emit_report(const Report& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create report directory " + out_dir.string() + ": " + ec.message());
  std::vector<std::string> files;
  std::string manifest;
  auto record = [&](const std::string& name, const std::string& kind, const std::string& label) {
    files.push_back(name);
    manifest += name + "\t" + kind + "\t" + label + "\n";
  };

  for (std::size_t i = 0; i < report.rocs.size(); ++i) {
    const auto& r = report.rocs[i];
    std::string csv = "fp,tp\n";
    std::vector<std::pair<Scalar, Scalar>> low_fp, low_fn;
    for (Index k = 0; k < r.curve.size(); ++k) {
      const Scalar fp = r.curve.fp[static_cast<std::size_t>(k)], tp = r.curve.tp[static_cast<std::size_t>(k)];
      csv += io::format_double(fp) + "," + io::format_double(tp) + "\n";
      low_fp.emplace_back(fp, tp);
      low_fn.emplace_back(1 - tp, 1 - fp);
    }
    const std::string csv_name = numbered("roc", i, "csv"), svg_name = numbered("roc", i, "svg");
    io::write_file_atomic(out_dir / csv_name, csv);
    std::string body;
    body += draw_panel({60, 30, 260, 220, 0, 0.1, 0, 1, "false positive rate", "true positive rate",
                        r.label + ": low FP"}, low_fp, 0);
    body += draw_panel({420, 30, 260, 220, 0, 0.1, 0, 1, "false negative rate", "true negative rate",
                        r.label + ": low FN"}, low_fn, 1);
    io::write_file_atomic(out_dir / svg_name, svg_document(720, 300, body));
    record(csv_name, "roc", r.label);
    record(svg_name, "roc-plot", r.label);
  }

  for (std::size_t i = 0; i < report.cmcs.size(); ++i) {
    const auto& c = report.cmcs[i];
    std::string csv = "rank,hit_rate\n";
    std::vector<std::pair<Scalar, Scalar>> points;
    for (Index k = 0; k < c.curve.hit_rate.size(); ++k) {
      csv += std::to_string(k + 1) + "," + io::format_double(c.curve.hit_rate[k]) + "\n";
      points.emplace_back(static_cast<Scalar>(k + 1), c.curve.hit_rate[k]);
    }
    const std::string csv_name = numbered("cmc", i, "csv"), svg_name = numbered("cmc", i, "svg");
    io::write_file_atomic(out_dir / csv_name, csv);
    const Scalar max_rank = std::max<Scalar>(2, static_cast<Scalar>(c.curve.hit_rate.size()));
    io::write_file_atomic(out_dir / svg_name,
                          svg_document(360, 300, draw_panel({60, 30, 260, 220, 1, max_rank, 0, 1, "rank",
                                                             "hit rate", c.label}, points, 0)));
    record(csv_name, "cmc", c.label);
    record(svg_name, "cmc-plot", c.label);
  }

  for (std::size_t i = 0; i < report.maps.size(); ++i) {
    const auto& m = report.maps[i];
    if (m.mesh == nullptr || m.values.size() != m.mesh->num_vertices()) {
      throw UsageError("distance map '" + m.label + "' does not match its mesh");
    }
    std::string csv = "vertex,value\n";
    std::vector<std::array<float, 4>> colors;
    for (Index v = 0; v < m.values.size(); ++v) {
      csv += std::to_string(v) + "," + io::format_double(m.values[v]) + "\n";
      colors.push_back(colormap(m.values[v]));
    }
    const std::string csv_name = numbered("map", i, "csv"), off_name = numbered("map", i, "off");
    io::write_file_atomic(out_dir / csv_name, csv);
    save_colored_off(*m.mesh, colors, out_dir / off_name);
    record(csv_name, "map", m.label);
    record(off_name, "map-mesh", m.label);
  }

  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    const std::string name = numbered("table", i, "csv");
    io::write_file_atomic(out_dir / name, table_to_csv(report.tables[i]));
    record(name, "table", report.tables[i].label);
  }

  io::write_file_atomic(out_dir / "manifest.txt", manifest);
  return files;
}

}  // namespace specdesc

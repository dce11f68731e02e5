#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/metrics.hpp"
#include "solarcast/text.hpp"

namespace solarcast {

/// Actual / Predicted / Error table with 3-decimal fixed columns. Each
/// numeric column is right-aligned to its widest value and columns are
/// separated by two spaces.
inline std::string render_error_table(const ErrorTable& table) {
  std::vector<std::string> ids, act, pred, err;
  for (const auto& r : table) {
    ids.push_back(std::to_string(r.id));
    act.push_back(text::format_fixed(r.actual, 3));
    pred.push_back(text::format_fixed(r.predicted, 3));
    err.push_back(text::format_fixed(r.error, 3));
  }
  auto width = [](const std::vector<std::string>& col) {
    std::size_t w = 0;
    for (const auto& s : col) w = std::max(w, s.size());
    return w;
  };
  auto pad = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };
  const auto wi = width(ids), wa = width(act), wp = width(pred), we = width(err);

  std::string out = "\tActual\tPredicted\tError\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += pad(ids[i], wi) + "  " + pad(act[i], wa) + "  " + pad(pred[i], wp) + "  " + pad(err[i], we) + "\n";
  }
  return out;
}

inline std::string render_error_csv(const ErrorTable& table) {
  std::string out = "id,actual,predicted,error\n";
  for (const auto& r : table) {
    out += std::to_string(r.id) + "," + text::format_double(r.actual) + "," + text::format_double(r.predicted) +
           "," + text::format_double(r.error) + "\n";
  }
  return out;
}

/// One metric per row.
inline std::string render_report_csv(const EvaluationReport& r, const std::string& model = {}) {
  std::ostringstream out;
  auto row = [&](const char* k, const std::string& v) { out << k << ',' << v << '\n'; };
  out << "metric,value\n";
  if (!model.empty()) row("model", model);
  row("n", std::to_string(r.n));
  row("mae", text::format_double(r.mae));
  row("rmse", text::format_double(r.rmse));
  row("pearson_r", text::format_double(r.pearson_r));
  row("r_squared", text::format_double(r.r_squared));
  row("auc", r.auc ? text::format_double(*r.auc) : "NA");
  row("precision", text::format_double(r.precision));
  row("recall", text::format_double(r.recall));
  row("f1", text::format_double(r.f1));
  row("threshold_kw", text::format_double(r.threshold_kw));
  return out.str();
}

inline std::string render_report_txt(const EvaluationReport& r, const std::string& model = {}) {
  std::ostringstream out;
  if (!model.empty()) out << "model      " << model << '\n';
  out << "n          " << r.n << '\n'
      << "MAE        " << text::format_fixed(r.mae, 3) << " kW\n"
      << "RMSE       " << text::format_fixed(r.rmse, 3) << " kW\n"
      << "Pearson r  " << text::format_fixed(r.pearson_r, 4) << '\n'
      << "R^2        " << text::format_fixed(r.r_squared, 4) << '\n'
      << "ROC-AUC    " << (r.auc ? text::format_fixed(*r.auc, 4) : std::string("NA")) << " (power > "
      << text::format_fixed(r.threshold_kw, 3) << " kW)\n"
      << "precision  " << text::format_fixed(r.precision, 4) << '\n'
      << "recall     " << text::format_fixed(r.recall, 4) << '\n'
      << "F1         " << text::format_fixed(r.f1, 4) << '\n';
  return out.str();
}

/// Predicted-vs-actual scatter with the y = x reference line. Points are drawn
/// in a flipped group sharing one scale for both axes, so a perfect
/// prediction has identical cx and cy attributes.
inline std::string render_scatter_svg(const ErrorTable& table) {
  constexpr double size = 400.0, margin = 40.0, plot = size - 2 * margin;
  double hi = 0.0;
  for (const auto& r : table) hi = std::max({hi, r.actual, r.predicted});
  const double k = hi > 0.0 ? plot / hi : 1.0;
  auto f = [](double v) { return text::format_fixed(v, 3); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << size / 2 << "\" y=\"" << size - 8 << "\" text-anchor=\"middle\" font-size=\"12\">actual (kW)</text>\n"
      << "<text x=\"12\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 12 "
      << size / 2 << ")\">predicted (kW)</text>\n"
      << "<g transform=\"translate(" << margin << ',' << size - margin << ") scale(1,-1)\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << plot << "\" height=\"" << plot
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<line class=\"reference\" x1=\"0\" y1=\"0\" x2=\"" << f(hi * k) << "\" y2=\"" << f(hi * k)
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& r : table) {
    out << "<circle cx=\"" << f(r.actual * k) << "\" cy=\"" << f(r.predicted * k)
        << "\" r=\"1.5\" fill=\"steelblue\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path, Errc missing = Errc::FileNotFound) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes error_table.txt, predictions.csv, report.csv and scatter.svg.
inline void emit_report(const EvaluationReport& report, const ErrorTable& table,
                        const std::filesystem::path& out_dir, const std::string& model = {}) {
  if (table.empty()) throw Error(Errc::EmptyInput, "refusing to write a report for an empty test set");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text_file(out_dir / "error_table.txt", render_error_table(table));
  write_text_file(out_dir / "predictions.csv", render_error_csv(table));
  write_text_file(out_dir / "report.csv", render_report_csv(report, model));
  write_text_file(out_dir / "scatter.svg", render_scatter_svg(table));
}

/// Reads back a predictions.csv written by emit_report.
inline ErrorTable parse_error_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != "id,actual,predicted,error") {
    throw Error(Errc::MalformedCsv, "predictions.csv header mismatch");
  }
  ErrorTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 4) throw Error(Errc::MalformedCsv, "predictions.csv row width");
    ErrorRow r;
    std::int64_t id = 0;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    auto a = text::parse_double(f[1]), p = text::parse_double(f[2]), e = text::parse_double(f[3]);
    if (ec != std::errc{} || !a || !p || !e) throw Error(Errc::MalformedCsv, "predictions.csv value");
    t.push_back({id, *a, *p, *e});
  }
  return t;
}

struct ParsedReport {
  EvaluationReport report;
  std::string model;
};

/// Reads back a report.csv written by emit_report.
inline ParsedReport parse_report_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != "metric,value") {
    throw Error(Errc::MalformedCsv, "report.csv header mismatch");
  }
  ParsedReport out;
  auto& r = out.report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 2) throw Error(Errc::MalformedCsv, "report.csv row width");
    const std::string key(f[0]);
    if (key == "model") {
      out.model = std::string(f[1]);
      continue;
    }
    if (key == "auc" && f[1] == "NA") continue;
    const auto v = text::parse_double(f[1]);
    if (!v) throw Error(Errc::MalformedCsv, "report.csv value for " + key);
    if (key == "n") r.n = static_cast<std::size_t>(*v);
    else if (key == "mae") r.mae = *v;
    else if (key == "rmse") r.rmse = *v;
    else if (key == "pearson_r") r.pearson_r = *v;
    else if (key == "r_squared") r.r_squared = *v;
    else if (key == "auc") r.auc = *v;
    else if (key == "precision") r.precision = *v;
    else if (key == "recall") r.recall = *v;
    else if (key == "f1") r.f1 = *v;
    else if (key == "threshold_kw") r.threshold_kw = *v;
    else throw Error(Errc::MalformedCsv, "unknown metric " + key);
  }
  return out;
}

}  // namespace solarcast
